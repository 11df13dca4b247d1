"""Exception types shared across the toolkit."""


class TwsolveError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TwsolveError):
    """Malformed input text; carries the 1-based line number when known."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class UnsupportedDisjunction(ParseError):
    """A rule with more than one head atom (disjunctive heads are not supported)."""


class NotTight(TwsolveError):
    """Operation requires a tight program but the positive dependency graph is cyclic."""


class NotNormal(TwsolveError):
    """Operation requires a normal program."""


class DecompositionMismatch(TwsolveError):
    """The given tree decomposition is not valid for the instance's primal graph."""


class InvalidInputDecomposition(TwsolveError):
    """The given tree decomposition is structurally broken."""


class TooLargeForOracle(TwsolveError):
    """Instance exceeds the guard of a brute-force reference oracle."""


class SubSolverFailure(TwsolveError):
    """External sub-solver exited nonzero or printed unparsable output."""


class DepthExhaustedWithoutSubSolver(TwsolveError):
    """Nesting limit reached and the internal fallback cannot handle the residual."""
