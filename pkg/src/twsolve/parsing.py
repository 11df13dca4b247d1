"""Readers and writers for the instance formats.

Supported formats:
  DIMACS CNF      header ``p cnf <n> <m>``, clauses as signed ints ended by 0
  PACE graph .gr  header ``p tw <n> <m>``, one ``u v`` line per edge, 1-indexed
  ground ASP      ``h :- a, not b.``  /  ``h.``  /  ``:- a, not b.``
"""

from __future__ import annotations

import re

from .errors import ParseError, UnsupportedDisjunction
from .model import CnfFormula, PrimalGraph, Program, Rule


def _text(data):
    if isinstance(data, (bytes, bytearray)):
        return data.decode("utf-8")
    return data


# ---------------------------------------------------------------- DIMACS CNF

def parse_dimacs(data):
    """Parse DIMACS CNF text into a CnfFormula.

    Tautological clauses are dropped (counted in tautologies_dropped).
    Raises ParseError for a malformed header, a literal out of range, or a
    clause missing its terminating 0.
    """
    header = None
    formula = None
    current = []
    current_line = None
    for lineno, raw in enumerate(_text(data).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c") or line.startswith("%"):
            continue
        if line.startswith("p"):
            if header is not None:
                raise ParseError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[0] != "p" or parts[1] != "cnf":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                n, m = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            if n < 0 or m < 0:
                raise ParseError(f"malformed header {line!r}", lineno)
            header = (n, m)
            formula = CnfFormula(num_vars=n)
            continue
        if formula is None:
            raise ParseError("clause before 'p cnf' header", lineno)
        for tok in line.split():
            try:
                lit = int(tok)
            except ValueError:
                raise ParseError(f"bad token {tok!r}", lineno) from None
            if lit == 0:
                formula.add_clause(current)
                current = []
                current_line = None
            else:
                if abs(lit) > formula.num_vars:
                    raise ParseError(
                        f"literal {lit} out of range 1..{formula.num_vars}", lineno)
                current.append(lit)
                current_line = lineno
    if formula is None:
        raise ParseError("missing 'p cnf' header", None)
    if current:
        raise ParseError("clause missing terminating 0", current_line)
    return formula


def write_dimacs(formula):
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    for clause in formula.clauses:
        lines.append(" ".join(str(l) for l in clause) + " 0")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- PACE .gr

def parse_gr(data):
    """Parse a PACE 2017 graph file (``p tw <n> <m>``) into a PrimalGraph."""
    graph = None
    declared_edges = None
    edges_seen = 0
    for lineno, raw in enumerate(_text(data).splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            if graph is not None:
                raise ParseError("duplicate header", lineno)
            parts = line.split()
            if len(parts) != 4 or parts[1] != "tw":
                raise ParseError(f"malformed header {line!r}", lineno)
            try:
                n, declared_edges = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError(f"malformed header {line!r}", lineno) from None
            graph = PrimalGraph(n)
            continue
        if graph is None:
            raise ParseError("edge before 'p tw' header", lineno)
        parts = line.split()
        if len(parts) != 2:
            raise ParseError(f"bad edge line {line!r}", lineno)
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(f"bad edge line {line!r}", lineno) from None
        if not (1 <= u <= graph.n and 1 <= v <= graph.n):
            raise ParseError(f"edge ({u},{v}) out of range 1..{graph.n}", lineno)
        if u == v:
            raise ParseError(f"self-loop at vertex {u}", lineno)
        graph.add_edge(u, v)
        edges_seen += 1
    if graph is None:
        raise ParseError("missing 'p tw' header", None)
    return graph


def write_gr(graph):
    edges = graph.edges()
    lines = [f"p tw {graph.n} {len(edges)}"]
    for u, v in edges:
        lines.append(f"{u} {v}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- ground ASP

_ATOM_RE = re.compile(r"[a-z][A-Za-z0-9_]*$")


def parse_program(data):
    """Parse the minimal ground-ASP grammar into a Program.

    Statements: ``h :- lit, ..., lit.`` / fact ``h.`` / constraint ``:- body.``
    where lit is ``atom`` or ``not atom``. ``%`` starts a comment. Atom names
    are interned to dense ids in first-appearance order.
    """
    names = []
    ids = {}
    rules = []

    def intern(name, lineno):
        if not _ATOM_RE.match(name):
            raise ParseError(f"invalid atom name {name!r}", lineno)
        if name not in ids:
            names.append(name)
            ids[name] = len(names)
        return ids[name]

    for lineno, raw in enumerate(_text(data).splitlines(), start=1):
        line = raw.split("%", 1)[0].strip()
        if not line:
            continue
        if not line.endswith("."):
            raise ParseError("statement must end with '.'", lineno)
        stmt = line[:-1].strip()
        if not stmt:
            raise ParseError("empty statement", lineno)
        if ":-" in stmt:
            head_part, body_part = stmt.split(":-", 1)
        else:
            head_part, body_part = stmt, ""
        head_part = head_part.strip()
        body_part = body_part.strip()

        if "|" in head_part or ";" in head_part or "," in head_part:
            raise UnsupportedDisjunction(
                f"disjunctive head {head_part!r}", lineno)
        if "|" in body_part or ";" in body_part:
            raise ParseError(f"bad body {body_part!r}", lineno)

        head = intern(head_part, lineno) if head_part else None
        pos, neg = set(), set()
        if body_part:
            for lit in body_part.split(","):
                lit = lit.strip()
                if not lit:
                    raise ParseError("empty body literal", lineno)
                if lit.startswith("not") and (len(lit) == 3 or lit[3].isspace()):
                    neg.add(intern(lit[3:].strip(), lineno))
                else:
                    pos.add(intern(lit, lineno))
        rules.append(Rule(head, frozenset(pos), frozenset(neg)))

    return Program(atom_names=names, rules=rules)


def write_program(program):
    lines = []
    for rule in program.rules:
        body = sorted(program.name(a) for a in rule.pos)
        body += sorted("not " + program.name(a) for a in rule.neg)
        if rule.head is None:
            lines.append(":- " + ", ".join(body) + ".")
        elif body:
            lines.append(program.name(rule.head) + " :- " + ", ".join(body) + ".")
        else:
            lines.append(program.name(rule.head) + ".")
    return "\n".join(lines) + ("\n" if lines else "")
