"""Instance representations: CNF formulas, normal logic programs, primal graphs.

Variables are dense positive integers 1..n. A literal is a signed integer in
DIMACS style: +v for the positive literal of variable v, -v for its negation.
Atom names (for programs) live in a side table on the owning instance.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from graphlib import CycleError, TopologicalSorter


def normalize_clause(literals):
    """Sort and deduplicate a clause; return None if it is a tautology."""
    lits = sorted(set(int(l) for l in literals), key=lambda l: (abs(l), l < 0))
    seen = set()
    for l in lits:
        if -l in seen:
            return None
        seen.add(l)
    return tuple(lits)


@dataclass
class CnfFormula:
    """A CNF formula over variables 1..num_vars.

    Clauses are stored in input order; tautological clauses (both polarities
    of one variable) are dropped at insertion and counted.
    """

    num_vars: int
    clauses: list[tuple[int, ...]] = field(default_factory=list)
    tautologies_dropped: int = 0

    def add_clause(self, literals):
        clause = normalize_clause(literals)
        if clause is None:
            self.tautologies_dropped += 1
            return
        for l in clause:
            if not 1 <= abs(l) <= self.num_vars:
                raise ValueError(f"literal {l} out of range 1..{self.num_vars}")
        self.clauses.append(clause)

    @property
    def num_clauses(self):
        return len(self.clauses)

    def constrained_vars(self):
        """Variables occurring in at least one clause."""
        seen = set()
        for clause in self.clauses:
            for l in clause:
                seen.add(abs(l))
        return seen


@dataclass(frozen=True)
class Rule:
    """A rule ``head :- pos, not neg``; head None encodes an integrity constraint."""

    head: int | None
    pos: frozenset[int] = frozenset()
    neg: frozenset[int] = frozenset()

    def atoms(self):
        at = set(self.pos) | set(self.neg)
        if self.head is not None:
            at.add(self.head)
        return at

    @property
    def is_constraint(self):
        return self.head is None


@dataclass
class Program:
    """A normal logic program over a dense atom universe 1..num_atoms.

    atom_names[i-1] is the name of atom i; names are unique.
    """

    atom_names: list[str]
    rules: list[Rule] = field(default_factory=list)

    def __post_init__(self):
        if len(set(self.atom_names)) != len(self.atom_names):
            raise ValueError("atom names must be unique")
        n = self.num_atoms
        for rule in self.rules:
            for a in rule.atoms():
                if not 1 <= a <= n:
                    raise ValueError(f"rule references unknown atom {a}")

    @property
    def num_atoms(self):
        return len(self.atom_names)

    def add_rule(self, head, pos=(), neg=()):
        rule = Rule(head, frozenset(pos), frozenset(neg))
        for a in rule.atoms():
            if not 1 <= a <= self.num_atoms:
                raise ValueError(f"rule references unknown atom {a}")
        self.rules.append(rule)
        return rule

    def name(self, atom):
        return self.atom_names[atom - 1]


class PrimalGraph:
    """Undirected graph on variable ids; no self-loops, symmetric adjacency.

    The vertex set defaults to 1..num_vertices but may be an arbitrary subset
    of ids (used for induced subgraphs, which keep original numbering).
    """

    def __init__(self, num_vertices, vertices=None):
        self.n = num_vertices
        if vertices is None:
            self.vertices = list(range(1, num_vertices + 1))
        else:
            self.vertices = sorted(set(vertices))
        self._adj = {v: set() for v in self.vertices}

    def add_edge(self, u, v):
        if u == v:
            return
        if u not in self._adj or v not in self._adj:
            raise ValueError(f"edge ({u},{v}) outside vertex set")
        self._adj[u].add(v)
        self._adj[v].add(u)

    def add_clique(self, vertices):
        vs = sorted(set(vertices))
        for i, u in enumerate(vs):
            for v in vs[i + 1:]:
                self.add_edge(u, v)

    def has_edge(self, u, v):
        return v in self._adj.get(u, ())

    def neighbors(self, v):
        return self._adj[v]

    def degree(self, v):
        return len(self._adj[v])

    def edges(self):
        return sorted((u, v) for u in self.vertices for v in self._adj[u] if u < v)

    @property
    def num_edges(self):
        return sum(len(s) for s in self._adj.values()) // 2

    def __eq__(self, other):
        if not isinstance(other, PrimalGraph):
            return NotImplemented
        return self.vertices == other.vertices and self._adj == other._adj

    def __repr__(self):
        return f"PrimalGraph(|V|={len(self.vertices)}, |E|={self.num_edges})"

    def induced(self, vertices):
        """Induced subgraph on the given vertex ids (numbering preserved)."""
        keep = set(vertices)
        sub = PrimalGraph(self.n, vertices=keep)
        for u in sub.vertices:
            for v in self._adj[u]:
                if v in keep and u < v:
                    sub.add_edge(u, v)
        return sub

    def components(self):
        """Connected components as sorted vertex lists, ordered by smallest member."""
        seen = set()
        comps = []
        for start in self.vertices:
            if start in seen:
                continue
            comp = []
            stack = [start]
            seen.add(start)
            while stack:
                u = stack.pop()
                comp.append(u)
                for w in self._adj[u]:
                    if w not in seen:
                        seen.add(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps


def primal_graph(instance):
    """Primal graph: vertices are variables, edges join co-occurring variables.

    Two variables are adjacent iff they appear together in some clause
    (CnfFormula) or in some rule's head/positive body/negative body (Program).
    """
    if isinstance(instance, CnfFormula):
        g = PrimalGraph(instance.num_vars)
        for clause in instance.clauses:
            g.add_clique(abs(l) for l in clause)
        return g
    if isinstance(instance, Program):
        g = PrimalGraph(instance.num_atoms)
        for rule in instance.rules:
            g.add_clique(rule.atoms())
        return g
    raise TypeError(f"no primal graph for {type(instance).__name__}")


def positive_dependency_graph(program):
    """Arcs b -> h for every rule h :- ..., b, ... with b in the positive body."""
    arcs = {a: set() for a in range(1, program.num_atoms + 1)}
    for rule in program.rules:
        if rule.head is None:
            continue
        for b in rule.pos:
            arcs[b].add(rule.head)
    return arcs


def is_tight(program):
    """Check acyclicity of the positive dependency graph.

    Returns (tight, arcs) where arcs maps each atom to the heads it supports;
    a self-arc counts as a cycle.
    """
    arcs = positive_dependency_graph(program)
    ts = TopologicalSorter()
    for a in range(1, program.num_atoms + 1):
        ts.add(a)
    for b, heads in arcs.items():
        for h in heads:
            ts.add(h, b)
    try:
        ts.prepare()
    except CycleError:
        return False, arcs
    return True, arcs
