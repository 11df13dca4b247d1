"""Shared test utilities: instance generators and independent reference oracles.

The oracles here deliberately avoid the production code paths they are used
to check (plain enumeration, elimination-order search, textbook DPLL).
"""

import random
from collections import defaultdict
from itertools import combinations, permutations

from twsolve.model import CnfFormula, PrimalGraph, Program


# ------------------------------------------------------------- generators

def random_cnf(rng, max_vars=12, max_clauses=40):
    n = rng.randint(1, max_vars)
    m = rng.randint(0, max_clauses)
    cnf = CnfFormula(num_vars=n)
    for _ in range(m):
        width = min(rng.choice([1, 2, 2, 3, 3, 3, 4]), n)
        vs = rng.sample(range(1, n + 1), width)
        cnf.add_clause([v if rng.random() < 0.5 else -v for v in vs])
    return cnf


def random_program(rng, max_atoms=10, max_rules=15):
    n = rng.randint(1, max_atoms)
    prog = Program(atom_names=[f"a{i}" for i in range(1, n + 1)])
    for _ in range(rng.randint(0, max_rules)):
        head = rng.randrange(1, n + 1) if rng.random() < 0.85 else None
        pos = rng.sample(range(1, n + 1), min(rng.randint(0, 2), n))
        neg = rng.sample(range(1, n + 1), min(rng.randint(0, 2), n))
        prog.add_rule(head, pos, neg)
    return prog


def random_graph(rng, n, p):
    g = PrimalGraph(n)
    for u in range(1, n + 1):
        for v in range(u + 1, n + 1):
            if rng.random() < p:
                g.add_edge(u, v)
    return g


def random_tree(rng, n):
    """Uniform-ish random tree: attach each vertex to a random earlier one."""
    g = PrimalGraph(n)
    for v in range(2, n + 1):
        g.add_edge(v, rng.randint(1, v - 1))
    return g


def path_graph(n):
    g = PrimalGraph(n)
    for v in range(1, n):
        g.add_edge(v, v + 1)
    return g


def cycle_graph(n):
    g = path_graph(n)
    g.add_edge(n, 1)
    return g


def complete_graph(n):
    g = PrimalGraph(n)
    g.add_clique(range(1, n + 1))
    return g


# ---------------------------------------------------------------- oracles

def exact_treewidth(graph):
    """Treewidth as the minimum elimination width over all orderings (n <= 8).

    Uses the standard characterization: tw(G) = min over orderings of the
    largest |{v} + later neighbors| - 1 in the fill-in process.
    """
    vs = graph.vertices
    assert len(vs) <= 8, "exhaustive treewidth oracle limited to 8 vertices"
    best = len(vs)
    for order in permutations(vs):
        adj = {v: set(graph.neighbors(v)) for v in vs}
        width = 0
        for v in order:
            width = max(width, len(adj[v]))
            ns = sorted(adj[v])
            for a, b in combinations(ns, 2):
                adj[a].add(b)
                adj[b].add(a)
            for a in ns:
                adj[a].discard(v)
            del adj[v]
            if width >= best:
                break
        best = min(best, width)
    return best


def count_by_model_check(cnf):
    """Slow literal-by-literal enumeration count (independent of numpy path)."""
    n = cnf.num_vars
    total = 0
    for m in range(1 << n):
        ok = True
        for clause in cnf.clauses:
            if not any((m >> (abs(l) - 1)) & 1 == (1 if l > 0 else 0)
                       for l in clause):
                ok = False
                break
        if ok:
            total += 1
    return total


def dpll_sat(cnf):
    """Textbook DPLL with unit propagation; returns satisfiability.

    Used as the SAT-side oracle for reduction outputs too large for the
    enumeration guard.
    """
    clauses = [tuple(c) for c in cnf.clauses]
    for c in clauses:
        if not c:
            return False
    occ = defaultdict(list)
    for i, c in enumerate(clauses):
        for l in c:
            occ[l].append(i)
    assign = {}

    def lit_value(l):
        v = assign.get(abs(l))
        if v is None:
            return None
        return v if l > 0 else not v

    def propagate(trail):
        """Fixpoint unit propagation; returns False on conflict."""
        queue = list(trail)
        while queue:
            lit = queue.pop()
            for ci in occ[-lit]:
                clause = clauses[ci]
                unassigned = None
                satisfied = False
                for l in clause:
                    val = lit_value(l)
                    if val is True:
                        satisfied = True
                        break
                    if val is None:
                        if unassigned is None:
                            unassigned = l
                        else:
                            unassigned = "many"
                            break
                if satisfied or unassigned == "many":
                    continue
                if unassigned is None:
                    return False
                assign[abs(unassigned)] = unassigned > 0
                trail.append(unassigned)
                queue.append(unassigned)
        return True

    def pick_branch():
        """First unassigned literal of a shortest unsatisfied clause.

        Returns None when every clause is satisfied (SAT regardless of the
        remaining free variables).
        """
        best_lit = None
        best_open = None
        for clause in clauses:
            satisfied = False
            open_lits = []
            for l in clause:
                val = lit_value(l)
                if val is True:
                    satisfied = True
                    break
                if val is None:
                    open_lits.append(l)
            if satisfied:
                continue
            if best_open is None or len(open_lits) < best_open:
                best_open, best_lit = len(open_lits), open_lits[0]
                if best_open <= 2:
                    break
        return best_lit

    # seed propagation with existing unit clauses
    trail = []
    for c in clauses:
        if len(c) == 1:
            l = c[0]
            val = lit_value(l)
            if val is False:
                return False
            if val is None:
                assign[abs(l)] = l > 0
                trail.append(l)
    if not propagate(trail):
        return False

    stack = []  # (literal decided, trail length before, phase tried)
    while True:
        lit = pick_branch()
        if lit is None:
            return True
        base = dict(assign)
        assign[abs(lit)] = lit > 0
        trail = [lit]
        if propagate(trail):
            stack.append((lit, base))
            continue
        # first phase failed; try the other one, then backtrack
        while True:
            assign.clear()
            assign.update(base)
            assign[abs(lit)] = not (lit > 0)
            trail = [-lit]
            if propagate(trail):
                stack.append((None, base))
                break
            if not stack:
                return False
            prev, prev_base = stack.pop()
            while prev is None:
                if not stack:
                    return False
                prev, prev_base = stack.pop()
            lit, base = prev, prev_base
