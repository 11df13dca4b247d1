"""Dynamic programming over a nice tree decomposition for SAT and exact #SAT.

Each clause is checked exactly once, at the shallowest node whose bag contains
all its variables (it exists because clause variables form a primal clique).
Counts are plain Python ints (arbitrary precision); no floating point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DecompositionMismatch, TooLargeForOracle
from .model import CnfFormula, primal_graph
from .treedecomp import NiceTreeDecomposition, validate

BRUTE_FORCE_MAX_VARS = 26


@dataclass
class DpStats:
    """Per-node table sizes observed during a DP run."""

    tables: dict = field(default_factory=dict)  # node -> (bag_size, rows)

    def record(self, node, bag_size, rows):
        self.tables[node] = (bag_size, rows)

    @property
    def max_rows(self):
        return max((r for _, r in self.tables.values()), default=0)


def shallowest_covering_nodes(ntd, groups):
    """For each variable group, the unique shallowest node whose bag covers it.

    Ties (which cannot occur for primal cliques) break toward the smaller node
    id. Raises DecompositionMismatch when a group is covered by no bag.
    Empty groups map to the root.
    """
    occurrence = {}
    for t, bag in ntd.bags.items():
        for v in bag:
            occurrence.setdefault(v, set()).add(t)
    result = []
    for group in groups:
        if not group:
            result.append(ntd.root)
            continue
        vs = sorted(group)
        candidates = occurrence.get(vs[0])
        if candidates:
            candidates = set(candidates)
            for v in vs[1:]:
                candidates &= occurrence.get(v, set())
                if not candidates:
                    break
        if not candidates:
            raise DecompositionMismatch(
                f"variables {vs} are covered by no bag")
        result.append(min(candidates, key=lambda t: (ntd.depth(t), t)))
    return result


def _insert_bit(mask, pos, bit):
    low = mask & ((1 << pos) - 1)
    high = (mask >> pos) << (pos + 1)
    return high | low | (bit << pos)


def _delete_bit(mask, pos):
    low = mask & ((1 << pos) - 1)
    high = (mask >> (pos + 1)) << pos
    return high | low


def _clause_masks(clause, index):
    pos = neg = 0
    for l in clause:
        p = index[abs(l)]
        if l > 0:
            pos |= 1 << p
        else:
            neg |= 1 << p
    return pos, neg


def dp_run(cnf, ntd, counting=True, weight_fn=None, row_filter=None, stats=None):
    """Core table computation; returns the model count (or a bool if counting
    is False).

    weight_fn(node, mask, bag) returns an extra per-row multiplier (count 0
    drops the row); row_filter(node, mask, bag) drops rows when it returns
    False. Both hooks apply after the node's own handler and clause checks.
    """
    for clause in cnf.clauses:
        if not clause:
            return 0 if counting else False

    attach = {}
    for clause, node in zip(cnf.clauses, shallowest_covering_nodes(
            ntd, [frozenset(abs(l) for l in clause) for clause in cnf.clauses])):
        attach.setdefault(node, []).append(clause)

    tables = {}
    for t in ntd.postorder():
        kind, v = ntd.kind(t)
        bag = sorted(ntd.bag(t))
        index = {u: i for i, u in enumerate(bag)}
        kids = ntd.children(t)

        if kind == NiceTreeDecomposition.LEAF:
            table = {0: 1} if counting else {0}
        elif kind == NiceTreeDecomposition.INTRODUCE:
            child = tables.pop(kids[0])
            p = index[v]
            if counting:
                table = {}
                for m, c in child.items():
                    m0 = _insert_bit(m, p, 0)
                    table[m0] = c
                    table[m0 | (1 << p)] = c
            else:
                table = set()
                for m in child:
                    m0 = _insert_bit(m, p, 0)
                    table.add(m0)
                    table.add(m0 | (1 << p))
        elif kind == NiceTreeDecomposition.FORGET:
            child = tables.pop(kids[0])
            child_bag = sorted(ntd.bag(kids[0]))
            p = child_bag.index(v)
            if counting:
                table = {}
                for m, c in child.items():
                    key = _delete_bit(m, p)
                    table[key] = table.get(key, 0) + c
            else:
                table = {_delete_bit(m, p) for m in child}
        else:  # join
            left = tables.pop(kids[0])
            right = tables.pop(kids[1])
            if len(left) > len(right):
                left, right = right, left
            if counting:
                table = {m: c * right[m] for m, c in left.items() if m in right}
            else:
                table = left & right

        for clause in attach.get(t, ()):
            pos, neg = _clause_masks(clause, index)
            if counting:
                table = {m: c for m, c in table.items()
                         if (m & pos) or (m & neg) != neg}
            else:
                table = {m for m in table if (m & pos) or (m & neg) != neg}

        if weight_fn is not None and counting:
            weighted = {}
            for m, c in table.items():
                w = weight_fn(t, m, bag)
                if w:
                    weighted[m] = c * w
            table = weighted
        elif weight_fn is not None:
            table = {m for m in table if weight_fn(t, m, bag)}

        if row_filter is not None:
            if counting:
                table = {m: c for m, c in table.items() if row_filter(t, m, bag)}
            else:
                table = {m for m in table if row_filter(t, m, bag)}

        assert len(table) <= 1 << len(bag), "table exceeds 2^|bag| bound"
        if stats is not None:
            stats.record(t, len(bag), len(table))
        tables[t] = table

    root_table = tables[ntd.root]
    if counting:
        return root_table.get(0, 0)
    return bool(root_table)


def _check_decomposition(cnf, ntd):
    if not isinstance(ntd, NiceTreeDecomposition):
        raise DecompositionMismatch("expected a nice tree decomposition")
    for t, bag in ntd.bags.items():
        for v in bag:
            if not 1 <= v <= cnf.num_vars:
                raise DecompositionMismatch(
                    f"bag {t} contains unknown variable {v}")
    report = validate(ntd, primal_graph(cnf))
    if not report.ok:
        raise DecompositionMismatch("; ".join(report.lines()[:5]))


def count_models(cnf, ntd, stats=None):
    """Exact number of satisfying assignments over all num_vars variables.

    Raises DecompositionMismatch if ntd is not a valid nice decomposition of
    the formula's primal graph.
    """
    _check_decomposition(cnf, ntd)
    return dp_run(cnf, ntd, counting=True, stats=stats)


def solve_sat(cnf, ntd, stats=None):
    """Satisfiability via the same traversal with counts elided (set semantics)."""
    _check_decomposition(cnf, ntd)
    return dp_run(cnf, ntd, counting=False, stats=stats)


def _clause_bitmasks(cnf):
    specs = []
    for clause in cnf.clauses:
        pos = neg = 0
        for l in clause:
            if l > 0:
                pos |= 1 << (l - 1)
            else:
                neg |= 1 << (-l - 1)
        specs.append((pos, neg))
    return specs


def brute_force_count(cnf, chunk=1 << 20):
    """Reference #SAT semantics by exhaustive enumeration (guarded).

    Raises TooLargeForOracle beyond 26 variables.
    """
    if cnf.num_vars > BRUTE_FORCE_MAX_VARS:
        raise TooLargeForOracle(
            f"{cnf.num_vars} variables exceed the oracle guard "
            f"of {BRUTE_FORCE_MAX_VARS}")
    for clause in cnf.clauses:
        if not clause:
            return 0
    specs = _clause_bitmasks(cnf)
    total = 0
    for start in range(0, 1 << cnf.num_vars, chunk):
        stop = min(start + chunk, 1 << cnf.num_vars)
        m = np.arange(start, stop, dtype=np.uint64)
        ok = np.ones(stop - start, dtype=bool)
        for pos, neg in specs:
            sat = (m & np.uint64(pos)) != 0
            if neg:
                sat |= (m & np.uint64(neg)) != np.uint64(neg)
            ok &= sat
        total += int(np.count_nonzero(ok))
    return total


def brute_force_sat(cnf, chunk=1 << 20):
    """Decision version of the enumeration oracle, with early exit."""
    if cnf.num_vars > BRUTE_FORCE_MAX_VARS:
        raise TooLargeForOracle(
            f"{cnf.num_vars} variables exceed the oracle guard "
            f"of {BRUTE_FORCE_MAX_VARS}")
    for clause in cnf.clauses:
        if not clause:
            return False
    specs = _clause_bitmasks(cnf)
    for start in range(0, 1 << cnf.num_vars, chunk):
        stop = min(start + chunk, 1 << cnf.num_vars)
        m = np.arange(start, stop, dtype=np.uint64)
        ok = np.ones(stop - start, dtype=bool)
        for pos, neg in specs:
            sat = (m & np.uint64(pos)) != 0
            if neg:
                sat |= (m & np.uint64(neg)) != np.uint64(neg)
            ok &= sat
            if not ok.any():
                break
        if ok.any():
            return True
    return False
