"""Answer-set existence: completion for tight programs, order-tracking DP for
normal programs.

Stability is Gelfond-Lifschitz reduct minimality: M is an answer set iff M is
the least model of the Horn part of the reduct P^M and no constraint of P^M
fires. The normal-program DP tracks, per bag, a strict total order over the
true atoms (a local level mapping) plus provenness flags; it decides existence
only and deliberately exposes no counting entry point.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import factorial

from .errors import DecompositionMismatch, NotTight, TooLargeForOracle
from .model import CnfFormula, is_tight, primal_graph
from .treedecomp import NiceTreeDecomposition, validate
from .dpsat import (_delete_bit, _insert_bit,
                    shallowest_covering_nodes, solve_sat)
from . import treedecomp

ORACLE_MAX_ATOMS = 20


@dataclass
class StableModelOracleResult:
    """All answer sets found by exhaustive enumeration."""

    answer_sets: list  # frozensets of atom ids
    truncated: bool = False


def enumerate_answer_sets(program, limit=None):
    """Enumerate all answer sets by checking reduct minimality per subset.

    Guarded to at most 20 atoms (TooLargeForOracle); when limit is given,
    enumeration stops after that many answer sets and sets truncated.
    """
    n = program.num_atoms
    if n > ORACLE_MAX_ATOMS:
        raise TooLargeForOracle(
            f"{n} atoms exceed the oracle guard of {ORACLE_MAX_ATOMS}")
    horn = []
    constraints = []
    for rule in program.rules:
        pos = sum(1 << (a - 1) for a in rule.pos)
        neg = sum(1 << (a - 1) for a in rule.neg)
        if rule.head is None:
            constraints.append((pos, neg))
        else:
            horn.append((1 << (rule.head - 1), pos, neg))

    found = []
    truncated = False
    for m in range(1 << n):
        if any((m & pos) == pos and (m & neg) == 0 for pos, neg in constraints):
            continue
        derived = 0
        changed = True
        while changed:
            changed = False
            for head, pos, neg in horn:
                if (m & neg) == 0 and (derived & pos) == pos \
                        and (derived & head) != head:
                    derived |= head
                    changed = True
        if derived == m:
            if limit is not None and len(found) >= limit:
                truncated = True
                break
            found.append(frozenset(
                a for a in range(1, n + 1) if (m >> (a - 1)) & 1))
    return StableModelOracleResult(found, truncated)


# ------------------------------------------------------------- tight route

def clark_completion(program):
    """Completion CNF with one auxiliary body variable per rule.

    Atoms keep ids 1..n; rule i gets auxiliary n+1+i. For tight programs the
    models restricted to the original atoms are exactly the answer sets, and
    the restriction is a bijection (auxiliaries are functionally determined).
    Raises NotTight when the positive dependency graph is cyclic.
    """
    tight, _ = is_tight(program)
    if not tight:
        raise NotTight("program has a cyclic positive dependency graph")
    n = program.num_atoms
    cnf = CnfFormula(num_vars=n + len(program.rules))
    supports = {a: [] for a in range(1, n + 1)}
    for i, rule in enumerate(program.rules):
        b = n + 1 + i
        for p in sorted(rule.pos):
            cnf.add_clause([-b, p])
        for q in sorted(rule.neg):
            cnf.add_clause([-b, -q])
        cnf.add_clause([b] + [-p for p in sorted(rule.pos)]
                       + [q for q in sorted(rule.neg)])
        if rule.head is None:
            cnf.add_clause([-b])
        else:
            cnf.add_clause([-b, rule.head])
            supports[rule.head].append(b)
    for a in range(1, n + 1):
        cnf.add_clause([-a] + supports[a])
    return cnf


def completion_width_overhead(program):
    """Largest rule size: the bound on primal-width growth under completion."""
    return max((len(r.atoms()) for r in program.rules), default=0)


def solve_tight_asp(program, heuristic="min-fill", seed=0):
    """Answer-set existence for tight programs via completion + dp-sat."""
    cnf = clark_completion(program)
    td = treedecomp.decompose(primal_graph(cnf), heuristic=heuristic, seed=seed)
    return solve_sat(cnf, treedecomp.make_nice(td))


# ------------------------------------------------------------ normal route

def _rule_masks(rule, index):
    pos = sum(1 << index[a] for a in rule.pos)
    neg = sum(1 << index[a] for a in rule.neg)
    head_bit = None if rule.head is None else 1 << index[rule.head]
    return head_bit, pos, neg


def solve_normal_asp(program, ntd, stats=None):
    """Decide answer-set existence by DP with local level mappings.

    Rows are (bag assignment, strict order over true bag atoms, provenness
    flags). Introduce branches the new true atom over every order position;
    forget rejects true-but-unproven atoms; join requires equal assignments
    and agreeing relative orders and unions provenness. A rule may prove its
    head only at its attachment node (the shallowest node covering the rule),
    requiring the positive body ordered strictly before the head. Classical
    rule satisfaction is enforced at every covering node (earliest pruning;
    the attachment check is the authoritative one).
    """
    if not isinstance(ntd, NiceTreeDecomposition):
        raise DecompositionMismatch("expected a nice tree decomposition")
    n = program.num_atoms
    for t, bag in ntd.bags.items():
        for a in bag:
            if not 1 <= a <= n:
                raise DecompositionMismatch(f"bag {t} contains unknown atom {a}")
    report = validate(ntd, primal_graph(program))
    if not report.ok:
        raise DecompositionMismatch("; ".join(report.lines()[:5]))

    attach_at = {}
    nodes = shallowest_covering_nodes(
        ntd, [frozenset(r.atoms()) for r in program.rules])
    for rule, t in zip(program.rules, nodes):
        attach_at.setdefault(t, []).append(rule)

    tables = {}
    for t in ntd.postorder():
        kind, v = ntd.kind(t)
        bag = sorted(ntd.bag(t))
        index = {a: i for i, a in enumerate(bag)}
        kids = ntd.children(t)

        if kind == NiceTreeDecomposition.LEAF:
            table = {(0, (), 0)}
        elif kind == NiceTreeDecomposition.INTRODUCE:
            child = tables.pop(kids[0])
            p = index[v]
            table = set()
            for m, order, proven in child:
                m0 = _insert_bit(m, p, 0)
                pr0 = _insert_bit(proven, p, 0)
                table.add((m0, order, pr0))
                m1 = m0 | (1 << p)
                for i in range(len(order) + 1):
                    table.add((m1, order[:i] + (v,) + order[i:], pr0))
        elif kind == NiceTreeDecomposition.FORGET:
            child = tables.pop(kids[0])
            p = sorted(ntd.bag(kids[0])).index(v)
            table = set()
            for m, order, proven in child:
                if (m >> p) & 1 and not (proven >> p) & 1:
                    continue
                table.add((_delete_bit(m, p),
                           tuple(a for a in order if a != v),
                           _delete_bit(proven, p)))
        else:  # join
            left = tables.pop(kids[0])
            right = tables.pop(kids[1])
            grouped = {}
            for m, order, proven in right:
                grouped.setdefault((m, order), []).append(proven)
            table = set()
            for m, order, proven in left:
                for other in grouped.get((m, order), ()):
                    table.add((m, order, proven | other))

        covered = [r for r in program.rules
                   if all(a in index for a in r.atoms())]
        attached = attach_at.get(t, ())
        if covered:
            # classical filter at every covering node, proofs at attachment
            checked = set()
            cov_specs = [_rule_masks(r, index) for r in covered]
            att_specs = [(_rule_masks(r, index),
                          sorted(r.pos), r.head) for r in attached]
            for m, order, proven in table:
                alive = True
                for head_bit, pos, neg in cov_specs:
                    if (m & pos) == pos and (m & neg) == 0:
                        if head_bit is None or not (m & head_bit):
                            alive = False
                            break
                if not alive:
                    continue
                new_proven = proven
                if att_specs:
                    rank = {a: i for i, a in enumerate(order)}
                    for (head_bit, pos, neg), pos_atoms, head in att_specs:
                        if head_bit is None or not (m & head_bit):
                            continue
                        if (m & pos) == pos and (m & neg) == 0 and \
                                all(rank[b] < rank[head] for b in pos_atoms):
                            new_proven |= head_bit
                checked.add((m, order, new_proven))
            table = checked

        if __debug__:
            k = len(bag)
            assert len(table) <= (1 << k) * (1 << k) * factorial(k), \
                "table exceeds the 2^k * 2^k * k! bound"
            for m, order, proven in table:
                assert proven & ~m == 0, "proven atom is not true"
                assert set(order) == {bag[i] for i in range(k) if (m >> i) & 1}, \
                    "order must rank exactly the true bag atoms"
        if stats is not None:
            stats.record(t, len(bag), len(table))
        tables[t] = table

    return bool(tables[ntd.root])
