import random

import pytest

from twsolve.dpsat import (brute_force_count, brute_force_sat, count_models,
                           dp_run, DpStats, solve_sat)
from twsolve.errors import DecompositionMismatch, TooLargeForOracle
from twsolve.model import CnfFormula, primal_graph
from twsolve.treedecomp import decompose, make_nice

from helpers import count_by_model_check, random_cnf

HEURISTICS = ("min-fill", "min-degree")


def nice_td(cnf, heuristic="min-fill", seed=0):
    return make_nice(decompose(primal_graph(cnf), heuristic=heuristic, seed=seed))


def cnf_of(num_vars, *clauses):
    cnf = CnfFormula(num_vars=num_vars)
    for c in clauses:
        cnf.add_clause(c)
    return cnf


def test_count_empty_formula():
    cnf = cnf_of(0)
    assert count_models(cnf, nice_td(cnf)) == 1


def test_count_contradiction():
    cnf = cnf_of(1, [1], [-1])
    assert count_models(cnf, nice_td(cnf)) == 0


def test_count_two_clause_example():
    cnf = cnf_of(3, [1, 2], [-2, 3])
    assert brute_force_count(cnf) == 4
    assert count_models(cnf, nice_td(cnf)) == 4


def test_solve_simple():
    cnf = cnf_of(2, [1, 2])
    assert solve_sat(cnf, nice_td(cnf)) is True


def test_solve_unit_chain_unsat():
    cnf = cnf_of(2, [1], [-1, 2], [-2])
    assert brute_force_count(cnf) == 0
    assert solve_sat(cnf, nice_td(cnf)) is False


def test_solve_empty_clause():
    cnf = cnf_of(2, [1])
    cnf.clauses.append(())
    assert solve_sat(cnf, nice_td(cnf)) is False
    assert count_models(cnf, nice_td(cnf)) == 0


def test_brute_force_examples():
    assert brute_force_count(cnf_of(2, [1, 2])) == 3
    assert brute_force_count(cnf_of(3)) == 8
    assert brute_force_count(cnf_of(2, [1], [2])) == 1
    assert brute_force_sat(cnf_of(2, [1], [2])) is True
    assert brute_force_sat(cnf_of(1, [1], [-1])) is False


def test_brute_force_guard():
    with pytest.raises(TooLargeForOracle):
        brute_force_count(CnfFormula(num_vars=27))
    with pytest.raises(TooLargeForOracle):
        brute_force_sat(CnfFormula(num_vars=27))


def test_brute_force_matches_slow_model_check():
    rng = random.Random(71)
    for _ in range(40):
        cnf = random_cnf(rng, max_vars=8, max_clauses=14)
        assert brute_force_count(cnf) == count_by_model_check(cnf)


def test_brute_force_chunking():
    cnf = cnf_of(10, [1, 2])
    assert brute_force_count(cnf, chunk=64) == brute_force_count(cnf)


def test_oracle_equivalence_random():
    rng = random.Random(101)
    for _ in range(60):
        cnf = random_cnf(rng, max_vars=10, max_clauses=25)
        expected = brute_force_count(cnf)
        got = count_models(cnf, nice_td(cnf, heuristic=rng.choice(HEURISTICS)))
        assert got == expected


def test_decomposition_invariance():
    rng = random.Random(103)
    for _ in range(15):
        cnf = random_cnf(rng, max_vars=9, max_clauses=20)
        counts = {count_models(cnf, nice_td(cnf, heuristic=h, seed=s))
                  for h in HEURISTICS for s in (0, 1, 2)}
        assert len(counts) == 1


def test_mismatched_decomposition_rejected():
    cnf = cnf_of(3, [1, 2], [-2, 3])
    other = cnf_of(3, [1, 3])
    with pytest.raises(DecompositionMismatch):
        count_models(cnf, nice_td(other))
    with pytest.raises(DecompositionMismatch):
        count_models(cnf, decompose(primal_graph(cnf)))  # not nice


def test_foreign_vertices_rejected():
    cnf = cnf_of(2, [1, 2])
    bigger = cnf_of(3, [1, 2], [2, 3])
    with pytest.raises(DecompositionMismatch):
        count_models(cnf, nice_td(bigger))


def test_stats_table_bound():
    cnf = cnf_of(3, [1, 2], [-2, 3])
    stats = DpStats()
    count_models(cnf, nice_td(cnf), stats=stats)
    for bag_size, rows in stats.tables.values():
        assert rows <= 1 << bag_size


def test_pruned_row_soundness_perturbation():
    instances = [cnf_of(2), cnf_of(2, [1, 2]), cnf_of(3, [1, 2], [-2, 3])]
    for cnf in instances:
        ntd = nice_td(cnf)
        baseline = count_models(cnf, ntd)
        stored = []
        dp_run(cnf, ntd, counting=True,
               row_filter=lambda t, m, bag: stored.append((t, m)) or True)
        assert stored
        for target in stored:
            perturbed = dp_run(
                cnf, ntd, counting=True,
                row_filter=lambda t, m, bag: (t, m) != target)
            assert perturbed != baseline, (cnf.clauses, target)
