import random

import pytest

import twsolve.dpasp as dpasp
from twsolve.dpasp import (clark_completion, completion_width_overhead,
                           enumerate_answer_sets, solve_normal_asp,
                           solve_tight_asp)
from twsolve.dpsat import DpStats, brute_force_count
from twsolve.errors import (DecompositionMismatch, NotTight,
                            TooLargeForOracle)
from twsolve.model import CnfFormula, Program, is_tight, primal_graph
from twsolve.parsing import parse_program
from twsolve.treedecomp import decompose, make_nice

from helpers import random_program


def nice_td_for(prog, heuristic="min-fill", seed=0):
    return make_nice(decompose(primal_graph(prog), heuristic=heuristic, seed=seed))


def atom_models(cnf, num_atoms):
    """Models of cnf projected to atoms 1..num_atoms, by enumeration."""
    out = set()
    for m in range(1 << cnf.num_vars):
        ok = all(any((m >> (abs(l) - 1)) & 1 == (1 if l > 0 else 0)
                     for l in clause) for clause in cnf.clauses)
        if ok:
            out.add(frozenset(a for a in range(1, num_atoms + 1)
                              if (m >> (a - 1)) & 1))
    return out


def test_enumerate_choice_program():
    prog = parse_program("a :- not b.\nb :- not a.")
    result = enumerate_answer_sets(prog)
    assert sorted(result.answer_sets, key=sorted) == [frozenset({1}),
                                                      frozenset({2})]
    assert not result.truncated


def test_enumerate_odd_loop_has_no_answer_set():
    prog = parse_program("a :- not a.")
    assert enumerate_answer_sets(prog).answer_sets == []


def test_enumerate_empty_program():
    prog = Program(atom_names=[])
    assert enumerate_answer_sets(prog).answer_sets == [frozenset()]


def test_enumerate_guard_and_truncation():
    with pytest.raises(TooLargeForOracle):
        enumerate_answer_sets(Program(atom_names=[f"a{i}" for i in range(21)]))
    prog = parse_program("a :- not b.\nb :- not a.")
    result = enumerate_answer_sets(prog, limit=1)
    assert len(result.answer_sets) == 1
    assert result.truncated


def test_completion_single_negative_rule():
    prog = parse_program("a :- not b.")
    cnf = clark_completion(prog)
    assert cnf.num_vars == 2 + 1
    assert atom_models(cnf, 2) == {frozenset({1})}
    assert brute_force_count(cnf) == 1


def test_completion_fact():
    prog = parse_program("a.")
    cnf = clark_completion(prog)
    assert atom_models(cnf, 1) == {frozenset({1})}
    assert brute_force_count(cnf) == 1


def test_completion_unsupported_atom_is_false():
    prog = parse_program("a :- c.")  # c has no rule
    cnf = clark_completion(prog)
    assert atom_models(cnf, 2) == {frozenset()}


def test_completion_requires_tight():
    prog = parse_program("a :- b.\nb :- a.")
    with pytest.raises(NotTight):
        clark_completion(prog)
    with pytest.raises(NotTight):
        solve_tight_asp(prog)


def test_completion_matches_oracle_models():
    rng = random.Random(201)
    checked = 0
    for _ in range(80):
        prog = random_program(rng, max_atoms=6, max_rules=8)
        tight, _ = is_tight(prog)
        if not tight:
            continue
        expected = set(enumerate_answer_sets(prog).answer_sets)
        assert atom_models(clark_completion(prog), prog.num_atoms) == expected
        checked += 1
    assert checked > 20


def test_completion_width_overhead():
    prog = parse_program("a :- b, c, not d.\ne.")
    assert completion_width_overhead(prog) == 4


def test_solve_tight_examples():
    assert solve_tight_asp(parse_program("a :- not b.\nb :- not a.")) is True
    assert solve_tight_asp(parse_program(":- .")) is False
    assert solve_tight_asp(parse_program("a.\n:- a.")) is False


def test_normal_even_loop_unfounded():
    prog = parse_program("a :- b.\nb :- a.")
    assert solve_normal_asp(prog, nice_td_for(prog)) is True  # empty set works
    prog2 = parse_program("a :- b.\nb :- a.\n:- not a.")
    assert solve_normal_asp(prog2, nice_td_for(prog2)) is False


def test_normal_loop_with_external_support():
    prog = parse_program("a :- b.\nb :- a.\na :- not c.")
    assert enumerate_answer_sets(prog).answer_sets == [frozenset({1, 2})]
    assert solve_normal_asp(prog, nice_td_for(prog)) is True


def test_normal_empty_program():
    prog = Program(atom_names=[])
    assert solve_normal_asp(prog, nice_td_for(prog)) is True


def test_normal_mismatched_decomposition():
    prog = parse_program("a :- b.\nb :- a.")
    other = parse_program("x :- y.\nz :- y.")
    with pytest.raises(DecompositionMismatch):
        solve_normal_asp(prog, nice_td_for(other))
    with pytest.raises(DecompositionMismatch):
        solve_normal_asp(prog, decompose(primal_graph(prog)))


def test_normal_oracle_equivalence_random():
    rng = random.Random(301)
    for i in range(120):
        prog = random_program(rng, max_atoms=7, max_rules=10)
        expected = bool(enumerate_answer_sets(prog).answer_sets)
        heuristic = "min-fill" if i % 2 else "min-degree"
        got = solve_normal_asp(prog, nice_td_for(prog, heuristic=heuristic))
        assert got == expected, prog.rules


def test_normal_agrees_with_tight_route():
    rng = random.Random(303)
    checked = 0
    for _ in range(80):
        prog = random_program(rng, max_atoms=7, max_rules=9)
        tight, _ = is_tight(prog)
        if not tight:
            continue
        assert solve_normal_asp(prog, nice_td_for(prog)) == solve_tight_asp(prog)
        checked += 1
    assert checked > 20


def test_no_counting_entry_point_for_normal_asp():
    names = [n for n in dir(dpasp) if not n.startswith("_")]
    assert "solve_normal_asp" in names
    for name in names:
        lowered = name.lower()
        assert not ("count" in lowered and ("normal" in lowered
                                            or "answer" in lowered)), name


def test_normal_stats_recorded():
    prog = parse_program("a :- b.\nb :- a.\na :- not c.")
    stats = DpStats()
    solve_normal_asp(prog, nice_td_for(prog), stats=stats)
    assert stats.tables
    from math import factorial
    for bag_size, rows in stats.tables.values():
        assert rows <= (1 << bag_size) * (1 << bag_size) * factorial(bag_size)
