import random

import pytest

from twsolve.errors import ParseError, UnsupportedDisjunction
from twsolve.model import Rule
from twsolve.parsing import (parse_dimacs, parse_gr, parse_program,
                             write_dimacs, write_gr, write_program)

from helpers import random_cnf, random_graph, random_program


def test_parse_dimacs_basic():
    cnf = parse_dimacs("p cnf 2 1\n1 -2 0")
    assert cnf.num_vars == 2
    assert cnf.clauses == [(1, -2)]


def test_parse_dimacs_empty_clause_list():
    cnf = parse_dimacs("p cnf 1 0")
    assert cnf.num_vars == 1
    assert cnf.clauses == []


def test_parse_dimacs_drops_tautology():
    cnf = parse_dimacs("p cnf 2 1\n1 -1 0")
    assert cnf.num_vars == 2
    assert cnf.clauses == []
    assert cnf.tautologies_dropped == 1


def test_parse_dimacs_multiline_clause_and_comments():
    cnf = parse_dimacs("c header comment\np cnf 3 2\n1 2\n3 0\nc mid\n-1 0\n")
    assert cnf.clauses == [(1, 2, 3), (-1,)]


def test_parse_dimacs_bytes_input():
    cnf = parse_dimacs(b"p cnf 1 1\n1 0\n")
    assert cnf.clauses == [(1,)]


def test_parse_dimacs_malformed_header():
    with pytest.raises(ParseError) as err:
        parse_dimacs("p cnf x 1\n")
    assert err.value.line == 1


def test_parse_dimacs_literal_out_of_range():
    with pytest.raises(ParseError) as err:
        parse_dimacs("p cnf 2 1\n1 -3 0")
    assert err.value.line == 2
    assert "out of range" in str(err.value)


def test_parse_dimacs_missing_zero():
    with pytest.raises(ParseError) as err:
        parse_dimacs("p cnf 2 1\n1 -2")
    assert "terminating 0" in str(err.value)


def test_dimacs_round_trip():
    rng = random.Random(5)
    for _ in range(25):
        cnf = random_cnf(rng, max_vars=9, max_clauses=15)
        again = parse_dimacs(write_dimacs(cnf))
        assert again.num_vars == cnf.num_vars
        assert again.clauses == cnf.clauses


def test_parse_program_choice():
    prog = parse_program("a :- not b.\nb :- not a.")
    assert prog.atom_names == ["a", "b"]
    assert prog.rules == [Rule(1, frozenset(), frozenset({2})),
                          Rule(2, frozenset(), frozenset({1}))]


def test_parse_program_fact():
    prog = parse_program("a.")
    assert prog.atom_names == ["a"]
    assert prog.rules == [Rule(1)]


def test_parse_program_constraint_and_comment():
    prog = parse_program("% intro\n:- a, not b. % trailing\n")
    assert prog.atom_names == ["a", "b"]
    assert prog.rules == [Rule(None, frozenset({1}), frozenset({2}))]


def test_parse_program_disjunction_rejected():
    with pytest.raises(UnsupportedDisjunction):
        parse_program("a | b :- c.")
    with pytest.raises(UnsupportedDisjunction):
        parse_program("a, b :- c.")


def test_parse_program_syntax_errors_carry_line():
    with pytest.raises(ParseError) as err:
        parse_program("a.\nb :- c\n")
    assert err.value.line == 2
    with pytest.raises(ParseError) as err:
        parse_program("A.")
    assert err.value.line == 1


def test_parse_program_first_appearance_ids():
    prog = parse_program("x :- y, not z.\ny.")
    assert prog.atom_names == ["x", "y", "z"]


def test_program_round_trip():
    rng = random.Random(9)
    for _ in range(25):
        prog = random_program(rng, max_atoms=8, max_rules=10)
        text = write_program(prog)
        again = parse_program(text)
        # interning order may differ; compare by name
        def named(p):
            out = []
            for r in p.rules:
                head = p.name(r.head) if r.head is not None else None
                out.append((head, frozenset(p.name(a) for a in r.pos),
                            frozenset(p.name(a) for a in r.neg)))
            return out
        assert named(again) == named(prog)
        assert write_program(again) == text


def test_gr_round_trip():
    rng = random.Random(2)
    for _ in range(20):
        g = random_graph(rng, rng.randint(1, 10), 0.4)
        text = write_gr(g)
        again = parse_gr(text)
        assert again == g
        assert write_gr(again) == text


def test_parse_gr_errors():
    with pytest.raises(ParseError):
        parse_gr("p tw 2\n")
    with pytest.raises(ParseError) as err:
        parse_gr("p tw 2 1\n1 3\n")
    assert err.value.line == 2
    with pytest.raises(ParseError):
        parse_gr("p tw 2 1\n1 1\n")
