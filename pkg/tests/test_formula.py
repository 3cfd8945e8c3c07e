from __future__ import annotations

import random
from fractions import Fraction

import pytest

from thrsat.core.errors import ParseError
from thrsat.services.arithmetic import canonicalize_threshold
from thrsat.services.formula import (
    Clause,
    CnfFormula,
    ExactCount,
    Ordering,
    VariableRole,
    compare_count_to_threshold,
    meets_threshold,
    normalize,
    parse_dimacs,
    serialize_dimacs,
)
from thrsat.services.oracle import GeneratorConfig, brute_count, random_kcnf


def _cnf(n: int, *clauses: tuple[int, ...]) -> CnfFormula:
    return CnfFormula(n, tuple(Clause(tuple(c)) for c in clauses))


def test_parse_dimacs_basic():
    formula = parse_dimacs("p cnf 2 1\n1 2 0\n")
    assert formula.num_vars == 2
    assert formula.clauses == (Clause((1, 2)),)
    assert formula.roles == ()


def test_parse_empty_formula_is_top():
    formula = parse_dimacs(b"c nothing here\np cnf 3 0\n")
    assert formula.is_top
    assert brute_count(formula).value == 8


def test_parse_keeps_tautology_until_normalize():
    formula = parse_dimacs("p cnf 2 1\n1 -1 0\n")
    assert len(formula) == 1
    assert normalize(formula).is_top


def test_parse_clause_spanning_lines_and_role_directives():
    text = "p cnf 4 2\nc role e 1 2 0\nc role p 3 4 0\n1 -3\n 4 0 2 0\n"
    formula = parse_dimacs(text)
    assert formula.clauses == (Clause((1, -3, 4)), Clause((2,)))
    assert formula.role_of(1) == VariableRole.EXISTENTIAL
    assert formula.variables_with_role(VariableRole.PROBABILISTIC) == [3, 4]


@pytest.mark.parametrize(
    "text, line",
    [
        ("p cnf 2\n1 2 0\n", 1),
        ("1 2 0\n", 1),
        ("p cnf 2 1\n1 3 0\n", 2),
        ("p cnf 2 1\n1 x 0\n", 2),
        ("p cnf 2 1\n1 2\n", 2),
        ("p cnf 2 1\nc role q 1 0\n1 0\n", 2),
        ("p cnf 2 1\nc role e 1 2\n1 0\n", 2),
        ("p cnf 2 1\nc role e\n1 0\n", 2),
        ("p cnf 2 1\nc role e 1 0 2 0\n1 0\n", 2),
        ("p cnf 3 1\n1 0\nc role p -2 0\n", 3),
    ],
)
def test_parse_errors_carry_line_numbers(text, line):
    with pytest.raises(ParseError) as excinfo:
        parse_dimacs(text)
    assert excinfo.value.line == line
    assert excinfo.value.exit_code == 64


def test_parse_missing_header():
    with pytest.raises(ParseError):
        parse_dimacs("c only a comment\n")


def test_normalize_examples():
    assert normalize(_cnf(2, (1, 1, 2))).clauses == (Clause((1, 2)),)
    assert normalize(_cnf(2, (1, -1, 2))).is_top
    assert normalize(_cnf(2, (1, 2), (2, 1))).clauses == (Clause((1, 2)),)


def test_normalize_keeps_first_occurrence_order():
    formula = normalize(_cnf(3, (3, 2), (1,), (2, 3), (-1, 2)))
    assert formula.clauses == (Clause((2, 3)), Clause((1,)), Clause((-1, 2)))


def test_normalize_is_idempotent_and_count_preserving():
    for seed in range(30):
        cfg = GeneratorConfig(n=8, clause_count=12, k=3, seed=seed, width_mix=True)
        raw = random_kcnf(cfg)
        # 加入重複與恆真子句
        noisy = raw.extend([raw.clauses[0], Clause((1, -1, 2))])
        once = normalize(noisy)
        assert normalize(once) == once
        assert brute_count(once) == brute_count(raw)


def test_serialize_round_trip_with_roles():
    roles = (VariableRole.EXISTENTIAL, VariableRole.PROBABILISTIC, VariableRole.PROBABILISTIC)
    formula = normalize(CnfFormula(3, (Clause((1, -2)), Clause((2, 3))), roles))
    text = serialize_dimacs(formula)
    assert text.startswith("p cnf 3 2\n")
    assert "c role e 1 0" in text
    assert parse_dimacs(text) == formula


@pytest.mark.parametrize(
    "count, rho, n, expected",
    [
        (3, Fraction(1, 2), 2, Ordering.GT),
        (4, Fraction(1, 2), 3, Ordering.EQ),
        (6, Fraction(3, 7), 4, Ordering.LT),
    ],
)
def test_compare_count_to_threshold(count, rho, n, expected):
    assert compare_count_to_threshold(ExactCount(count), canonicalize_threshold(rho), n) == expected


def test_compare_agrees_with_rational_reference():
    rng = random.Random(7)
    for _ in range(1000):
        q = rng.randint(2, 200)
        rho = Fraction(rng.randint(1, q - 1), q)
        n = rng.randint(0, 40)
        count = rng.randint(0, 1 << n)
        exact = Fraction(count) - rho * (1 << n)
        expected = Ordering.LT if exact < 0 else Ordering.GT if exact > 0 else Ordering.EQ
        assert compare_count_to_threshold(count, canonicalize_threshold(rho), n) == expected


def test_meets_threshold_strict():
    half = canonicalize_threshold(Fraction(1, 2))
    assert meets_threshold(4, half, 3)
    assert not meets_threshold(4, half, 3, strict=True)


def test_exact_count_term_bound():
    assert ExactCount(5, 2).respects_term_bound()
    assert not ExactCount(7, 2).respects_term_bound()
    assert (ExactCount(4, 1) + ExactCount(2, 1)) == ExactCount(6, 2)
    with pytest.raises(ValueError):
        ExactCount(-1)


def test_condition_removes_satisfied_and_shrinks_clauses():
    formula = _cnf(3, (1, 2), (-1, 3), (2, 3))
    conditioned = formula.condition([1])
    assert conditioned.clauses == (Clause((3,)), Clause((2, 3)))
    assert conditioned.num_vars == 3
