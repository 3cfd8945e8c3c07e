from __future__ import annotations

from fractions import Fraction

import pytest

from thrsat.core.errors import WidthViolation
from thrsat.services.arithmetic import canonicalize_threshold
from thrsat.services.formula import Clause, CnfFormula
from thrsat.services.oracle import GeneratorConfig, brute_count, brute_decide, random_kcnf
from thrsat.services.solvers.two_cnf import c_alpha, decide_gt_thr2sat, decide_thr2sat
from thrsat.services.solvers.verdict import Answer, NoWitness, WitnessKind

HALF = canonicalize_threshold(1, 2)


def _cnf(n: int, *clauses: tuple[int, ...]) -> CnfFormula:
    return CnfFormula(n, tuple(Clause(tuple(c)) for c in clauses))


def test_c_alpha():
    assert c_alpha(HALF) == 4
    assert c_alpha(canonicalize_threshold(3, 4)) == 2
    assert c_alpha(canonicalize_threshold(1, 8)) == 9


def test_top_is_yes():
    verdict = decide_thr2sat(CnfFormula(3), HALF)
    assert verdict.is_yes
    assert verdict.exact_count == 8


def test_empty_clause_is_no():
    verdict = decide_thr2sat(_cnf(2, (1, 2), ()), HALF)
    assert verdict.answer == Answer.NO
    assert verdict.branch_tag == "empty-clause"
    assert verdict.certificate.bound == 0


def test_large_disjoint_set_is_no():
    formula = _cnf(14, *[(2 * i + 1, 2 * i + 2) for i in range(7)])
    verdict = decide_thr2sat(formula, HALF)
    assert verdict.answer == Answer.NO
    assert verdict.branch_tag == "large-disjoint-set"
    witness = verdict.certificate
    assert isinstance(witness, NoWitness)
    assert witness.kind == WitnessKind.DISJOINT_SET
    assert len(witness.clause_indices) == 5
    assert witness.bound == Fraction(3, 4) ** 5


def test_equality_separates_strict_variant():
    formula = _cnf(1, (1,))
    assert decide_thr2sat(formula, HALF).is_yes
    assert not decide_gt_thr2sat(formula, HALF).is_yes


def test_rejects_wider_clauses():
    with pytest.raises(WidthViolation):
        decide_thr2sat(_cnf(3, (1, 2, 3)), HALF)


@pytest.mark.parametrize("alpha", [Fraction(1, 2), Fraction(3, 7), Fraction(1, 8), Fraction(5, 6)])
def test_agrees_with_brute_force(alpha):
    rho = canonicalize_threshold(alpha)
    for seed in range(40):
        cfg = GeneratorConfig(n=4 + seed % 5, clause_count=seed % 11, k=2, seed=seed, width_mix=True)
        formula = random_kcnf(cfg)
        for strict in (False, True):
            verdict = decide_thr2sat(formula, rho, strict=strict)
            assert verdict.is_yes == brute_decide(formula, rho, strict=strict)
            if verdict.exact_count is not None:
                assert verdict.exact_count == brute_count(formula).value
