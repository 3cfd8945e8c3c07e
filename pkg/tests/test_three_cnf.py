from __future__ import annotations

from fractions import Fraction

import pytest

from thrsat.core.errors import BudgetExceeded, CertificateMismatch, InvalidThreshold, WidthViolation
from thrsat.services.arithmetic import canonicalize_threshold
from thrsat.services.formula import Clause, CnfFormula
from thrsat.services.oracle import GeneratorConfig, brute_count, brute_decide, random_kcnf
from thrsat.services.solvers import three_cnf
from thrsat.services.solvers.three_cnf import (
    _fan_with_partner,
    common_literal,
    decide_gt_maj3sat,
    decide_gt_thr3sat,
    decide_maj3sat,
    decide_thr3sat,
    decide_thr3sat_above_half,
)
from thrsat.services.solvers.verdict import Answer, HittingSet, WitnessKind

HALF = canonicalize_threshold(1, 2)


def _cnf(n: int, *clauses: tuple[int, ...]) -> CnfFormula:
    return CnfFormula(n, tuple(Clause(tuple(c)) for c in clauses))


def _corpus(count: int, *, n_lo: int = 4, n_hi: int = 8, m_hi: int = 12):
    for seed in range(count):
        n = n_lo + seed % (n_hi - n_lo + 1)
        cfg = GeneratorConfig(n=n, clause_count=seed % (m_hi + 1), k=3, seed=seed, width_mix=seed % 3 == 0)
        yield random_kcnf(cfg)


def test_common_literal():
    assert common_literal(_cnf(4, (1, 2, 3), (1, -2, 4))) == 1
    assert common_literal(_cnf(4, (1, 2), (3, 4))) is None
    assert common_literal(CnfFormula(2)) is None


def test_maj3_common_literal_is_yes():
    verdict = decide_maj3sat(_cnf(4, (1, 2, 3), (1, -2, 4)))
    assert verdict.is_yes
    assert verdict.branch_tag == "common-literal"
    assert verdict.certificate == HittingSet((1,))


def test_maj3_six_disjoint_clauses_is_no():
    formula = _cnf(18, *[(3 * i + 1, 3 * i + 2, 3 * i + 3) for i in range(6)])
    verdict = decide_maj3sat(formula)
    assert verdict.answer == Answer.NO
    assert verdict.branch_tag == "large-disjoint-set"
    assert verdict.certificate.bound == Fraction(7, 8) ** 6


def test_maj3_rejects_wide_clauses():
    with pytest.raises(WidthViolation):
        decide_maj3sat(_cnf(4, (1, 2, 3, 4)))


def test_maj3_agrees_with_brute_force():
    for formula in _corpus(80):
        verdict = decide_maj3sat(formula)
        assert verdict.is_yes == brute_decide(formula, HALF)
        if verdict.exact_count is not None:
            assert verdict.exact_count == brute_count(formula).value


def test_gt_maj3_exactly_half_is_no():
    # 唯一的子句 (x1) 恰好滿足一半
    formula = _cnf(3, (1,))
    assert decide_maj3sat(formula).is_yes
    assert not decide_gt_maj3sat(formula).is_yes


def test_gt_maj3_agrees_with_brute_force():
    for formula in _corpus(80):
        assert decide_gt_maj3sat(formula).is_yes == brute_decide(formula, HALF, strict=True)


def test_above_half_rejects_low_thresholds():
    with pytest.raises(InvalidThreshold):
        decide_thr3sat_above_half(_cnf(3, (1, 2, 3)), HALF)
    with pytest.raises(InvalidThreshold):
        decide_thr3sat_above_half(_cnf(3, (1, 2, 3)), canonicalize_threshold(1, 3))


@pytest.mark.parametrize("value", [Fraction(3, 4), Fraction(5, 8), Fraction(2, 3), Fraction(7, 8)])
def test_above_half_agrees_with_brute_force(value):
    rho = canonicalize_threshold(value)
    for formula in _corpus(60):
        verdict = decide_thr3sat_above_half(formula, rho)
        assert verdict.is_yes == brute_decide(formula, rho)
        if verdict.is_yes:
            assert verdict.exact_count == brute_count(formula).value


def test_thr3_many_one_sunflowers_is_no():
    rho = canonicalize_threshold(3, 4)
    formula = _cnf(21, *[(1, 2 * i, 2 * i + 1) for i in range(1, 11)])
    verdict = decide_thr3sat(formula, rho)
    assert verdict.answer == Answer.NO
    assert verdict.branch_tag == "case4-many-1-sunflowers"
    assert verdict.certificate.kind == WitnessKind.SUNFLOWER_LEDGER
    assert verdict.certificate.bound == Fraction(1, 2) + Fraction(1, 2) * Fraction(3, 4) ** 9
    assert not brute_decide(formula, rho)


@pytest.mark.parametrize("value", [Fraction(1, 2), Fraction(3, 7), Fraction(1, 3), Fraction(3, 4)])
def test_thr3_agrees_with_brute_force(value):
    rho = canonicalize_threshold(value)
    decided = 0
    for formula in _corpus(60):
        try:
            verdict = decide_thr3sat(formula, rho)
        except BudgetExceeded:
            continue
        decided += 1
        assert verdict.is_yes == brute_decide(formula, rho)
        if verdict.exact_count is not None:
            assert verdict.exact_count == brute_count(formula).value
    assert decided > 0


def test_gt_thr3_exact_threshold_is_no():
    formula = _cnf(1, (1,))
    assert decide_thr3sat(formula, HALF).is_yes
    verdict = decide_gt_thr3sat(formula, HALF)
    assert not verdict.is_yes
    assert verdict.branch_tag == "gt-exact-threshold"


@pytest.mark.parametrize("value", [Fraction(1, 2), Fraction(3, 7), Fraction(3, 4)])
def test_gt_thr3_agrees_with_brute_force(value):
    rho = canonicalize_threshold(value)
    for formula in _corpus(60):
        try:
            verdict = decide_gt_thr3sat(formula, rho)
        except BudgetExceeded:
            continue
        assert verdict.is_yes == brute_decide(formula, rho, strict=True)


def test_literal_fan_with_partner_bound():
    # 8 個 (x1 ∨ a_i ∨ b_i) 加上不含 x1 的 (¬x1 ∨ x18)，共 18 個變數
    formula = _cnf(18, *[(1, 2 * i, 2 * i + 1) for i in range(1, 9)], (-1, 18))
    witness = _fan_with_partner(formula, 1, list(range(8)))
    assert witness.kind == WitnessKind.LITERAL_FAN
    assert witness.clause_indices == tuple(range(8)) + (8,)
    assert witness.bound == Fraction(1, 4) + Fraction(1, 2) * Fraction(3, 4) ** 8
    assert witness.bound < Fraction(1, 2)
    assert Fraction(brute_count(formula).value, 1 << 18) == witness.bound


def _fan_with_negated_partner() -> CnfFormula:
    # 60 個 (x1 ∨ a_i ∨ b_i) 加上 (¬x1 ∨ x122 ∨ x123)；極大不相交集合只有第一個子句
    fan = [(1, 2 * i, 2 * i + 1) for i in range(1, 61)]
    return _cnf(123, *fan, (-1, 122, 123))


def test_maj3_large_reduced_set_gives_literal_fan():
    verdict = decide_maj3sat(_fan_with_negated_partner())
    assert verdict.answer == Answer.NO
    assert verdict.branch_tag == "literal-fan"
    witness = verdict.certificate
    assert witness.kind == WitnessKind.LITERAL_FAN
    # x1 為假時第一個子句已被滿足，扇形是其餘 59 個子句
    assert witness.clause_indices == tuple(range(1, 60)) + (60,)
    assert witness.bound == Fraction(3, 8) + Fraction(1, 2) * Fraction(3, 4) ** 59


def test_maj3_missing_fan_is_a_certificate_mismatch(monkeypatch):
    monkeypatch.setattr(three_cnf, "_fan_with_partner", lambda formula, literal, fan: None)
    with pytest.raises(CertificateMismatch) as excinfo:
        decide_maj3sat(_fan_with_negated_partner())
    assert excinfo.value.exit_code == 4
    assert excinfo.value.details["members"] == 59


def test_maj3_two_disjoint_two_clauses_fall_back_to_counting():
    verdict = decide_maj3sat(_cnf(4, (1, 2), (3, 4)))
    assert verdict.branch_tag == "exact-count"
    assert verdict.exact_count == 9
    assert verdict.is_yes


def test_maj3_three_disjoint_two_clauses_is_no():
    formula = _cnf(6, (1, 2), (3, 4), (5, 6))
    verdict = decide_maj3sat(formula)
    assert verdict.branch_tag == "two-clause-triple"
    assert verdict.certificate.bound == Fraction(27, 64)
    assert Fraction(brute_count(formula).value, 1 << 6) == verdict.certificate.bound
