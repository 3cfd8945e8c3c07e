from __future__ import annotations

import pytest

from thrsat.core.errors import BudgetExceeded, InvalidConfig
from thrsat.services.arithmetic import canonicalize_threshold
from thrsat.services.decomposition import Budget
from thrsat.services.formula import Clause, CnfFormula
from thrsat.services.solvers.dispatch import choose_algorithm, decide, run_decider

HALF = canonicalize_threshold(1, 2)


def _cnf(n: int, *clauses: tuple[int, ...]) -> CnfFormula:
    return CnfFormula(n, tuple(Clause(tuple(c)) for c in clauses))


TWO_CNF = _cnf(4, (1, 2), (3, 4))
THREE_CNF = _cnf(3, (1, 2, 3))
FOUR_CNF = _cnf(4, (1, 2, 3, 4))


@pytest.mark.parametrize(
    "formula, rho, expected",
    [
        (CnfFormula(2), HALF, "thr2"),
        (TWO_CNF, canonicalize_threshold(1, 3), "thr2"),
        (THREE_CNF, HALF, "maj3"),
        (THREE_CNF, canonicalize_threshold(3, 4), "above-half"),
        (THREE_CNF, canonicalize_threshold(1, 3), "thr3"),
        (FOUR_CNF, HALF, "thrk"),
    ],
)
def test_choose_algorithm(formula, rho, expected):
    assert choose_algorithm(formula, rho) == expected


def test_explicit_algorithm_is_kept():
    assert choose_algorithm(THREE_CNF, HALF, "thrk") == "thrk"
    with pytest.raises(InvalidConfig):
        choose_algorithm(THREE_CNF, HALF, "fastest")


def test_run_decider_guards():
    with pytest.raises(InvalidConfig):
        run_decider("maj3", THREE_CNF, canonicalize_threshold(1, 3))
    with pytest.raises(InvalidConfig):
        run_decider("long2", THREE_CNF, HALF, gt=True)


def test_long2_splits_wide_clauses():
    formula = _cnf(3, (1, 2), (-1, -2, 3))
    verdict = run_decider("long2", formula, HALF)
    assert verdict.is_yes
    assert verdict.exact_count == 5


def test_decide_every_algorithm_on_same_instance():
    formula = _cnf(3, (1, 2, 3), (-1, 2))
    for algorithm in ("thr3", "thrk", "maj3"):
        assert decide(formula, HALF, algorithm=algorithm).is_yes
    assert decide(formula, canonicalize_threshold(3, 4), algorithm="above-half").is_yes is False


def test_budget_exceeded_without_fallback():
    with pytest.raises(BudgetExceeded):
        decide(TWO_CNF, HALF, budget=Budget(cap=5))


def test_oracle_fallback():
    verdict = decide(TWO_CNF, HALF, budget=Budget(cap=5), fallback_oracle=True)
    assert verdict.branch_tag == "oracle-fallback"
    assert verdict.is_yes
    assert verdict.exact_count == 9
    assert verdict.params_used == {"algorithm": "thr2", "budget_stage": "extract-0"}


def test_fallback_respects_strict_comparison():
    verdict = decide(_cnf(2, (1,)), HALF, gt=True, budget=Budget(cap=0), fallback_oracle=True)
    assert verdict.branch_tag == "oracle-fallback"
    assert not verdict.is_yes
