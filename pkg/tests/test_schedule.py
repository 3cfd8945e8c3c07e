from __future__ import annotations

from fractions import Fraction

import pytest

from thrsat.core.errors import BudgetExceeded, InvalidConfig
from thrsat.services.arithmetic import canonicalize_threshold
from thrsat.services.decomposition import Budget
from thrsat.services.solvers.schedule import Beyond, build_schedule, is_beyond


def _rho(p: int, q: int):
    return canonicalize_threshold(p, q)


def test_three_cnf_schedule_at_half():
    schedule = build_schedule(_rho(1, 2), 3, cap=100, family="thr3")
    assert (schedule.z, schedule.t) == (6, 1)
    assert schedule.q3(1) == 13
    # q_0 需要 q_1 的葉數界，遠超過實例上限
    assert is_beyond(schedule.q3(0))


def test_three_cnf_schedule_above_half():
    schedule = build_schedule(_rho(3, 4), 3, cap=100, family="thr3")
    assert (schedule.z, schedule.t) == (3, 0)
    assert schedule.q3(0) == 9


def test_three_cnf_schedule_three_sevenths():
    schedule = build_schedule(_rho(3, 7), 3, cap=100, family="thr3")
    assert (schedule.z, schedule.t) == (7, 1)


def test_values_above_cap_become_beyond():
    schedule = build_schedule(_rho(1, 2), 3, cap=10, family="thr3")
    assert schedule.q3(1) is Beyond
    assert schedule.limit(schedule.q3(1)) == 11
    assert str(Beyond) == "beyond"


def test_q3_range_and_family_checks():
    schedule = build_schedule(_rho(1, 2), 3, cap=100, family="thr3")
    with pytest.raises(ValueError):
        schedule.q3(2)
    with pytest.raises(InvalidConfig):
        schedule.q((0,))


def test_k_cnf_schedule_at_half():
    schedule = build_schedule(_rho(1, 2), 3, cap=100, family="thrk")
    assert (schedule.z, schedule.t) == (6, 1)
    assert schedule.alpha == Fraction(1, 2) - Fraction(7, 8) ** 6
    assert schedule.beta == Fraction(1, 16)
    assert schedule.q((0,)) == 11
    assert schedule.extraction_q((0,)) == [6, 11]
    assert schedule.as_dict()["q"] == {"0": "11"}


def test_k_cnf_schedule_z_for_width_four():
    schedule = build_schedule(_rho(1, 2), 4, cap=100)
    assert schedule.family == "thrk"
    assert schedule.z == 11
    assert schedule.weights == 2


def test_two_cnf_schedule_has_only_z():
    schedule = build_schedule(_rho(1, 2), 2, cap=50)
    assert schedule.weights == 0
    assert schedule.extraction_q(()) == [schedule.z]


def test_invalid_schedules():
    with pytest.raises(InvalidConfig):
        build_schedule(_rho(1, 2), 1, cap=10)
    with pytest.raises(InvalidConfig):
        build_schedule(_rho(1, 2), 4, cap=10, family="thr3")
    with pytest.raises(InvalidConfig):
        build_schedule(_rho(1, 2), 3, cap=10, family="other")


def test_schedule_materialization_uses_budget():
    budget = Budget(cap=1)
    schedule = build_schedule(_rho(1, 2), 3, cap=100, family="thr3", budget=budget)
    schedule.q3(1)
    assert budget.leaves_expanded == 1
    with pytest.raises(BudgetExceeded):
        build_schedule(_rho(1, 2), 3, cap=100, family="thrk", budget=Budget(cap=0)).q((0,))
