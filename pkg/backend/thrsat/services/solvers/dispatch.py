"""依子句寬度與門檻挑選判定演算法；額度不足時可退回暴力計數。"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional

from thrsat.core import config
from thrsat.core.errors import BudgetExceeded, InvalidConfig
from thrsat.services.decomposition import Budget
from thrsat.services.formula import CnfFormula, Threshold, normalize
from thrsat.services.inference import decide_maj2sat_long_clauses
from thrsat.services.oracle import brute_count
from thrsat.services.solvers.kcnf import decide_gt_thrksat, decide_thrksat
from thrsat.services.solvers.three_cnf import (
    decide_gt_maj3sat,
    decide_gt_thr3sat,
    decide_maj3sat,
    decide_thr3sat,
    decide_thr3sat_above_half,
)
from thrsat.services.solvers.two_cnf import decide_gt_thr2sat, decide_thr2sat
from thrsat.services.solvers.verdict import Verdict, count_verdict

logger = logging.getLogger(__name__)

HALF = Fraction(1, 2)
ALGORITHMS = ("auto", "thr2", "maj3", "above-half", "thr3", "thrk", "long2")


def choose_algorithm(formula: CnfFormula, rho: Threshold, requested: str = "auto") -> str:
    if requested not in ALGORITHMS:
        raise InvalidConfig(f"unknown algorithm {requested!r}", {"known": list(ALGORITHMS)})
    if requested != "auto":
        return requested
    width = normalize(formula).max_width
    if width <= 2:
        return "thr2"
    if width == 3:
        if rho.fraction == HALF:
            return "maj3"
        return "above-half" if rho.fraction > HALF else "thr3"
    return "thrk"


def _split_long(formula: CnfFormula) -> tuple[CnfFormula, list]:
    base = [c for c in formula.clauses if c.width <= 2]
    longs = [c for c in formula.clauses if c.width > 2]
    return CnfFormula(formula.num_vars, tuple(base), formula.roles), longs


def run_decider(
    algorithm: str,
    formula: CnfFormula,
    rho: Threshold,
    *,
    gt: bool = False,
    budget: Optional[Budget] = None,
) -> Verdict:
    budget = budget or Budget()
    if algorithm == "thr2":
        decide = decide_gt_thr2sat if gt else decide_thr2sat
        return decide(formula, rho, budget=budget)
    if algorithm == "maj3":
        if rho.fraction != HALF:
            raise InvalidConfig("maj3 only decides rho = 1/2", {"rho": str(rho)})
        decide = decide_gt_maj3sat if gt else decide_maj3sat
        return decide(formula, budget=budget)
    if algorithm == "above-half":
        # 嚴格版本沒有專用演算法，改走一般 ρ 的 3-CNF 判定
        if gt:
            return decide_gt_thr3sat(formula, rho, budget=budget)
        return decide_thr3sat_above_half(formula, rho, budget=budget)
    if algorithm == "thr3":
        decide = decide_gt_thr3sat if gt else decide_thr3sat
        return decide(formula, rho, budget=budget)
    if algorithm == "thrk":
        decide = decide_gt_thrksat if gt else decide_thrksat
        return decide(formula, rho, budget=budget)
    if algorithm == "long2":
        if gt:
            raise InvalidConfig("long2 has no strict variant")
        base, longs = _split_long(formula)
        return decide_maj2sat_long_clauses(base, longs, rho, budget=budget)
    raise InvalidConfig(f"unknown algorithm {algorithm!r}", {"known": list(ALGORITHMS)})


def decide(
    formula: CnfFormula,
    rho: Threshold,
    *,
    algorithm: str = "auto",
    gt: bool = False,
    budget: Optional[Budget] = None,
    fallback_oracle: bool = False,
) -> Verdict:
    """挑選演算法並判定；fallback_oracle 時把 BudgetExceeded 換成暴力計數的結果。"""
    budget = budget or Budget()
    chosen = choose_algorithm(formula, rho, algorithm)
    try:
        return run_decider(chosen, formula, rho, gt=gt, budget=budget)
    except BudgetExceeded as exc:
        if not fallback_oracle or formula.num_vars > config.ORACLE_MAX_VARS:
            raise
        logger.warning("%s 超出列舉上限（stage=%s），改用暴力計數", chosen, exc.stage)
        return count_verdict(
            "oracle-fallback",
            brute_count(formula),
            rho,
            formula.num_vars,
            strict=gt,
            params={"algorithm": chosen, "budget_stage": exc.stage},
            budget=budget,
        )
