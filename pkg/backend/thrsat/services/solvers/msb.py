"""#SAT 的最高位元：以 t+1 次門檻判定逐位求出 #SAT(F) = Σ b_j·2^{n−j} 的 b_0..b_t。"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional

from thrsat.services.arithmetic import canonicalize_threshold
from thrsat.services.decomposition import Budget
from thrsat.services.formula import CnfFormula, normalize
from thrsat.services.solvers.kcnf import decide_thrksat

logger = logging.getLogger(__name__)


def msb_count(formula: CnfFormula, t: int, *, budget: Optional[Budget] = None) -> tuple[int, ...]:
    """第 i 位以門檻 ρ_i = 2^{−i} + Σ_{j<i} b_j·2^{−j} 判定。

    ρ_0 = 1 不是合法門檻：b_0 = 1 若且唯若 F 沒有子句，此時其餘位元皆為 0。
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    formula = normalize(formula)
    budget = budget or Budget()

    if formula.is_top:
        return (1,) + (0,) * t
    bits = [0]
    prefix = Fraction(0)
    for i in range(1, t + 1):
        rho = canonicalize_threshold(prefix + Fraction(1, 1 << i))
        verdict = decide_thrksat(formula, rho, budget=budget)
        bit = 1 if verdict.is_yes else 0
        logger.debug("第 %s 位：rho=%s -> %s（%s）", i, rho, bit, verdict.branch_tag)
        bits.append(bit)
        if bit:
            prefix += Fraction(1, 1 << i)
    return tuple(bits)
