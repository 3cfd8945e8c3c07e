"""2-CNF 的門檻判定：極大不相交集合太大直接回答 NO，否則用決策樹精確計數。"""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Optional

from thrsat.core.errors import WidthViolation
from thrsat.services.arithmetic import smallest_exponent
from thrsat.services.combinatorics import disjoint_set_bound, extract_kcnf
from thrsat.services.decomposition import Budget, count_tree
from thrsat.services.formula import CnfFormula, Threshold, normalize
from thrsat.services.solvers.verdict import NoWitness, Verdict, WitnessKind, count_verdict, no_verdict

logger = logging.getLogger(__name__)


def c_alpha(alpha: Threshold) -> int:
    """c(α) = 1 + ⌈log_{4/3}(1/α)⌉，即 1 + 最小的 L 使 (3/4)^L ≤ α。"""
    return 1 + smallest_exponent(Fraction(3, 4), alpha.fraction, strict=False)


def empty_clause_witness(formula: CnfFormula) -> Optional[NoWitness]:
    for idx, clause in enumerate(formula.clauses):
        if clause.is_empty:
            return NoWitness(WitnessKind.DISJOINT_SET, (idx,), Fraction(0), note="empty clause")
    return None


def decide_thr2sat(
    formula: CnfFormula,
    alpha: Threshold,
    *,
    budget: Optional[Budget] = None,
    strict: bool = False,
) -> Verdict:
    formula = normalize(formula)
    if formula.max_width > 2:
        raise WidthViolation("decide_thr2sat needs a 2-CNF", {"width": formula.max_width})
    budget = budget or Budget()
    c = c_alpha(alpha)
    params = {"c_alpha": c}

    witness = empty_clause_witness(formula)
    if witness is not None:
        return no_verdict("empty-clause", witness, alpha, params=params, budget=budget)

    outcome = extract_kcnf(formula, [c + 1], budget)
    if outcome.sunflower is not None:
        members = outcome.sunflower.petal_indices
        witness = NoWitness(WitnessKind.DISJOINT_SET, members, disjoint_set_bound(formula, members))
        return no_verdict("large-disjoint-set", witness, alpha, params=params, budget=budget)

    count = count_tree(outcome.tree, formula.num_vars)
    return count_verdict(
        "exact-count",
        count,
        alpha,
        formula.num_vars,
        tree=outcome.tree,
        strict=strict,
        params=params,
        budget=budget,
    )


def decide_gt_thr2sat(formula: CnfFormula, alpha: Threshold, *, budget: Optional[Budget] = None) -> Verdict:
    """嚴格版本：#SAT(F) > α·2^n。NO 的不相交集合證書同樣適用（上界 < α）。"""
    return decide_thr2sat(formula, alpha, budget=budget, strict=True)
