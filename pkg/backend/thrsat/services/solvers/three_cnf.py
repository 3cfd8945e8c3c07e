"""3-CNF 的門檻判定。

- decide_maj3sat：ρ = 1/2 的專用程序（共同文字、大不相交集合、2-子句拉回樣式、精確計數）。
- decide_thr3sat_above_half：ρ > 1/2 時的兩層不相交集合演算法，YES 一律附精確計數。
- decide_thr3sat：任意 ρ 的四情況迴圈，逐輪斷言大 1-向日葵的核心文字。
- decide_gt_*：嚴格大於的版本。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional

from thrsat.core.errors import CertificateMismatch, InvalidThreshold, WidthViolation
from thrsat.services.arithmetic import canonicalize_threshold, ceil_scaled_ln
from thrsat.services.combinatorics import (
    Sunflower,
    disjoint_set_bound,
    enumerate_satisfying_assignments,
    extract_3cnf,
    greedy_disjoint,
    maximal_disjoint_set,
)
from thrsat.services.decomposition import Budget, count_tree
from thrsat.services.formula import (
    Clause,
    CnfFormula,
    ExactCount,
    Literal,
    Ordering,
    Threshold,
    compare_count_to_threshold,
    literal_key,
    normalize,
)
from thrsat.services.solvers.schedule import ParameterSchedule, build_schedule
from thrsat.services.solvers.two_cnf import empty_clause_witness
from thrsat.services.solvers.verdict import (
    CountCertificate,
    HittingSet,
    NoWitness,
    Verdict,
    WitnessKind,
    count_verdict,
    no_verdict,
    yes_verdict,
)
from thrsat.services.twosat import is_2sat_satisfiable, satisfiable_by_disjoint_set

logger = logging.getLogger(__name__)

HALF = canonicalize_threshold(1, 2)

# 多數決程序的常數
MAJ_DISJOINT_LIMIT = 6
MAJ_FAN_SIZE = 8
MAJ_TWO_CLAUSE_TRIPLE = 3
# 大於一半時的常數
ABOVE_HALF_C1 = 10
ABOVE_HALF_LN_SCALE = 72


def _require_3cnf(formula: CnfFormula) -> CnfFormula:
    formula = normalize(formula)
    if formula.max_width > 3:
        raise WidthViolation("needs a 3-CNF", {"width": formula.max_width})
    return formula


def common_literal(formula: CnfFormula) -> Optional[Literal]:
    """出現在每個子句中的文字（取字典序最小者）；空公式回傳 None。"""
    if not formula.clauses:
        return None
    shared = set(formula.clauses[0].literals)
    for clause in formula.clauses[1:]:
        shared &= set(clause.literals)
        if not shared:
            return None
    return min(shared, key=literal_key)


def _full_count(formula: CnfFormula) -> ExactCount:
    return ExactCount(1 << formula.num_vars, 1)


# ---------------------------------------------------------------------- 2-子句拉回


@dataclass(frozen=True)
class _Pullback:
    origin: int
    reduced: tuple[Literal, ...]


def reduced_disjoint_set(formula: CnfFormula, alpha: tuple[Literal, ...]) -> Optional[list[_Pullback]]:
    """F|alpha 中 2-子句的極大不相交集合，每個成員記下來源子句（相同化簡結果取最前者）。

    alpha 令某子句為假時回傳 None。
    """
    true_lits = set(alpha)
    first_origin: dict[tuple[Literal, ...], int] = {}
    for idx, clause in enumerate(formula.clauses):
        if any(lit in true_lits for lit in clause.literals):
            continue
        rest = tuple(lit for lit in clause.literals if -lit not in true_lits)
        if not rest:
            return None
        if len(rest) == 2 and rest not in first_origin:
            first_origin[rest] = idx
    chosen = set(greedy_disjoint((idx, rest) for rest, idx in first_origin.items()))
    return [_Pullback(idx, rest) for rest, idx in first_origin.items() if idx in chosen]


def _fan(formula: CnfFormula, members: list[_Pullback]) -> tuple[Optional[Literal], list[int]]:
    """3-子句拉回依「被刪去的文字」分組，回傳出現次數最多的文字與其子句。"""
    groups: dict[Literal, list[int]] = {}
    for member in members:
        clause = formula.clauses[member.origin]
        if clause.width != 3:
            continue
        (removed,) = [lit for lit in clause.literals if lit not in member.reduced]
        groups.setdefault(removed, []).append(member.origin)
    if not groups:
        return None, []
    best = min(groups, key=lambda lit: (-len(groups[lit]), literal_key(lit)))
    return best, groups[best]


def _fan_with_partner(formula: CnfFormula, literal: Literal, fan: list[int]) -> Optional[NoWitness]:
    """扇形子句 (ℓ ∨ a_i ∨ b_i) 加上一個不含 ℓ 的子句 E：上界 ½(1 − 2^{−|E∖¬ℓ|}) + ½(3/4)^{|fan|}。"""
    partner = next((idx for idx, clause in enumerate(formula.clauses) if literal not in clause.literals), None)
    if partner is None:
        return None
    remaining = formula.clauses[partner].without([-literal]).width
    bound = Fraction(1, 2) * (1 - Fraction(1, 1 << remaining)) + Fraction(1, 2) * Fraction(3, 4) ** len(fan)
    return NoWitness(WitnessKind.LITERAL_FAN, tuple(fan) + (partner,), bound, note=f"fan literal {literal}")


def _fan_alone(literal: Literal, fan: list[int]) -> NoWitness:
    bound = Fraction(1, 2) + Fraction(1, 2) * Fraction(3, 4) ** len(fan)
    return NoWitness(WitnessKind.LITERAL_FAN, tuple(fan), bound, note=f"fan literal {literal}")


def _two_clause_triple(formula: CnfFormula, members: list[_Pullback]) -> Optional[NoWitness]:
    originals = [m.origin for m in members if formula.clauses[m.origin].width == 2]
    if len(originals) < MAJ_TWO_CLAUSE_TRIPLE:
        return None
    chosen = tuple(originals[:MAJ_TWO_CLAUSE_TRIPLE])
    return NoWitness(WitnessKind.TWO_CLAUSE_TRIPLE, chosen, disjoint_set_bound(formula, chosen))


# ---------------------------------------------------------------------- MAJ-3SAT


def _exact_3cnf_count(formula: CnfFormula, budget: Budget):
    cap = len(formula.clauses) + 1
    outcome = extract_3cnf(formula, cap, cap, budget)
    return outcome.tree, count_tree(outcome.tree, formula.num_vars)


def decide_maj3sat(formula: CnfFormula, *, budget: Optional[Budget] = None) -> Verdict:
    formula = _require_3cnf(formula)
    budget = budget or Budget()
    n = formula.num_vars

    witness = empty_clause_witness(formula)
    if witness is not None:
        return no_verdict("empty-clause", witness, HALF, budget=budget)
    if formula.is_top:
        return count_verdict("exact-count", _full_count(formula), HALF, n, budget=budget)

    shared = common_literal(formula)
    if shared is not None:
        return yes_verdict("common-literal", HittingSet((shared,)), budget=budget)

    disjoint = maximal_disjoint_set(formula, width_filter=3)
    params = {"disjoint_set": disjoint.size}
    if disjoint.size >= MAJ_DISJOINT_LIMIT:
        members = disjoint.clause_indices
        witness = NoWitness(WitnessKind.DISJOINT_SET, members, disjoint_set_bound(formula, members))
        return no_verdict("large-disjoint-set", witness, HALF, params=params, budget=budget)

    trigger = 48 * disjoint.size + 2
    budget.reserve(7 ** disjoint.size, stage="maj3-scan")
    for alpha in enumerate_satisfying_assignments(formula, disjoint):
        members = reduced_disjoint_set(formula, alpha)
        if members is None:
            continue
        triple = _two_clause_triple(formula, members)
        if triple is not None:
            return no_verdict("two-clause-triple", triple, HALF, params=params, budget=budget)
        if disjoint.size and len(members) >= trigger:
            # 至多兩個原生 2-子句，其餘分給 alpha 設為假的 3|S| 個文字，必有大小 ≥ 16 的扇形；
            # 沒有共同文字，所以一定有不含 ℓ 的子句
            literal, fan = _fan(formula, members)
            fan_witness = None
            if literal is not None and len(fan) >= MAJ_FAN_SIZE:
                fan_witness = _fan_with_partner(formula, literal, fan)
            if fan_witness is None:
                raise CertificateMismatch(
                    "large reduced disjoint set without a literal fan",
                    {"members": len(members), "fan": len(fan), "disjoint_set": disjoint.size},
                )
            return no_verdict("literal-fan", fan_witness, HALF, params=params, budget=budget)

    tree, count = _exact_3cnf_count(formula, budget)
    return count_verdict("exact-count", count, HALF, n, tree=tree, params=params, budget=budget)


def decide_gt_maj3sat(formula: CnfFormula, *, budget: Optional[Budget] = None) -> Verdict:
    """#SAT(F) > 2^{n−1}？共同文字 ℓ 時，答案取決於 F|¬ℓ（一個 2-CNF）是否可滿足。"""
    formula = _require_3cnf(formula)
    budget = budget or Budget()
    verdict = decide_maj3sat(formula, budget=budget)
    if not verdict.is_yes:
        return verdict
    cert = verdict.certificate
    if isinstance(cert, HittingSet):
        (literal,) = cert.literals
        rest = formula.condition([-literal])
        if is_2sat_satisfiable(c.literals for c in rest.clauses):
            return yes_verdict("gt-common-literal", cert, budget=budget)
        # 恰好一半：所有解都令 ℓ 為真
        exact = ExactCount(1 << (formula.num_vars - 1), 1)
        return count_verdict("gt-common-literal", exact, HALF, formula.num_vars, strict=True, budget=budget)
    assert isinstance(cert, CountCertificate)
    return count_verdict(
        "gt-" + verdict.branch_tag,
        cert.count,
        HALF,
        formula.num_vars,
        tree=cert.tree,
        strict=True,
        params=verdict.params_used,
        budget=budget,
    )


# ---------------------------------------------------------------------- ρ > 1/2


def decide_thr3sat_above_half(
    formula: CnfFormula,
    rho: Threshold,
    *,
    budget: Optional[Budget] = None,
) -> Verdict:
    formula = _require_3cnf(formula)
    epsilon = rho.fraction - Fraction(1, 2)
    if epsilon <= 0:
        raise InvalidThreshold("needs a threshold above 1/2", {"rho": str(rho)})
    budget = budget or Budget()
    n = formula.num_vars
    c2 = ceil_scaled_ln(ABOVE_HALF_LN_SCALE, 1 / epsilon)
    params: dict = {"c1": ABOVE_HALF_C1, "c2": c2}

    witness = empty_clause_witness(formula)
    if witness is not None:
        return no_verdict("empty-clause", witness, rho, params=params, budget=budget)
    if formula.is_top:
        return count_verdict("exact-count", _full_count(formula), rho, n, params=params, budget=budget)

    disjoint = maximal_disjoint_set(formula, width_filter=3)
    params["disjoint_set"] = disjoint.size
    if disjoint.size > ABOVE_HALF_C1:
        members = disjoint.clause_indices
        witness = NoWitness(WitnessKind.DISJOINT_SET, members, disjoint_set_bound(formula, members))
        return no_verdict("large-disjoint-set", witness, rho, params=params, budget=budget)

    budget.reserve(7 ** disjoint.size, stage="above-half-scan")
    for alpha in enumerate_satisfying_assignments(formula, disjoint):
        members = reduced_disjoint_set(formula, alpha)
        if members is None or len(members) < c2:
            continue
        candidates: list[NoWitness] = []
        triple = _two_clause_triple(formula, members)
        if triple is not None:
            candidates.append(triple)
        literal, fan = _fan(formula, members)
        if literal is not None:
            candidates.append(_fan_alone(literal, fan))
            partnered = _fan_with_partner(formula, literal, fan)
            if partnered is not None:
                candidates.append(partnered)
        best = min(candidates, key=lambda w: w.bound, default=None)
        # 只在精確上界確實低於 ρ 時提早回答，否則交給精確計數
        if best is not None and best.bound < rho.fraction:
            return no_verdict("large-reduced-disjoint-set", best, rho, params=params, budget=budget)
        logger.debug("S_A 大小 %s ≥ c2=%s 但上界 %s 未低於 ρ，改為精確計數", len(members), c2, getattr(best, "bound", None))

    tree, count = _exact_3cnf_count(formula, budget)
    return count_verdict("exact-count", count, rho, n, tree=tree, params=params, budget=budget)


# ---------------------------------------------------------------------- 一般 ρ


@dataclass
class _LedgerEntry:
    literal: Literal
    petals: tuple[int, ...]
    bound: Fraction


@dataclass
class _Thr3State:
    formula: CnfFormula
    # 目前公式第 i 個子句對應原公式的索引
    origins: list[int]
    asserted: list[Literal] = field(default_factory=list)
    ledger: list[_LedgerEntry] = field(default_factory=list)

    @property
    def r(self) -> int:
        return len(self.asserted)

    def ledger_total(self) -> Fraction:
        return sum((entry.bound for entry in self.ledger), Fraction(0))

    def ledger_clauses(self) -> tuple[int, ...]:
        return tuple(idx for entry in self.ledger for idx in entry.petals)

    def assert_core(self, sunflower: Sunflower) -> None:
        (literal,) = sunflower.core
        # 核心文字為假時，花瓣去掉核心後仍須全部滿足
        bound = Fraction(1, 1 << (self.r + 1))
        for idx in sunflower.petal_indices:
            bound *= 1 - Fraction(1, 1 << (self.formula.clauses[idx].width - 1))
        self.ledger.append(_LedgerEntry(literal, tuple(self.origins[i] for i in sunflower.petal_indices), bound))
        self.asserted.append(literal)

        kept: list[Clause] = []
        origins: list[int] = []
        for clause, origin in zip(self.formula.clauses, self.origins):
            if literal in clause.literals:
                continue
            kept.append(clause.without([-literal]))
            origins.append(origin)
        self.formula = self.formula.with_clauses(kept)
        self.origins = origins


def decide_thr3sat(
    formula: CnfFormula,
    rho: Threshold,
    *,
    budget: Optional[Budget] = None,
    schedule: Optional[ParameterSchedule] = None,
) -> Verdict:
    formula = _require_3cnf(formula)
    budget = budget or Budget()
    n = formula.num_vars
    schedule = schedule or build_schedule(rho, 3, cap=len(formula.clauses) + 1, budget=budget)

    witness = empty_clause_witness(formula)
    if witness is not None:
        return no_verdict("empty-clause", witness, rho, params=schedule.as_dict(), budget=budget)

    state = _Thr3State(formula, list(range(len(formula.clauses))))
    while state.r <= schedule.t:
        r = state.r
        q = schedule.q3(r)
        outcome = extract_3cnf(state.formula, schedule.z, schedule.limit(q), budget)

        if outcome.tree is not None:
            # 目前公式已消去 r 個被斷言的變數
            count = count_tree(outcome.tree, n - r)
            params = {**schedule.as_dict(), "r": r}
            if r == 0:
                return count_verdict(
                    "case3-exact-count", count, rho, n, tree=outcome.tree, params=params, budget=budget
                )
            if compare_count_to_threshold(count, rho, n) != Ordering.LT:
                cert = CountCertificate(count, outcome.tree, tuple(state.asserted))
                return yes_verdict("case3-exact-count", cert, params=params, budget=budget)
            bound = Fraction(count.value, 1 << n) + state.ledger_total()
            witness = NoWitness(WitnessKind.SUNFLOWER_LEDGER, state.ledger_clauses(), bound, note="exact count + ledger")
            return no_verdict("case3-exact-count", witness, rho, params=params, budget=budget)

        sunflower = outcome.sunflower
        if sunflower.weight == 0:
            members = sunflower.petal_indices
            bound = disjoint_set_bound(state.formula, members) / (1 << r) + state.ledger_total()
            kind = WitnessKind.DISJOINT_SET if r == 0 else WitnessKind.SUNFLOWER_LEDGER
            clauses = tuple(state.origins[i] for i in members) + state.ledger_clauses()
            witness = NoWitness(kind, clauses, bound)
            return no_verdict(
                "case1-large-0-sunflower", witness, rho, params={**schedule.as_dict(), "r": r}, budget=budget
            )

        state.assert_core(sunflower)
        logger.debug("斷言 1-向日葵核心 %s（大小 %s），r=%s", sunflower.core, sunflower.size, state.r)
        if state.formula.is_top and state.r <= schedule.t:
            return yes_verdict(
                "case2-hitting-set",
                HittingSet(tuple(state.asserted)),
                params={**schedule.as_dict(), "r": state.r},
                budget=budget,
            )

    bound = Fraction(1, 1 << (schedule.t + 1)) + state.ledger_total()
    witness = NoWitness(WitnessKind.SUNFLOWER_LEDGER, state.ledger_clauses(), bound, note="t+1 cores asserted")
    return no_verdict(
        "case4-many-1-sunflowers", witness, rho, params={**schedule.as_dict(), "r": state.r}, budget=budget
    )


def _asserted_literals(verdict: Verdict) -> tuple[Literal, ...]:
    cert = verdict.certificate
    if isinstance(cert, HittingSet):
        return cert.literals
    if isinstance(cert, CountCertificate):
        return cert.assumed
    return ()


def _other_branch_model(formula: CnfFormula, asserted: tuple[Literal, ...], budget: Budget):
    """是否有 T ⊊ S 使 φ 在「T 為真、S∖T 為假」下可滿足；回傳第一個找到的模型。"""
    r = len(asserted)
    for bits in product((True, False), repeat=r):
        if all(bits):
            continue
        choice = tuple(lit if keep else -lit for lit, keep in zip(asserted, bits))
        restricted = formula.condition(choice)
        model = satisfiable_by_disjoint_set(restricted, budget)
        if model is not None:
            return choice + model
    return None


def decide_gt_thr3sat(formula: CnfFormula, rho: Threshold, *, budget: Optional[Budget] = None) -> Verdict:
    """#SAT(φ) > ρ·2^n？

    斷言 S 之後若 #SAT(φ ∧ S) 恰為 ρ·2^n，其餘解都落在某個「T 為真、S∖T 為假」的分支，
    因此答案為 YES 若且唯若其中某分支可滿足。
    """
    formula = _require_3cnf(formula)
    budget = budget or Budget()
    n = formula.num_vars
    verdict = decide_thr3sat(formula, rho, budget=budget)
    if not verdict.is_yes:
        return verdict

    cert = verdict.certificate
    asserted = _asserted_literals(verdict)
    if isinstance(cert, CountCertificate):
        on_s = cert.count
    else:
        on_s = ExactCount(1 << (n - len(asserted)), 1)
    params = dict(verdict.params_used)

    order = compare_count_to_threshold(on_s, rho, n)
    if order == Ordering.GT:
        return yes_verdict("gt-" + verdict.branch_tag, cert, params=params, budget=budget)
    if order == Ordering.LT:
        raise CertificateMismatch("YES verdict with a count below the threshold", {"count": on_s.value})

    model = _other_branch_model(formula, asserted, budget) if asserted else None
    if model is not None:
        params["witness"] = list(model)
        return yes_verdict("gt-extra-branch", cert, params=params, budget=budget)
    # 其他分支皆不可滿足，#SAT(φ) 恰為 ρ·2^n
    tree = cert.tree if isinstance(cert, CountCertificate) else None
    return count_verdict("gt-exact-threshold", on_s, rho, n, tree=tree, strict=True, params=params, budget=budget)
