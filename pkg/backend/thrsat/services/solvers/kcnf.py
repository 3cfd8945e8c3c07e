"""任意 k 的門檻判定：逐步把大向日葵的核心加入 ψ，直到能精確計數或證明比例不足。

流程
1. F ← φ，ψ ← ⊤，r⃗ ← 0。
2. 當每個 w 都有 r_w < t_w(r⃗[w−1]) 時：
   - 以 Q_0 = z、Q_w = q_w(r⃗[w]) 抽取向日葵；
   - 得到決策樹：精確計數 F（等同 φ ∧ ψ）並回答；
   - 得到 0-向日葵：回答 NO；
   - 得到 w-向日葵：先檢查核心的真子集是否為更小權重的大向日葵，再把核心加入 ψ，
     r_w 加一並把更高權重的計數歸零，移除所有包含核心的子句後加入核心本身。
3. 迴圈結束：ρ = 2^{−t_1} 且 F 恰為 t_1 個一致的單文字子句時回答 YES，否則 NO。

每個加入 ψ 的核心 C 記一筆帳：Pr[φ ∧ C_1 … C_{i−1} ∧ ¬C_i] ≤ 2^{−|C|}·∏(1 − 2^{−|P∖C|})，
NO 證書的上界即為對 φ ∧ ψ 的上界加上這些帳的總和。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Optional

from thrsat.core.errors import CertificateMismatch, WidthViolation
from thrsat.services.combinatorics import Sunflower, extract_kcnf, find_sunflower_with_core, greedy_disjoint
from thrsat.services.decomposition import Budget, count_tree
from thrsat.services.formula import (
    Clause,
    CnfFormula,
    ExactCount,
    Literal,
    Ordering,
    Threshold,
    compare_count_to_threshold,
    is_consistent,
    negate,
    normalize,
)
from thrsat.services.solvers.schedule import ParameterSchedule, build_schedule, is_beyond
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
from thrsat.services.twosat import find_model

logger = logging.getLogger(__name__)


def psi_label(index: int) -> int:
    """證書中以負數索引 −1−j 表示 ψ 的第 j 個核心。"""
    return -1 - index


@dataclass(frozen=True)
class LedgerEntry:
    core: tuple[Literal, ...]
    # 向日葵花瓣在原公式 φ 中的索引；負數為先前加入的 ψ 核心
    petals: tuple[int, ...]
    r_snapshot: tuple[int, ...]
    bound: Fraction

    @property
    def weight(self) -> int:
        return len(self.core)

    @property
    def size(self) -> int:
        return len(self.petals)

    def as_dict(self) -> dict:
        return {
            "core": list(self.core),
            "petals": list(self.petals),
            "weight": self.weight,
            "size": self.size,
            "r": list(self.r_snapshot),
            "bound": str(self.bound),
        }


@dataclass
class SunflowerLedger:
    """目前的 F、ψ 的核心與 r⃗；F 的每個子句都記著來源（φ 的索引或 ψ 標籤）。"""

    formula: CnfFormula
    origins: list[int]
    r: list[int]
    entries: list[LedgerEntry] = field(default_factory=list)

    @classmethod
    def start(cls, formula: CnfFormula, k: int) -> "SunflowerLedger":
        return cls(formula, list(range(len(formula.clauses))), [0] * max(k - 2, 0))

    @property
    def psi(self) -> tuple[tuple[Literal, ...], ...]:
        return tuple(entry.core for entry in self.entries)

    def psi_formula(self, num_vars: int) -> CnfFormula:
        return CnfFormula(num_vars, tuple(Clause(core) for core in self.psi))

    def total(self) -> Fraction:
        return sum((entry.bound for entry in self.entries), Fraction(0))

    def petal_labels(self) -> tuple[int, ...]:
        return tuple(idx for entry in self.entries for idx in entry.petals)

    def within_bounds(self, schedule: ParameterSchedule) -> bool:
        for w in range(1, len(self.r) + 1):
            bound = schedule.t_w(tuple(self.r[: w - 1]))
            if not is_beyond(bound) and self.r[w - 1] >= int(bound):
                return False
        return True

    def add_core(self, sunflower: Sunflower) -> None:
        core = sunflower.core
        w = len(core)
        bound = Fraction(1, 1 << w)
        for idx in sunflower.petal_indices:
            rest = self.formula.clauses[idx].without(core)
            bound *= 1 - Fraction(1, 1 << rest.width)
        petals = tuple(self.origins[i] for i in sunflower.petal_indices)
        self.entries.append(LedgerEntry(core, petals, tuple(self.r), bound))

        self.r[w - 1] += 1
        for x in range(w, len(self.r)):
            self.r[x] = 0

        kept: list[Clause] = []
        origins: list[int] = []
        for clause, origin in zip(self.formula.clauses, self.origins):
            if clause.contains_all(core):
                continue
            kept.append(clause)
            origins.append(origin)
        kept.append(Clause(core))
        origins.append(psi_label(len(self.entries) - 1))
        self.formula = self.formula.with_clauses(kept)
        self.origins = origins

    def as_dict(self) -> dict:
        return {"r": list(self.r), "psi": [entry.as_dict() for entry in self.entries], "ledger_total": str(self.total())}


def _preempt(ledger: SunflowerLedger, sunflower: Sunflower, schedule: ParameterSchedule, budget: Budget) -> Sunflower:
    """核心的非空真子集 D 若本身是大小 ≥ Q_{|D|} 的向日葵核心，改用 |D| 最小者。"""
    core = sunflower.core
    for v in range(1, len(core)):
        q_v = schedule.limit(schedule.q(tuple(ledger.r[:v])))
        for subset in combinations(core, v):
            found = find_sunflower_with_core(ledger.formula, subset, q_v, budget)
            if found is not None:
                logger.debug("以較小核心 %s 取代 %s", found.core, core)
                return found
    return sunflower


def _params(schedule: ParameterSchedule, ledger: SunflowerLedger) -> dict:
    return {**schedule.as_dict(), **ledger.as_dict()}


def _run(
    formula: CnfFormula,
    rho: Threshold,
    k: int,
    budget: Budget,
    schedule: ParameterSchedule,
) -> tuple[Verdict, SunflowerLedger]:
    n = formula.num_vars
    ledger = SunflowerLedger.start(formula, k)

    witness = empty_clause_witness(formula)
    if witness is not None:
        return no_verdict("empty-clause", witness, rho, params=schedule.as_dict(), budget=budget), ledger

    while ledger.within_bounds(schedule):
        budget.reserve(1, stage="ledger")
        outcome = extract_kcnf(ledger.formula, schedule.extraction_q(tuple(ledger.r)), budget)

        if outcome.tree is not None:
            count = count_tree(outcome.tree, n)
            params = _params(schedule, ledger)
            if not ledger.entries:
                verdict = count_verdict("exact-count", count, rho, n, tree=outcome.tree, params=params, budget=budget)
                return verdict, ledger
            if compare_count_to_threshold(count, rho, n) != Ordering.LT:
                cert = CountCertificate(count, outcome.tree, psi=ledger.psi)
                return yes_verdict("exact-count-with-psi", cert, params=params, budget=budget), ledger
            bound = Fraction(count.value, 1 << n) + ledger.total()
            witness = NoWitness(WitnessKind.SUNFLOWER_LEDGER, ledger.petal_labels(), bound, note="exact count + ledger")
            return no_verdict("exact-count-with-psi", witness, rho, params=params, budget=budget), ledger

        sunflower = outcome.sunflower
        if sunflower.weight == 0:
            members = sunflower.petal_indices
            bound = Fraction(1)
            for idx in members:
                bound *= 1 - Fraction(1, 1 << ledger.formula.clauses[idx].width)
            bound += ledger.total()
            kind = WitnessKind.SUNFLOWER_LEDGER if ledger.entries else WitnessKind.DISJOINT_SET
            labels = tuple(ledger.origins[i] for i in members) + ledger.petal_labels()
            witness = NoWitness(kind, labels, bound)
            verdict = no_verdict("large-0-sunflower", witness, rho, params=_params(schedule, ledger), budget=budget)
            return verdict, ledger

        sunflower = _preempt(ledger, sunflower, schedule, budget)
        ledger.add_core(sunflower)
        logger.debug("加入核心 %s（大小 %s），r=%s", sunflower.core, sunflower.size, ledger.r)

    return _exit(ledger, rho, schedule, budget), ledger


def _exit(ledger: SunflowerLedger, rho: Threshold, schedule: ParameterSchedule, budget: Budget) -> Verdict:
    """迴圈因某個 r_w 達到 t_w 而結束。"""
    params = _params(schedule, ledger)
    t_1 = schedule.t
    if ledger.r and ledger.r[0] >= t_1:
        return _exit_many_units(ledger, rho, t_1, params, budget)

    # 最後加入的 t_w 個權重 w 核心之間有大的不相交子集；其他 ψ 核心只會讓上界更小
    w = next(
        v
        for v in range(1, len(ledger.r) + 1)
        if not is_beyond(schedule.t_w(tuple(ledger.r[: v - 1])))
        and ledger.r[v - 1] >= int(schedule.t_w(tuple(ledger.r[: v - 1])))
    )
    recent = [j for j, entry in enumerate(ledger.entries) if entry.weight == w][-ledger.r[w - 1] :]
    order = recent + [j for j in range(len(ledger.entries)) if j not in recent]
    chosen = greedy_disjoint((j, ledger.entries[j].core) for j in order)
    bound = Fraction(1)
    for j in chosen:
        bound *= 1 - Fraction(1, 1 << ledger.entries[j].weight)
    bound += ledger.total()
    labels = tuple(psi_label(j) for j in chosen) + ledger.petal_labels()
    witness = NoWitness(WitnessKind.PSI_SUBFORMULA, labels, bound, note=f"many {w}-sunflowers")
    return no_verdict(f"exit-many-{w}-sunflowers", witness, rho, params=params, budget=budget)


def _exit_many_units(
    ledger: SunflowerLedger,
    rho: Threshold,
    t_1: int,
    params: dict,
    budget: Budget,
) -> Verdict:
    formula = ledger.formula
    units = [clause.literals[0] for clause in formula.clauses if clause.width == 1]
    unit_labels = tuple(
        ledger.origins[i] for i, clause in enumerate(formula.clauses) if clause.width == 1
    )
    if not is_consistent(units):
        witness = NoWitness(WitnessKind.PSI_SUBFORMULA, unit_labels, ledger.total(), note="inconsistent units")
        return no_verdict("exit-many-1-sunflowers", witness, rho, params=params, budget=budget)

    base = Fraction(1, 1 << len(set(units)))
    others = [i for i, clause in enumerate(formula.clauses) if clause.width != 1]
    if not others:
        if len(units) == t_1 and rho.fraction == Fraction(1, 1 << t_1):
            return yes_verdict("exit-hitting-set", HittingSet(tuple(units)), params=params, budget=budget)
        witness = NoWitness(WitnessKind.PSI_SUBFORMULA, unit_labels, base + ledger.total(), note="unit conjunction")
        return no_verdict("exit-many-1-sunflowers", witness, rho, params=params, budget=budget)

    # 其他子句不含任何單文字（包含它的子句已被移除），去掉被否定的文字後與單文字變數不相交
    first = formula.clauses[others[0]]
    residual = first.without([negate(lit) for lit in units])
    bound = base * (1 - Fraction(1, 1 << residual.width)) + ledger.total()
    labels = unit_labels + (ledger.origins[others[0]],) + ledger.petal_labels()
    witness = NoWitness(WitnessKind.PSI_SUBFORMULA, labels, bound, note="units + one more clause")
    return no_verdict("exit-many-1-sunflowers", witness, rho, params=params, budget=budget)


def _prepare(
    formula: CnfFormula,
    rho: Threshold,
    k: Optional[int],
    budget: Optional[Budget],
    schedule: Optional[ParameterSchedule],
) -> tuple[CnfFormula, int, Budget, ParameterSchedule]:
    formula = normalize(formula)
    k = max(formula.max_width, 2) if k is None else k
    if formula.max_width > k:
        raise WidthViolation(f"clause width {formula.max_width} exceeds k={k}", {"k": k})
    budget = budget or Budget()
    schedule = schedule or build_schedule(rho, k, cap=len(formula.clauses) + 1, family="thrk", budget=budget)
    return formula, k, budget, schedule


def decide_thrksat(
    formula: CnfFormula,
    rho: Threshold,
    *,
    k: Optional[int] = None,
    budget: Optional[Budget] = None,
    schedule: Optional[ParameterSchedule] = None,
) -> Verdict:
    formula, k, budget, schedule = _prepare(formula, rho, k, budget, schedule)
    verdict, _ = _run(formula, rho, k, budget, schedule)
    return verdict


def decide_gt_thrksat(
    formula: CnfFormula,
    rho: Threshold,
    *,
    k: Optional[int] = None,
    budget: Optional[Budget] = None,
    schedule: Optional[ParameterSchedule] = None,
) -> Verdict:
    """#SAT(φ) > ρ·2^n？

    YES 時 #SAT(φ ∧ ψ) ≥ ρ·2^n；恰好相等時答案取決於 φ ∧ ¬ψ 是否可滿足，
    依「第一個為假的核心 C_i」分段搜尋：φ ∧ C_1 … C_{i−1} ∧ ¬C_i。
    """
    formula, k, budget, schedule = _prepare(formula, rho, k, budget, schedule)
    n = formula.num_vars
    verdict, ledger = _run(formula, rho, k, budget, schedule)
    if not verdict.is_yes:
        return verdict

    cert = verdict.certificate
    params = dict(verdict.params_used)
    if isinstance(cert, CountCertificate):
        on_psi = cert.count
        tree = cert.tree
    else:
        on_psi = ExactCount(1 << (n - len(cert.literals)), 1)
        tree = None

    order = compare_count_to_threshold(on_psi, rho, n)
    if order == Ordering.GT:
        return yes_verdict("gt-" + verdict.branch_tag, cert, params=params, budget=budget)
    if order == Ordering.LT:
        raise CertificateMismatch("YES verdict with a count below the threshold", {"count": on_psi.value})

    cores = ledger.psi
    for i, core in enumerate(cores):
        budget.reserve(1, stage="witness")
        prefix = formula.extend(Clause(c) for c in cores[:i])
        model = find_model(prefix, assumptions=[negate(lit) for lit in core])
        if model is not None:
            params["witness"] = list(model)
            return yes_verdict("gt-outside-psi", cert, params=params, budget=budget)
    # φ ∧ ¬ψ 不可滿足，#SAT(φ) 恰為 ρ·2^n
    return count_verdict("gt-exact-threshold", on_psi, rho, n, tree=tree, strict=True, params=params, budget=budget)
