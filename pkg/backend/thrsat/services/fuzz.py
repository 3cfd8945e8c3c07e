"""以固定種子產生隨機實例，逐一與暴力計數比對。

每個實例的亂數來源只由 (seed, index) 決定，平行執行時結果仍依 index 排序，整批可完全重現。
"""

from __future__ import annotations

import logging
import random
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Any, Optional, Sequence

from thrsat.core.errors import BudgetExceeded, InvalidConfig, TooManyLongClauses
from thrsat.services.arithmetic import parse_threshold
from thrsat.services.decomposition import Budget
from thrsat.services.formula import CnfFormula, Threshold, serialize_dimacs
from thrsat.services.inference import decide_emaj2sat, decide_majmaj2sat
from thrsat.services.oracle import (
    GeneratorConfig,
    brute_count,
    brute_decide,
    brute_two_level,
    load_fuzz_profiles,
    random_kcnf,
)
from thrsat.services.solvers.dispatch import ALGORITHMS, decide
from thrsat.services.solvers.verdict import Verdict

logger = logging.getLogger(__name__)

TWO_LEVEL_DECIDERS = ("emaj", "majmaj")
SEED_STRIDE = 1_000_003


@dataclass(frozen=True)
class FuzzPlan:
    k: int = 3
    n: tuple[int, int] = (4, 12)
    m: tuple[int, int] = (0, 40)
    thresholds: tuple[str, ...] = ("1/2",)
    sigmas: tuple[str, ...] = ("1/2",)
    decider: str = "auto"
    gt: bool = False
    count: int = 100
    seed: int = 0
    width_mix: bool = False
    fallback_oracle: bool = False
    budget_leaves: Optional[int] = None

    def validate(self) -> None:
        if self.decider not in ALGORITHMS + TWO_LEVEL_DECIDERS:
            raise InvalidConfig(f"unknown decider {self.decider!r}")
        if self.count < 0:
            raise InvalidConfig("count must be >= 0", {"count": self.count})
        lo, hi = self.n
        if not 1 <= lo <= hi:
            raise InvalidConfig("n range must satisfy 1 <= lo <= hi", {"n": list(self.n)})
        if lo < self.k and self.m[1] > 0:
            raise InvalidConfig("n range must start at k or above", {"n": list(self.n), "k": self.k})
        if self.decider in TWO_LEVEL_DECIDERS and lo < 2:
            raise InvalidConfig("two-level corpora need n >= 2", {"n": list(self.n)})
        if not 0 <= self.m[0] <= self.m[1]:
            raise InvalidConfig("m range must satisfy 0 <= lo <= hi", {"m": list(self.m)})
        if not self.thresholds:
            raise InvalidConfig("at least one threshold is required")
        for text in self.thresholds + self.sigmas:
            parse_threshold(text)


def _as_range(value: Any, name: str) -> tuple[int, int]:
    if isinstance(value, int):
        return value, value
    if isinstance(value, (list, tuple)) and len(value) == 2:
        return int(value[0]), int(value[1])
    raise InvalidConfig(f"profile field {name} must be an int or [lo, hi]", {name: value})


def plan_from_profile(name: str, profiles: Optional[dict[str, dict]] = None, **overrides: Any) -> FuzzPlan:
    """讀取 fuzz_profiles.yaml 中的設定；overrides 中不為 None 的欄位覆蓋設定檔。"""
    profiles = load_fuzz_profiles() if profiles is None else profiles
    if name not in profiles:
        raise InvalidConfig(f"unknown fuzz profile {name!r}", {"known": sorted(profiles)})
    raw = profiles[name]
    plan = FuzzPlan(
        k=int(raw.get("k", 3)),
        n=_as_range(raw.get("n", [4, 12]), "n"),
        m=_as_range(raw.get("m", [0, 40]), "m"),
        thresholds=tuple(str(t) for t in raw.get("thresholds", ["1/2"])),
        sigmas=tuple(str(s) for s in raw.get("sigmas", ["1/2"])),
        decider=str(raw.get("decider", "auto")),
        gt=bool(raw.get("gt", False)),
        count=int(raw.get("count", 100)),
        width_mix=bool(raw.get("width_mix", False)),
    )
    return with_overrides(plan, **overrides)


def with_overrides(plan: FuzzPlan, **overrides: Any) -> FuzzPlan:
    return replace(plan, **{key: value for key, value in overrides.items() if value is not None})


@dataclass
class FuzzCase:
    index: int
    formula: CnfFormula
    rho: Threshold
    sigma: Optional[Threshold] = None
    answer: Optional[bool] = None
    expected: Optional[bool] = None
    branch_tag: Optional[str] = None
    count_mismatch: bool = False
    budget_exceeded: bool = False
    skipped: bool = False
    good_count: Optional[int] = None
    expected_good_count: Optional[int] = None

    @property
    def mismatch(self) -> bool:
        if self.budget_exceeded or self.skipped:
            return False
        return self.answer != self.expected or self.count_mismatch

    @property
    def dimacs(self) -> str:
        return serialize_dimacs(self.formula)


@dataclass
class FuzzSummary:
    plan: FuzzPlan
    cases: list[FuzzCase] = field(default_factory=list)

    @property
    def completed(self) -> int:
        return sum(1 for c in self.cases if not c.budget_exceeded and not c.skipped)

    @property
    def budget_exceeded(self) -> int:
        return sum(1 for c in self.cases if c.budget_exceeded)

    @property
    def skipped(self) -> int:
        return sum(1 for c in self.cases if c.skipped)

    @property
    def mismatches(self) -> list[FuzzCase]:
        return [c for c in self.cases if c.mismatch]

    def branch_tags(self) -> dict[str, int]:
        return dict(Counter(c.branch_tag for c in self.cases if c.branch_tag))


def make_case(plan: FuzzPlan, index: int) -> FuzzCase:
    rng = random.Random(plan.seed * SEED_STRIDE + index)
    n = rng.randint(*plan.n)
    m = rng.randint(*plan.m)
    two_level = plan.decider in TWO_LEVEL_DECIDERS
    cfg = GeneratorConfig(
        n=n,
        clause_count=m,
        k=plan.k,
        seed=rng.randrange(1 << 32),
        role_split=rng.randint(1, n - 1) if two_level else None,
        width_mix=plan.width_mix,
    )
    rho = parse_threshold(rng.choice(plan.thresholds))
    sigma = parse_threshold(rng.choice(plan.sigmas)) if two_level else None
    return FuzzCase(index, random_kcnf(cfg), rho, sigma)


def _certified_count_matches(verdict: Verdict, formula: CnfFormula) -> bool:
    exact = verdict.exact_count
    return exact is None or exact == brute_count(formula).value


def run_case(plan: FuzzPlan, index: int) -> FuzzCase:
    case = make_case(plan, index)
    budget = Budget(cap=plan.budget_leaves) if plan.budget_leaves else Budget()
    try:
        if plan.decider == "emaj":
            verdict = decide_emaj2sat(case.formula, case.sigma, budget=budget)
            truth = brute_two_level(case.formula, case.rho, case.sigma)
            case.expected = truth.emaj
        elif plan.decider == "majmaj":
            verdict = decide_majmaj2sat(case.formula, case.rho, case.sigma, budget=budget)
            truth = brute_two_level(case.formula, case.rho, case.sigma)
            case.expected = truth.majmaj
            case.good_count = verdict.good_assignment_count
            case.expected_good_count = truth.good_count
            case.count_mismatch = verdict.good_assignment_count is not None and case.good_count != truth.good_count
        else:
            verdict = decide(
                case.formula,
                case.rho,
                algorithm=plan.decider,
                gt=plan.gt,
                budget=budget,
                fallback_oracle=plan.fallback_oracle,
            )
            case.expected = brute_decide(case.formula, case.rho, strict=plan.gt)
            case.count_mismatch = not _certified_count_matches(verdict, case.formula)
    except BudgetExceeded as exc:
        logger.info("實例 %s 超出列舉上限（stage=%s）", index, exc.stage)
        case.budget_exceeded = True
        return case
    except TooManyLongClauses:
        case.skipped = True
        return case
    case.answer = verdict.is_yes
    case.branch_tag = verdict.branch_tag
    if case.mismatch:
        logger.error("實例 %s 與暴力計數不符：answer=%s expected=%s branch=%s", index, case.answer, case.expected, case.branch_tag)
    return case


def run_fuzz(plan: FuzzPlan, *, jobs: int = 1, indices: Optional[Sequence[int]] = None) -> FuzzSummary:
    plan.validate()
    indices = list(range(plan.count)) if indices is None else list(indices)
    logger.info("開始比對：decider=%s 實例數=%s seed=%s jobs=%s", plan.decider, len(indices), plan.seed, jobs)
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            cases = list(pool.map(lambda i: run_case(plan, i), indices))
    else:
        cases = [run_case(plan, i) for i in indices]
    summary = FuzzSummary(plan, cases)
    logger.info(
        "比對完成：完成 %s、超出額度 %s、不符 %s",
        summary.completed,
        summary.budget_exceeded,
        len(summary.mismatches),
    )
    return summary
