"""門檻演算法的參數表：z、t 與各層向日葵大小 q。

參數依定義不等式取「最小滿足整數」，只在需要時才計算並快取。真正的數值通常是天文數字，
因此以實例大小為上限：任何可證明大於 ``cap = |F| + 1`` 的值記為 ``Beyond``，
代表 F 中不可能出現那麼大的向日葵，行為上與真值完全相同。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Optional, Union

from thrsat.core.errors import BudgetExceeded, InvalidConfig
from thrsat.services.arithmetic import eta, log2_ceil, log2_floor, smallest_exponent
from thrsat.services.combinatorics import capped_leaf_bound
from thrsat.services.decomposition import Budget
from thrsat.services.formula import Threshold

logger = logging.getLogger(__name__)

THREE_QUARTERS = Fraction(3, 4)
SEVEN_EIGHTHS = Fraction(7, 8)
# 向量長度上限以外的遞迴視為超出預算
MAX_SCHEDULE_DEPTH = 64


class _Beyond:
    _instance: Optional["_Beyond"] = None

    def __new__(cls) -> "_Beyond":
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "Beyond"

    def __str__(self) -> str:
        return "beyond"


Beyond = _Beyond()
ScheduleValue = Union[int, _Beyond]


def is_beyond(value: ScheduleValue) -> bool:
    return value is Beyond


def _family_for(k: int) -> str:
    return "thr3" if k == 3 else "thrk"


@dataclass
class ParameterSchedule:
    rho: Threshold
    k: int
    family: str
    cap: int
    z: int
    # thr3：⌊log2(1/ρ)⌋；thrk：t_1 = ⌈log2(1/ρ)⌉
    t: int
    alpha: Fraction = Fraction(0)
    beta: Fraction = Fraction(0)
    budget: Budget = field(default_factory=Budget)
    _q: dict[tuple[int, ...], ScheduleValue] = field(default_factory=dict, repr=False)
    _t: dict[tuple[int, ...], ScheduleValue] = field(default_factory=dict, repr=False)
    _depth: int = field(default=0, repr=False)

    # ------------------------------------------------------------------ 共用

    def limit(self, value: ScheduleValue) -> int:
        """Beyond 轉成比任何向日葵都大的整數，供抽取程序使用。"""
        return self.cap + 1 if is_beyond(value) else int(value)

    def _eta_limit(self) -> int:
        # m 超過此值時 log2(1/η) > cap，任何 q ≤ cap 都不滿足 q 的不等式
        return self.cap + 2 * self.rho.numer.bit_length() + 2

    def _leaf_eta(self, q_values: list[ScheduleValue]) -> Optional[Fraction]:
        if any(is_beyond(v) for v in q_values):
            return None
        m = capped_leaf_bound(self.k, [int(v) for v in q_values], self._eta_limit())
        if m is None:
            return None
        return eta(self.rho, max(m, 1))

    def _finish(self, value: int) -> ScheduleValue:
        self.budget.reserve(1, stage="schedule")
        return Beyond if value > self.cap else value

    # ------------------------------------------------------------------ 3-CNF

    def q3(self, r: int) -> ScheduleValue:
        """q_r：已找到 r 個 1-向日葵時要找的 1-向日葵大小，0 ≤ r ≤ t。"""
        if self.family != "thr3":
            raise InvalidConfig("q3 is only defined for the 3-CNF schedule")
        if not 0 <= r <= self.t:
            raise ValueError(f"r must lie in [0, {self.t}]")
        key = (r,)
        if key in self._q:
            return self._q[key]
        # 由 q_t 往回算，避免遞迴
        for s in range(self.t, r - 1, -1):
            if (s,) not in self._q:
                self._q[(s,)] = self._q3_single(s)
        return self._q[key]

    def _q3_single(self, r: int) -> ScheduleValue:
        rho = self.rho.fraction
        if r == self.t:
            first = smallest_exponent(THREE_QUARTERS, (rho - SEVEN_EIGHTHS ** self.z) / (self.t + 1), start=1)
            second = smallest_exponent(
                THREE_QUARTERS, (rho - Fraction(1, 1 << (self.t + 1))) / (self.t + 1), start=1
            )
            return self._finish(max(first, second))
        later = self._q[(r + 1,)]
        if is_beyond(later):
            return Beyond
        gap = self._leaf_eta([self.z, later])
        if gap is None:
            return Beyond
        # r+1 個已找到的 1-向日葵各貢獻至多 (3/4)^{q_r}
        value = smallest_exponent(THREE_QUARTERS, gap / (r + 1), start=int(later) + 1)
        return self._finish(value)

    # ------------------------------------------------------------------ k-CNF

    @property
    def weights(self) -> int:
        return self.k - 2

    def t_w(self, prefix: tuple[int, ...]) -> ScheduleValue:
        """t_w(r⃗[w−1])，w = len(prefix)+1；w=1 時即 t_1。"""
        w = len(prefix) + 1
        if w == 1:
            return self.t
        if prefix in self._t:
            return self._t[prefix]
        value = self._t_single(prefix)
        self._t[prefix] = value
        return value

    def _t_single(self, prefix: tuple[int, ...]) -> ScheduleValue:
        w = len(prefix) + 1
        residual = self.rho.fraction - self.alpha
        steps = smallest_exponent(1 - Fraction(1, 1 << w), residual, start=1)
        if steps <= 1:
            return 1
        product = 1
        for j in range(1, w):
            q = self.q(prefix[:j])
            if is_beyond(q):
                return Beyond
            product *= max(int(q) - 1, 1)
        spread = 2 * w * factorial(w - 1) * (1 << (w - 1)) * product
        return self._finish((steps - 1) * spread + 1)

    def T_w(self, w: int) -> ScheduleValue:
        """∏_{v<w} max t_v：所有可能前綴下 t_v 的最大值之積。"""
        total = 1
        for v in range(1, w):
            best = self._max_t(v)
            if is_beyond(best):
                return Beyond
            total *= int(best)
        return total

    def _max_t(self, v: int) -> ScheduleValue:
        best = 0
        for prefix in self._prefixes(v - 1):
            value = self.t_w(prefix)
            if is_beyond(value):
                return Beyond
            best = max(best, int(value))
        return best

    def _prefixes(self, length: int):
        if length == 0:
            yield ()
            return
        for head in self._prefixes(length - 1):
            bound = self.t_w(head)
            if is_beyond(bound):
                raise BudgetExceeded("schedule")
            for s in range(int(bound)):
                self.budget.reserve(1, stage="schedule")
                yield head + (s,)

    def q(self, prefix: tuple[int, ...]) -> ScheduleValue:
        """q_w(r⃗[w])，w = len(prefix) ≥ 1；空前綴回傳 z。"""
        if self.family != "thrk":
            raise InvalidConfig("q is only defined for the k-CNF schedule")
        if not prefix:
            return self.z
        if prefix in self._q:
            return self._q[prefix]
        if self._depth > MAX_SCHEDULE_DEPTH:
            raise BudgetExceeded("schedule")
        self._depth += 1
        try:
            value = self._q_single(prefix)
        finally:
            self._depth -= 1
        self._q[prefix] = value
        return value

    def extraction_q(self, r: tuple[int, ...]) -> list[int]:
        """抽取程序的 Q_0..Q_{k−2}（Q_0 = z，Q_w = q_w(r⃗[w])）。"""
        values: list[ScheduleValue] = [self.z] + [self.q(r[:w]) for w in range(1, self.weights + 1)]
        return [self.limit(v) for v in values]

    def _successors(self, prefix: tuple[int, ...]):
        """字典序在 prefix 之後、最接近的完整向量：遞增某一位、其後補 0。"""
        for v in range(len(prefix), 0, -1):
            head = prefix[: v - 1]
            bound = self.t_w(head)
            nxt = prefix[v - 1] + 1
            if is_beyond(bound) or nxt < int(bound):
                yield head + (nxt,) + (0,) * (self.weights - v)

    def _t_floor(self, prefix: tuple[int, ...]) -> ScheduleValue:
        w = len(prefix) + 1
        if w == 1:
            return self.t
        if prefix in self._t:
            return self._t[prefix]
        steps = smallest_exponent(1 - Fraction(1, 1 << w), self.rho.fraction - self.alpha, start=1)
        if steps <= 1:
            return 1
        product = 1
        for j in range(1, w):
            q = self._q_floor(prefix[:j])
            if is_beyond(q):
                return Beyond
            product *= max(int(q) - 1, 1)
        value = (steps - 1) * 2 * w * factorial(w - 1) * (1 << (w - 1)) * product + 1
        return Beyond if value > self.cap else value

    def _q_floor(self, prefix: tuple[int, ...]) -> ScheduleValue:
        """不往字典序後方遞迴的下界：只用較小權重與遞減長度兩個條件。"""
        if not prefix:
            return self.z
        if prefix in self._q:
            return self._q[prefix]
        w = len(prefix)
        floor = 1
        for v in range(1, w):
            smaller = self._q_floor(prefix[:v])
            if is_beyond(smaller):
                return Beyond
            floor = max(floor, 2 * w * (int(smaller) - 1) + 2)
        bound_here = self._t_floor(prefix[:-1])
        # q(s) > q(s+1) > … > q(t_w − 1) ≥ 1
        if is_beyond(bound_here):
            floor = max(floor, self.cap + 1 - prefix[-1])
        else:
            floor = max(floor, int(bound_here) - prefix[-1])
        return Beyond if floor > self.cap else floor

    def _q_single(self, prefix: tuple[int, ...]) -> ScheduleValue:
        w = len(prefix)
        base = 1 - Fraction(1, 1 << (self.k - w))
        floor = 1

        # 前綴中較小權重的向日葵：q_w > 2w(q_v − 1) + 1
        for v in range(1, w):
            smaller = self.q(prefix[:v])
            if is_beyond(smaller):
                return Beyond
            floor = max(floor, 2 * w * (int(smaller) - 1) + 2)

        successors = list(self._successors(prefix))
        for successor in successors:
            floors = [self.z] + [self._q_floor(successor[:j]) for j in range(1, self.weights + 1)]
            if self._leaf_eta(floors) is None:
                return Beyond

        # 最後一個參數遞減
        bound_here = self.t_w(prefix[:-1])
        if is_beyond(bound_here) or prefix[-1] + 1 < int(bound_here):
            later = self.q(prefix[:-1] + (prefix[-1] + 1,))
            if is_beyond(later):
                return Beyond
            floor = max(floor, int(later) + 1)

        gap_targets: list[Fraction] = [min(self.alpha, self.beta)]
        for successor in successors:
            q_values: list[ScheduleValue] = [self.z] + [self.q(successor[:j]) for j in range(1, self.weights + 1)]
            gap = self._leaf_eta(q_values)
            if gap is None:
                return Beyond
            gap_targets.append(gap)

        big_t = self.T_w(w)
        if is_beyond(big_t) or is_beyond(bound_here):
            logger.info("參數表無法在上限內決定：prefix=%s", prefix)
            raise BudgetExceeded("schedule")
        scale = max(self.weights, 1) * int(big_t) * int(bound_here)
        value = smallest_exponent(base, min(gap_targets) / scale, start=floor)
        return self._finish(value)

    # ------------------------------------------------------------------ 輸出

    def as_dict(self) -> dict:
        out: dict = {"family": self.family, "k": self.k, "z": self.z, "t": self.t, "cap": self.cap}
        if self.family == "thrk":
            out["alpha"] = str(self.alpha)
            out["beta"] = str(self.beta)
        out["q"] = {",".join(map(str, key)): str(value) for key, value in sorted(self._q.items())}
        if self._t:
            out["t_w"] = {",".join(map(str, key)) or "-": str(value) for key, value in sorted(self._t.items())}
        return out


def build_schedule(
    rho: Threshold,
    k: int,
    *,
    cap: int,
    family: Optional[str] = None,
    budget: Optional[Budget] = None,
) -> ParameterSchedule:
    """建立參數表；z 與 t 立即計算，q / t_w 於查詢時才計算。"""
    if k < 2:
        raise InvalidConfig("k must be >= 2", {"k": k})
    family = family or _family_for(k)
    budget = budget or Budget()
    value = rho.fraction

    if family == "thr3":
        if k != 3:
            raise InvalidConfig("the 3-CNF schedule needs k = 3", {"k": k})
        z = smallest_exponent(SEVEN_EIGHTHS, value, start=1)
        t = log2_floor(1 / value)
        schedule = ParameterSchedule(rho, k, family, cap, z, t, budget=budget)
    elif family == "thrk":
        clause_bound = 1 - Fraction(1, 1 << k)
        z = smallest_exponent(clause_bound, value, start=1)
        t_1 = log2_ceil(1 / value)
        alpha = value - clause_bound ** z
        beta = value - clause_bound / (1 << t_1)
        schedule = ParameterSchedule(rho, k, family, cap, z, t_1, alpha=alpha, beta=beta, budget=budget)
    else:
        raise InvalidConfig(f"unknown schedule family {family!r}")

    logger.debug("參數表：family=%s k=%s z=%s t=%s cap=%s", family, k, schedule.z, schedule.t, cap)
    return schedule
