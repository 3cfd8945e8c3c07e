"""門檻的精確算術：ρ 的正規分解、2 的乘法階、二進位展開、間隙 η 與貪婪冪次和。

決策路徑上一律使用 int / Fraction，不出現浮點數。
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

from thrsat.core.errors import InvalidThreshold
from thrsat.services.formula import ExactCount, Threshold

_THRESHOLD_RE = re.compile(r"^\s*(\d+)\s*/\s*(\d+)\s*$")


@dataclass(frozen=True)
class BinaryExpansion:
    exponents: tuple[int, ...]
    # (前週期長度 s, 週期長度 d)；有限展開時為 None
    period: Optional[tuple[int, int]] = None

    @property
    def terminates(self) -> bool:
        return self.period is None

    def partial_sum(self, count: int | None = None) -> Fraction:
        terms = self.exponents if count is None else self.exponents[:count]
        return sum((Fraction(2) ** e for e in terms), Fraction(0))


def canonicalize_threshold(p: int | Fraction, q: int = 1) -> Threshold:
    value = Fraction(p, q) if not isinstance(p, Fraction) else p / q
    if not 0 < value < 1:
        raise InvalidThreshold(f"threshold {value} is not in (0, 1)", {"value": str(value)})
    numer, denom = value.numerator, value.denominator
    v = (denom & -denom).bit_length() - 1
    return Threshold(numer=numer, denom_pow2=v, denom_odd=denom >> v)


def parse_threshold(text: str) -> Threshold:
    """只接受 "p/q" 形式；小數輸入會被拒絕以免悄悄捨入。"""
    match = _THRESHOLD_RE.match(text or "")
    if not match:
        raise InvalidThreshold(f"threshold must be written as p/q, got {text!r}", {"text": text})
    p, q = int(match.group(1)), int(match.group(2))
    if q == 0:
        raise InvalidThreshold("zero denominator", {"text": text})
    return canonicalize_threshold(p, q)


def ord2(b: int) -> int:
    if b < 1 or b % 2 == 0:
        raise ValueError(f"ord2 needs an odd positive integer, got {b}")
    if b == 1:
        return 1
    d, power = 1, 2 % b
    while power != 1:
        power = (power * 2) % b
        d += 1
    return d


def binary_expansion(rho: Threshold, count: int) -> BinaryExpansion:
    """ρ 的前 count 個 1 位元指數（長除法）；有限展開時可能少於 count 個。"""
    if count < 1:
        raise ValueError("count must be >= 1")
    period = None
    if rho.denom_odd > 1:
        period = (rho.denom_pow2, ord2(rho.denom_odd))

    exponents: list[int] = []
    remainder = rho.fraction
    position = 0
    while remainder and len(exponents) < count:
        position += 1
        remainder *= 2
        if remainder >= 1:
            exponents.append(-position)
            remainder -= 1
    return BinaryExpansion(tuple(exponents), period)


def _periodic_layout(rho: Threshold) -> tuple[list[int], list[int], int]:
    """回傳（前週期中 1 的位置、單一週期中 1 的相對位置、週期長度）。"""
    s, d = rho.denom_pow2, ord2(rho.denom_odd)
    remainder = rho.fraction
    pre: list[int] = []
    for position in range(1, s + 1):
        remainder *= 2
        if remainder >= 1:
            pre.append(position)
            remainder -= 1
    block: list[int] = []
    for offset in range(1, d + 1):
        remainder *= 2
        if remainder >= 1:
            block.append(offset)
            remainder -= 1
    return pre, block, d


def eta(rho: Threshold, m: int) -> Fraction:
    """若 N 可寫成至多 m 個 2 的冪次且 N < ρ·2^n，則 N ≤ (ρ − η)·2^n。"""
    if m < 1:
        raise ValueError("m must be >= 1")
    a, v, b = rho.numer, rho.denom_pow2, rho.denom_odd

    if b == 1:
        # a 的二進位 1 位元：a_1 > … > a_s
        bits = [i for i in range(a.bit_length() - 1, -1, -1) if (a >> i) & 1]
        s, a_s = len(bits), bits[-1]
        return Fraction(2) ** (a_s - m + s - 1) / (1 << v)

    # 非二進分數：η 為展開在前 m 個 1 位元之後的尾和
    pre, block, d = _periodic_layout(rho)
    s = v
    if m <= len(pre):
        return rho.fraction - sum((Fraction(1, 1 << p) for p in pre[:m]), Fraction(0))
    rest = m - len(pre)
    full, partial = divmod(rest, len(block))
    block_value = Fraction(sum(1 << (d - o) for o in block), (1 << d) - 1)
    partial_value = sum((Fraction(1, 1 << o) for o in block[:partial]), Fraction(0))
    return (block_value - partial_value) / (Fraction(2) ** (s + full * d))


def greedy_max_power_sum(rho: Threshold, n: int, m: int) -> ExactCount:
    """至多 m 個（可重複）非負 2 冪次之和、嚴格小於 ρ·2^n 的最大整數。"""
    target = rho.fraction * (1 << n)
    total, terms = 0, 0
    while terms < m:
        room = target - total
        largest_below = -(-room.numerator // room.denominator) - 1
        if largest_below < 1:
            break
        total += 1 << (largest_below.bit_length() - 1)
        terms += 1
    return ExactCount(total, terms)


def _least_satisfying(predicate: Callable[[int], bool], start: int = 0) -> int:
    """單調謂詞的最小滿足整數（倍增後二分）。"""
    if predicate(start):
        return start
    low, step = start, 1
    high = start + step
    while not predicate(high):
        low = high
        step *= 2
        high = start + step
    while high - low > 1:
        mid = (low + high) // 2
        if predicate(mid):
            high = mid
        else:
            low = mid
    return high


def smallest_exponent(base: Fraction, target: Fraction, *, strict: bool = True, start: int = 0) -> int:
    """最小的 e ≥ start 使 base^e < target（strict）或 ≤ target；需 0 < base < 1。"""
    if not 0 < base < 1:
        raise ValueError("base must lie in (0, 1)")
    if target <= 0:
        raise ValueError("target must be positive")
    if strict:
        return _least_satisfying(lambda e: base ** e < target, start)
    return _least_satisfying(lambda e: base ** e <= target, start)


def _exp_at_least(c: int, bound: Fraction) -> bool:
    """判定 e^c ≥ bound（bound 為有理數），以泰勒級數上下界逐步收斂。"""
    if c == 0:
        return bound <= 1
    term = Fraction(1)
    partial = Fraction(1)
    j = 0
    while True:
        j += 1
        term = term * c / j
        partial += term
        if partial >= bound:
            return True
        if j + 2 > c:
            tail_ratio = Fraction(c, j + 2)
            upper = partial + term * Fraction(c, j + 1) / (1 - tail_ratio)
            if upper < bound:
                return False


def ceil_scaled_ln(scale: int, x: Fraction) -> int:
    """⌈scale · ln x⌉，x > 1；等價於最小的 c 使 e^c ≥ x^scale。"""
    if x <= 1:
        raise ValueError("x must exceed 1")
    target = x ** scale
    return _least_satisfying(lambda c: _exp_at_least(c, target), 1)


def log2_floor(value: Fraction) -> int:
    """⌊log2 value⌋，value > 0。"""
    if value <= 0:
        raise ValueError("value must be positive")
    e = value.numerator.bit_length() - value.denominator.bit_length()
    if Fraction(2) ** e > value:
        e -= 1
    elif Fraction(2) ** (e + 1) <= value:
        e += 1
    return e


def log2_ceil(value: Fraction) -> int:
    e = log2_floor(value)
    return e if Fraction(2) ** e == value else e + 1


def is_power_of_two_fraction(value: Fraction) -> bool:
    return value > 0 and value.numerator & (value.numerator - 1) == 0 and value.denominator & (value.denominator - 1) == 0

