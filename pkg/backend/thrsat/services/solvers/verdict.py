"""判定結果與證書。

每個 NO 都帶一個精確的有理數上界（NoWitness.bound），回傳前必須通過 ``bound < ρ`` 的
自我檢查；YES 則帶精確計數、命中集合（hitting set）或共同文字。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Any, Optional, Union

from thrsat.core.errors import CertificateMismatch
from thrsat.services.decomposition import Budget, DecompositionTree
from thrsat.services.formula import ExactCount, Literal, Ordering, Threshold, compare_count_to_threshold

logger = logging.getLogger(__name__)


class Answer(str, Enum):
    YES = "YES"
    NO = "NO"


class WitnessKind(str, Enum):
    DISJOINT_SET = "disjoint-set"
    LITERAL_FAN = "literal-fan"
    TWO_CLAUSE_TRIPLE = "two-clause-triple"
    SUNFLOWER_LEDGER = "sunflower-ledger"
    PSI_SUBFORMULA = "psi-subformula"
    # 兩層問題：窮舉所有可能的被蘊含文字集合後得到的精確比例
    IMPLIED_SET_SCAN = "implied-set-scan"


@dataclass(frozen=True)
class NoWitness:
    kind: WitnessKind
    clause_indices: tuple[int, ...]
    # 滿足比例的精確上界
    bound: Fraction
    note: str = ""

    def check(self, rho: Threshold) -> "NoWitness":
        if not self.bound < rho.fraction:
            logger.error("NO 證書未通過檢查：kind=%s bound=%s rho=%s", self.kind.value, self.bound, rho)
            raise CertificateMismatch(
                "NO witness bound is not below the threshold",
                {"kind": self.kind.value, "bound": str(self.bound), "rho": str(rho)},
            )
        return self


@dataclass(frozen=True)
class HittingSet:
    """一組一致的文字，斷言後公式全部被滿足；滿足比例至少 2^{-|literals|}。"""

    literals: tuple[Literal, ...]


@dataclass(frozen=True)
class CountCertificate:
    count: ExactCount
    tree: Optional[DecompositionTree] = None
    # count 為 φ ∧ assumed ∧ psi 的精確解數；兩者皆空時即 #SAT(φ)
    assumed: tuple[Literal, ...] = ()
    psi: tuple[tuple[Literal, ...], ...] = ()


Certificate = Union[CountCertificate, NoWitness, HittingSet]


@dataclass
class Verdict:
    answer: Answer
    branch_tag: str
    certificate: Certificate
    params_used: dict[str, Any] = field(default_factory=dict)
    budget: dict[str, Any] = field(default_factory=dict)
    good_assignment_count: Optional[int] = None

    @property
    def is_yes(self) -> bool:
        return self.answer == Answer.YES

    @property
    def exact_count(self) -> Optional[int]:
        cert = self.certificate
        if self.good_assignment_count is not None:
            return None
        if isinstance(cert, CountCertificate) and not cert.assumed and not cert.psi:
            return cert.count.value
        return None


def no_verdict(
    branch_tag: str,
    witness: NoWitness,
    rho: Threshold,
    *,
    params: Optional[dict] = None,
    budget: Optional[Budget] = None,
    good_assignment_count: Optional[int] = None,
) -> Verdict:
    witness.check(rho)
    logger.info("判定 NO：branch=%s kind=%s bound=%s", branch_tag, witness.kind.value, witness.bound)
    return Verdict(
        Answer.NO,
        branch_tag,
        witness,
        dict(params or {}),
        budget.as_dict() if budget else {},
        good_assignment_count,
    )


def count_verdict(
    branch_tag: str,
    count: ExactCount,
    rho: Threshold,
    n: int,
    *,
    tree: Optional[DecompositionTree] = None,
    strict: bool = False,
    params: Optional[dict] = None,
    budget: Optional[Budget] = None,
) -> Verdict:
    """依精確計數回答；count 不符合項數上界時視為內部矛盾。"""
    if not count.respects_term_bound():
        raise CertificateMismatch(
            "exact count needs more powers of two than the tree has leaves",
            {"count": count.value, "term_bound": count.term_bound},
        )
    order = compare_count_to_threshold(count, rho, n)
    yes = order == Ordering.GT if strict else order != Ordering.LT
    answer = Answer.YES if yes else Answer.NO
    logger.info("判定 %s：branch=%s count=%s n=%s rho=%s", answer.value, branch_tag, count.value, n, rho)
    return Verdict(
        answer,
        branch_tag,
        CountCertificate(count, tree),
        dict(params or {}),
        budget.as_dict() if budget else {},
    )


def yes_verdict(
    branch_tag: str,
    certificate: Certificate,
    *,
    params: Optional[dict] = None,
    budget: Optional[Budget] = None,
    good_assignment_count: Optional[int] = None,
) -> Verdict:
    logger.info("判定 YES：branch=%s", branch_tag)
    return Verdict(
        Answer.YES,
        branch_tag,
        certificate,
        dict(params or {}),
        budget.as_dict() if budget else {},
        good_assignment_count,
    )
