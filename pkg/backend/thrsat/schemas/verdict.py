"""--json 輸出的報表模型；有理數一律寫成 "p/q" 字串。"""

from __future__ import annotations

from fractions import Fraction
from typing import Any, Optional

from pydantic import BaseModel, Field

from thrsat.services.combinatorics import ExtractionOutcome
from thrsat.services.decomposition import count_tree, tree_to_dict
from thrsat.services.fuzz import FuzzSummary
from thrsat.services.reductions import ReductionRecord
from thrsat.services.solvers.verdict import CountCertificate, HittingSet, NoWitness, Verdict


def rational(value: Fraction) -> str:
    return f"{value.numerator}/{value.denominator}"


class BudgetReport(BaseModel):
    leaves_expanded: int = 0
    exceeded: bool = False
    cap: Optional[int] = None


class CertificateReport(BaseModel):
    kind: str
    count: Optional[int] = None
    term_bound: Optional[int] = None
    assumed: list[int] = Field(default_factory=list)
    psi: list[list[int]] = Field(default_factory=list)
    witness_clauses: Optional[list[int]] = None
    bound: Optional[str] = None
    note: Optional[str] = None
    hitting_set: Optional[list[int]] = None
    tree: Optional[dict] = None


class VerdictReport(BaseModel):
    answer: str
    branch_tag: str
    certificate: CertificateReport
    params_used: dict[str, Any] = Field(default_factory=dict)
    budget: BudgetReport = Field(default_factory=BudgetReport)
    good_assignment_count: Optional[int] = None
    gt: bool = False


def certificate_report(verdict: Verdict, *, with_tree: bool = False) -> CertificateReport:
    cert = verdict.certificate
    if isinstance(cert, NoWitness):
        return CertificateReport(
            kind=cert.kind.value,
            witness_clauses=list(cert.clause_indices),
            bound=rational(cert.bound),
            note=cert.note or None,
        )
    if isinstance(cert, HittingSet):
        return CertificateReport(kind="hitting-set", hitting_set=list(cert.literals))
    if isinstance(cert, CountCertificate):
        return CertificateReport(
            kind="exact-count",
            count=cert.count.value,
            term_bound=cert.count.term_bound,
            assumed=list(cert.assumed),
            psi=[list(core) for core in cert.psi],
            tree=tree_to_dict(cert.tree) if with_tree and cert.tree is not None else None,
        )
    raise TypeError(f"unknown certificate {type(cert).__name__}")


def verdict_report(verdict: Verdict, *, gt: bool = False, with_tree: bool = False) -> VerdictReport:
    return VerdictReport(
        answer=verdict.answer.value,
        branch_tag=verdict.branch_tag,
        certificate=certificate_report(verdict, with_tree=with_tree),
        params_used=verdict.params_used,
        budget=BudgetReport(**verdict.budget),
        good_assignment_count=verdict.good_assignment_count,
        gt=gt,
    )


class MsbReport(BaseModel):
    num_vars: int
    bits: list[int]


class ReductionReport(BaseModel):
    name: str
    relation: str
    source_vars: int
    output_vars: int
    output_clauses: int
    output_width: int
    dimacs: str
    # 小實例以暴力計數檢查解數恆等式；None 表示未檢查
    verified: Optional[bool] = None

    @classmethod
    def from_record(
        cls, record: ReductionRecord, dimacs: str, verified: Optional[bool] = None
    ) -> "ReductionReport":
        return cls(**record.as_dict(), dimacs=dimacs, verified=verified)


class AnalysisReport(BaseModel):
    num_vars: int
    num_clauses: int
    max_width: int
    disjoint_set: list[int]
    q_values: list[int]
    stage_sizes: list[int]
    sunflower: Optional[dict] = None
    tree: Optional[dict] = None
    exact_count: Optional[int] = None

    @classmethod
    def build(
        cls,
        num_vars: int,
        num_clauses: int,
        max_width: int,
        disjoint_set: list[int],
        q_values: list[int],
        outcome: ExtractionOutcome,
    ) -> "AnalysisReport":
        report = cls(
            num_vars=num_vars,
            num_clauses=num_clauses,
            max_width=max_width,
            disjoint_set=disjoint_set,
            q_values=q_values,
            stage_sizes=list(outcome.stage_sizes),
        )
        if outcome.sunflower is not None:
            report.sunflower = outcome.sunflower.as_dict()
        else:
            report.tree = tree_to_dict(outcome.tree)
            report.exact_count = count_tree(outcome.tree, num_vars).value
        return report


class FuzzMismatch(BaseModel):
    index: int
    rho: str
    sigma: Optional[str] = None
    answer: Optional[str] = None
    expected: Optional[str] = None
    count_mismatch: bool = False
    dimacs: str


class FuzzReport(BaseModel):
    decider: str
    gt: bool = False
    seed: int
    thresholds: list[str]
    instances: int
    completed: int
    budget_exceeded: int
    skipped: int = 0
    branch_tags: dict[str, int] = Field(default_factory=dict)
    mismatches: list[FuzzMismatch] = Field(default_factory=list)

    @classmethod
    def from_summary(cls, summary: FuzzSummary) -> "FuzzReport":
        def word(value: Optional[bool]) -> Optional[str]:
            return None if value is None else ("YES" if value else "NO")

        plan = summary.plan
        return cls(
            decider=plan.decider,
            gt=plan.gt,
            seed=plan.seed,
            thresholds=list(plan.thresholds),
            instances=len(summary.cases),
            completed=summary.completed,
            budget_exceeded=summary.budget_exceeded,
            skipped=summary.skipped,
            branch_tags=summary.branch_tags(),
            mismatches=[
                FuzzMismatch(
                    index=case.index,
                    rho=str(case.rho),
                    sigma=str(case.sigma) if case.sigma is not None else None,
                    answer=word(case.answer),
                    expected=word(case.expected),
                    count_mismatch=case.count_mismatch,
                    dimacs=case.dimacs,
                )
                for case in summary.mismatches
            ],
        )
