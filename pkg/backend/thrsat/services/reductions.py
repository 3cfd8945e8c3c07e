"""公式轉換：困難度證明中的歸約，作為交叉驗證用的實例產生器。

每個轉換回傳 ReductionRecord，記錄輸入、輸出與兩者解數之間應成立的恆等式，
測試與 CLI 可用暴力計數器逐一驗證。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

from thrsat.core.errors import InvalidConfig
from thrsat.services.formula import Clause, CnfFormula, Literal, VariableRole, sort_literals

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReductionRecord:
    name: str
    source: CnfFormula
    output: CnfFormula
    # 由輸入解數算出輸出解數
    expected_count: Callable[[int], int]
    relation: str

    def holds(self, source_count: int, output_count: int) -> bool:
        return self.expected_count(source_count) == output_count

    def as_dict(self) -> dict:
        return {
            "name": self.name,
            "relation": self.relation,
            "source_vars": self.source.num_vars,
            "output_vars": self.output.num_vars,
            "output_clauses": len(self.output.clauses),
            "output_width": self.output.max_width,
        }


def _shift(clause: Clause, offset: int) -> Clause:
    return Clause(tuple(lit + offset if lit > 0 else lit - offset for lit in clause.literals))


def _with_literal(clause: Clause, literal: Literal) -> Clause:
    return Clause(sort_literals(set(clause.literals) | {literal}))


def exact_count_formula(n: int, t: int) -> CnfFormula:
    """n 個變數、恰有 t 個解的 CNF：把指派看成整數 x1…xn（x1 為最高位），要求其值 ≤ t−1。

    值 v > c 若且唯若存在 c_i = 0 的位置 i，使 v_i = 1 且所有 c_j = 1 的較高位 j 都有 v_j = 1；
    每個 c_i = 0 的位置禁止一次，得到至多 n 個子句。
    """
    if not 0 <= t <= (1 << n):
        raise InvalidConfig(f"t must lie in [0, 2^{n}]", {"n": n, "t": t})
    if t == 0:
        return CnfFormula(n, (Clause(()),))
    c = t - 1
    bits = [(c >> (n - i)) & 1 for i in range(1, n + 1)]
    clauses: list[Clause] = []
    for i in range(1, n + 1):
        if bits[i - 1]:
            continue
        ones = [-j for j in range(1, i) if bits[j - 1]]
        clauses.append(Clause(sort_literals([-i, *ones])))
    return CnfFormula(n, tuple(clauses))


def gt_to_maj(formula: CnfFormula) -> ReductionRecord:
    """F′ = (y_1 ∨ … ∨ y_n) ∧ F，#SAT(F′) = (2^n − 1)·#SAT(F)。n ≥ 2 時 #SAT(F) > 2^{n−1} ⇔ #SAT(F′) > 2^{2n−1}。"""
    n = formula.num_vars
    if n < 1:
        raise InvalidConfig("gt_to_maj needs at least one variable")
    guard = Clause(tuple(range(n + 1, 2 * n + 1)))
    output = CnfFormula(2 * n, formula.clauses + (guard,))
    return ReductionRecord(
        "gt-to-maj",
        formula,
        output,
        lambda count: ((1 << n) - 1) * count,
        "GT-MAJ(F) <=> MAJ(F') for n >= 2",
    )


def maj_to_gt(formula: CnfFormula) -> ReductionRecord:
    """F′ = (¬x_{n+1} ∨ F) ∧ (x_{n+1} ∨ G)，G 恰有 2^{n−1}+1 個解；MAJ(F) ⇔ GT-MAJ(F′)。"""
    n = formula.num_vars
    if n < 1:
        raise InvalidConfig("maj_to_gt needs at least one variable")
    selector = n + 1
    padding = exact_count_formula(n, (1 << (n - 1)) + 1)
    clauses = [_with_literal(c, -selector) for c in formula.clauses]
    clauses += [_with_literal(c, selector) for c in padding.clauses]
    output = CnfFormula(n + 1, tuple(clauses))
    return ReductionRecord(
        "maj-to-gt",
        formula,
        output,
        lambda count: count + (1 << (n - 1)) + 1,
        "MAJ(F) <=> GT-MAJ(F')",
    )


def add_one_long_clause(formula: CnfFormula, t: int) -> ReductionRecord:
    """F′ = ∧(x_{n+1} ∨ C_i) ∧ (¬x_{n+1} ∨ y_1 ∨ … ∨ y_t)；MAJ(F′) ⇔ #SAT(F) ≥ 2^{n−t}。"""
    n = formula.num_vars
    if not 1 <= t <= n:
        raise InvalidConfig(f"t must lie in [1, {n}]", {"t": t, "n": n})
    switch = n + 1
    clauses = [_with_literal(c, switch) for c in formula.clauses]
    clauses.append(Clause((-switch, *range(n + 2, n + 2 + t))))
    output = CnfFormula(n + 1 + t, tuple(clauses))
    return ReductionRecord(
        "add-one-long-clause",
        formula,
        output,
        lambda count: (count << t) + (1 << (n + t)) - (1 << n),
        "MAJ(F') <=> #SAT(F) >= 2^(n-t)",
    )


def gt_hardness_gadget(formula: CnfFormula) -> ReductionRecord:
    """每個子句加上新變數 x_{n+1}：解數為 2^n + #SAT(F)，大於 2^n 若且唯若 F 可滿足。"""
    n = formula.num_vars
    fresh = n + 1
    output = CnfFormula(n + 1, tuple(_with_literal(c, fresh) for c in formula.clauses))
    return ReductionRecord(
        "gt-hardness-gadget",
        formula,
        output,
        lambda count: (1 << n) + count,
        "GT-MAJ(F') <=> F satisfiable",
    )


def square(formula: CnfFormula) -> ReductionRecord:
    """F(x) ∧ F(y)，y 為 x 的新副本：#SAT 平方，THR(α²) 於 F′ ⇔ THR(α) 於 F。"""
    n = formula.num_vars
    copy = tuple(_shift(c, n) for c in formula.clauses)
    output = CnfFormula(2 * n, formula.clauses + copy, formula.roles + formula.roles if formula.roles else ())
    return ReductionRecord(
        "square",
        formula,
        output,
        lambda count: count * count,
        "THR(a^2)(F') <=> THR(a)(F)",
    )


def emaj_hardness_gadget(formula: CnfFormula) -> ReductionRecord:
    """F ∧ (x_{n+1} ∨ x_{n+2})：原變數為存在變數、兩個新變數為機率變數；F 可滿足 ⇔ E-MAJ 為 YES。"""
    n = formula.num_vars
    roles = (VariableRole.EXISTENTIAL,) * n + (VariableRole.PROBABILISTIC,) * 2
    output = CnfFormula(n + 2, formula.clauses + (Clause((n + 1, n + 2)),), roles)
    return ReductionRecord(
        "emaj-hardness-gadget",
        formula,
        output,
        lambda count: 3 * count,
        "E-MAJ(F') <=> F satisfiable",
    )


REDUCTIONS: dict[str, Callable[..., ReductionRecord]] = {
    "gt-to-maj": gt_to_maj,
    "maj-to-gt": maj_to_gt,
    "add-one-long-clause": add_one_long_clause,
    "gt-hardness-gadget": gt_hardness_gadget,
    "square": square,
    "emaj-hardness-gadget": emaj_hardness_gadget,
}


def apply_reduction(name: str, formula: CnfFormula, **options) -> ReductionRecord:
    try:
        transform = REDUCTIONS[name]
    except KeyError:
        raise InvalidConfig(f"unknown reduction {name!r}", {"known": sorted(REDUCTIONS)}) from None
    record = transform(formula, **options)
    logger.info("套用轉換 %s：%s 個變數 -> %s 個變數", name, formula.num_vars, record.output.num_vars)
    return record
