"""2-CNF 上的兩層問題：E-MAJ-2SAT、MAJ-MAJ-2SAT，以及帶少量長子句的 MAJ-2SAT。

外層（存在）變數記為 x、內層（機率）變數記為 y。子句依變數角色分成 P_x、P_y、P_xy 三組；
外層指派 A 在 P_xy 中蘊含的 y 文字集合 L_A 決定了內層公式，而好的指派必有 |L_A| ≤ log2(1/σ)，
因此只需窮舉這些小集合 L★。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product
from typing import Iterator, Optional, Sequence

from thrsat.core import config
from thrsat.core.errors import TooManyLongClauses, WidthViolation
from thrsat.services.arithmetic import log2_floor
from thrsat.services.combinatorics import disjoint_set_bound, extract_kcnf
from thrsat.services.decomposition import Budget, DecompositionTree, count_tree_with_assertions
from thrsat.services.formula import (
    Clause,
    CnfFormula,
    ExactCount,
    Literal,
    Threshold,
    VariableRole,
    is_consistent,
    literal_key,
    meets_threshold,
    negate,
    normalize,
    sort_literals,
)
from thrsat.services.oracle import split_roles
from thrsat.services.solvers.two_cnf import c_alpha, decide_thr2sat, empty_clause_witness
from thrsat.services.solvers.verdict import (
    CountCertificate,
    NoWitness,
    Verdict,
    WitnessKind,
    count_verdict,
    no_verdict,
    yes_verdict,
)
from thrsat.services.twosat import solve_2sat

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClausePartition:
    """子句索引依角色分組：只含 x、只含 y、一個 x 一個 y。"""

    outer: tuple[int, ...]
    inner: tuple[int, ...]
    mixed: tuple[int, ...]

    @classmethod
    def build(cls, formula: CnfFormula) -> "ClausePartition":
        outer: list[int] = []
        inner: list[int] = []
        mixed: list[int] = []
        for idx, clause in enumerate(formula.clauses):
            roles = {formula.role_of(abs(lit)) for lit in clause.literals}
            if roles == {VariableRole.EXISTENTIAL}:
                outer.append(idx)
            elif roles == {VariableRole.PROBABILISTIC}:
                inner.append(idx)
            else:
                mixed.append(idx)
        return cls(tuple(outer), tuple(inner), tuple(mixed))

    def subformula(self, formula: CnfFormula, indices: Sequence[int]) -> CnfFormula:
        return formula.with_clauses(formula.clauses[i] for i in indices)


@dataclass(frozen=True)
class ImpliedLiteralSet:
    """猜測的 L★，以及要讓 A 恰好蘊含 L★ 時 A 必須滿足的條件。"""

    literals: tuple[Literal, ...]
    # 與 L★ 以外的 y 文字同子句的 x 文字必須為真
    forced: tuple[Literal, ...]
    # 每個 ℓ ∈ L★ 一個長子句 (¬ℓ_1 ∨ … ∨ ¬ℓ_t)，ℓ_i 為與 ℓ 同子句的 x 文字
    long_clauses: tuple[Clause, ...]

    @property
    def is_feasible(self) -> bool:
        return is_consistent(self.forced) and all(not c.is_empty for c in self.long_clauses)


def _mixed_pairs(formula: CnfFormula, partition: ClausePartition) -> list[tuple[Literal, Literal]]:
    """P_xy 的子句拆成（x 文字, y 文字）。"""
    pairs: list[tuple[Literal, Literal]] = []
    for idx in partition.mixed:
        a, b = formula.clauses[idx].literals
        if formula.role_of(abs(a)) == VariableRole.EXISTENTIAL:
            pairs.append((a, b))
        else:
            pairs.append((b, a))
    return pairs


def implied_candidates(pairs: Sequence[tuple[Literal, Literal]], max_size: int) -> Iterator[ImpliedLiteralSet]:
    """依大小再依字典序列舉一致的 L★（|L★| ≤ max_size）。"""
    y_literals = sorted({y for _, y in pairs}, key=literal_key)
    for size in range(0, max_size + 1):
        for chosen in combinations(y_literals, size):
            if not is_consistent(chosen):
                continue
            members = set(chosen)
            forced = sort_literals({x for x, y in pairs if y not in members})
            longs = tuple(
                Clause(sort_literals({negate(x) for x, y in pairs if y == lit})) for lit in chosen
            )
            yield ImpliedLiteralSet(tuple(chosen), forced, longs)


def _outer_assignment(outer_clauses: CnfFormula, implied: ImpliedLiteralSet, budget: Budget) -> Optional[tuple[Literal, ...]]:
    """檢查 (a)：從每個長子句挑一個文字，連同 forced 一起斷言後 P_x 仍可滿足。"""
    if not implied.is_feasible:
        return None
    choices = [c.literals for c in implied.long_clauses]
    projected = 1
    for options in choices:
        projected *= len(options)
    budget.reserve(projected, stage="implied-set-check")
    base = [c.literals for c in outer_clauses.clauses]
    for combo in product(*choices):
        units = set(implied.forced) | set(combo)
        if not is_consistent(units):
            continue
        model = solve_2sat(base + [(lit,) for lit in sorted(units, key=literal_key)])
        if model is not None:
            return tuple(v if value else -v for v, value in sorted(model.items()))
    return None


def _tree_or_witness(
    formula: CnfFormula,
    indices: Sequence[int],
    threshold: Threshold,
    budget: Budget,
) -> tuple[Optional[DecompositionTree], Optional[NoWitness]]:
    """對子公式建決策樹；不相交集合超過 c(threshold) 時改回傳比例上界證書。"""
    sub = formula.with_clauses(formula.clauses[i] for i in indices)
    outcome = extract_kcnf(sub, [c_alpha(threshold) + 1], budget)
    if outcome.sunflower is not None:
        members = outcome.sunflower.petal_indices
        bound = disjoint_set_bound(sub, members)
        return None, NoWitness(WitnessKind.DISJOINT_SET, tuple(indices[i] for i in members), bound)
    return outcome.tree, None


def _prepare(formula: CnfFormula) -> tuple[CnfFormula, list[int], list[int], ClausePartition]:
    formula = normalize(formula)
    outer, inner = split_roles(formula)
    if formula.max_width > 2:
        raise WidthViolation("two-level deciders need a 2-CNF", {"width": formula.max_width})
    return formula, outer, inner, ClausePartition.build(formula)


def decide_emaj2sat(formula: CnfFormula, rho: Threshold, *, budget: Optional[Budget] = None) -> Verdict:
    """是否存在外層指派 A，使 F(A, y) 至少有 ρ 比例的內層指派為真。"""
    formula, outer, inner, partition = _prepare(formula)
    budget = budget or Budget()
    n_inner = len(inner)
    max_size = log2_floor(1 / rho.fraction)
    params = {"max_implied": max_size, "outer": len(outer), "inner": n_inner}

    witness = empty_clause_witness(formula)
    if witness is not None:
        return no_verdict("empty-clause", witness, rho, params=params, budget=budget)

    inner_tree, witness = _tree_or_witness(formula, partition.inner, rho, budget)
    if witness is not None:
        return no_verdict("emaj-large-inner-disjoint-set", witness, rho, params=params, budget=budget)

    outer_clauses = partition.subformula(formula, partition.outer)
    pairs = _mixed_pairs(formula, partition)
    # 大於 max_size 的 L_A 讓內層比例 ≤ 2^{−(max_size+1)} < ρ
    best = Fraction(1, 1 << (max_size + 1))
    for implied in implied_candidates(pairs, max_size):
        budget.reserve(1, stage="implied-set")
        assignment = _outer_assignment(outer_clauses, implied, budget)
        if assignment is None:
            continue
        inner_count = count_tree_with_assertions(inner_tree, implied.literals, n_inner)
        if meets_threshold(inner_count, rho, n_inner):
            params.update(implied=list(implied.literals), outer_assignment=list(assignment))
            cert = CountCertificate(ExactCount(inner_count), inner_tree, assumed=implied.literals)
            logger.info("E-MAJ 找到好的外層指派：L★=%s 內層解數=%s", implied.literals, inner_count)
            return yes_verdict("emaj-implied-set", cert, params=params, budget=budget)
        best = max(best, Fraction(inner_count, 1 << n_inner))

    witness = NoWitness(
        WitnessKind.IMPLIED_SET_SCAN,
        tuple(range(len(formula.clauses))),
        best,
        note="best inner fraction over all implied sets",
    )
    return no_verdict("emaj-no-implied-set", witness, rho, params=params, budget=budget)


def _count_outer(
    outer_tree: DecompositionTree,
    implied: ImpliedLiteralSet,
    n_outer: int,
    budget: Budget,
) -> int:
    """N_x(L★)：T_x ∧ forced ∧ 所有長子句的解數，以排容原理展開長子句。"""
    total = 0
    longs = implied.long_clauses
    budget.reserve(1 << len(longs), stage="inclusion-exclusion")
    for size in range(len(longs) + 1):
        sign = -1 if size % 2 else 1
        for subset in combinations(longs, size):
            negated = [negate(lit) for clause in subset for lit in clause.literals]
            total += sign * count_tree_with_assertions(outer_tree, list(implied.forced) + negated, n_outer)
    return total


def decide_majmaj2sat(
    formula: CnfFormula,
    rho: Threshold,
    sigma: Threshold,
    *,
    budget: Optional[Budget] = None,
) -> Verdict:
    """好的外層指派（內層比例 ≥ σ）是否至少佔 ρ；YES 與 NO 都附上好指派的精確個數。"""
    formula, outer, inner, partition = _prepare(formula)
    budget = budget or Budget()
    n_outer, n_inner = len(outer), len(inner)
    max_size = log2_floor(1 / sigma.fraction)
    params = {"max_implied": max_size, "outer": n_outer, "inner": n_inner, "sigma": str(sigma)}

    witness = empty_clause_witness(formula)
    if witness is not None:
        return no_verdict("empty-clause", witness, rho, params=params, budget=budget, good_assignment_count=0)

    outer_tree, witness = _tree_or_witness(formula, partition.outer, rho, budget)
    if witness is not None:
        return no_verdict("majmaj-large-outer-disjoint-set", witness, rho, params=params, budget=budget)
    inner_tree, witness = _tree_or_witness(formula, partition.inner, sigma, budget)
    if witness is not None:
        # 每個外層指派的內層比例都低於 σ，沒有好指派
        witness = NoWitness(WitnessKind.DISJOINT_SET, witness.clause_indices, Fraction(0), note="inner fraction below sigma")
        return no_verdict(
            "majmaj-large-inner-disjoint-set", witness, rho, params=params, budget=budget, good_assignment_count=0
        )

    good = 0
    for implied in implied_candidates(_mixed_pairs(formula, partition), max_size):
        budget.reserve(1, stage="implied-set")
        if not implied.is_feasible:
            continue
        inner_count = count_tree_with_assertions(inner_tree, implied.literals, n_inner)
        if not meets_threshold(inner_count, sigma, n_inner):
            continue
        good += _count_outer(outer_tree, implied, n_outer, budget)

    params["good_assignments"] = good
    if meets_threshold(good, rho, n_outer):
        cert = CountCertificate(ExactCount(good), outer_tree)
        return yes_verdict("majmaj-exact-good-count", cert, params=params, budget=budget, good_assignment_count=good)
    witness = NoWitness(
        WitnessKind.IMPLIED_SET_SCAN,
        tuple(range(len(formula.clauses))),
        Fraction(good, 1 << n_outer),
        note="exact fraction of good outer assignments",
    )
    return no_verdict("majmaj-exact-good-count", witness, rho, params=params, budget=budget, good_assignment_count=good)


def long_clause_limit_exceeded(count: int, n: int, factor: Optional[int] = None) -> bool:
    """count > c·log2(n+2)，以整數比較 2^count > (n+2)^c。"""
    factor = config.LONG_CLAUSE_FACTOR if factor is None else factor
    return (1 << count) > (n + 2) ** factor


def decide_maj2sat_long_clauses(
    formula: CnfFormula,
    longs: Sequence[Clause],
    rho: Threshold,
    *,
    budget: Optional[Budget] = None,
) -> Verdict:
    """2-CNF 加上少量任意寬度的長子句：#SAT(F ∧ C_1 … C_t) = Σ_S (−1)^{|S|}·#SAT(F ∧ ∧_{i∈S} ¬C_i)。"""
    n = max([formula.num_vars] + [abs(lit) for clause in longs for lit in clause.literals])
    formula = normalize(CnfFormula(n, formula.clauses, formula.roles))
    if formula.max_width > 2:
        raise WidthViolation("the base formula must be a 2-CNF", {"width": formula.max_width})
    longs = [Clause(sort_literals(set(c.literals))) for c in longs]
    longs = [c for c in longs if is_consistent(c.literals)]
    if not longs:
        return decide_thr2sat(formula, rho, budget=budget)
    if long_clause_limit_exceeded(len(longs), n):
        raise TooManyLongClauses(
            f"{len(longs)} long clauses exceed the configured c·log2(n+2)",
            {"long_clauses": len(longs), "n": n, "factor": config.LONG_CLAUSE_FACTOR},
        )
    budget = budget or Budget()
    params = {"c_alpha": c_alpha(rho), "long_clauses": len(longs)}

    witness = empty_clause_witness(formula)
    if witness is not None:
        return no_verdict("empty-clause", witness, rho, params=params, budget=budget)
    tree, witness = _tree_or_witness(formula, tuple(range(len(formula.clauses))), rho, budget)
    if witness is not None:
        return no_verdict("large-disjoint-set", witness, rho, params=params, budget=budget)

    budget.reserve(1 << len(longs), stage="inclusion-exclusion")
    total = 0
    for size in range(len(longs) + 1):
        sign = -1 if size % 2 else 1
        for subset in combinations(longs, size):
            negated = [negate(lit) for clause in subset for lit in clause.literals]
            total += sign * count_tree_with_assertions(tree, negated, n)
    logger.debug("排容計數：%s 個長子句，#SAT=%s", len(longs), total)
    return count_verdict("long-clause-inclusion-exclusion", ExactCount(total), rho, n, tree=tree, params=params, budget=budget)
