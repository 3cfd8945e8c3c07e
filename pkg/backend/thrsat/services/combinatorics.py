"""不相交子句集合與向日葵（sunflower）抽取。

抽取程序逐層處理：第 a 層在目前公式中貪婪地取寬度恰為 k−a 的極大不相交集合 S_a，
列舉其所有滿足指派並向下展開；若某層的 S_a 過大，依「被刪去的文字集合」分組即可
在原公式中找到大的向日葵。全部展開完畢時葉節點都是 1-CNF。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Iterable, Iterator, Optional, Sequence

from thrsat.core.errors import WidthViolation
from thrsat.services.decomposition import Budget, DecompositionTree, TreeLeaf, TreeNode
from thrsat.services.formula import (
    Clause,
    CnfFormula,
    Literal,
    is_consistent,
    literal_key,
    sort_literals,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DisjointSet:
    clause_indices: tuple[int, ...]
    width_filter: Optional[int] = None

    @property
    def size(self) -> int:
        return len(self.clause_indices)

    def __len__(self) -> int:
        return len(self.clause_indices)


@dataclass(frozen=True)
class Sunflower:
    core: tuple[Literal, ...]
    petal_indices: tuple[int, ...]

    @property
    def weight(self) -> int:
        return len(self.core)

    @property
    def size(self) -> int:
        return len(self.petal_indices)

    def as_dict(self) -> dict:
        return {"core": list(self.core), "petals": list(self.petal_indices), "weight": self.weight, "size": self.size}


@dataclass(frozen=True)
class ExtractionOutcome:
    sunflower: Optional[Sunflower] = None
    tree: Optional[DecompositionTree] = None
    stage_sizes: tuple[int, ...] = ()
    stage: int = 0

    def __post_init__(self) -> None:
        if (self.sunflower is None) == (self.tree is None):
            raise ValueError("exactly one of sunflower / tree must be set")


def greedy_disjoint(items: Iterable[tuple[int, Sequence[Literal]]]) -> list[int]:
    used: set[int] = set()
    chosen: list[int] = []
    for key, literals in items:
        if not literals:
            continue
        variables = {abs(lit) for lit in literals}
        if used.isdisjoint(variables):
            used |= variables
            chosen.append(key)
    return chosen


def maximal_disjoint_set(formula: CnfFormula, width_filter: Optional[int] = None) -> DisjointSet:
    """依子句原順序貪婪選取，回傳變數兩兩不相交且極大的集合。"""
    items = (
        (idx, clause.literals)
        for idx, clause in enumerate(formula.clauses)
        if width_filter is None or clause.width == width_filter
    )
    return DisjointSet(tuple(greedy_disjoint(items)), width_filter)


def disjoint_set_bound(formula: CnfFormula, members: Iterable[int]) -> Fraction:
    """不相交子句集合可被滿足的比例上界 ∏(1 − 2^{−|C|})。"""
    bound = Fraction(1)
    for idx in members:
        bound *= 1 - Fraction(1, 1 << formula.clauses[idx].width)
    return bound


def clause_assignments(literals: Sequence[Literal]) -> list[tuple[Literal, ...]]:
    """單一子句變數上的所有滿足指派，依字典序（真值優先）。"""
    variables = sorted({abs(lit) for lit in literals})
    own = set(literals)
    out: list[tuple[Literal, ...]] = []
    for bits in product((True, False), repeat=len(variables)):
        assignment = tuple(v if b else -v for v, b in zip(variables, bits))
        if any(lit in own for lit in assignment):
            out.append(assignment)
    return out


def enumerate_satisfying_assignments(formula: CnfFormula, disjoint: DisjointSet) -> Iterator[tuple[Literal, ...]]:
    per_clause = [clause_assignments(formula.clauses[idx].literals) for idx in disjoint.clause_indices]
    for combo in product(*per_clause):
        yield tuple(lit for part in combo for lit in part)


@dataclass
class _WorkClause:
    origin: int
    literals: tuple[Literal, ...]


@dataclass
class _Pending:
    assignment: tuple[Literal, ...]
    working: list[_WorkClause]
    disjoint: list[int] = field(default_factory=list)
    branches: list[tuple[tuple[Literal, ...], "_Pending"]] = field(default_factory=list)
    falsified: bool = False


def _condition(working: list[_WorkClause], alpha: Iterable[Literal]) -> tuple[list[_WorkClause], bool]:
    true_lits = set(alpha)
    out: list[_WorkClause] = []
    falsified = False
    for wc in working:
        if any(lit in true_lits for lit in wc.literals):
            continue
        rest = tuple(lit for lit in wc.literals if -lit not in true_lits)
        if not rest:
            falsified = True
        out.append(_WorkClause(wc.origin, rest))
    return out, falsified


def _stage_bounds(k: int, q_values: Sequence[int]) -> list[int]:
    bounds: list[int] = []
    for a in range(k - 1):
        if a == 0:
            bounds.append(max(q_values[0] - 1, 0))
            continue
        growth = 1
        for j in range(a):
            growth *= (k - j) * bounds[j] + 1
        bounds.append(max(q_values[: a + 1]) * growth - 1)
    return bounds


def extraction_leaf_bound(k: int, q_values: Sequence[int]) -> int:
    """抽取失敗（未找到向日葵）時決策樹葉數的上界。"""
    total = 1
    for a, size in enumerate(_stage_bounds(k, q_values)):
        total *= ((1 << (k - a)) - 1) ** size
    return total


def capped_leaf_bound(k: int, q_values: Sequence[int], limit: int) -> Optional[int]:
    """同 extraction_leaf_bound，但超過 limit 時直接回傳 None，避免展開天文數字。"""
    total = 1
    for a, size in enumerate(_stage_bounds(k, q_values)):
        base = (1 << (k - a)) - 1
        if base == 1 or size == 0:
            continue
        if size > limit.bit_length():
            return None
        total *= base ** size
        if total > limit:
            return None
    return total


def extract_kcnf(formula: CnfFormula, q_values: Sequence[int], budget: Optional[Budget] = None) -> ExtractionOutcome:
    """回傳權重 v 且大小 ≥ Q_v 的向日葵，或葉為 1-CNF、葉計數總和等於 #SAT 的決策樹。"""
    k = len(q_values) + 1
    if k < 2:
        raise ValueError("need at least Q_0")
    if formula.max_width > k:
        raise WidthViolation(f"clause width {formula.max_width} exceeds k={k}", {"k": k})
    budget = budget or Budget()

    root = _Pending((), [_WorkClause(i, c.literals) for i, c in enumerate(formula.clauses)])
    root.falsified = formula.has_empty_clause
    frontier = [root] if not root.falsified else []
    stage_sizes: list[int] = []

    for a in range(k - 1):
        width = k - a
        largest = 0
        for node in frontier:
            node.disjoint = greedy_disjoint(
                (pos, wc.literals) for pos, wc in enumerate(node.working) if len(wc.literals) == width
            )
            largest = max(largest, len(node.disjoint))
            found = _sunflower_in_stage(formula, node, q_values)
            if found is not None:
                stage_sizes.append(largest)
                logger.debug("抽取於第 %s 層找到向日葵：weight=%s size=%s", a, found.weight, found.size)
                return ExtractionOutcome(sunflower=found, stage_sizes=tuple(stage_sizes), stage=a)
        stage_sizes.append(largest)

        projected = sum(((1 << width) - 1) ** len(node.disjoint) for node in frontier)
        budget.reserve(projected, stage=f"extract-{a}")

        next_frontier: list[_Pending] = []
        for node in frontier:
            per_clause = [clause_assignments(node.working[pos].literals) for pos in node.disjoint]
            for combo in product(*per_clause):
                alpha = tuple(lit for part in combo for lit in part)
                working, falsified = _condition(node.working, alpha)
                child = _Pending(node.assignment + alpha, working, falsified=falsified)
                node.branches.append((alpha, child))
                if not falsified:
                    next_frontier.append(child)
        frontier = next_frontier

    tree = _freeze(root, formula)
    return ExtractionOutcome(tree=tree, stage_sizes=tuple(stage_sizes), stage=k - 1)


def _sunflower_in_stage(formula: CnfFormula, node: _Pending, q_values: Sequence[int]) -> Optional[Sunflower]:
    """把 S_a 的成員依「已刪去的文字集合 L」分組；|L|=v 的組若有 ≥ Q_v 個成員即為 v-向日葵。"""
    groups: dict[tuple[Literal, ...], list[int]] = {}
    for pos in node.disjoint:
        wc = node.working[pos]
        current = set(wc.literals)
        removed = sort_literals(lit for lit in formula.clauses[wc.origin].literals if lit not in current)
        groups.setdefault(removed, []).append(wc.origin)
    ordered = sorted(groups.items(), key=lambda item: (len(item[0]), [literal_key(lit) for lit in item[0]]))
    # 以核心權重取 Q_v 而非層數；未觸發時每組 < max(Q_0..Q_a)，_stage_bounds 即依此計算
    for core, petals in ordered:
        v = len(core)
        if v < len(q_values) and len(petals) >= q_values[v]:
            return Sunflower(core, tuple(petals))
    return None


def _freeze(node: _Pending, formula: CnfFormula) -> DecompositionTree:
    if node.falsified:
        return TreeLeaf(node.assignment, formula.with_clauses([Clause(())]), len(node.assignment))
    if not node.branches:
        clauses = [Clause(wc.literals) for wc in node.working]
        return TreeLeaf(node.assignment, formula.with_clauses(clauses), len(node.assignment))
    origins = tuple(node.working[pos].origin for pos in node.disjoint)
    return TreeNode(origins, tuple((alpha, _freeze(child, formula)) for alpha, child in node.branches))


def extract_3cnf(formula: CnfFormula, z: int, q: int, budget: Optional[Budget] = None) -> ExtractionOutcome:
    if formula.max_width > 3:
        raise WidthViolation("extract_3cnf needs a 3-CNF", {"width": formula.max_width})
    return extract_kcnf(formula, [z, q], budget)


def validate_sunflower(formula: CnfFormula, sunflower: Sunflower) -> bool:
    if not is_consistent(sunflower.core):
        return False
    seen: set[int] = set()
    for idx in sunflower.petal_indices:
        clause = formula.clauses[idx]
        if not clause.contains_all(sunflower.core):
            return False
        rest = clause.without(sunflower.core).variables
        if not rest or not seen.isdisjoint(rest):
            return False
        seen |= rest
    return len(set(sunflower.petal_indices)) == len(sunflower.petal_indices)


def _petal_candidates(formula: CnfFormula, core: Sequence[Literal]) -> list[tuple[int, frozenset[int]]]:
    out: list[tuple[int, frozenset[int]]] = []
    for idx, clause in enumerate(formula.clauses):
        if not clause.contains_all(core):
            continue
        rest = clause.without(core).variables
        if rest:
            out.append((idx, rest))
    return out


def find_sunflower_with_core(
    formula: CnfFormula,
    core: Sequence[Literal],
    q: int,
    budget: Optional[Budget] = None,
) -> Optional[Sunflower]:
    """以 core 為核、大小 ≥ q 的向日葵；精確集合打包（貪婪上下界 + 分支定界）。"""
    core = sort_literals(set(core))
    if not is_consistent(core):
        return None
    candidates = _petal_candidates(formula, core)
    if q <= 0:
        return Sunflower(core, ())

    greedy = greedy_disjoint((idx, tuple(rest)) for idx, rest in candidates)
    if len(greedy) >= q:
        return Sunflower(core, tuple(greedy))
    width = max((len(rest) for _, rest in candidates), default=0)
    if width * len(greedy) < q:
        return None

    found = _pack(candidates, q, budget)
    if found is None:
        return None
    return Sunflower(core, tuple(found))


def _pack(
    candidates: list[tuple[int, frozenset[int]]],
    target: int,
    budget: Optional[Budget],
) -> Optional[list[int]]:
    """分支定界：是否存在 target 個兩兩不相交的候選集合。"""
    width = max((len(rest) for _, rest in candidates), default=0)

    def upper_bound(pool: list[tuple[int, frozenset[int]]]) -> int:
        return width * len(greedy_disjoint((idx, tuple(rest)) for idx, rest in pool))

    def search(pool: list[tuple[int, frozenset[int]]], chosen: list[int]) -> Optional[list[int]]:
        if len(chosen) >= target:
            return list(chosen)
        if len(chosen) + upper_bound(pool) < target:
            return None
        if budget is not None:
            budget.reserve(1, stage="set-packing")
        head_idx, head_vars = pool[0]
        with_head = [(i, r) for i, r in pool[1:] if r.isdisjoint(head_vars)]
        chosen.append(head_idx)
        result = search(with_head, chosen)
        chosen.pop()
        if result is not None:
            return result
        return search(pool[1:], chosen)

    return search(candidates, [])
