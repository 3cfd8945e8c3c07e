"""葉節點為 1-CNF 的決策樹，以及葉與整棵樹的精確計數。"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional, Union

from thrsat.core import config
from thrsat.core.errors import BudgetExceeded, WidthViolation
from thrsat.services.formula import CnfFormula, ExactCount, Literal, is_consistent

logger = logging.getLogger(__name__)


@dataclass
class Budget:
    """單次判定呼叫的列舉額度；leaves_expanded 累計已展開的分支數。"""

    cap: int = field(default_factory=config.budget_leaves)
    leaves_expanded: int = 0
    exceeded: bool = False

    def reserve(self, projected: int, stage: str) -> None:
        if self.leaves_expanded + projected > self.cap:
            self.exceeded = True
            logger.info("超出列舉上限：stage=%s projected=%s cap=%s", stage, projected, self.cap)
            raise BudgetExceeded(stage, projected=self.leaves_expanded + projected, cap=self.cap)
        self.leaves_expanded += projected

    def as_dict(self) -> dict:
        return {"leaves_expanded": self.leaves_expanded, "exceeded": self.exceeded, "cap": self.cap}


@dataclass(frozen=True)
class TreeLeaf:
    assignment: tuple[Literal, ...]
    formula: CnfFormula
    fixed_count: int

    def __post_init__(self) -> None:
        if self.formula.max_width > 1:
            raise WidthViolation("leaf formula must be a 1-CNF", {"width": self.formula.max_width})


@dataclass(frozen=True)
class TreeNode:
    # 來源公式中該節點所用的不相交子句集合（索引）
    disjoint_set: tuple[int, ...]
    branches: tuple[tuple[tuple[Literal, ...], "DecompositionTree"], ...]


DecompositionTree = Union[TreeLeaf, TreeNode]


def iter_leaves(tree: DecompositionTree) -> Iterator[TreeLeaf]:
    stack: list[DecompositionTree] = [tree]
    while stack:
        node = stack.pop()
        if isinstance(node, TreeLeaf):
            yield node
            continue
        for _, child in reversed(node.branches):
            stack.append(child)


def leaf_count(tree: DecompositionTree) -> int:
    return sum(1 for _ in iter_leaves(tree))


def count_1cnf(formula: CnfFormula, free_vars: int) -> ExactCount:
    """1-CNF 的解數：文字集合一致時為 2^(free_vars − 相異文字數)，否則為 0。"""
    literals: set[Literal] = set()
    for clause in formula.clauses:
        if clause.width == 0:
            return ExactCount(0, 1)
        if clause.width > 1:
            raise WidthViolation("count_1cnf needs width <= 1", {"width": clause.width})
        literals.add(clause.literals[0])
    if not is_consistent(literals):
        return ExactCount(0, 1)
    if len(literals) > free_vars:
        raise ValueError("more asserted literals than free variables")
    return ExactCount(1 << (free_vars - len(literals)), 1)


def count_leaf_with_assertions(leaf: TreeLeaf, extra: Iterable[Literal], n: int) -> int:
    """在葉上額外斷言一組文字後的解數；與路徑指派衝突者為 0，重複者略過。"""
    path = set(leaf.assignment)
    units: set[Literal] = set()
    for clause in leaf.formula.clauses:
        if clause.width == 0:
            return 0
        units.add(clause.literals[0])
    for lit in extra:
        if -lit in path:
            return 0
        if lit in path:
            continue
        units.add(lit)
    if not is_consistent(units):
        return 0
    return 1 << (n - leaf.fixed_count - len(units))


def count_tree(tree: DecompositionTree, n: int) -> ExactCount:
    total = 0
    leaves = 0
    for leaf in iter_leaves(tree):
        leaves += 1
        total += count_1cnf(leaf.formula, n - leaf.fixed_count).value
    return ExactCount(total, leaves)


def count_tree_with_assertions(tree: DecompositionTree, extra: Iterable[Literal], n: int) -> int:
    asserted = tuple(extra)
    return sum(count_leaf_with_assertions(leaf, asserted, n) for leaf in iter_leaves(tree))


def tree_to_dict(tree: DecompositionTree, *, max_leaves: Optional[int] = 64) -> dict:
    """JSON 友善的樹狀結構；葉太多時只輸出摘要。"""
    leaves = leaf_count(tree)
    if max_leaves is not None and leaves > max_leaves:
        return {"leaves": leaves, "truncated": True}
    return {"leaves": leaves, "truncated": False, "root": _node_to_dict(tree)}


def _node_to_dict(node: DecompositionTree) -> dict:
    if isinstance(node, TreeLeaf):
        return {
            "assignment": list(node.assignment),
            "units": [c.literals[0] if c.literals else 0 for c in node.formula.clauses],
            "fixed_count": node.fixed_count,
        }
    return {
        "disjoint_set": list(node.disjoint_set),
        "branches": [{"assignment": list(a), "child": _node_to_dict(c)} for a, c in node.branches],
    }
