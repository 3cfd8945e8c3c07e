"""可滿足性檢查：2-CNF 以蘊含圖強連通分量判定，一般 CNF 以 OR-tools CP-SAT 搜尋見證。"""

from __future__ import annotations

import logging
from itertools import product
from typing import Iterable, Optional, Sequence

import networkx as nx

from thrsat.core import config
from thrsat.core.errors import BudgetExceeded, WidthViolation
from thrsat.services.combinatorics import clause_assignments, maximal_disjoint_set
from thrsat.services.decomposition import Budget
from thrsat.services.formula import CnfFormula, Literal

logger = logging.getLogger(__name__)


def implication_graph(clauses: Iterable[Sequence[Literal]]) -> nx.DiGraph:
    graph = nx.DiGraph()
    for literals in clauses:
        if len(literals) == 1:
            (a,) = literals
            graph.add_edge(-a, a)
        elif len(literals) == 2:
            a, b = literals
            graph.add_edge(-a, b)
            graph.add_edge(-b, a)
        else:
            raise WidthViolation("implication graph needs width <= 2", {"width": len(literals)})
    return graph


def solve_2sat(clauses: Iterable[Sequence[Literal]]) -> Optional[dict[int, bool]]:
    """回傳一組滿足指派（只含出現過的變數），不可滿足時回傳 None。"""
    clause_list = [tuple(c) for c in clauses]
    if any(len(c) == 0 for c in clause_list):
        return None
    graph = implication_graph(clause_list)
    condensed = nx.condensation(graph)
    component = condensed.graph["mapping"]
    for node in graph.nodes:
        if component[node] == component.get(-node):
            return None
    order = {comp: pos for pos, comp in enumerate(nx.topological_sort(condensed))}
    model: dict[int, bool] = {}
    for node in graph.nodes:
        var = abs(node)
        if var not in model:
            # 拓撲序較後的分量為真
            model[var] = order[component[var]] > order[component[-var]]
    return model


def is_2sat_satisfiable(clauses: Iterable[Sequence[Literal]]) -> bool:
    return solve_2sat(clauses) is not None


def satisfiable_by_disjoint_set(formula: CnfFormula, budget: Optional[Budget] = None) -> Optional[tuple[Literal, ...]]:
    """3-CNF 可滿足性：列舉 3-子句極大不相交集合的滿足指派，每個分支以 2-SAT 判定。"""
    if formula.max_width > 3:
        raise WidthViolation("needs a 3-CNF", {"width": formula.max_width})
    if formula.has_empty_clause:
        return None
    disjoint = maximal_disjoint_set(formula, width_filter=3)
    if budget is not None:
        budget.reserve(7 ** len(disjoint), stage="disjoint-set-sat")
    per_clause = [clause_assignments(formula.clauses[idx].literals) for idx in disjoint.clause_indices]
    for combo in product(*per_clause):
        alpha = tuple(lit for part in combo for lit in part)
        residual = formula.condition(alpha)
        model = solve_2sat(c.literals for c in residual.clauses)
        if model is not None:
            return alpha + tuple(v if val else -v for v, val in sorted(model.items()))
    return None


def find_model(
    formula: CnfFormula,
    assumptions: Iterable[Literal] = (),
    *,
    time_limit: Optional[float] = None,
) -> Optional[tuple[Literal, ...]]:
    """以 CP-SAT 搜尋滿足指派；逾時（UNKNOWN）視為超出預算。"""
    from ortools.sat.python import cp_model  # type: ignore

    if formula.has_empty_clause:
        return None
    model = cp_model.CpModel()
    x = {v: model.NewBoolVar(f"x{v}") for v in range(1, formula.num_vars + 1)}

    def term(lit: Literal):
        return x[lit] if lit > 0 else x[-lit].Not()

    for clause in formula.clauses:
        model.AddBoolOr([term(lit) for lit in clause.literals])
    for lit in assumptions:
        model.Add(x[abs(lit)] == (1 if lit > 0 else 0))

    solver = cp_model.CpSolver()
    solver.parameters.max_time_in_seconds = float(time_limit or config.WITNESS_TIME_LIMIT)
    solver.parameters.num_search_workers = 1
    status = solver.Solve(model)

    if status in (cp_model.FEASIBLE, cp_model.OPTIMAL):
        return tuple(v if solver.Value(x[v]) else -v for v in range(1, formula.num_vars + 1))
    if status == cp_model.INFEASIBLE:
        return None
    logger.warning("CP-SAT 見證搜尋未在時限內結束：status=%s", solver.StatusName(status))
    raise BudgetExceeded("witness")

