"""暴力求值的對照組（oracle）與可重現的隨機實例產生器。

計數採用逐變數的「真值表欄位」大整數：第 i 個變數的欄位在第 j 位為 1 若且唯若
指派 j 令該變數為真，子句為欄位的 OR、公式為 AND，最後數 1 的個數。
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import yaml

from thrsat.core import config
from thrsat.core.errors import InvalidConfig, RoleMissing, TooLarge
from thrsat.services.formula import (
    Clause,
    CnfFormula,
    ExactCount,
    Literal,
    Threshold,
    VariableRole,
    meets_threshold,
    sort_literals,
)

logger = logging.getLogger(__name__)

FUZZ_PROFILES_PATH = Path(__file__).resolve().parents[1] / "resources" / "fuzz_profiles.yaml"


def _column(position: int, total_bits: int) -> int:
    half = 1 << position
    period = half << 1
    unit = ((1 << half) - 1) << half
    all_ones = (1 << total_bits) - 1
    return unit * (all_ones // ((1 << period) - 1))


def _satisfying_mask(formula: CnfFormula, positions: dict[int, int], width: int) -> int:
    total_bits = 1 << width
    all_ones = (1 << total_bits) - 1
    columns = {var: _column(pos, total_bits) for var, pos in positions.items()}
    mask = all_ones
    for clause in formula.clauses:
        clause_mask = 0
        for lit in clause.literals:
            col = columns[abs(lit)]
            clause_mask |= col if lit > 0 else all_ones ^ col
            if clause_mask == all_ones:
                break
        mask &= clause_mask
        if not mask:
            break
    return mask


def brute_count(formula: CnfFormula) -> ExactCount:
    n = formula.num_vars
    if n > config.ORACLE_MAX_VARS:
        raise TooLarge(f"brute_count supports n <= {config.ORACLE_MAX_VARS}", {"n": n})
    positions = {v: v - 1 for v in range(1, n + 1)}
    mask = _satisfying_mask(formula, positions, n)
    return ExactCount(bin(mask).count("1"))


def brute_decide(formula: CnfFormula, rho: Threshold, *, strict: bool = False) -> bool:
    return meets_threshold(brute_count(formula), rho, formula.num_vars, strict=strict)


@dataclass(frozen=True)
class TwoLevelResult:
    emaj: bool
    majmaj: bool
    good_count: int


def split_roles(formula: CnfFormula) -> tuple[list[int], list[int]]:
    """回傳（存在變數、機率變數）；任一變數未標記角色時拋出 RoleMissing。"""
    if not formula.roles:
        raise RoleMissing("formula carries no role directives")
    outer = formula.variables_with_role(VariableRole.EXISTENTIAL)
    inner = formula.variables_with_role(VariableRole.PROBABILISTIC)
    plain = formula.variables_with_role(VariableRole.PLAIN)
    if plain:
        raise RoleMissing("every variable needs a role", {"variables": plain})
    return outer, inner


def brute_two_level(formula: CnfFormula, rho: Threshold, sigma: Threshold) -> TwoLevelResult:
    """對每個外層指派數內層解數：emaj 為存在內層比例 ≥ σ 的外層指派，majmaj 為好指派比例 ≥ ρ。"""
    outer, inner = split_roles(formula)
    n, n_inner = len(outer), len(inner)
    if n + n_inner > config.TWO_LEVEL_MAX_VARS:
        raise TooLarge(f"brute_two_level supports n + n' <= {config.TWO_LEVEL_MAX_VARS}", {"n": n, "n_inner": n_inner})
    positions = {v: i for i, v in enumerate(inner)}
    positions.update({v: n_inner + i for i, v in enumerate(outer)})
    mask = _satisfying_mask(formula, positions, n + n_inner)

    block = (1 << (1 << n_inner)) - 1
    good = 0
    for a in range(1 << n):
        inner_count = bin((mask >> (a << n_inner)) & block).count("1")
        if meets_threshold(inner_count, sigma, n_inner):
            good += 1
    return TwoLevelResult(emaj=good > 0, majmaj=meets_threshold(good, rho, n), good_count=good)


def brute_max_sunflower(formula: CnfFormula, core: Sequence[Literal]) -> int:
    """以 CP-SAT 精確求解：含 core 的子句中，去掉 core 後兩兩變數不相交的最大子句數。"""
    from ortools.sat.python import cp_model  # type: ignore

    if len(formula.clauses) > config.SUNFLOWER_MAX_CLAUSES:
        raise TooLarge(
            f"brute_max_sunflower supports at most {config.SUNFLOWER_MAX_CLAUSES} clauses",
            {"clauses": len(formula.clauses)},
        )
    core_set = set(core)
    if any(-lit in core_set for lit in core_set):
        return 0
    petals = []
    for clause in formula.clauses:
        if core_set.issubset(clause.literals):
            rest = clause.without(core_set).variables
            if rest:
                petals.append(rest)
    if not petals:
        return 0

    model = cp_model.CpModel()
    pick = [model.NewBoolVar(f"p{i}") for i in range(len(petals))]
    touched: dict[int, list] = {}
    for var_set, flag in zip(petals, pick):
        for var in var_set:
            touched.setdefault(var, []).append(flag)
    for flags in touched.values():
        if len(flags) > 1:
            model.Add(sum(flags) <= 1)
    model.Maximize(sum(pick))

    solver = cp_model.CpSolver()
    solver.parameters.num_search_workers = 1
    status = solver.Solve(model)
    if status != cp_model.OPTIMAL:
        raise TooLarge("set packing oracle did not reach optimality")
    return int(round(solver.ObjectiveValue()))


@dataclass(frozen=True)
class GeneratorConfig:
    n: int
    clause_count: int
    k: int
    seed: int = 0
    # 前 role_split 個變數為存在變數，其餘為機率變數
    role_split: Optional[int] = None
    width_mix: bool = False

    def validate(self) -> None:
        if self.n < 0 or self.clause_count < 0 or self.k < 1:
            raise InvalidConfig("n, clause_count must be >= 0 and k >= 1", self.__dict__)
        if self.clause_count and self.k > self.n:
            raise InvalidConfig("k cannot exceed n", self.__dict__)
        if self.role_split is not None and not 0 <= self.role_split <= self.n:
            raise InvalidConfig("role_split must lie in [0, n]", self.__dict__)


def random_kcnf(cfg: GeneratorConfig) -> CnfFormula:
    cfg.validate()
    rng = random.Random(cfg.seed)
    clauses: list[Clause] = []
    for _ in range(cfg.clause_count):
        width = rng.randint(1, cfg.k) if cfg.width_mix else cfg.k
        variables = rng.sample(range(1, cfg.n + 1), width)
        clauses.append(Clause(sort_literals(v if rng.random() < 0.5 else -v for v in variables)))
    roles: tuple[VariableRole, ...] = ()
    if cfg.role_split is not None:
        roles = tuple(
            VariableRole.EXISTENTIAL if v <= cfg.role_split else VariableRole.PROBABILISTIC
            for v in range(1, cfg.n + 1)
        )
    return CnfFormula(cfg.n, tuple(clauses), roles)


def load_fuzz_profiles(path: Path = FUZZ_PROFILES_PATH) -> dict[str, dict]:
    raw = yaml.safe_load(path.read_text(encoding="utf-8")) or {}
    profiles = raw.get("profiles") if isinstance(raw, dict) else None
    if not isinstance(profiles, dict):
        return {}
    return {str(name): spec for name, spec in profiles.items() if isinstance(spec, dict)}
