"""CNF 資料模型：子句、公式、門檻、精確計數，以及 DIMACS 讀寫與正規化。

文字常數 (literal) 沿用 DIMACS 的帶號整數：``3`` 為 x3，``-3`` 為 ¬x3。
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Iterable, Iterator, Optional, Sequence

from thrsat.core.errors import ParseError

logger = logging.getLogger(__name__)

Literal = int


class VariableRole(str, Enum):
    PLAIN = "plain"
    EXISTENTIAL = "existential"
    PROBABILISTIC = "probabilistic"


class Ordering(str, Enum):
    LT = "LT"
    EQ = "EQ"
    GT = "GT"


ROLE_DIRECTIVES = {"e": VariableRole.EXISTENTIAL, "p": VariableRole.PROBABILISTIC}


def variable_of(literal: Literal) -> int:
    return abs(literal)


def negate(literal: Literal) -> Literal:
    return -literal


def literal_key(literal: Literal) -> tuple[int, int]:
    """字典序：先比變數編號，同變數時正文字在前。"""
    return (abs(literal), 0 if literal > 0 else 1)


def sort_literals(literals: Iterable[Literal]) -> tuple[Literal, ...]:
    return tuple(sorted(literals, key=literal_key))


def is_consistent(literals: Iterable[Literal]) -> bool:
    seen = set(literals)
    return not any(-lit in seen for lit in seen)


@dataclass(frozen=True)
class Clause:
    literals: tuple[Literal, ...]

    @property
    def width(self) -> int:
        return len(self.literals)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(abs(lit) for lit in self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals

    def contains_all(self, literals: Iterable[Literal]) -> bool:
        own = set(self.literals)
        return all(lit in own for lit in literals)

    def without(self, literals: Iterable[Literal]) -> "Clause":
        drop = set(literals)
        return Clause(tuple(lit for lit in self.literals if lit not in drop))

    def __str__(self) -> str:
        if not self.literals:
            return "⊥"
        return "(" + " ∨ ".join(_literal_text(lit) for lit in self.literals) + ")"


def _literal_text(literal: Literal) -> str:
    return f"x{literal}" if literal > 0 else f"¬x{-literal}"


@dataclass(frozen=True)
class CnfFormula:
    num_vars: int
    clauses: tuple[Clause, ...] = ()
    # roles[i] 為變數 i+1 的角色；空 tuple 代表全部 plain
    roles: tuple[VariableRole, ...] = ()

    @property
    def max_width(self) -> int:
        return max((c.width for c in self.clauses), default=0)

    @property
    def size(self) -> int:
        return sum(c.width for c in self.clauses)

    @property
    def is_top(self) -> bool:
        return not self.clauses

    @property
    def has_empty_clause(self) -> bool:
        return any(c.is_empty for c in self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def __iter__(self) -> Iterator[Clause]:
        return iter(self.clauses)

    def role_of(self, variable: int) -> VariableRole:
        if not self.roles:
            return VariableRole.PLAIN
        return self.roles[variable - 1]

    def variables_with_role(self, role: VariableRole) -> list[int]:
        return [v for v in range(1, self.num_vars + 1) if self.role_of(v) == role]

    def with_clauses(self, clauses: Iterable[Clause]) -> "CnfFormula":
        return CnfFormula(self.num_vars, tuple(clauses), self.roles)

    def extend(self, clauses: Iterable[Clause]) -> "CnfFormula":
        return CnfFormula(self.num_vars, self.clauses + tuple(clauses), self.roles)

    def condition(self, assignment: Iterable[Literal]) -> "CnfFormula":
        """令 assignment 中的文字為真：移除已滿足子句，刪去為假的文字。num_vars 不變。"""
        true_lits = set(assignment)
        kept: list[Clause] = []
        for clause in self.clauses:
            if any(lit in true_lits for lit in clause.literals):
                continue
            kept.append(Clause(tuple(lit for lit in clause.literals if -lit not in true_lits)))
        return self.with_clauses(kept)

    def evaluate(self, true_lits: set[Literal]) -> bool:
        return all(any(lit in true_lits for lit in c.literals) for c in self.clauses)


@dataclass(frozen=True)
class Threshold:
    """ρ = a / (2^v · b)，b 為奇數且分子分母互質。建構請走 arithmetic.canonicalize_threshold。"""

    numer: int
    denom_pow2: int
    denom_odd: int

    @property
    def denominator(self) -> int:
        return (1 << self.denom_pow2) * self.denom_odd

    @property
    def fraction(self) -> Fraction:
        return Fraction(self.numer, self.denominator)

    def __str__(self) -> str:
        return f"{self.numer}/{self.denominator}"


@dataclass(frozen=True)
class ExactCount:
    value: int
    term_bound: Optional[int] = None

    def __post_init__(self) -> None:
        if self.value < 0:
            raise ValueError("count must be nonnegative")

    def __add__(self, other: "ExactCount") -> "ExactCount":
        bound = None
        if self.term_bound is not None and other.term_bound is not None:
            bound = self.term_bound + other.term_bound
        return ExactCount(self.value + other.value, bound)

    def respects_term_bound(self) -> bool:
        """value 的二進位 1 的個數即最少需要的 2 冪次項數。"""
        if self.term_bound is None:
            return True
        return bin(self.value).count("1") <= self.term_bound


@dataclass
class _PendingClause:
    literals: list[int] = field(default_factory=list)
    start_line: int = 0


def parse_dimacs(text: bytes | str) -> CnfFormula:
    """解析 DIMACS CNF；支援 ``c role e ... 0`` / ``c role p ... 0`` 角色指示。子句順序保留。"""
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")

    num_vars: int | None = None
    declared_clauses = 0
    clauses: list[Clause] = []
    role_map: dict[int, VariableRole] = {}
    pending = _PendingClause()

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("%"):
            break
        if line.startswith("c"):
            tokens = line.split()
            if len(tokens) >= 3 and tokens[0] == "c" and tokens[1] == "role":
                role = ROLE_DIRECTIVES.get(tokens[2])
                if role is None:
                    raise ParseError(f"unknown role tag {tokens[2]!r}", lineno)
                values = _parse_ints(tokens[3:], lineno)
                if not values or values[-1] != 0 or 0 in values[:-1]:
                    raise ParseError("role directive must end with a single terminating 0", lineno)
                for var in values[:-1]:
                    if var < 0:
                        raise ParseError(f"role directive names negative variable {var}", lineno)
                    role_map[var] = role
            continue
        if line.startswith("p"):
            if num_vars is not None:
                raise ParseError("duplicate problem line", lineno)
            tokens = line.split()
            if len(tokens) != 4 or tokens[1] != "cnf":
                raise ParseError("malformed header, expected 'p cnf <vars> <clauses>'", lineno)
            num_vars, declared_clauses = _parse_ints(tokens[2:], lineno)
            if num_vars < 0 or declared_clauses < 0:
                raise ParseError("negative header value", lineno)
            continue
        if num_vars is None:
            raise ParseError("clause before header", lineno)
        for lit in _parse_ints(line.split(), lineno):
            if not pending.literals:
                pending.start_line = lineno
            if lit == 0:
                clauses.append(Clause(tuple(pending.literals)))
                pending = _PendingClause()
                continue
            if abs(lit) > num_vars:
                raise ParseError(f"literal {lit} exceeds declared variable count {num_vars}", lineno)
            pending.literals.append(lit)

    if num_vars is None:
        raise ParseError("missing header", None)
    if pending.literals:
        raise ParseError("clause without terminating 0", pending.start_line)
    for var in role_map:
        if var > num_vars:
            raise ParseError(f"role directive names variable {var} > {num_vars}", None)
    if len(clauses) != declared_clauses:
        logger.warning("DIMACS 子句數與標頭不符：標頭 %s，實際 %s", declared_clauses, len(clauses))

    roles: tuple[VariableRole, ...] = ()
    if role_map:
        roles = tuple(role_map.get(v, VariableRole.PLAIN) for v in range(1, num_vars + 1))
    return CnfFormula(num_vars, tuple(clauses), roles)


def _parse_ints(tokens: Sequence[str], lineno: int) -> list[int]:
    try:
        return [int(tok) for tok in tokens]
    except ValueError as exc:
        raise ParseError(f"non-integer token: {exc}", lineno) from exc


def serialize_dimacs(formula: CnfFormula) -> str:
    lines = [f"p cnf {formula.num_vars} {len(formula.clauses)}"]
    for tag, role in ROLE_DIRECTIVES.items():
        members = formula.variables_with_role(role) if formula.roles else []
        if members:
            lines.append("c role " + tag + " " + " ".join(map(str, members)) + " 0")
    for clause in formula.clauses:
        lines.append(" ".join([*map(str, clause.literals), "0"]))
    return "\n".join(lines) + "\n"


def normalize(formula: CnfFormula) -> CnfFormula:
    """去除子句內重複文字、恆真子句與重複子句；保留首次出現的子句順序。"""
    seen: set[tuple[int, ...]] = set()
    kept: list[Clause] = []
    for clause in formula.clauses:
        lits = set(clause.literals)
        if any(-lit in lits for lit in lits):
            continue
        canonical = sort_literals(lits)
        if canonical in seen:
            continue
        seen.add(canonical)
        kept.append(Clause(canonical))
    return formula.with_clauses(kept)


def compare_count_to_threshold(count: ExactCount | int, rho: Threshold, n: int) -> Ordering:
    """整數交叉相乘比較 N 與 ρ·2^n。"""
    value = count.value if isinstance(count, ExactCount) else count
    left = value * rho.denominator
    right = rho.numer << n
    if left < right:
        return Ordering.LT
    if left > right:
        return Ordering.GT
    return Ordering.EQ


def meets_threshold(count: ExactCount | int, rho: Threshold, n: int, *, strict: bool = False) -> bool:
    order = compare_count_to_threshold(count, rho, n)
    if strict:
        return order == Ordering.GT
    return order != Ordering.LT
