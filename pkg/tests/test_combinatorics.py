from __future__ import annotations

from fractions import Fraction
from itertools import combinations

import pytest

from thrsat.core.errors import BudgetExceeded, WidthViolation
from thrsat.services.combinatorics import (
    DisjointSet,
    Sunflower,
    _stage_bounds,
    disjoint_set_bound,
    enumerate_satisfying_assignments,
    extract_3cnf,
    extract_kcnf,
    extraction_leaf_bound,
    find_sunflower_with_core,
    maximal_disjoint_set,
    validate_sunflower,
)
from thrsat.services.decomposition import Budget, leaf_count
from thrsat.services.formula import Clause, CnfFormula, is_consistent, normalize
from thrsat.services.oracle import GeneratorConfig, brute_max_sunflower, random_kcnf


def _cnf(n: int, *clauses: tuple[int, ...]) -> CnfFormula:
    return CnfFormula(n, tuple(Clause(tuple(c)) for c in clauses))


def test_maximal_disjoint_set_is_greedy_in_clause_order():
    formula = _cnf(4, (1, 2), (3, 4), (1, 3))
    assert maximal_disjoint_set(formula).clause_indices == (0, 1)
    assert maximal_disjoint_set(_cnf(3)).size == 0


def test_maximal_disjoint_set_width_filter():
    formula = _cnf(6, (1, 2), (3, 4, 5), (2, 6, 4))
    assert maximal_disjoint_set(formula, width_filter=3).clause_indices == (1,)


def test_seven_disjoint_two_clauses_bound_is_below_half():
    formula = _cnf(14, *[(2 * i + 1, 2 * i + 2) for i in range(7)])
    members = maximal_disjoint_set(formula).clause_indices
    assert len(members) == 7
    assert disjoint_set_bound(formula, members) == Fraction(3, 4) ** 7
    assert Fraction(3, 4) ** 7 < Fraction(1, 2)


def test_enumerate_satisfying_assignments_counts():
    one = _cnf(3, (1, 2))
    assert list(enumerate_satisfying_assignments(one, DisjointSet((0,)))) == [(1, 2), (1, -2), (-1, 2)]
    three = _cnf(3, (1, 2, 3))
    assert len(list(enumerate_satisfying_assignments(three, DisjointSet((0,))))) == 7
    pair = _cnf(6, (1, 2, 3), (-4, 5, -6))
    assignments = list(enumerate_satisfying_assignments(pair, DisjointSet((0, 1))))
    assert len(assignments) == 49
    assert len(set(assignments)) == 49
    assert all(pair.evaluate(set(a)) for a in assignments)


def test_extract_3cnf_zero_sunflower():
    formula = _cnf(9, (1, 2, 3), (4, 5, 6), (7, 8, 9))
    outcome = extract_3cnf(formula, 3, 5)
    assert outcome.sunflower == Sunflower((), (0, 1, 2))
    assert outcome.stage == 0


def test_extract_3cnf_one_sunflower_through_common_literal():
    formula = _cnf(11, *[(1, 2 * i, 2 * i + 1) for i in range(1, 6)])
    outcome = extract_3cnf(formula, 2, 4)
    assert outcome.sunflower is not None
    assert outcome.sunflower.core == (1,)
    assert outcome.sunflower.petal_indices == (1, 2, 3, 4)
    assert validate_sunflower(formula, outcome.sunflower)


def test_extract_3cnf_rejects_wide_clauses():
    with pytest.raises(WidthViolation):
        extract_3cnf(_cnf(4, (1, 2, 3, 4)), 2, 2)


def test_extract_kcnf_weight_two_sunflower():
    formula = _cnf(12, *[(1, 2, 2 * i + 1, 2 * i + 2) for i in range(1, 6)])
    outcome = extract_kcnf(formula, [10, 10, 4])
    assert outcome.sunflower is not None
    assert outcome.sunflower.core == (1, 2)
    assert outcome.sunflower.size == 4
    assert validate_sunflower(formula, outcome.sunflower)


def test_extract_kcnf_compares_petals_with_q_of_core_weight():
    # 原生 2-子句在第 1 層才出現，核心權重 0，與 Q_0 比較而不是 Q_1
    formula = _cnf(9, (1, 2, 3), (4, 5), (6, 7), (8, 9))
    outcome = extract_kcnf(formula, [3, 100])
    assert outcome.stage == 1
    assert outcome.sunflower == Sunflower((), (1, 2, 3))
    assert validate_sunflower(formula, outcome.sunflower)


@pytest.mark.parametrize("q_values", [[3, 2, 4], [2, 5, 2]])
def test_extract_kcnf_stage_sizes_respect_growth_bound(q_values):
    bounds = _stage_bounds(4, q_values)
    trees = 0
    for seed in range(30):
        cfg = GeneratorConfig(n=6 + seed % 5, clause_count=4 + seed % 9, k=4, seed=seed, width_mix=True)
        formula = random_kcnf(cfg)
        outcome = extract_kcnf(formula, q_values)
        if outcome.tree is None:
            continue
        trees += 1
        assert all(size <= bound for size, bound in zip(outcome.stage_sizes, bounds))
        assert leaf_count(outcome.tree) <= extraction_leaf_bound(4, q_values)
    assert trees > 0


def test_extract_kcnf_on_top_gives_single_leaf():
    outcome = extract_kcnf(_cnf(5), [2, 2])
    assert outcome.tree is not None
    assert outcome.sunflower is None


def test_extract_kcnf_needs_q0():
    with pytest.raises(ValueError):
        extract_kcnf(_cnf(2, (1,)), [])


def test_find_sunflower_with_core_examples():
    formula = _cnf(5, (1, 2, 3), (1, 2, 4), (1, 2, 5))
    found = find_sunflower_with_core(formula, [1, 2], 3)
    assert found is not None and found.size == 3
    assert find_sunflower_with_core(formula, [1], 3) is None
    assert find_sunflower_with_core(formula, [1, -1], 1) is None


def test_find_sunflower_needs_exact_packing_beyond_greedy():
    # 貪婪先取第一個子句會擋住另外兩片花瓣；精確打包可取到 2
    formula = _cnf(5, (1, 2, 3), (1, 2, 4), (1, 3, 5))
    found = find_sunflower_with_core(formula, [1], 2)
    assert found is not None
    assert found.petal_indices == (1, 2)
    assert validate_sunflower(formula, found)


def _cores(formula: CnfFormula, max_weight: int) -> set[tuple[int, ...]]:
    cores: set[tuple[int, ...]] = {()}
    for clause in formula.clauses:
        for w in range(1, max_weight + 1):
            for core in combinations(clause.literals, w):
                if is_consistent(core):
                    cores.add(tuple(sorted(core)))
    return cores


def test_find_sunflower_agrees_with_packing_oracle():
    for seed in range(3):
        formula = normalize(random_kcnf(GeneratorConfig(n=10, clause_count=20, k=3, seed=seed)))
        for core in sorted(_cores(formula, 2)):
            best = brute_max_sunflower(formula, core)
            for q in range(1, 5):
                found = find_sunflower_with_core(formula, core, q)
                assert (found is not None) == (best >= q)
                if found is not None:
                    assert validate_sunflower(formula, found)


def test_returned_sunflowers_validate():
    for seed in range(40):
        formula = normalize(random_kcnf(GeneratorConfig(n=12, clause_count=30, k=3, seed=seed)))
        try:
            outcome = extract_3cnf(formula, 4, 3, Budget(cap=200_000))
        except BudgetExceeded:
            continue
        if outcome.sunflower is not None:
            assert validate_sunflower(formula, outcome.sunflower)
            triggering = 4 if outcome.sunflower.weight == 0 else 3
            assert outcome.sunflower.size >= triggering


def test_adding_clauses_never_shrinks_max_sunflower():
    formula = _cnf(8, (1, 2, 3), (1, 4, 5))
    before = brute_max_sunflower(formula, [1])
    after = brute_max_sunflower(formula.extend([Clause((1, 6, 7))]), [1])
    assert before == 2
    assert after == 3
