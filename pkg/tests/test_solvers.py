"""Exact enumeration solvers, the greedy coverage baseline, and their
agreement on shared instances."""

import itertools
import random
from fractions import Fraction

import pytest

from gapforge import (BudgetError, ClusteringInstance, CodeInstance,
                      CoverageInstance, LatticeInstance, coverage_fraction,
                      exact_cvp, exact_kmean, exact_kmedian,
                      exact_max_coverage, exact_min_set_cover, exact_ncp,
                      greedy_max_coverage, guha_khuller_reduction,
                      verify_unique_cover)


def random_coverage(rng, universe=10, nsets=8, k=3):
    sets = tuple(
        tuple(sorted(rng.sample(range(universe), rng.randrange(1, universe))))
        for _ in range(nsets)
    )
    return CoverageInstance(universe, sets, k=k)


def test_greedy_on_disjoint_sets():
    inst = CoverageInstance(10, ((0,), (1, 2), (3, 4, 5), (6, 7, 8, 9)), k=2)
    result = greedy_max_coverage(inst)
    assert result.witness == (3, 2) and result.value == 7


def test_greedy_whole_universe_first():
    inst = CoverageInstance(4, ((0, 1), (0, 1, 2, 3), (2,)), k=2)
    result = greedy_max_coverage(inst)
    assert result.value == 4 and result.witness[0] == 1


def test_greedy_suboptimal_classic():
    inst = CoverageInstance(
        8, ((0, 1, 2, 3), (0, 1, 4, 5), (2, 3, 6, 7)), k=2)
    greedy = greedy_max_coverage(inst)
    exact = exact_max_coverage(inst)
    assert greedy.value == 6 and greedy.witness == (0, 1)
    assert exact.value == 8 and exact.witness == (1, 2)
    assert greedy.value >= (1 - Fraction(1, 4)) * exact.value  # 1-(1-1/2)^2


def test_greedy_ties_take_lowest_index():
    inst = CoverageInstance(2, ((0,), (1,), (0, 1)), k=1)
    assert greedy_max_coverage(inst).witness == (2,)
    tie = CoverageInstance(2, ((0,), (1,)), k=1)
    assert greedy_max_coverage(tie).witness == (0,)


def test_exact_max_coverage_partition():
    inst = CoverageInstance(6, ((0, 3), (1, 4), (2, 5)), k=3)
    result = exact_max_coverage(inst)
    assert result.value == 6
    assert result.enumerated == 1
    assert verify_unique_cover(inst, result.witness)
    assert coverage_fraction(inst, result.value) == 1


def test_exact_max_coverage_min_lex_witness():
    inst = CoverageInstance(2, ((0,), (1,)), k=1)
    assert exact_max_coverage(inst).witness == (0,)


def test_unique_cover_rejects_double_coverage():
    inst = CoverageInstance(3, ((0, 1), (1, 2)), k=2)
    assert not verify_unique_cover(inst, (0, 1))
    assert not verify_unique_cover(inst, (0,))  # element 2 uncovered


def test_exact_min_set_cover():
    inst = CoverageInstance(3, ((0, 1, 2), (0,), (1,), (2,)), k=1)
    result = exact_min_set_cover(inst)
    assert result.value == 1 and result.witness == (0,)

    no_cover = CoverageInstance(3, ((0,), (1,)), k=1)
    with pytest.raises(ValueError, match="no cover exists"):
        exact_min_set_cover(no_cover)


@pytest.mark.parametrize("seed", range(20))
def test_exact_dominates_greedy(seed):
    inst = random_coverage(random.Random(seed))
    greedy = greedy_max_coverage(inst)
    exact = exact_max_coverage(inst)
    assert exact.value >= greedy.value
    guarantee = 1 - (1 - Fraction(1, inst.k)) ** inst.k
    assert greedy.value >= guarantee * exact.value


@pytest.mark.parametrize("seed", range(8))
def test_exact_solvers_order_invariant(seed):
    rng = random.Random(seed)
    inst = random_coverage(rng, nsets=6, k=2)
    perm = list(range(6))
    rng.shuffle(perm)
    shuffled = CoverageInstance(
        inst.universe_size, tuple(inst.sets[j] for j in perm), k=2)
    assert exact_max_coverage(inst).value == exact_max_coverage(shuffled).value

    gk = guha_khuller_reduction(_covering_variant(inst))
    gk_perm = ClusteringInstance(
        gk.num_clients, gk.num_facilities,
        _permute_facilities(gk.dist, gk.num_clients, perm), k=gk.k)
    assert exact_kmedian(gk).value == exact_kmedian(gk_perm).value


def _covering_variant(inst):
    covered = set().union(*map(set, inst.sets))
    leftovers = sorted(set(range(inst.universe_size)) - covered)
    sets = list(inst.sets)
    if leftovers:
        sets[0] = tuple(sorted(set(sets[0]) | set(leftovers)))
    return CoverageInstance(inst.universe_size, tuple(sets), k=inst.k)


def _permute_facilities(dist, nc, perm):
    size = len(dist)
    mapping = list(range(nc)) + [nc + perm[j] for j in range(size - nc)]
    return tuple(
        tuple(dist[mapping[a]][mapping[b]] for b in range(size))
        for a in range(size)
    )


def test_clustering_k_equals_all_facilities():
    d = (
        (0, 2, 1, 3),
        (2, 0, 3, 1),
        (1, 3, 0, 2),
        (3, 1, 2, 0),
    )
    inst = ClusteringInstance(2, 2, d, k=2)
    assert exact_kmedian(inst).value == 2  # each client at its distance-1 facility
    assert exact_kmean(inst).value == 2


def test_clustering_unit_distance_cost():
    cov = CoverageInstance(4, ((0, 1), (2, 3)), k=2)
    inst = guha_khuller_reduction(cov)
    median = exact_kmedian(inst)
    assert median.value == 4 and median.enumerated == 1
    assert exact_kmean(inst).value == 4


@pytest.mark.parametrize("seed", range(8))
def test_kmean_dominates_kmedian_on_unit_metrics(seed):
    cov = _covering_variant(random_coverage(random.Random(seed), nsets=5, k=2))
    inst = guha_khuller_reduction(cov)
    assert exact_kmean(inst).value >= exact_kmedian(inst).value


def test_exact_ncp_codeword_target():
    code = CodeInstance(((1, 0), (0, 1), (1, 1)), (1, 1, 0), k=1)
    result = exact_ncp(code)
    assert result.value == 0 and result.witness == (1, 1)
    assert result.enumerated == 4

    identity = CodeInstance(((1, 0), (0, 1)), (1, 0), k=1)
    assert exact_ncp(identity).value == 0


def test_exact_cvp_examples():
    lat = LatticeInstance(((1, 0), (0, 1)), (2, -1), p=1, k=1)
    result = exact_cvp(lat, box=2)
    assert result.value == 0 and result.witness == (2, -1)
    assert result.enumerated == 25

    default_box = exact_cvp(LatticeInstance(((1,),), (3,), p=2, k=1))
    assert default_box.note == "coordinates enumerated in [-2, 2]"
    assert default_box.value == 1  # box k+1 = 2 stops short of 3

    with pytest.raises(ValueError, match="box must be nonnegative"):
        exact_cvp(lat, box=-1)


def test_solver_budget_errors():
    cov = random_coverage(random.Random(0))
    with pytest.raises(BudgetError):
        exact_max_coverage(cov, budget=10)
    with pytest.raises(BudgetError):
        exact_min_set_cover(cov, budget=100)
    gk = guha_khuller_reduction(_covering_variant(cov))
    with pytest.raises(BudgetError):
        exact_kmedian(gk, budget=10)
    code = CodeInstance(((1,) * 8,), (1,), k=1)
    with pytest.raises(BudgetError):
        exact_ncp(code, budget=100)
    lat = LatticeInstance(((1,) * 8,), (1,), p=1, k=1)
    with pytest.raises(BudgetError):
        exact_cvp(lat, box=2, budget=100)


def test_k_larger_than_collection_rejected():
    inst = CoverageInstance(2, ((0,), (1,)), k=2)
    small = CoverageInstance(2, ((0, 1),), k=2)
    assert exact_max_coverage(inst).value == 2
    with pytest.raises(ValueError, match="k exceeds"):
        greedy_max_coverage(small)
    with pytest.raises(ValueError, match="k exceeds"):
        exact_max_coverage(small)


def test_solver_results_carry_accounting():
    inst = CoverageInstance(4, ((0, 1), (2,), (3,)), k=2)
    result = exact_max_coverage(inst)
    assert result.enumerated == 3  # C(3, 2)
    assert result.wall_time >= 0
    assert result.note == ""
