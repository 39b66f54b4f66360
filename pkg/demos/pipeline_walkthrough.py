"""One tiny formula pushed through every stage of the pipeline.

Every optimum printed below comes from an exhaustive solver, so each line is
a checked fact about the constructed instance rather than a claim.

Run: python3 demos/pipeline_walkthrough.py
"""

from fractions import Fraction

from gapforge import (CoverageInstance, SetSystem, abss_cvp_reduction,
                      abss_ncp_reduction, brute_force_max_val,
                      brute_force_val, coverage_fraction, exact_cvp,
                      exact_kmean, exact_kmedian, exact_max_coverage,
                      exact_min_set_cover, exact_ncp,
                      feige_coverage_reduction, greedy_max_coverage,
                      guha_khuller_reduction, optimal_extension,
                      random_planted_formula, reduce_alphabet,
                      restriction_labeling, sample_random_subsets, to_dimacs,
                      verify_unique_cover, weak_agreement_value)
from gapforge.labelcover import build_main_reduction


def banner(title):
    print(f"\n== {title} ==")


banner("planted 3-CNF")
formula, planted = random_planted_formula(4, 5, seed=2, max_occurrence=4)
print(to_dimacs(formula).strip())
print("planted assignment:", planted)
_, best = brute_force_max_val(formula)
print("exhaustive max satisfied fraction:", best)

banner("clause-subset game")
system = sample_random_subsets(formula.num_clauses, 4, Fraction(2, 5), seed=3)
print("clause subsets:", system.sets)
game = build_main_reduction(formula, system, 2)
print(f"left {game.num_left}, right {game.num_right}, edges {game.num_edges}")
print("left alphabet sizes:", [len(a) for a in game.left_alphabets])
sigma = restriction_labeling(game, planted)
_, val = optimal_extension(game, sigma)
print("value of the planted restriction:", val,
      "| weak agreement:", weak_agreement_value(game, sigma))
_, game_val = brute_force_val(game)
print("exhaustive game value:", game_val)

banner("alphabet squeeze")
small = reduce_alphabet(game, Fraction(1, 2))
q = len(small.right_alphabets[0]) if small.num_right else 0
print(f"left {small.num_left}, right {small.num_right}, "
      f"edges {small.num_edges}, right alphabet {q}")

banner("coverage gadget")
singles = SetSystem(formula.num_clauses, ((0,), (1,), (2,)))
biregular = build_main_reduction(formula, singles, 2)
cov = feige_coverage_reduction(biregular)
print(f"universe {cov.universe_size}, sets {len(cov.sets)}, pick k={cov.k}")
sigma2 = restriction_labeling(biregular, planted)
index = {origin: i for i, origin in enumerate(cov.origins)}
chosen = tuple(index[(u, sigma2[u])] for u in range(biregular.num_left))
print("consistent labels pick sets", chosen,
      "| unique cover:", verify_unique_cover(cov, chosen))
exact = exact_max_coverage(cov)
greedy = greedy_max_coverage(cov)
print("exact coverage:", coverage_fraction(cov, exact.value),
      "| greedy coverage:", coverage_fraction(cov, greedy.value))
print("min set cover size:", exact_min_set_cover(cov).value,
      "(equals the number of left vertices)")

banner("unit-distance clustering")
toy = CoverageInstance(6, ((0, 1), (2, 3), (4, 5), (0, 2, 4)), 2)
tau = 1 - coverage_fraction(toy, exact_max_coverage(toy).value)
inst = guha_khuller_reduction(toy)
print(f"{inst.num_clients} clients, {inst.num_facilities} facilities, "
      f"k={inst.k}, uncovered fraction tau = {tau}")
print("k-median cost:", exact_kmedian(inst).value,
      f"= |V|(1 + 2 tau) = {toy.universe_size * (1 + 2 * tau)}")
print("k-mean cost:  ", exact_kmean(inst).value,
      f"= |V|(1 + 8 tau) = {toy.universe_size * (1 + 8 * tau)}")

banner("codes and lattices")
parts = CoverageInstance(6, ((0, 1), (2, 3), (4, 5)), 3)
code = abss_ncp_reduction(parts, soundness_threshold=3, multiplicity=4)
print(f"code: {len(code.rows)} rows x {code.num_cols} cols,",
      "nearest codeword weight:", exact_ncp(code).value)
lat = abss_cvp_reduction(parts, soundness_threshold=3, multiplicity=4, p=1)
res = exact_cvp(lat)
print(f"lattice: closest vector distance {res.value} ({res.note})")
print("\nboth optima equal k=3 exactly because the instance is a partition")
