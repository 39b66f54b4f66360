"""gapforge command line: staged reductions, solvers, verify suites, info.

Machine-readable JSON goes to stdout; human summaries and timings go to
stderr so reruns of a seeded command are byte-identical on stdout and in
every file written.
"""

from __future__ import annotations

import argparse
import hashlib
import itertools
import json
import math
import random
import sys
import time
from fractions import Fraction

from . import labelcover as lc
from .agreement import (FunctionCollection, build_two_level_graph,
                        check_rb_transitive, majority_decode)
from .budget import BudgetError
from .downstream import (PartitionSystem, abss_cvp_reduction,
                         abss_ncp_reduction, clustering_to_text,
                         coverage_to_text, code_to_text,
                         feige_coverage_reduction, guha_khuller_reduction,
                         lattice_to_text, parse_clustering, parse_code,
                         parse_coverage, parse_lattice)
from .formula import (max_occurrence, parse_dimacs, random_planted_formula)
from .setsys import (SetSystem, dnf_bound_holds, dnf_false_prob,
                     MonotoneDnf, pairwise_intersection_max,
                     sample_random_subsets, setsys_to_text)
from .solvers import (exact_cvp, exact_kmean, exact_kmedian,
                      exact_max_coverage, exact_min_set_cover, exact_ncp,
                      greedy_max_coverage, verify_unique_cover)


def _jsonable(obj):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        return [_jsonable(x) for x in obj]
    return obj


def _emit(doc):
    sys.stdout.write(json.dumps(_jsonable(doc), sort_keys=True, separators=(",", ":")) + "\n")


def _note(msg):
    sys.stderr.write(msg + "\n")


def _read(path):
    with open(path, "r", encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)


def _digest(text):
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def _write_provenance(output, argv, seed, params, input_text):
    doc = {
        "command": list(argv),
        "input_sha256": _digest(input_text),
        "params": _jsonable(params),
        "seed": seed,
    }
    _write(output + ".prov.json",
           json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def _cmd_reduce(args, argv):
    start = time.perf_counter()
    text = _read(args.input)
    params = {}
    if args.stage == "labelcover":
        formula = parse_dimacs(text)
        subsets = sample_random_subsets(formula.num_clauses, args.k,
                                        Fraction(args.p), args.seed)
        instance = lc.build_main_reduction(formula, subsets, args.t,
                                           var_budget=args.var_budget,
                                           budget=args.budget,
                                           allow_vacuous=args.allow_vacuous)
        out_text = lc.to_json(instance)
        params = {"k": args.k, "t": args.t, "p": str(Fraction(args.p)),
                  "var_budget": args.var_budget,
                  "subsets": [list(s) for s in subsets.sets]}
        summary = {"num_left": instance.num_left,
                   "num_right": instance.num_right,
                   "num_edges": instance.num_edges}
    elif args.stage == "alphabet":
        instance = lc.reduce_alphabet(lc.from_json(text), Fraction(args.delta))
        out_text = lc.to_json(instance)
        params = {"delta": str(Fraction(args.delta))}
        summary = {"num_left": instance.num_left,
                   "num_right": instance.num_right,
                   "num_edges": instance.num_edges,
                   "right_alphabet": len(instance.right_alphabets[0]) if instance.num_right else 0}
    elif args.stage in ("coverage", "unique-cover"):
        cov = feige_coverage_reduction(lc.from_json(text), budget=args.budget)
        out_text = coverage_to_text(cov)
        summary = {"universe": cov.universe_size, "sets": len(cov.sets), "k": cov.k}
    elif args.stage == "clustering":
        inst = guha_khuller_reduction(parse_coverage(text), exponent=args.exponent)
        out_text = clustering_to_text(inst)
        params = {"exponent": args.exponent}
        summary = {"clients": inst.num_clients, "facilities": inst.num_facilities,
                   "k": inst.k}
    elif args.stage == "ncp":
        inst = abss_ncp_reduction(parse_coverage(text), args.tbar,
                                  args.multiplicity, budget=args.budget)
        out_text = code_to_text(inst)
        params = {"tbar": args.tbar, "multiplicity": args.multiplicity}
        summary = {"rows": len(inst.rows), "cols": inst.num_cols, "k": inst.k}
    elif args.stage == "cvp":
        inst = abss_cvp_reduction(parse_coverage(text), args.tbar,
                                  args.multiplicity, p=args.p_norm,
                                  budget=args.budget)
        out_text = lattice_to_text(inst)
        params = {"tbar": args.tbar, "multiplicity": args.multiplicity,
                  "p": args.p_norm}
        summary = {"rows": len(inst.rows), "cols": inst.num_cols, "k": inst.k,
                   "p": inst.p}
    else:
        raise ValueError(f"unknown stage {args.stage!r}")
    _write(args.output, out_text)
    _write_provenance(args.output, argv, args.seed, params, text)
    _emit({"command": "reduce", "stage": args.stage, "input": args.input,
           "output": args.output, "seed": args.seed, "params": params,
           "summary": summary})
    _note(f"reduce {args.stage}: wrote {args.output} "
          f"in {time.perf_counter() - start:.3f}s")
    return 0


def _solver_doc(problem, args, result, extra=None):
    doc = {"command": "solve", "problem": problem, "input": args.input,
           "value": result.value, "witness": list(result.witness),
           "enumerated": result.enumerated}
    if result.note:
        doc["note"] = result.note
    if extra:
        doc.update(extra)
    return doc


def _cmd_solve(args, argv):
    start = time.perf_counter()
    text = _read(args.input)
    problem = args.problem
    if problem == "labelcover":
        instance = lc.from_json(text)
        labeling, val = lc.brute_force_val(instance, budget=args.budget)
        left, wval = lc.brute_force_wval(instance, budget=args.budget)
        doc = {"command": "solve", "problem": problem, "input": args.input,
               "val": val, "val_witness": [list(labeling[0]), list(labeling[1])],
               "wval": wval, "wval_witness": list(left)}
    elif problem == "max-coverage":
        inst = parse_coverage(text)
        if args.mode == "greedy":
            result = greedy_max_coverage(inst)
        else:
            result = exact_max_coverage(inst, budget=args.budget)
        doc = _solver_doc(problem, args, result, {"mode": args.mode})
    elif problem == "min-set-cover":
        result = exact_min_set_cover(parse_coverage(text), budget=args.budget)
        doc = _solver_doc(problem, args, result)
    elif problem == "unique-cover":
        inst = parse_coverage(text)
        chosen = tuple(int(x) for x in args.choose.split(",")) if args.choose else ()
        ok = verify_unique_cover(inst, chosen)
        doc = {"command": "solve", "problem": problem, "input": args.input,
               "chosen": list(chosen), "unique": ok}
    elif problem == "kmedian":
        result = exact_kmedian(parse_clustering(text), budget=args.budget)
        doc = _solver_doc(problem, args, result)
    elif problem == "kmean":
        result = exact_kmean(parse_clustering(text), budget=args.budget)
        doc = _solver_doc(problem, args, result)
    elif problem == "ncp":
        result = exact_ncp(parse_code(text), budget=args.budget)
        doc = _solver_doc(problem, args, result)
    elif problem == "cvp":
        result = exact_cvp(parse_lattice(text), box=args.box, budget=args.budget)
        doc = _solver_doc(problem, args, result)
    else:
        raise ValueError(f"unknown problem {problem!r}")
    _emit(doc)
    _note(f"solve {problem}: done in {time.perf_counter() - start:.3f}s")
    return 0


def _suite_monotone_dnf(seed, scale, budget):
    rng = random.Random(seed)
    combos = []
    for k in (4, 6, 8, 10, 12):
        for ell in (1, 2, 3):
            pool = sum(math.comb(k, i) for i in range(1, min(ell, k) + 1))
            for eps in (Fraction(1, 4), Fraction(1, 2)):
                if math.ceil(eps * k**ell) <= pool:
                    combos.append((k, ell, eps))
    cases = 0
    violations = []
    for i in range(scale):
        k, ell, eps = combos[i % len(combos)]
        pool = []
        for w in range(1, ell + 1):
            pool.extend(itertools.combinations(range(k), w))
        size = math.ceil(eps * k**ell)
        terms = tuple(sorted(rng.sample(pool, size)))
        f = MonotoneDnf(k, terms)
        for p in (Fraction(1, 10), Fraction(3, 10), Fraction(1, 2)):
            value = dnf_false_prob(f, p, budget=budget)
            cases += 1
            if not dnf_bound_holds(value, ell, p, eps, k):
                violations.append({"k": k, "ell": ell, "eps": str(eps),
                                   "p": str(p), "terms": [list(t) for t in terms],
                                   "false_prob": str(value)})
    return cases, violations


def _suite_rb_transitivity(seed, scale, budget):
    rng = random.Random(seed)
    t, k, n = 2, 50, 40
    alpha, beta = Fraction(2, 5), Fraction(1)
    h = math.ceil(2 * alpha / (beta * beta) * k)
    cases = 0
    violations = []
    for _ in range(scale):
        s_sys = rng.randrange(2**32)
        s_fun = rng.randrange(2**32)
        system = sample_random_subsets(n, k, Fraction(3, 10), s_sys)
        bits = tuple(random.Random(s_fun).randrange(2) for _ in range(n))
        collection = FunctionCollection.from_global(system, bits)
        graph = build_two_level_graph(collection, alpha, beta, t, budget=budget)
        ok, witness = check_rb_transitive(graph, h)
        cases += 1
        if not ok:
            violations.append({"system_seed": s_sys, "function_seed": s_fun,
                               "h": h, "witness": list(witness)})
    return cases, violations


def _suite_majority_bound(seed, scale, budget):
    rng = random.Random(seed)
    cases = 0
    violations = []
    for _ in range(scale):
        s_sys = rng.randrange(2**32)
        s_fun = rng.randrange(2**32)
        n = rng.randrange(60, 201)
        k = rng.randrange(4, 13)
        system = sample_random_subsets(n, k, Fraction(2, 5), s_sys)
        frng = random.Random(s_fun)
        base = [frng.randrange(2) for _ in range(n)]
        values = tuple(
            tuple(base[e] ^ (1 if frng.random() < 0.1 else 0) for e in s)
            for s in system.sets
        )
        collection = FunctionCollection(system, values)
        rho = Fraction(pairwise_intersection_max(system), n)
        for j in range(10):
            zeta = Fraction(j, 10)
            _, stats = majority_decode(collection, range(k), zeta=zeta, rho=rho)
            cases += 1
            if not (stats.bound_holds and stats.power_mean_holds):
                violations.append({"system_seed": s_sys, "function_seed": s_fun,
                                   "n": n, "k": k, "zeta": str(zeta),
                                   "mean": str(stats.mean_disagr)})
    return cases, violations


def _suite_partition_identity(seed, scale, budget):
    cases = 0
    violations = []
    for t in (2, 3):
        for s in range(1, 5):
            ps = PartitionSystem(s, t)
            size = ps.ground_size
            for a in range(s):
                counts = [0] * size
                sizes_ok = True
                for j in range(t):
                    part = ps.part(a, j)
                    if len(part) != t ** (s - 1):
                        sizes_ok = False
                    for g in part:
                        counts[g] += 1
                cases += 1
                if not sizes_ok or any(c != 1 for c in counts):
                    violations.append({"t": t, "s": s, "label": a,
                                       "kind": "single-partition"})
            for r in range(1, s + 1):
                for labels in itertools.combinations(range(s), r):
                    for values in itertools.product(range(t), repeat=r):
                        covered = set()
                        for a, j in zip(labels, values):
                            covered.update(ps.part(a, j))
                        expect = t**s - (t - 1) ** r * t ** (s - r)
                        cases += 1
                        if len(covered) != expect:
                            violations.append({"t": t, "s": s,
                                               "labels": list(labels),
                                               "values": list(values),
                                               "kind": "distinct-partitions"})
    return cases, violations


def _suite_pipeline_completeness(seed, scale, budget):
    rng = random.Random(seed)
    cases = 0
    violations = []
    for _ in range(scale):
        s_f = rng.randrange(2**32)
        s_t = rng.randrange(2**32)
        n = rng.randrange(4, 7)
        m = rng.randrange(3, 6)
        formula, planted = random_planted_formula(n, m, s_f, max_occurrence=4)
        subsets = sample_random_subsets(m, 4, Fraction(2, 5), s_t)
        instance = lc.build_main_reduction(formula, subsets, 2, budget=budget)
        sigma = lc.restriction_labeling(instance, planted)
        _, val = lc.optimal_extension(instance, sigma)
        wval = lc.weak_agreement_value(instance, sigma)
        cases += 1
        if val != 1 or wval != 1:
            violations.append({"formula_seed": s_f, "subset_seed": s_t,
                               "val": str(val), "wval": str(wval),
                               "kind": "labeling-value"})
            continue
        singles = SetSystem(m, tuple((j,) for j in range(3)))
        small = lc.build_main_reduction(formula, singles, 2, budget=budget)
        sigma2 = lc.restriction_labeling(small, planted)
        cov = feige_coverage_reduction(small, budget=budget)
        index = {origin: i for i, origin in enumerate(cov.origins)}
        chosen = tuple(index[(u, sigma2[u])] for u in range(small.num_left))
        unique = verify_unique_cover(cov, chosen)
        msc = exact_min_set_cover(cov, budget=budget)
        cases += 1
        if not unique or msc.value != small.num_left:
            violations.append({"formula_seed": s_f, "kind": "feige",
                               "unique": unique, "min_cover": msc.value})
    return cases, violations


_SUITES = {
    "monotone-dnf": _suite_monotone_dnf,
    "rb-transitivity": _suite_rb_transitivity,
    "majority-bound": _suite_majority_bound,
    "partition-identity": _suite_partition_identity,
    "pipeline-completeness": _suite_pipeline_completeness,
}


def _cmd_verify(args, argv):
    start = time.perf_counter()
    suite = _SUITES[args.suite]
    cases, violations = suite(args.seed, args.scale, args.budget)
    status = "pass" if not violations else "fail"
    _emit({"command": "verify", "suite": args.suite, "seed": args.seed,
           "scale": args.scale, "cases": cases,
           "violations": len(violations),
           "first_violation": violations[0] if violations else None,
           "status": status})
    _note(f"verify {args.suite}: {cases} cases, {len(violations)} violations "
          f"in {time.perf_counter() - start:.3f}s")
    return 0 if status == "pass" else 1


def _cmd_info(args, argv):
    text = _read(args.input)
    stripped = text.lstrip()
    head = stripped.split(None, 1)[0] if stripped else ""
    if stripped.startswith("{"):
        instance = lc.from_json(text)
        doc = {"format": "labelcover", "num_left": instance.num_left,
               "num_right": instance.num_right,
               "num_edges": instance.num_edges,
               "projection": "restriction" if instance.projections == lc.RESTRICTION else "tables",
               "bi_regular": instance.bi_regular,
               "right_degree": instance.right_degree,
               "vacuous": instance.vacuous}
    elif head not in ("setsys", "dnf", "cov", "clustering", "ncp", "cvp") \
            and stripped.startswith(("c", "p cnf", "%")):
        formula = parse_dimacs(text)
        doc = {"format": "dimacs", "num_vars": formula.num_vars,
               "num_clauses": formula.num_clauses,
               "max_occurrence": max_occurrence(formula)}
    else:
        if head == "setsys":
            from .setsys import parse_setsys
            system = parse_setsys(text)
            doc = {"format": "setsys", "universe": system.universe_size,
                   "k": system.k}
        elif head == "dnf":
            from .setsys import parse_dnf
            f = parse_dnf(text)
            doc = {"format": "dnf", "num_vars": f.num_vars, "size": f.size,
                   "width": f.width}
        elif head == "cov":
            inst = parse_coverage(text)
            doc = {"format": "cov", "universe": inst.universe_size,
                   "sets": len(inst.sets), "k": inst.k}
        elif head == "clustering":
            inst = parse_clustering(text)
            doc = {"format": "clustering", "clients": inst.num_clients,
                   "facilities": inst.num_facilities, "k": inst.k,
                   "exponent": inst.exponent}
        elif head == "ncp":
            inst = parse_code(text)
            doc = {"format": "ncp", "rows": len(inst.rows),
                   "cols": inst.num_cols, "k": inst.k}
        elif head == "cvp":
            inst = parse_lattice(text)
            doc = {"format": "cvp", "rows": len(inst.rows),
                   "cols": inst.num_cols, "k": inst.k, "p": inst.p}
        else:
            raise ValueError("unrecognized instance format")
    doc["command"] = "info"
    doc["input"] = args.input
    _emit(doc)
    return 0


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="gapforge",
        description="reduction pipeline: 3-CNF to projection games to "
                    "coverage, clustering, and coding/lattice instances",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    reduce_p = sub.add_parser("reduce", help="run one reduction stage")
    reduce_p.add_argument("stage", choices=["labelcover", "alphabet", "coverage",
                                            "unique-cover", "clustering", "ncp",
                                            "cvp"])
    reduce_p.add_argument("--input", "-i", required=True)
    reduce_p.add_argument("--output", "-o", required=True)
    reduce_p.add_argument("--seed", type=int, required=True,
                          help="mandatory; no ambient randomness")
    reduce_p.add_argument("--budget", type=int, default=None)
    reduce_p.add_argument("--k", type=int, default=3)
    reduce_p.add_argument("--t", type=int, default=2)
    reduce_p.add_argument("--p", default="0.5", help="sampling probability (rational ok)")
    reduce_p.add_argument("--var-budget", type=int, default=24)
    reduce_p.add_argument("--allow-vacuous", action="store_true")
    reduce_p.add_argument("--delta", default="0.5", help="alphabet stage error budget")
    reduce_p.add_argument("--exponent", type=int, choices=[1, 2], default=1)
    reduce_p.add_argument("--tbar", type=int, default=2)
    reduce_p.add_argument("--multiplicity", type=int, default=None)
    reduce_p.add_argument("--p-norm", type=int, default=1)
    reduce_p.set_defaults(func=_cmd_reduce)

    solve_p = sub.add_parser("solve", help="run a solver on an instance file")
    solve_p.add_argument("problem", choices=["labelcover", "max-coverage",
                                             "min-set-cover", "unique-cover",
                                             "kmedian", "kmean", "ncp", "cvp"])
    solve_p.add_argument("--input", "-i", required=True)
    solve_p.add_argument("--seed", type=int, required=True,
                         help="mandatory; recorded for reproducibility")
    solve_p.add_argument("--mode", choices=["exact", "greedy"], default="exact")
    solve_p.add_argument("--budget", type=int, default=None)
    solve_p.add_argument("--box", type=int, default=None)
    solve_p.add_argument("--choose", default="",
                         help="comma-separated set indices for unique-cover")
    solve_p.set_defaults(func=_cmd_solve)

    verify_p = sub.add_parser("verify", help="run a named property suite")
    verify_p.add_argument("suite", choices=sorted(_SUITES))
    verify_p.add_argument("--seed", type=int, required=True)
    verify_p.add_argument("--scale", type=int, default=10)
    verify_p.add_argument("--budget", type=int, default=None)
    verify_p.set_defaults(func=_cmd_verify)

    info_p = sub.add_parser("info", help="describe an instance file")
    info_p.add_argument("--input", "-i", required=True)
    info_p.set_defaults(func=_cmd_info)

    return parser


def main(argv=None):
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except BudgetError as e:
        _emit({"status": "inconclusive", "what": e.what,
               "required": e.required, "budget": e.budget})
        _note(f"inconclusive: {e}")
        return 3
    except (ValueError, OSError) as e:
        _emit({"status": "error", "message": str(e)})
        _note(f"error: {e}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
