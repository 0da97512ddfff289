"""Acceptance criteria 1-9, one test each, each printing a PASS/FAIL line."""

import json
import math
import time

import numpy as np
import pytest

from rebittangle import checks
from rebittangle.cli import main
from rebittangle.convex_roof import RoofConfig, roof_minimize
from rebittangle.qubit_measures import d_terms, mixed_tangle_2q, pure_tangle_2q, three_tangle
from rebittangle.rebit_measures import (
    mixed_tangle_2r, pair_sigma, project_measure, pure_tangle_2r, rebit_bipartite,
    rebit_three_tangle_pure,
)
from rebittangle.states import COMPLEX, REAL, catalog, ghz, random_density
from rebittangle.ubit import joint_roof_tangle, relation_report, separate_roofs


@pytest.fixture
def verdict(capsys):
    def emit(number, title, ok, detail):
        with capsys.disabled():
            print(f"\n[criterion {number}] {'PASS' if ok else 'FAIL'}: {title} ({detail})")
        assert ok, detail
    return emit


def test_criterion_1_golden_values(verdict):
    t0 = time.perf_counter()
    errs = {}
    t = catalog("tetra_phi")
    errs["sigma_ABC"] = abs(rebit_three_tangle_pure(t) + 1.0)
    for name, (i, j) in {"A|B": (0, 1), "A|C": (0, 2), "B|C": (1, 2)}.items():
        errs[f"sigma_{name}"] = abs(pair_sigma(t, i, j) - 1.0)
    errs["sigma_A|BC"] = abs(rebit_bipartite(t, 0) - 1.0)
    errs["d3"] = abs(d_terms(t).d3 + 1 / 16)
    rho_yy = catalog("rho_yy")
    errs["rho_yy_qubit"] = abs(mixed_tangle_2q(rho_yy))
    errs["rho_yy_rebit"] = abs(mixed_tangle_2r(rho_yy) - 1.0)
    rep = relation_report(catalog("prod_i"))
    errs["prod_i_tau"] = abs(rep.tau_ab)
    errs["prod_i_sigma_ab"] = abs(rep.sigma_ab - 1.0)
    errs["prod_i_sigma_uab"] = abs(rep.sigma_uab + 1.0)
    for theta in (math.pi / 12, math.pi / 6, math.pi / 4):
        errs[f"ghz({theta:.4f})"] = abs(three_tangle(ghz(theta)) - math.sin(2 * theta) ** 2)
    elapsed = time.perf_counter() - t0
    worst = max(errs, key=errs.get)
    verdict(1, "golden values", errs[worst] <= 1e-12 and elapsed < 1.0,
            f"worst {worst} off by {errs[worst]:.2e} <= 1e-12, {elapsed:.3f}s < 1s")


def test_criterion_2_identity_suite(verdict):
    t0 = time.perf_counter()
    pr = checks.identity_suite(n=100_000, seed=0)["identity_residual"]
    elapsed = time.perf_counter() - t0
    verdict(2, "quartic identity on 1e5 pairs", pr.passed and pr.tol == 1e-12 and elapsed < 5.0,
            f"max residual {pr.max_residual:.2e} <= 1e-12, {elapsed:.2f}s < 5s")


def test_criterion_3_hyperdeterminant(verdict):
    out = checks.hyperdet_suite(n=10_000, seed=0)
    need = {"hyperdeterminant_equivalence": 1e-9, "permutation_invariance": 1e-12,
            "abs_equals_qubit_three_tangle": 1e-12}
    ok = all(out[k].passed and out[k].tol == tol for k, tol in need.items())
    detail = ", ".join(f"{k} {out[k].max_residual:.1e}<={tol:g}" for k, tol in need.items())
    verdict(3, "hyperdeterminant equivalence on 1e4 real states", ok, detail)


def test_criterion_4_pure_state_relation(verdict):
    t0 = time.perf_counter()
    out = checks.relation_suite(n=10_000, seed=0)
    elapsed = time.perf_counter() - t0
    worst = max(pr.max_residual for pr in out.values())
    ok = all(pr.passed and pr.tol == 1e-10 for pr in out.values()) and elapsed < 10.0
    verdict(4, "tau = sigma_AB + sigma_UAB and hinge forms on 1e4 states", ok,
            f"max residual {worst:.2e} <= 1e-10, {elapsed:.2f}s < 10s")


def test_criterion_5_monogamy(verdict):
    pr = checks.monogamy_suite(n=10_000, seed=0)["monogamy"]
    verdict(5, "monogamy on 1e4 complex tripartite states", pr.failures == 0 and pr.tol == 1e-9,
            f"{pr.failures} violations, max excess {pr.max_residual:.2e}")


def test_criterion_6_roof_vs_formula(verdict):
    t0 = time.perf_counter()
    cfg = RoofConfig()
    worst = {}
    for field, formula, obj in ((REAL, mixed_tangle_2r, pure_tangle_2r),
                                (COMPLEX, mixed_tangle_2q, lambda s: pure_tangle_2q(s, verify=False))):
        gaps = []
        for k in range(100):
            rho = random_density(field, 2, 1 + k % 4, 10_000 + k)
            gaps.append(abs(roof_minimize(rho, obj, cfg).value - formula(rho)))
        worst[field] = max(gaps)
    elapsed = time.perf_counter() - t0
    ok = max(worst.values()) <= 1e-6 and elapsed < 300.0
    verdict(6, "roof matches closed forms on 100+100 densities", ok,
            f"real {worst[REAL]:.1e}, complex {worst[COMPLEX]:.1e} <= 1e-6, {elapsed:.1f}s < 300s")


def test_criterion_7_mixed_counterexamples(verdict):
    vals = {}
    vals["I8 three-tangle roof"] = (roof_minimize(catalog("mixed_i8"), rebit_three_tangle_pure).value, -1.0)
    i4 = catalog("mixed_i4")
    vals["I4 joint roof"] = (joint_roof_tangle(i4).value, 0.0)
    sep = separate_roofs(i4)
    vals["I4 sigma_AB"] = (sep["sigma_ab"], 0.0)
    vals["I4 sigma_UAB roof"] = (sep["sigma_uab_roof"], -1.0)
    yy = catalog("rho_yy").as_field(COMPLEX)
    vals["rho_yy joint roof"] = (joint_roof_tangle(yy).value, 0.0)
    sep = separate_roofs(yy)
    vals["rho_yy sigma_A|UB roof"] = (sep["sigma_a_ub_roof"], 1.0)
    vals["rho_yy sigma_A|U roof"] = (sep["sigma_a_u_roof"], 0.0)
    errs = {k: abs(v - target) for k, (v, target) in vals.items()}
    worst = max(errs, key=errs.get)
    verdict(7, "mixed-state counterexamples", errs[worst] <= 1e-6,
            f"worst {worst} off by {errs[worst]:.1e} <= 1e-6")


def test_criterion_8_locc_witness(verdict):
    t = catalog("tetra_phi")
    one = [project_measure(t, [f]).average(rebit_three_tangle_pure) for f in range(3)]
    ens = project_measure(t, [0, 1, 2])
    products = [rebit_three_tangle_pure(o.state) for o in ens.outcomes]
    ok = all(v == 0.0 for v in one) and len(ens.outcomes) == 4 and all(v == 0.0 for v in products)
    verdict(8, "measurement destroys the rebit three-tangle", ok,
            f"one-factor averages {one}, {len(ens.outcomes)} full outcomes all 0")


def test_criterion_9_determinism(verdict, capsys):
    def run(*extra):
        code = main(["check", "all", "--seed", "5", *extra])
        return code, capsys.readouterr().out

    c1, a = run()
    c2, b = run()
    c3, c = run("--workers", "2")
    json.loads(a)
    ok = a == b == c and c1 == c2 == c3 == 0
    verdict(9, "check all is byte-identical across runs and worker counts", ok,
            f"{len(a)} bytes, serial==serial {a == b}, serial==parallel {a == c}")
