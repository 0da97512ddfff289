"""Batteries of randomized property checks, shared by the CLI and the tests.

Each suite returns an ordered dict ``{property: PropertyResult}``. Seeds are
split per suite so adding a suite never shifts another suite's samples.
"""

import itertools
from dataclasses import asdict, dataclass

import numpy as np

from . import convex_roof
from .qubit_measures import (
    bipartite_tangle_pure,
    mixed_tangle_2q,
    pair_tangle,
    pure_tangle_2q,
    three_tangle,
)
from .rebit_measures import (
    mixed_tangle_2r,
    pure_tangle_2r,
    rebit_three_tangle_by_residual,
    rebit_three_tangle_pure,
)
from .states import COMPLEX, REAL, permute_factors, random_density, random_pure
from .ubit import identity_check, relation_terms

SUITES = ("identity", "monogamy", "hyperdet", "relation", "roof-oracle")

DEFAULT_N = {
    "identity": 100_000,
    "monogamy": 10_000,
    "hyperdet": 10_000,
    "relation": 10_000,
}
DEFAULT_ROOF_N = 10

IDENTITY_TOL = 1e-12
MONOGAMY_SLACK = 1e-9
QUBIT_DECOMP_TOL = 1e-8
HYPERDET_TOL = 1e-9
PERMUTATION_TOL = 1e-12
ROTATION_TOL = 1e-10
ABS_TOL = 1e-12
RELATION_TOL = 1e-10
ROOF_TOL = 1e-6


@dataclass
class PropertyResult:
    n: int
    failures: int
    max_residual: float
    tol: float

    @property
    def passed(self):
        return self.failures == 0

    def to_dict(self):
        d = asdict(self)
        d["passed"] = self.passed
        return d


def _residual_property(res, tol):
    res = np.asarray(res, dtype=float).ravel()
    return PropertyResult(int(res.size), int(np.sum(~(res <= tol))), float(np.max(res)), tol)


def _rng(seed, suite):
    return np.random.default_rng([seed, SUITES.index(suite)])


def _random_orthogonal_2x2(rng, n):
    t = rng.uniform(0.0, 2.0 * np.pi, n)
    c, s = np.cos(t), np.sin(t)
    return np.stack([np.stack([c, -s], -1), np.stack([s, c], -1)], -2)


def _random_unitary_2x2(rng, n):
    z = rng.standard_normal((n, 2, 2)) + 1j * rng.standard_normal((n, 2, 2))
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def _local_apply(psi, ops):
    # ops: (3, n, 2, 2) -> apply factor-wise to a stack of 3-factor states
    t = psi.reshape(-1, 2, 2, 2)
    t = np.einsum("nai,nijk->najk", ops[0], t)
    t = np.einsum("nbj,najk->nabk", ops[1], t)
    t = np.einsum("nck,nabk->nabc", ops[2], t)
    return t.reshape(-1, 8)


def identity_suite(n=None, seed=0):
    """Quartic identity on random real 4-vector pairs of unit norm."""
    n = n or DEFAULT_N["identity"]
    rng = _rng(seed, "identity")
    a = rng.standard_normal((n, 4))
    b = rng.standard_normal((n, 4))
    a /= np.linalg.norm(a, axis=1, keepdims=True)
    b /= np.linalg.norm(b, axis=1, keepdims=True)
    return {"identity_residual": _residual_property(np.abs(identity_check(a, b)), IDENTITY_TOL)}


def monogamy_suite(n=None, seed=0):
    n = n or DEFAULT_N["monogamy"]
    rng = _rng(seed, "monogamy")
    psi = random_pure(COMPLEX, 3, rng, size=n)
    t_abc = bipartite_tangle_pure(psi, 0)
    t_ab = pair_tangle(psi, 0, 1)
    t_ac = pair_tangle(psi, 0, 2)
    excess = np.maximum(0.0, (t_ab + t_ac) - t_abc)
    out = {
        "monogamy": _residual_property(excess, MONOGAMY_SLACK),
        "qubit_three_tangle_decomposition": _residual_property(
            np.abs((t_abc - t_ab - t_ac) - three_tangle(psi)), QUBIT_DECOMP_TOL),
    }
    base = three_tangle(psi)
    perm_res = np.zeros(n)
    for perm in itertools.permutations(range(3)):
        perm_res = np.maximum(perm_res, np.abs(three_tangle(permute_factors(psi, perm)) - base))
    out["qubit_permutation_invariance"] = _residual_property(perm_res, PERMUTATION_TOL)
    ops = np.stack([_random_unitary_2x2(rng, n) for _ in range(3)])
    out["qubit_local_unitary_invariance"] = _residual_property(
        np.abs(three_tangle(_local_apply(psi, ops)) - base), ROTATION_TOL)
    return out


def hyperdet_suite(n=None, seed=0):
    n = n or DEFAULT_N["hyperdet"]
    rng = _rng(seed, "hyperdet")
    phi = random_pure(REAL, 3, rng, size=n)
    sig = rebit_three_tangle_pure(phi)
    out = {
        "hyperdeterminant_equivalence": _residual_property(
            np.abs(rebit_three_tangle_by_residual(phi) - sig), HYPERDET_TOL),
    }
    perm_res = np.zeros(n)
    for perm in itertools.permutations(range(3)):
        perm_res = np.maximum(perm_res, np.abs(rebit_three_tangle_pure(permute_factors(phi, perm)) - sig))
    out["permutation_invariance"] = _residual_property(perm_res, PERMUTATION_TOL)
    out["abs_equals_qubit_three_tangle"] = _residual_property(
        np.abs(np.abs(sig) - three_tangle(phi.astype(complex))), ABS_TOL)
    ops = np.stack([_random_orthogonal_2x2(rng, n) for _ in range(3)])
    out["local_rotation_invariance"] = _residual_property(
        np.abs(rebit_three_tangle_pure(_local_apply(phi, ops)) - sig), ROTATION_TOL)
    out["range"] = _residual_property(np.maximum(0.0, np.abs(sig) - 1.0), 0.0)
    return out


def relation_suite(n=None, seed=0):
    n = n or DEFAULT_N["relation"]
    rng = _rng(seed, "relation")
    psi = random_pure(COMPLEX, 2, rng, size=n)
    _, res = relation_terms(psi)
    return {name: _residual_property(r, RELATION_TOL) for name, r in res.items()}


def roof_oracle_suite(n=None, seed=0, cfg=None, oracle_samples=256):
    """Numerical roofs against the closed-form two-rebit and two-qubit tangles.

    Ranks cycle through 1..4. Also checks that random sampling never beats
    the optimizer by more than the tolerance.
    """
    n = n or DEFAULT_ROOF_N
    cfg = cfg or convex_roof.RoofConfig()
    rng = _rng(seed, "roof-oracle")
    out = {}
    for field, formula, obj in ((REAL, mixed_tangle_2r, pure_tangle_2r),
                                (COMPLEX, mixed_tangle_2q,
                                 lambda s: pure_tangle_2q(s, verify=False))):
        gaps, oracle_gaps, residuals = [], [], []
        for k in range(n):
            sub = int(rng.integers(2 ** 31))
            rho = random_density(field, 2, 1 + k % 4, sub)
            res = convex_roof.roof_minimize(rho, obj, cfg)
            gaps.append(abs(res.value - formula(rho)))
            residuals.append(res.residual)
            sampled = convex_roof.oracle_sample(rho, obj, oracle_samples, seed=sub)
            oracle_gaps.append(max(0.0, res.value - sampled))
        tag = "rebit" if field == REAL else "qubit"
        out[f"{tag}_roof_vs_formula"] = _residual_property(gaps, ROOF_TOL)
        out[f"{tag}_oracle_upper_bound"] = _residual_property(oracle_gaps, ROOF_TOL)
        out[f"{tag}_reconstruction"] = _residual_property(residuals, 1e-10)
    return out


def run_suite(name, n=None, seed=0, roof_n=None, cfg=None):
    if name == "identity":
        return identity_suite(n, seed)
    if name == "monogamy":
        return monogamy_suite(n, seed)
    if name == "hyperdet":
        return hyperdet_suite(n, seed)
    if name == "relation":
        return relation_suite(n, seed)
    if name == "roof-oracle":
        return roof_oracle_suite(roof_n, seed, cfg)
    raise KeyError(f"unknown suite {name!r}")


def run_checks(names, n=None, seed=0, roof_n=None, cfg=None):
    if "all" in names:
        names = SUITES
    return {name: run_suite(name, n, seed, roof_n, cfg) for name in names}
