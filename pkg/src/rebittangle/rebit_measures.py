"""Entanglement of rebits (real-amplitude two-level systems).

Every function here refuses complex-tagged input, including complex arrays
whose imaginary parts happen to vanish. The same matrix can have different
tangle as a qubit state and as a rebit state, so coercing would hide the
difference this module exists to expose.
"""

import itertools
from dataclasses import dataclass, field

import numpy as np

from .qubit_measures import d_terms, _scalar
from .smallmat import J
from .states import (
    REAL,
    DensityMatrix,
    FieldError,
    StateError,
    StateVector,
    amplitudes,
    reduced_density,
)

DROP_PROB = 1e-14

# Y (x) Y written as a real matrix
YY_REAL = -np.kron(J, J)

FACTOR_NAMES = "ABC"


def _real_amps(psi, n_factors):
    if isinstance(psi, StateVector) and psi.field != REAL:
        raise FieldError("rebit measures need a real-tagged state")
    a = amplitudes(psi, n_factors)
    if np.iscomplexobj(a):
        raise FieldError("rebit measures need real amplitudes")
    return a


def _real_matrix(rho):
    if isinstance(rho, DensityMatrix):
        if rho.field != REAL:
            raise FieldError("rebit measures need a real-tagged density")
        return rho.matrix
    m = np.asarray(rho)
    if np.iscomplexobj(m):
        raise FieldError("rebit measures need a real density")
    return m


def pure_tangle_2r(phi):
    """``4 (ad - bc)^2`` for a real two-rebit state."""
    a = _real_amps(phi, 2)
    return _scalar(4.0 * (a[..., 0] * a[..., 3] - a[..., 1] * a[..., 2]) ** 2)


def mixed_tangle_2r(rho):
    """Two-rebit tangle ``(tr[(Y (x) Y) rho])^2``.

    No ``max(., 0)`` clamp: the square is already non-negative.
    """
    m = _real_matrix(rho)
    if m.shape[-2:] != (4, 4):
        raise StateError("two-rebit tangle needs 4x4 densities")
    tr = np.einsum("ij,...ji->...", YY_REAL, m)
    return _scalar(tr ** 2)


def rebit_bipartite(phi, hinge):
    """``4 det rho_hinge`` for a pure three-rebit state."""
    if hinge not in (0, 1, 2):
        raise StateError(f"hinge {hinge} out of range")
    a = _real_amps(phi, 3)
    r = reduced_density(a, [hinge])
    return _scalar(4.0 * (r[..., 0, 0] * r[..., 1, 1] - r[..., 0, 1] * r[..., 1, 0]))


def pair_sigma(phi, i, j):
    """Rebit tangle of the ``(i, j)`` reduction of a pure three-rebit state."""
    if i == j:
        raise StateError("pair needs two distinct factors")
    a = _real_amps(phi, 3)
    return mixed_tangle_2r(reduced_density(a, [i, j]))


def rebit_three_tangle_pure(phi):
    """Signed three-tangle ``4 (d1 - 2 d2 + 4 d3)`` of a real three-rebit state, in [-1, 1]."""
    a = _real_amps(phi, 3)
    return _scalar(4.0 * d_terms(a).hyperdeterminant)


def rebit_three_tangle_by_residual(phi, hinge=0):
    """``sigma_{h|rest} - sigma_{h|x} - sigma_{h|y}`` from the reduced densities."""
    others = [f for f in (0, 1, 2) if f != hinge]
    return (rebit_bipartite(phi, hinge)
            - pair_sigma(phi, hinge, others[0])
            - pair_sigma(phi, hinge, others[1]))


# explicit component expansions, hinge A, used as cross-checks

def sigma_a_bc_components(phi):
    a = _real_amps(phi, 3)
    n0 = a[..., 0] ** 2 + a[..., 1] ** 2 + a[..., 2] ** 2 + a[..., 3] ** 2
    n1 = a[..., 4] ** 2 + a[..., 5] ** 2 + a[..., 6] ** 2 + a[..., 7] ** 2
    ov = a[..., 0] * a[..., 4] + a[..., 1] * a[..., 5] + a[..., 2] * a[..., 6] + a[..., 3] * a[..., 7]
    return _scalar(4.0 * (n0 * n1 - ov ** 2))


def sigma_a_b_components(phi):
    a = _real_amps(phi, 3)
    s = a[..., 2] * a[..., 4] + a[..., 3] * a[..., 5] - a[..., 0] * a[..., 6] - a[..., 1] * a[..., 7]
    return _scalar(4.0 * s ** 2)


def sigma_a_c_components(phi):
    a = _real_amps(phi, 3)
    s = a[..., 1] * a[..., 4] + a[..., 3] * a[..., 6] - a[..., 0] * a[..., 5] - a[..., 2] * a[..., 7]
    return _scalar(4.0 * s ** 2)


@dataclass(frozen=True)
class Outcome:
    probability: float
    state: StateVector
    label: str


@dataclass(frozen=True)
class MeasurementEnsemble:
    outcomes: list = field(default_factory=list)

    @property
    def total_probability(self):
        return sum(o.probability for o in self.outcomes)

    def average(self, fn):
        return sum(o.probability * fn(o.state) for o in self.outcomes)


def project_measure(phi, factors):
    """Measure ``factors`` of a pure state in the computational basis.

    Outcomes with probability below 1e-14 are dropped. Post-measurement
    states keep all factors and are renormalized. Labels read like
    ``"A=0,C=1"``.
    """
    if not isinstance(phi, StateVector):
        phi = StateVector(np.asarray(phi), "complex" if np.iscomplexobj(phi) else REAL)
    n = phi.n_factors
    factors = sorted(set(int(f) for f in factors))
    if not factors or any(f < 0 or f >= n for f in factors):
        raise StateError(f"invalid factor subset {factors}")
    t = phi.amplitudes.reshape((2,) * n)
    outcomes = []
    for bits in itertools.product((0, 1), repeat=len(factors)):
        proj = np.zeros_like(t)
        idx = [slice(None)] * n
        for f, b in zip(factors, bits):
            idx[f] = b
        proj[tuple(idx)] = t[tuple(idx)]
        vec = proj.reshape(-1)
        p = float(np.sum(np.abs(vec) ** 2))
        if p < DROP_PROB:
            continue
        label = ",".join(f"{FACTOR_NAMES[f] if n == 3 else f}={b}" for f, b in zip(factors, bits))
        outcomes.append(Outcome(p, StateVector(vec / np.sqrt(p), phi.field), label))
    return MeasurementEnsemble(outcomes)
