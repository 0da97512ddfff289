"""Entanglement of qubits: tangle, mixed-state tangle and the three-tangle.

Functions take a `StateVector` / `DensityMatrix` or a raw array. Raw arrays
may carry leading batch dimensions, in which case the result is an array
of the same batch shape. Real-tagged inputs are accepted and treated as
complex, since every real state is also a complex one.
"""

from dataclasses import dataclass

import numpy as np

from .smallmat import NotPSDError, PSD_CLAMP, Y, psd_sqrt, sym_eig
from .states import DensityMatrix, StateError, amplitudes, reduced_density

ROUTE_TOL = 1e-10

YY = np.kron(Y, Y)


class NumericalError(ArithmeticError):
    pass


def _scalar(x):
    return float(x) if np.ndim(x) == 0 else x


def tangle_routes_2q(psi):
    """The pure two-qubit tangle computed three ways.

    Returns a dict with ``formula`` (4|ad - bc|^2), ``det`` (4 det rho_A),
    ``purity`` (2[1 - tr rho_A^2]) and ``max_discrepancy``.
    """
    a = amplitudes(psi, 2)
    formula = 4.0 * np.abs(a[..., 0] * a[..., 3] - a[..., 1] * a[..., 2]) ** 2
    rho_a = reduced_density(a, [0])
    det = 4.0 * np.real(rho_a[..., 0, 0] * rho_a[..., 1, 1] - rho_a[..., 0, 1] * rho_a[..., 1, 0])
    purity = 2.0 * (1.0 - np.real(np.einsum("...ij,...ji->...", rho_a, rho_a)))
    disc = np.maximum(np.abs(formula - det), np.maximum(np.abs(formula - purity), np.abs(det - purity)))
    return {
        "formula": _scalar(formula),
        "det": _scalar(det),
        "purity": _scalar(purity),
        "max_discrepancy": _scalar(disc),
    }


def pure_tangle_2q(psi, verify=True):
    """Tangle ``4|ad - bc|^2`` of a pure two-qubit state.

    With ``verify`` on (the default) the determinant and purity forms are
    also evaluated and a `NumericalError` is raised if any two routes
    differ by more than 1e-10.
    """
    if verify:
        routes = tangle_routes_2q(psi)
        if np.max(routes["max_discrepancy"]) > ROUTE_TOL:
            raise NumericalError(f"tangle routes disagree by {np.max(routes['max_discrepancy']):.3g}")
        return routes["formula"]
    a = amplitudes(psi, 2)
    return _scalar(4.0 * np.abs(a[..., 0] * a[..., 3] - a[..., 1] * a[..., 2]) ** 2)


def spin_flip(rho):
    """``(Y (x) Y) rho* (Y (x) Y)``; keeps the field tag of a `DensityMatrix`."""
    if isinstance(rho, DensityMatrix):
        if rho.n_factors != 2:
            raise StateError("spin flip needs a two-factor density")
        flipped = YY @ np.conj(rho.matrix) @ YY
        if rho.field == "real":
            flipped = flipped.real
        return DensityMatrix(flipped, rho.field)
    m = np.asarray(rho)
    return YY @ np.conj(m) @ YY


def _hermitian_dilation(t):
    zero = np.zeros_like(t)
    top = np.concatenate([zero, t], axis=-1)
    bottom = np.concatenate([np.conj(np.swapaxes(t, -1, -2)), zero], axis=-1)
    h = np.concatenate([top, bottom], axis=-2)
    return 0.5 * (h + np.conj(np.swapaxes(h, -1, -2)))


def wootters_lambdas(rho, method="dilation"):
    """Square roots of the eigenvalues of ``rho rho~``, descending.

    ``method="dilation"`` (default) writes ``rho = W W^dag`` from the
    eigendecomposition and reads the values off as the singular values of
    the symmetric matrix ``W^T (Y (x) Y) W``, found as the positive half of
    the spectrum of its Hermitian dilation. No square root of a near-zero
    eigenvalue is taken, so rank-deficient inputs keep full precision.

    ``method="symmetrized"`` takes square roots of the eigenvalues of
    ``sqrt(rho) rho~ sqrt(rho)``. Near-zero eigenvalues lose about half
    their digits that way (errors around 1e-8).
    """
    m = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho, dtype=np.complex128)
    if m.shape[-2:] != (4, 4):
        raise StateError("mixed two-qubit tangle needs 4x4 densities")
    if method == "symmetrized":
        root = psd_sqrt(m)
        prod = root @ spin_flip(m) @ root
        prod = 0.5 * (prod + np.conj(np.swapaxes(prod, -1, -2)))
        w = sym_eig(prod).eigenvalues
        if np.any(w < -PSD_CLAMP):
            raise NumericalError(f"sqrt(rho) rho~ sqrt(rho) has eigenvalue {np.min(w):.3g}")
        return np.sqrt(np.clip(w, 0.0, None))
    if method != "dilation":
        raise ValueError(f"unknown method {method!r}")
    eig = sym_eig(m)
    q = eig.eigenvalues
    if np.any(q < -PSD_CLAMP):
        raise NotPSDError(f"density has eigenvalue {np.min(q):.3g}")
    w_mat = eig.eigenvectors * np.sqrt(np.clip(q, 0.0, None))[..., None, :]
    t = np.swapaxes(w_mat, -1, -2) @ YY @ w_mat
    sv = sym_eig(_hermitian_dilation(t)).eigenvalues[..., :4]
    return np.clip(sv, 0.0, None)


def mixed_tangle_2q(rho, method="dilation"):
    """Tangle of a two-qubit density: ``max(l1 - l2 - l3 - l4, 0)**2``.

    See `wootters_lambdas` for ``method``.
    """
    try:
        lam = wootters_lambdas(rho, method)
    except NotPSDError as exc:
        raise NumericalError(str(exc)) from exc
    c = lam[..., 0] - lam[..., 1] - lam[..., 2] - lam[..., 3]
    return _scalar(np.maximum(c, 0.0) ** 2)


@dataclass(frozen=True)
class DTerms:
    """Body-diagonal, diagonal-plane and tetrahedron sums of a 2x2x2 array."""

    d1: object
    d2: object
    d3: object

    @property
    def hyperdeterminant(self):
        return self.d1 - 2 * self.d2 + 4 * self.d3


def d_terms(psi):
    a = amplitudes(psi, 3)
    a000, a001, a010, a011 = a[..., 0], a[..., 1], a[..., 2], a[..., 3]
    a100, a101, a110, a111 = a[..., 4], a[..., 5], a[..., 6], a[..., 7]
    d1 = (a000 ** 2 * a111 ** 2 + a001 ** 2 * a110 ** 2
          + a010 ** 2 * a101 ** 2 + a100 ** 2 * a011 ** 2)
    d2 = (a000 * a111 * a011 * a100 + a000 * a111 * a101 * a010
          + a000 * a111 * a110 * a001 + a011 * a100 * a101 * a010
          + a011 * a100 * a110 * a001 + a101 * a010 * a110 * a001)
    d3 = a000 * a110 * a101 * a011 + a111 * a001 * a010 * a100
    return DTerms(_scalar_any(d1), _scalar_any(d2), _scalar_any(d3))


def _scalar_any(x):
    if np.ndim(x) == 0:
        return complex(x) if np.iscomplexobj(x) else float(x)
    return x


def hyperdeterminant(psi):
    """Cayley hyperdeterminant ``d1 - 2 d2 + 4 d3`` (no conjugation)."""
    return d_terms(psi).hyperdeterminant


def three_tangle(psi):
    """Three-qubit three-tangle ``4 |d1 - 2 d2 + 4 d3|``."""
    return _scalar(4.0 * np.abs(hyperdeterminant(psi)))


def bipartite_tangle_pure(psi, hinge):
    """Tangle between factor ``hinge`` and the other two: ``2[1 - tr rho_h^2]``."""
    a = amplitudes(psi, 3)
    if hinge not in (0, 1, 2):
        raise StateError(f"hinge {hinge} out of range")
    rho = reduced_density(a, [hinge])
    return _scalar(2.0 * (1.0 - np.real(np.einsum("...ij,...ji->...", rho, rho))))


def pair_tangle(psi, i, j):
    """Mixed tangle of the ``(i, j)`` reduction of a pure three-qubit state."""
    if i == j:
        raise StateError("pair needs two distinct factors")
    rho = reduced_density(amplitudes(psi, 3).astype(np.complex128), [i, j])
    return mixed_tangle_2q(rho)


def three_tangle_by_residual(psi, hinge=0):
    """``tau_{h|rest} - tau_{h|x} - tau_{h|y}`` with the pair terms from the mixed formula."""
    others = [f for f in (0, 1, 2) if f != hinge]
    return (bipartite_tangle_pure(psi, hinge)
            - pair_tangle(psi, hinge, others[0])
            - pair_tangle(psi, hinge, others[1]))
