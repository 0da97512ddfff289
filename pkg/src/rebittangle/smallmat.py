"""Dense kernels for the small matrices that show up here (dimension <= 8).

Matrices are plain numpy arrays. The field is carried by the dtype: a real
dtype means a real matrix, a complex dtype a complex one. Basis label
``|ijk>`` maps to flat index ``4i + 2j + k`` (leftmost factor most
significant), which is numpy's C order for a ``(2, 2, 2)`` reshape.

Most functions accept a stack of matrices with leading batch dimensions.
"""

from dataclasses import dataclass

import numpy as np

MAX_DIM = 8
ALLOWED_DIMS = (1, 2, 4, 8)

JACOBI_TOL = 1e-13
JACOBI_MAX_SWEEPS = 100
PSD_CLAMP = 1e-10
_TINY_PIVOT = 1e-280
SYMMETRY_TOL = 1e-12

I2 = np.eye(2)
J = np.array([[0.0, -1.0], [1.0, 0.0]])
X = np.array([[0.0, 1.0], [1.0, 0.0]])
Z = np.array([[1.0, 0.0], [0.0, -1.0]])
Y = np.array([[0.0, -1j], [1j, 0.0]])


class SizeError(ValueError):
    pass


class ShapeError(ValueError):
    pass


class SymmetryError(ValueError):
    pass


class NotPSDError(ValueError):
    pass


@dataclass(frozen=True)
class EigenResult:
    """Spectrum of a self-adjoint matrix.

    ``eigenvalues`` is sorted descending along the last axis and the
    columns of ``eigenvectors`` are the matching orthonormal eigenvectors.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self):
        v = self.eigenvectors
        return (v * self.eigenvalues[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))


def is_real(a):
    return not np.iscomplexobj(a)


def kron(a, b):
    """Kronecker product with the leftmost factor most significant.

    Raises `SizeError` if either result dimension would exceed 8.
    """
    a = np.asarray(a)
    b = np.asarray(b)
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError("kron expects two 2-d matrices")
    rows, cols = a.shape[0] * b.shape[0], a.shape[1] * b.shape[1]
    if rows > MAX_DIM or cols > MAX_DIM:
        raise SizeError(f"kron result {rows}x{cols} exceeds {MAX_DIM}x{MAX_DIM}")
    return np.kron(a, b)


def kron_all(*mats):
    out = np.asarray(mats[0])
    for m in mats[1:]:
        out = kron(out, m)
    return out


def partial_trace(rho, dims, keep):
    """Reduce ``rho`` to the factors listed in ``keep``.

    Parameters
    ----------
    rho : array_like, shape (..., d, d)
        Operator on the tensor product of factors with dimensions ``dims``.
    dims : sequence of int
        Factor dimensions, most significant first.
    keep : iterable of int
        Factor indices to keep. The result orders them as given, so
        ``keep=(2, 0)`` yields an operator on factor 2 (x) factor 0.
    """
    rho = np.asarray(rho)
    dims = [int(d) for d in dims]
    keep = [int(k) for k in keep]
    n = len(dims)
    total = int(np.prod(dims))
    if rho.ndim < 2 or rho.shape[-1] != rho.shape[-2]:
        raise ShapeError("partial_trace expects square matrices")
    if rho.shape[-1] != total:
        raise ShapeError(f"dims {dims} do not match matrix dimension {rho.shape[-1]}")
    if not keep or len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise ShapeError(f"invalid factor subset {keep} for {n} factors")

    batch = rho.shape[:-2]
    t = rho.reshape(batch + tuple(dims) + tuple(dims))
    nb = len(batch)
    # einsum labels: batch, row factors, column factors
    letters = "abcdefghijklmnopqrstuvwxyz"
    b_lbl = letters[:nb]
    row = list(letters[nb:nb + n])
    col = list(letters[nb + n:nb + 2 * n])
    for f in range(n):
        if f not in keep:
            col[f] = row[f]
    out = b_lbl + "".join(row[k] for k in keep) + "".join(col[k] for k in keep)
    red = np.einsum(f"{b_lbl}{''.join(row)}{''.join(col)}->{out}", t)
    d_keep = int(np.prod([dims[k] for k in keep]))
    return red.reshape(batch + (d_keep, d_keep))


def _jacobi(a):
    """Cyclic Jacobi sweeps over a stack of self-adjoint matrices.

    Works in place on a copy. Every matrix in the stack sees the same
    sequence of (p, q) pivots; rotations with a zero pivot are identities,
    so finished matrices are left untouched while others converge.
    """
    a = np.array(a, copy=True)
    n = a.shape[-1]
    complex_case = np.iscomplexobj(a)
    v = np.broadcast_to(np.eye(n, dtype=a.dtype), a.shape).copy()
    scale = np.maximum(1.0, np.sqrt(np.sum(np.abs(a) ** 2, axis=(-2, -1))))
    off_mask = ~np.eye(n, dtype=bool)

    for _ in range(JACOBI_MAX_SWEEPS):
        off = np.sqrt(np.sum(np.abs(a[..., off_mask]) ** 2, axis=-1))
        if np.all(off <= JACOBI_TOL * scale):
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[..., p, q]
                mag = np.abs(apq)
                # pivots this small are already converged and would overflow the phase
                active = mag > _TINY_PIVOT
                if not np.any(active):
                    continue
                app = a[..., p, p].real
                aqq = a[..., q, q].real
                safe = np.where(active, mag, 1.0)
                # real case keeps the pivot sign; complex case rotates it onto the positive axis
                pivot = safe if complex_case else np.where(active, apq, 1.0)
                with np.errstate(over="ignore"):
                    theta = (aqq - app) / (2.0 * pivot)
                    t = np.where(theta >= 0.0, 1.0, -1.0) / (np.abs(theta) + np.sqrt(theta * theta + 1.0))
                t = np.where(active, t, 0.0)
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                if complex_case:
                    # phase that makes the pivot real and positive
                    ph = np.where(active, apq / safe, 1.0)[..., None]
                    phc = np.conj(ph)
                else:
                    ph = phc = 1.0
                c = c[..., None]
                s = s[..., None]

                col_p = a[..., :, p].copy()
                col_q = a[..., :, q]
                a[..., :, p] = c * col_p - s * phc * col_q
                a[..., :, q] = s * col_p + c * phc * col_q
                row_p = a[..., p, :].copy()
                row_q = a[..., q, :]
                a[..., p, :] = c * row_p - s * ph * row_q
                a[..., q, :] = s * row_p + c * ph * row_q
                a[..., p, q] = 0.0
                a[..., q, p] = 0.0
                a[..., p, p] = a[..., p, p].real
                a[..., q, q] = a[..., q, q].real

                vp = v[..., :, p].copy()
                vq = v[..., :, q]
                v[..., :, p] = c * vp - s * phc * vq
                v[..., :, q] = s * vp + c * phc * vq

    w = np.real(np.diagonal(a, axis1=-2, axis2=-1)).copy()
    return w, v


def sym_eig(a):
    """Eigendecomposition of a real symmetric or complex Hermitian matrix.

    Accepts a stack ``(..., n, n)``. Eigenvalues come back in descending
    order. Raises `SymmetryError` if the input departs from self-adjointness
    by more than 1e-12 (max-abs entry).
    """
    a = np.asarray(a)
    if a.ndim < 2 or a.shape[-1] != a.shape[-2]:
        raise ShapeError("sym_eig expects square matrices")
    if a.shape[-1] > MAX_DIM:
        raise SizeError(f"dimension {a.shape[-1]} exceeds {MAX_DIM}")
    a = a.astype(np.complex128 if np.iscomplexobj(a) else np.float64)
    asym = np.max(np.abs(a - np.conj(np.swapaxes(a, -1, -2)))) if a.size else 0.0
    if asym > SYMMETRY_TOL:
        raise SymmetryError(f"matrix is not self-adjoint (residual {asym:.3g})")
    a = 0.5 * (a + np.conj(np.swapaxes(a, -1, -2)))

    w, v = _jacobi(a)
    order = np.argsort(-w, axis=-1, kind="stable")
    w = np.take_along_axis(w, order, axis=-1)
    v = np.take_along_axis(v, order[..., None, :], axis=-1)
    return EigenResult(w, v)


def real_embedding(h):
    """Real symmetric ``2n x 2n`` form ``[[Re, -Im], [Im, Re]]`` of a Hermitian matrix."""
    h = np.asarray(h)
    re, im = h.real, h.imag
    top = np.concatenate([re, -im], axis=-1)
    bottom = np.concatenate([im, re], axis=-1)
    return np.concatenate([top, bottom], axis=-2)


def psd_sqrt(a):
    """Self-adjoint PSD square root.

    Eigenvalues in ``[-1e-10, 0)`` are clamped to zero; anything more
    negative raises `NotPSDError`.
    """
    eig = sym_eig(a)
    w = eig.eigenvalues
    if np.any(w < -PSD_CLAMP):
        raise NotPSDError(f"matrix has eigenvalue {np.min(w):.3g} < -{PSD_CLAMP}")
    root = np.sqrt(np.clip(w, 0.0, None))
    v = eig.eigenvectors
    out = (v * root[..., None, :]) @ np.conj(np.swapaxes(v, -1, -2))
    if is_real(a):
        return out.real if np.iscomplexobj(out) else out
    return 0.5 * (out + np.conj(np.swapaxes(out, -1, -2)))
