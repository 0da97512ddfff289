"""Numerical convex roofs.

The convex roof of a pure-state function ``f`` at a density ``rho`` is the
minimum of ``sum_j p_j f(phi_j)`` over all pure-state ensembles
``{p_j, phi_j}`` with ``sum_j p_j |phi_j><phi_j| = rho``.

Every ensemble of ``m`` states comes from an ``m x r`` isometry ``V``
(``r = rank rho``): with ``rho = sum_k q_k |e_k><e_k|`` the unnormalized
members are ``sum_k V[j, k] sqrt(q_k) |e_k>``. Isometries are parameterized
by products of Givens rotations (plus phases in the complex case), which
turns the roof into an unconstrained minimization over angles.

Objectives receive a stack of normalized amplitude vectors of shape
``(..., d)`` and return an array of shape ``(...)``. All measures in this
package already behave that way; wrap scalar-only callables with
`pointwise`.
"""

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .smallmat import sym_eig
from .states import COMPLEX, REAL, DensityMatrix, StateVector, as_density

RANK_TOL = 1e-12
ISOMETRY_TOL = 1e-10
FD_STEP = 1e-6


class IsometryError(ValueError):
    pass


@dataclass(frozen=True)
class Decomposition:
    weights: np.ndarray
    states: list

    def density(self):
        mats = [p * np.outer(s.amplitudes, np.conj(s.amplitudes)) for p, s in zip(self.weights, self.states)]
        return sum(mats)

    def residual(self, rho):
        target = np.asarray(rho.matrix if isinstance(rho, DensityMatrix) else rho)
        return float(np.linalg.norm(self.density() - target))

    def average(self, objective):
        amps = np.array([s.amplitudes for s in self.states])
        return float(np.dot(self.weights, objective(amps)))


@dataclass(frozen=True)
class RoofConfig:
    """Optimizer settings.

    ``m`` defaults to twice the rank. ``method`` is ``"lbfgs"`` (quasi-Newton
    on the angles with finite-difference gradients) or ``"coordinate"``
    (one angle at a time, grid scan then bounded golden/Brent refinement).
    Restarts run in chunks of ``chunk``; after each chunk the search stops
    early once ``agree`` restarts have landed within ``agree_tol`` of the
    best value. ``agree=0`` always runs all ``restarts``.
    """

    m: int = None
    restarts: int = 32
    seed: int = 0
    tol: float = 1e-9
    max_iters: int = 500
    method: str = "lbfgs"
    chunk: int = 4
    agree: int = 3
    agree_tol: float = 1e-7
    workers: int = 1

    def to_dict(self):
        # workers is deliberately left out: it must not change results or reports
        return {
            "m": self.m, "restarts": self.restarts, "seed": self.seed, "tol": self.tol,
            "max_iters": self.max_iters, "method": self.method, "chunk": self.chunk,
            "agree": self.agree, "agree_tol": self.agree_tol,
        }


@dataclass
class RoofResult:
    value: float
    best: Decomposition
    restarts_used: int
    converged: bool
    residual: float
    restart_values: list = field(default_factory=list)

    def to_dict(self):
        return {
            "value": self.value,
            "restarts_used": self.restarts_used,
            "converged": self.converged,
            "residual": self.residual,
            "restart_values": list(self.restart_values),
            "decomposition": [
                {"weight": float(p), "amplitudes": [[float(z.real), float(z.imag)] for z in np.asarray(s.amplitudes, dtype=complex)]}
                for p, s in zip(self.best.weights, self.best.states)
            ],
        }


def pointwise(fn):
    """Lift a single-state function to the stacked-array convention."""

    def lifted(states):
        states = np.asarray(states)
        flat = states.reshape(-1, states.shape[-1])
        out = np.array([fn(s) for s in flat], dtype=float)
        return out.reshape(states.shape[:-1])

    return lifted


# ------------------------------------------------------------------ spectrum

@dataclass(frozen=True)
class _Spectrum:
    field: str
    dim: int
    rank: int
    factors: np.ndarray  # rows sqrt(q_k) e_k^T, shape (rank, dim)


def _spectrum(rho):
    rho = as_density(rho)
    eig = sym_eig(rho.matrix)
    keep = eig.eigenvalues > RANK_TOL
    q = eig.eigenvalues[keep]
    vecs = eig.eigenvectors[:, keep]
    factors = (vecs * np.sqrt(q)).T
    if rho.field == REAL:
        factors = factors.real
    return _Spectrum(rho.field, rho.dim, int(keep.sum()), factors)


def _ensemble(spec, v):
    """Unnormalized members ``V @ factors`` -> (weights, normalized states)."""
    psi = v @ spec.factors
    w = np.sum(np.abs(psi) ** 2, axis=-1)
    norm = np.sqrt(w)
    safe = np.where(norm > 0.0, norm, 1.0)
    states = psi / safe[..., None]
    # empty members get a harmless placeholder; their weight is zero
    empty = norm == 0.0
    if np.any(empty):
        states = np.where(empty[..., None], np.eye(spec.dim, dtype=states.dtype)[0], states)
    return w, states


def decomposition_from_isometry(rho, v):
    """Ensemble of ``rho`` generated by the ``m x rank`` isometry ``v``."""
    rho = as_density(rho)
    spec = _spectrum(rho)
    v = np.asarray(v)
    if v.ndim != 2 or v.shape[1] != spec.rank:
        raise IsometryError(f"isometry must have {spec.rank} columns, got shape {v.shape}")
    if v.shape[0] < spec.rank:
        raise IsometryError("isometry needs at least rank(rho) rows")
    if spec.field == REAL and np.iscomplexobj(v):
        if np.any(v.imag != 0):
            raise IsometryError("real densities need real isometries")
        v = v.real
    gram = np.conj(v.T) @ v
    err = float(np.max(np.abs(gram - np.eye(spec.rank))))
    if err > ISOMETRY_TOL:
        raise IsometryError(f"V^dag V deviates from identity by {err:.3g}")
    w, states = _ensemble(spec, v)
    return Decomposition(w, [StateVector(s, spec.field) for s in states])


# ------------------------------------------------------------------ Givens charts

class _Chart:
    """Angles -> isometry, batched over leading parameter axes."""

    def __init__(self, field, m, r):
        self.field = field
        self.m = m
        self.r = r
        self.pairs = [(i, j) for i in range(r) for j in range(i + 1, m)]
        n_pairs = len(self.pairs)
        self.n_params = n_pairs if field == REAL else 2 * n_pairs + r

    def isometry(self, x):
        x = np.atleast_2d(x)
        batch = x.shape[0]
        n_pairs = len(self.pairs)
        if self.field == REAL:
            v = np.zeros((batch, self.m, self.r))
            v[:, np.arange(self.r), np.arange(self.r)] = 1.0
            thetas = x
        else:
            v = np.zeros((batch, self.m, self.r), dtype=np.complex128)
            v[:, np.arange(self.r), np.arange(self.r)] = np.exp(1j * x[:, 2 * n_pairs:])
            thetas = x[:, :n_pairs]
            phis = x[:, n_pairs:2 * n_pairs]
        # V = G_1 G_2 ... G_P E, so the last rotation acts first
        for k in range(n_pairs - 1, -1, -1):
            i, j = self.pairs[k]
            c = np.cos(thetas[:, k])[:, None]
            s = np.sin(thetas[:, k])[:, None]
            vi = v[:, i, :].copy()
            vj = v[:, j, :]
            if self.field == REAL:
                v[:, i, :] = c * vi - s * vj
                v[:, j, :] = s * vi + c * vj
            else:
                e = np.exp(1j * phis[:, k])[:, None]
                v[:, i, :] = c * vi - np.conj(e) * s * vj
                v[:, j, :] = e * s * vi + c * vj
        return v


def _average(spec, objective, v):
    w, states = _ensemble(spec, v)
    return np.sum(w * objective(states), axis=-1)


class _Problem:
    def __init__(self, spec, objective, m):
        self.spec = spec
        self.objective = objective
        self.chart = _Chart(spec.field, m, spec.rank)

    def values(self, xs):
        return _average(self.spec, self.objective, self.chart.isometry(xs))

    def value(self, x):
        return float(self.values(x[None, :])[0])

    def value_and_grad(self, x):
        p = x.size
        steps = np.eye(p) * FD_STEP
        xs = np.concatenate([x[None, :], x + steps, x - steps])
        vals = self.values(xs)
        grad = (vals[1:p + 1] - vals[p + 1:]) / (2.0 * FD_STEP)
        return float(vals[0]), grad


def _run_lbfgs(problem, x0, cfg):
    res = minimize(
        problem.value_and_grad, x0, jac=True, method="L-BFGS-B",
        options={"maxiter": cfg.max_iters, "ftol": cfg.tol * 1e-3, "gtol": 1e-10, "maxcor": 30},
    )
    x = res.x
    val = problem.value(x)
    converged = bool(res.success) or res.nit < cfg.max_iters
    return val, x, converged


_GRID = 16


def _run_coordinate(problem, x0, cfg):
    x = x0.copy()
    val = problem.value(x)
    p = x.size
    offsets = np.linspace(-math.pi, math.pi, _GRID, endpoint=False)
    for _ in range(cfg.max_iters):
        start = val
        for k in range(p):
            xs = np.repeat(x[None, :], _GRID, axis=0)
            xs[:, k] += offsets
            vals = problem.values(xs)
            g = int(np.argmin(vals))
            centre = x[k] + offsets[g]
            width = 2.0 * math.pi / _GRID

            def along(t, k=k):
                y = x.copy()
                y[k] = t
                return problem.value(y)

            res = minimize_scalar(along, bounds=(centre - width, centre + width),
                                  method="bounded", options={"xatol": 1e-10})
            if res.fun < val:
                x[k] = res.x
                val = float(res.fun)
        if start - val < cfg.tol:
            return val, x, True
    return val, x, False


def _restart(problem, cfg, index):
    rng = np.random.default_rng([cfg.seed, index])
    x0 = rng.uniform(0.0, 2.0 * math.pi, size=problem.chart.n_params)
    if problem.chart.n_params == 0:
        return problem.value(x0), x0, True
    runner = _run_lbfgs if cfg.method == "lbfgs" else _run_coordinate
    return runner(problem, x0, cfg)


def default_m(rank):
    return max(2 * rank, 2)


def roof_minimize(rho, objective, cfg=None, **overrides):
    """Numerically minimize the ensemble average of ``objective`` over decompositions of ``rho``.

    The returned value is an upper bound on the convex roof (no global
    optimality certificate). Restarts are seeded by ``(seed, restart index)``
    so serial and threaded execution give identical results.
    """
    cfg = replace(cfg or RoofConfig(), **overrides)
    if cfg.method not in ("lbfgs", "coordinate"):
        raise ValueError(f"unknown method {cfg.method!r}")
    rho = as_density(rho)
    spec = _spectrum(rho)
    m = cfg.m or default_m(spec.rank)
    if m < spec.rank:
        raise ValueError(f"m={m} is smaller than rank {spec.rank}")
    problem = _Problem(spec, objective, m)

    # the eigen-ensemble is always a candidate
    eye = np.zeros((m, spec.rank), dtype=np.complex128 if spec.field == COMPLEX else float)
    eye[np.arange(spec.rank), np.arange(spec.rank)] = 1.0
    best_val = float(_average(spec, objective, eye[None])[0])
    best_v = eye
    all_converged = True

    results = []
    done = 0
    pool = ThreadPoolExecutor(max_workers=cfg.workers) if cfg.workers > 1 else None
    try:
        while done < cfg.restarts:
            idx = list(range(done, min(done + cfg.chunk, cfg.restarts)))
            if pool is None:
                chunk = [_restart(problem, cfg, i) for i in idx]
            else:
                chunk = list(pool.map(lambda i: _restart(problem, cfg, i), idx))
            results.extend(chunk)
            done += len(idx)
            if cfg.agree:
                lo = min(r[0] for r in results)
                hits = sum(1 for r in results if r[0] <= lo + cfg.agree_tol)
                if hits >= cfg.agree:
                    break
    finally:
        if pool is not None:
            pool.shutdown()

    for val, x, conv in results:
        all_converged &= conv
        if val < best_val:
            best_val = val
            best_v = problem.chart.isometry(x)[0]

    w, states = _ensemble(spec, best_v)
    best = Decomposition(w, [StateVector(s, spec.field) for s in states])
    value = best.average(objective)
    return RoofResult(
        value=value,
        best=best,
        restarts_used=done,
        converged=all_converged,
        residual=best.residual(rho),
        restart_values=[float(r[0]) for r in results],
    )


def random_isometries(field, m, r, n, seed=None):
    """``n`` Haar-random ``m x r`` isometries from Gaussian matrices and QR."""
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((n, m, r))
    if field == COMPLEX:
        g = g + 1j * rng.standard_normal((n, m, r))
    q, rr = np.linalg.qr(g)
    d = np.diagonal(rr, axis1=-2, axis2=-1)
    ph = np.where(np.abs(d) > 0, d / np.where(np.abs(d) > 0, np.abs(d), 1.0), 1.0)
    return q * ph[:, None, :]


def oracle_sample(rho, objective, n_samples=10_000, m=None, seed=0, batch=1024):
    """Smallest ensemble average over ``n_samples`` random isometries.

    Independent of `roof_minimize`: no optimization, just sampling.
    """
    rho = as_density(rho)
    spec = _spectrum(rho)
    m = m or default_m(spec.rank)
    rng = np.random.default_rng(seed)
    best = math.inf
    left = n_samples
    while left > 0:
        k = min(batch, left)
        v = random_isometries(spec.field, m, spec.rank, k, rng)
        if spec.field == REAL:
            v = v.real
        best = min(best, float(np.min(_average(spec, objective, v))))
        left -= k
    return best


def eigen_average(rho, objective):
    """Ensemble average over the eigendecomposition of ``rho``."""
    spec = _spectrum(rho)
    w, states = _ensemble(spec, np.eye(spec.rank)[None].astype(spec.factors.dtype))
    return float(np.sum(w * objective(states)))
