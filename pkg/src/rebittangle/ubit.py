"""Rewriting a two-qubit state as a three-rebit state with a universal rebit.

A complex two-qubit density ``rho`` becomes the real three-rebit density

    rho_UAB = 1/2 [ I_U (x) Re(rho) + J_U (x) Im(rho) ]

with factor order (U, A, B), U most significant. For a pure
``psi = a + i b`` it is the equal mixture of the orthogonal real states
``xi1 = |0>a + |1>b`` and ``xi2 = J_U xi1``.
"""

from dataclasses import asdict, dataclass

import numpy as np

from . import convex_roof
from .qubit_measures import NumericalError, mixed_tangle_2q, pure_tangle_2q
from .rebit_measures import (
    mixed_tangle_2r,
    pair_sigma,
    rebit_bipartite,
    rebit_three_tangle_pure,
)
from .smallmat import I2, J, kron, partial_trace
from .states import (
    COMPLEX,
    REAL,
    DensityMatrix,
    FieldError,
    StateError,
    StateVector,
    as_density,
    reduced_density,
    validate,
)

U, A, B = 0, 1, 2

JJ = np.kron(J, J)
JI = np.kron(J, I2)
IJ = np.kron(I2, J)
J_U = np.kron(J, np.eye(4))

RELATION_TOL = 1e-10
IDENTITY_TOL = 1e-12
EMBED_TOL = 1e-12


@dataclass(frozen=True)
class UbitEmbedding:
    source: DensityMatrix
    rho_uab: DensityMatrix

    def reduced(self, keep):
        return DensityMatrix(partial_trace(self.rho_uab.matrix, (2, 2, 2), keep), REAL)


def _real_operator(op):
    op = np.asarray(op)
    return kron(I2, op.real) + kron(J, op.imag)


def embedding_matrix(m):
    """``1/2 [I (x) Re m + J (x) Im m]`` for a raw complex 4x4 matrix."""
    return 0.5 * _real_operator(m)


def embed(rho_ab, check=True):
    """Ubit embedding of a complex-tagged two-qubit state or density.

    With ``check`` on, the input is validated and probability preservation
    is spot-checked on a few fixed random projectors: ``tr(Pi rho)`` must
    equal ``tr(P rho_UAB)`` with ``P = I (x) Re Pi + J (x) Im Pi``.
    """
    if isinstance(rho_ab, StateVector) and rho_ab.field != COMPLEX:
        raise FieldError("the ubit embedding takes a complex-tagged two-qubit state")
    if isinstance(rho_ab, DensityMatrix) and rho_ab.field != COMPLEX:
        raise FieldError("the ubit embedding takes a complex-tagged two-qubit density")
    src = as_density(rho_ab, COMPLEX)
    if src.n_factors != 2:
        raise StateError("the ubit embedding takes two-qubit states")
    if check:
        report = validate(src)
        if not report.ok:
            bad = ", ".join(f"{c.name} ({c.residual:.3g})" for c in report.failed())
            raise StateError(f"invalid density: {bad}")
    m = embedding_matrix(src.matrix)
    out = UbitEmbedding(src, DensityMatrix(0.5 * (m + m.T), REAL))
    if check:
        rng = np.random.default_rng(0)
        for _ in range(4):
            v = rng.standard_normal(4) + 1j * rng.standard_normal(4)
            v /= np.linalg.norm(v)
            proj = np.outer(v, np.conj(v))
            p_c = float(np.real(np.trace(proj @ src.matrix)))
            p_r = float(np.trace(_real_operator(proj) @ out.rho_uab.matrix))
            if abs(p_c - p_r) > EMBED_TOL:
                raise NumericalError(f"embedding changed a probability by {abs(p_c - p_r):.3g}")
    return out


def is_embedded(rho_uab, tol=EMBED_TOL):
    """True if ``rho_uab`` is fixed by conjugation with ``J_U``."""
    m = np.asarray(rho_uab.matrix if isinstance(rho_uab, DensityMatrix) else rho_uab)
    return float(np.max(np.abs(J_U @ m @ J_U.T - m))) <= tol


def xi_pair(psi):
    """The two orthogonal real states whose equal mixture embeds ``psi``."""
    if isinstance(psi, StateVector):
        if psi.n_factors != 2:
            raise StateError("xi_pair takes a two-qubit state")
        amps = psi.amplitudes
    else:
        amps = np.asarray(psi)
    a, b = amps.real, amps.imag
    xi1 = np.concatenate([a, b], axis=-1)
    xi2 = np.concatenate([-b, a], axis=-1)
    if isinstance(psi, StateVector):
        return StateVector(xi1, REAL), StateVector(xi2, REAL)
    return xi1, xi2


def _ab(psi):
    amps = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    return amps.real, amps.imag


def _form(x, op, y):
    return np.einsum("...i,ij,...j->...", x, op, y)


def sigma_uab_rank2(psi):
    """Rebit three-tangle of the embedded pure state, closed form in ``a`` and ``b``."""
    a, b = _ab(psi)
    aa = np.sum(a * a, axis=-1)
    bb = np.sum(b * b, axis=-1)
    ab = np.sum(a * b, axis=-1)
    val = 4.0 * ((aa * bb - ab ** 2) - _form(a, JI, b) ** 2 - _form(a, IJ, b) ** 2)
    return float(val) if np.ndim(val) == 0 else val


def identity_check(a, b):
    """Residual of the quartic identity relating ``a``, ``b`` and the local ``J`` operators.

    ``<a|a><b|b> + <a|JJ|a><b|JJ|b>`` minus
    ``<a|b>^2 + <a|IJ|b>^2 + <a|JI|b>^2 + <a|JJ|b>^2``; zero for all real
    4-vectors. Works on stacks.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    lhs = np.sum(a * a, -1) * np.sum(b * b, -1) + _form(a, JJ, a) * _form(b, JJ, b)
    rhs = (np.sum(a * b, -1) ** 2 + _form(a, IJ, b) ** 2
           + _form(a, JI, b) ** 2 + _form(a, JJ, b) ** 2)
    res = lhs - rhs
    return float(res) if np.ndim(res) == 0 else res


@dataclass
class RelationReport:
    tau_ab: float
    tau_ab_expansion: float
    sigma_ab: float
    sigma_ab_expansion: float
    sigma_uab: float
    sigma_uab_closed_form: float
    sigma_u_ab: float
    sigma_u_a: float
    sigma_u_b: float
    sigma_a_ub: float
    sigma_a_u: float
    sigma_b_ua: float
    sigma_b_u: float
    residuals: dict

    @property
    def max_residual(self):
        return max(self.residuals.values())

    @property
    def ok(self):
        return self.max_residual <= RELATION_TOL

    def to_dict(self):
        return asdict(self)


def relation_terms(psi):
    """Batched core of `relation_report`: a dict of arrays over a stack ``(..., 4)``."""
    amps = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi, dtype=complex)
    a, b = amps.real, amps.imag
    xi1, xi2 = xi_pair(amps)

    t = {}
    t["tau_ab"] = pure_tangle_2q(amps)
    t["tau_ab_expansion"] = (_form(a, JJ, a) - _form(b, JJ, b)) ** 2 + 4.0 * _form(a, JJ, b) ** 2
    t["sigma_ab_expansion"] = (_form(a, JJ, a) + _form(b, JJ, b)) ** 2
    # AB reduction of the rank-2 mixture, not of xi1 alone
    rho_ab = 0.5 * (reduced_density(xi1, [A, B]) + reduced_density(xi2, [A, B]))
    t["sigma_ab"] = mixed_tangle_2r(rho_ab)
    t["sigma_uab"] = rebit_three_tangle_pure(xi1)
    t["sigma_uab_closed_form"] = sigma_uab_rank2(amps)
    t["sigma_u_ab"] = rebit_bipartite(xi1, U)
    t["sigma_u_a"] = pair_sigma(xi1, U, A)
    t["sigma_u_b"] = pair_sigma(xi1, U, B)
    t["sigma_a_ub"] = rebit_bipartite(xi1, A)
    t["sigma_a_u"] = pair_sigma(xi1, A, U)
    t["sigma_b_ua"] = rebit_bipartite(xi1, B)
    t["sigma_b_u"] = pair_sigma(xi1, B, U)

    r = {
        "tau_routes": np.abs(t["tau_ab"] - t["tau_ab_expansion"]),
        "sigma_ab_routes": np.maximum(np.abs(t["sigma_ab"] - t["sigma_ab_expansion"]),
                                      np.abs(t["sigma_ab"] - pair_sigma(xi1, A, B))),
        "sigma_uab_routes": np.abs(t["sigma_uab"] - t["sigma_uab_closed_form"]),
        "main_relation": np.abs(t["tau_ab"] - (t["sigma_ab"] + t["sigma_uab"])),
        "hinge_u": np.abs(t["sigma_uab"] - (t["sigma_u_ab"] - t["sigma_u_a"] - t["sigma_u_b"])),
        "hinge_a": np.abs(t["tau_ab"] - (t["sigma_a_ub"] - t["sigma_a_u"])),
        "hinge_b": np.abs(t["tau_ab"] - (t["sigma_b_ua"] - t["sigma_b_u"])),
    }
    return t, r


def relation_report(psi):
    """Every quantity in ``tau_AB = sigma_AB + sigma_UAB`` and its hinge-permuted forms.

    Each appears via at least two routes; ``residuals`` lists the pairwise
    disagreements and the relation residuals.
    """
    if not isinstance(psi, StateVector):
        psi = StateVector(np.asarray(psi, dtype=complex), COMPLEX)
    if psi.field != COMPLEX:
        raise FieldError("relation_report takes a complex-tagged two-qubit state")
    if psi.n_factors != 2:
        raise StateError("relation_report takes a two-qubit state")
    terms, res = relation_terms(psi)
    return RelationReport(
        **{k: float(v) for k, v in terms.items()},
        residuals={k: float(v) for k, v in res.items()},
    )


# ------------------------------------------------------------------ roof objectives on (U, A, B)

def joint_objective(states):
    """``sigma_{A|B} + sigma_{UAB}`` evaluated on one pure three-rebit state."""
    return pair_sigma(states, A, B) + rebit_three_tangle_pure(states)


def hinge_objective(states):
    """``sigma_{A|UB} - sigma_{A|U}``; equal to `joint_objective` on every pure state."""
    return rebit_bipartite(states, A) - pair_sigma(states, A, U)


OBJECTIVES = {
    "joint": joint_objective,
    "hinge": hinge_objective,
    "sigma_ab": lambda s: pair_sigma(s, A, B),
    "sigma_uab": rebit_three_tangle_pure,
    "sigma_a_ub": lambda s: rebit_bipartite(s, A),
    "sigma_a_u": lambda s: pair_sigma(s, A, U),
}


def joint_roof_tangle(rho_ab, cfg=None, objective="joint", **overrides):
    """Two-qubit tangle as a single roof over decompositions of the embedded state.

    ``objective`` is ``"joint"`` or ``"hinge"``. The value should match
    `mixed_tangle_2q` of the source.
    """
    if objective not in ("joint", "hinge"):
        raise ValueError(f"objective must be 'joint' or 'hinge', not {objective!r}")
    emb = rho_ab if isinstance(rho_ab, UbitEmbedding) else embed(rho_ab)
    return convex_roof.roof_minimize(emb.rho_uab, OBJECTIVES[objective], cfg, **overrides)


def separate_roofs(rho_ab, cfg=None, **overrides):
    """Each term of the naive mixed-state relations minimized on its own.

    Pair tangles of the embedded state come from the closed-form rebit
    formula on the reduction; the bipartite and three-tangle terms are
    numerical roofs (upper bounds). Pair-tangle roofs are reported too,
    as a check that they meet the closed form.
    """
    emb = rho_ab if isinstance(rho_ab, UbitEmbedding) else embed(rho_ab)
    roof = lambda name: convex_roof.roof_minimize(emb.rho_uab, OBJECTIVES[name], cfg, **overrides).value
    return {
        "tau_ab": mixed_tangle_2q(emb.source),
        "sigma_ab": mixed_tangle_2r(emb.reduced([A, B])),
        "sigma_a_u": mixed_tangle_2r(emb.reduced([A, U])),
        "sigma_ab_roof": roof("sigma_ab"),
        "sigma_a_u_roof": roof("sigma_a_u"),
        "sigma_uab_roof": roof("sigma_uab"),
        "sigma_a_ub_roof": roof("sigma_a_ub"),
    }
