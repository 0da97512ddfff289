"""Pure states, density matrices, named states and seeded sampling.

A state's field is either ``"real"`` (rebits) or ``"complex"`` (qubits).
The field is stored explicitly and mirrored by the array dtype: real
objects hold float64 arrays, complex objects complex128 arrays. The same
matrix can carry different entanglement depending on its field, so the
tag is never inferred silently from the values.
"""

import json
import math
import re
from dataclasses import dataclass, field as dc_field

import numpy as np

from .smallmat import Y, kron, sym_eig

REAL = "real"
COMPLEX = "complex"
FIELDS = (REAL, COMPLEX)

NORM_TOL = 1e-12
HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
EIG_TOL = 1e-10


class FieldError(ValueError):
    """Raised when an object has the wrong field tag for an operation."""


class StateError(ValueError):
    """Raised for malformed or invalid states."""


def _check_field(field):
    if field not in FIELDS:
        raise FieldError(f"unknown field {field!r}; expected 'real' or 'complex'")


def _factor_count(dim):
    n = int(round(math.log2(dim))) if dim > 0 else -1
    if n < 1 or n > 3 or 2 ** n != dim:
        raise StateError(f"dimension {dim} is not 2, 4 or 8")
    return n


def _coerce(arr, field):
    arr = np.asarray(arr)
    if field == REAL:
        if np.iscomplexobj(arr):
            if np.any(arr.imag != 0):
                raise FieldError("real-tagged data has nonzero imaginary parts")
            arr = arr.real
        return np.array(arr, dtype=np.float64)
    return np.array(arr, dtype=np.complex128)


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of 1 to 3 two-level factors."""

    amplitudes: np.ndarray
    field: str = COMPLEX

    def __post_init__(self):
        _check_field(self.field)
        amps = _coerce(self.amplitudes, self.field)
        if amps.ndim != 1:
            raise StateError("amplitudes must be one-dimensional")
        _factor_count(amps.size)
        norm = np.sum(np.abs(amps) ** 2)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state is not normalized (norm^2 = {norm:.15g})")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_factors(self):
        return _factor_count(self.amplitudes.size)

    def projector(self):
        a = self.amplitudes
        return DensityMatrix(np.outer(a, np.conj(a)), self.field)

    def as_field(self, field):
        return StateVector(self.amplitudes, field)

    def split(self):
        return RealImagSplit(self.amplitudes.real.copy(), self.amplitudes.imag.copy())

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.amplitudes, dtype=dtype)


@dataclass(frozen=True)
class DensityMatrix:
    """Density operator over 1 to 3 two-level factors.

    Construction validates shape and field only; physical validity is
    reported by `validate`.
    """

    matrix: np.ndarray
    field: str = COMPLEX

    def __post_init__(self):
        _check_field(self.field)
        m = _coerce(self.matrix, self.field)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise StateError("density matrix must be square")
        _factor_count(m.shape[0])
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)

    @property
    def n_factors(self):
        return _factor_count(self.matrix.shape[0])

    @property
    def dim(self):
        return self.matrix.shape[0]

    def as_field(self, field):
        return DensityMatrix(self.matrix, field)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.matrix, dtype=dtype)


@dataclass(frozen=True)
class RealImagSplit:
    """``psi = a + i b`` with ``a`` and ``b`` real and unnormalized."""

    a: np.ndarray
    b: np.ndarray

    def recombine(self, field=COMPLEX):
        return StateVector(self.a + 1j * self.b, field)


@dataclass
class Check:
    name: str
    passed: bool
    residual: float
    tol: float


@dataclass
class CheckReport:
    checks: list = dc_field(default_factory=list)

    @property
    def ok(self):
        return all(c.passed for c in self.checks)

    def failed(self):
        return [c for c in self.checks if not c.passed]

    def to_dict(self):
        return {c.name: {"passed": c.passed, "residual": c.residual, "tol": c.tol} for c in self.checks}


def validate(d):
    """Check the density-matrix invariants and report each with its residual."""
    m = np.asarray(d.matrix if isinstance(d, DensityMatrix) else d)
    real_tagged = isinstance(d, DensityMatrix) and d.field == REAL
    report = CheckReport()

    herm = float(np.max(np.abs(m - np.conj(m.T))))
    report.checks.append(Check("self_adjoint", herm <= HERMITIAN_TOL, herm, HERMITIAN_TOL))
    tr = float(abs(np.trace(m) - 1.0))
    report.checks.append(Check("unit_trace", tr <= TRACE_TOL, tr, TRACE_TOL))
    if herm <= HERMITIAN_TOL:
        lo = float(sym_eig(0.5 * (m + np.conj(m.T))).eigenvalues[-1])
        neg = max(0.0, -lo)
        report.checks.append(Check("positive_semidefinite", neg <= EIG_TOL, neg, EIG_TOL))
    else:
        report.checks.append(Check("positive_semidefinite", False, float("nan"), EIG_TOL))
    if real_tagged:
        im = float(np.max(np.abs(np.imag(m))))
        report.checks.append(Check("real_symmetric", im == 0.0 and herm <= HERMITIAN_TOL, max(im, herm), 0.0))
    return report


def as_state(obj, field=None):
    """Wrap an array or pass through a `StateVector`.

    Bare arrays take their field from the dtype unless ``field`` is given.
    """
    if isinstance(obj, StateVector):
        return obj if field is None or field == obj.field else obj.as_field(field)
    arr = np.asarray(obj)
    if field is None:
        field = COMPLEX if np.iscomplexobj(arr) else REAL
    return StateVector(arr, field)


def as_density(obj, field=None):
    if isinstance(obj, DensityMatrix):
        return obj if field is None or field == obj.field else obj.as_field(field)
    if isinstance(obj, StateVector):
        d = obj.projector()
        return d if field is None or field == d.field else d.as_field(field)
    arr = np.asarray(obj)
    if field is None:
        field = COMPLEX if np.iscomplexobj(arr) else REAL
    return DensityMatrix(arr, field)


# ---------------------------------------------------------------- catalog

_S2 = 1.0 / math.sqrt(2.0)


def ghz(theta):
    a = np.zeros(8)
    a[0] = math.cos(theta)
    a[7] = math.sin(theta)
    return StateVector(a, REAL)


def tetrahedral_states():
    """The eight states ``a|000> + b|011> + c|101> + d|110>`` and
    ``a|111> + b|100> + c|010> + d|001>`` with one coefficient -1/2 and the
    rest +1/2. They are orthonormal, so the equal mixture is ``I/8``."""
    out = []
    for support in ((0, 3, 5, 6), (7, 4, 2, 1)):
        for neg in range(4):
            a = np.zeros(8)
            a[list(support)] = 0.5
            a[support[neg]] = -0.5
            out.append(StateVector(a, REAL))
    return out


def _tetra_phi():
    a = np.zeros(8)
    a[0], a[3], a[5], a[6] = 0.5, -0.5, -0.5, -0.5
    return StateVector(a, REAL)


def _prod_i():
    one = np.array([1.0, 1j]) * _S2
    return StateVector(np.kron(one, one), COMPLEX)


def _w():
    a = np.zeros(8)
    a[[1, 2, 4]] = 1.0 / math.sqrt(3.0)
    return StateVector(a, REAL)


def _bell():
    a = np.zeros(4)
    a[0] = a[3] = _S2
    return StateVector(a, REAL)


_CATALOG = {
    "tetra_phi": _tetra_phi,
    "rho_yy": lambda: DensityMatrix(0.25 * (np.eye(4) + kron(Y, Y)).real, REAL),
    "prod_i": _prod_i,
    "w": _w,
    "bell": _bell,
    "bell_minus": lambda: StateVector(np.array([_S2, 0.0, 0.0, -_S2]), REAL),
    "zero2": lambda: StateVector(np.array([1.0, 0.0, 0.0, 0.0]), REAL),
    "zero3": lambda: StateVector(np.eye(8)[0], REAL),
    "mixed_i4": lambda: DensityMatrix(np.eye(4) / 4.0, COMPLEX),
    "mixed_i8": lambda: DensityMatrix(np.eye(8) / 8.0, REAL),
    "bell_diag_00_11": lambda: DensityMatrix(np.diag([0.5, 0.0, 0.0, 0.5]), REAL),
}

_PARAM = re.compile(r"^\s*([a-z_0-9]+)\s*\(\s*([^)]*)\)\s*$")


def _parse_angle(text):
    text = text.strip().replace(" ", "")
    m = re.fullmatch(r"(-?[0-9.]*)\*?pi(?:/([0-9.]+))?", text)
    if m:
        coef = float(m.group(1)) if m.group(1) not in ("", "-") else (-1.0 if m.group(1) == "-" else 1.0)
        den = float(m.group(2)) if m.group(2) else 1.0
        return coef * math.pi / den
    return float(text)


def catalog_names():
    return sorted(_CATALOG) + ["ghz(theta)"]


def catalog(name):
    """Look up a named state.

    ``ghz(theta)`` accepts a float or a multiple of pi, e.g. ``ghz(pi/6)``.
    Raises `KeyError` for unknown names.
    """
    m = _PARAM.match(name)
    if m:
        base, arg = m.group(1), m.group(2)
        if base == "ghz":
            return ghz(_parse_angle(arg))
        raise KeyError(f"unknown catalog entry {name!r}")
    try:
        return _CATALOG[name.strip()]()
    except KeyError:
        raise KeyError(f"unknown catalog entry {name!r}") from None


# ---------------------------------------------------------------- sampling

def _rng(seed):
    return np.random.default_rng(seed)


def random_pure(field, n_factors, seed=None, size=None):
    """Uniformly random pure state(s) from normalized Gaussian components.

    With ``size`` given, returns a raw ``(size, 2**n)`` array instead of a
    `StateVector`; rows are normalized.
    """
    _check_field(field)
    dim = 2 ** n_factors
    rng = _rng(seed)
    shape = (dim,) if size is None else (size, dim)
    v = rng.standard_normal(shape)
    if field == COMPLEX:
        v = v + 1j * rng.standard_normal(shape)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    if size is None:
        return StateVector(v, field)
    return v


def random_density(field, n_factors, rank, seed=None):
    """Mixture of ``rank`` random pure states with flat-Dirichlet weights."""
    _check_field(field)
    dim = 2 ** n_factors
    if not 1 <= rank <= dim:
        raise StateError(f"rank {rank} outside [1, {dim}]")
    rng = _rng(seed)
    states = random_pure(field, n_factors, rng, size=rank)
    w = rng.exponential(size=rank)
    w = w / w.sum()
    m = np.einsum("k,ki,kj->ij", w, states, np.conj(states))
    m = 0.5 * (m + np.conj(m.T))
    return DensityMatrix(m, field)


# ---------------------------------------------------------------- JSON

def _pairs(arr):
    arr = np.asarray(arr, dtype=np.complex128)
    if arr.ndim == 1:
        return [[float(z.real), float(z.imag)] for z in arr]
    return [_pairs(row) for row in arr]


def _unpairs(data):
    arr = np.asarray(data, dtype=np.float64)
    if arr.shape[-1] != 2:
        raise StateError("entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def to_json_dict(obj):
    if isinstance(obj, StateVector):
        return {"field": obj.field, "n_factors": obj.n_factors, "amplitudes": _pairs(obj.amplitudes)}
    if isinstance(obj, DensityMatrix):
        return {"field": obj.field, "n_factors": obj.n_factors, "matrix": _pairs(obj.matrix)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_json_dict(data):
    """Parse the ``{"field", "n_factors", "amplitudes"|"matrix"}`` schema."""
    try:
        field = data["field"]
        n = int(data["n_factors"])
    except (KeyError, TypeError, ValueError) as exc:
        raise StateError(f"missing or bad key: {exc}") from None
    _check_field(field)
    if "amplitudes" in data:
        obj = StateVector(_unpairs(data["amplitudes"]), field)
    elif "matrix" in data:
        obj = DensityMatrix(_unpairs(data["matrix"]), field)
    else:
        raise StateError("expected 'amplitudes' or 'matrix'")
    if obj.n_factors != n:
        raise StateError(f"n_factors={n} does not match data of {obj.n_factors} factors")
    return obj


def load_json(path):
    with open(path) as fh:
        return from_json_dict(json.load(fh))


def dump_json(obj, path):
    with open(path, "w") as fh:
        json.dump(to_json_dict(obj), fh, indent=2)


# ---------------------------------------------------------------- tensor helpers

def amplitudes(psi, n_factors=None):
    """Raw amplitude array of a `StateVector` or an array stack ``(..., 2**n)``."""
    arr = psi.amplitudes if isinstance(psi, StateVector) else np.asarray(psi)
    if n_factors is not None and arr.shape[-1] != 2 ** n_factors:
        raise StateError(f"expected {n_factors} factors, got dimension {arr.shape[-1]}")
    return arr


def reduced_density(psi, keep):
    """Reduced density matrix of a pure state (or stack of them) on ``keep``.

    Kept factors appear in the order given.
    """
    a = amplitudes(psi)
    n = _factor_count(a.shape[-1])
    keep = [int(k) for k in keep]
    if not keep or len(set(keep)) != len(keep) or any(k < 0 or k >= n for k in keep):
        raise StateError(f"invalid factor subset {keep} for {n} factors")
    rest = [f for f in range(n) if f not in keep]
    batch = a.shape[:-1]
    t = a.reshape(batch + (2,) * n)
    nb = len(batch)
    t = np.transpose(t, tuple(range(nb)) + tuple(nb + f for f in keep + rest))
    m = t.reshape(batch + (2 ** len(keep), 2 ** len(rest)))
    return m @ np.conj(np.swapaxes(m, -1, -2))


def permute_factors(psi, perm):
    """Relabel factors: output factor ``i`` is input factor ``perm[i]``."""
    a = amplitudes(psi)
    n = _factor_count(a.shape[-1])
    batch = a.shape[:-1]
    nb = len(batch)
    t = a.reshape(batch + (2,) * n)
    t = np.transpose(t, tuple(range(nb)) + tuple(nb + p for p in perm))
    out = t.reshape(batch + (2 ** n,))
    if isinstance(psi, StateVector):
        return StateVector(out, psi.field)
    return out


def apply_local(psi, ops):
    """Apply one 2x2 operator per factor (``ops[i]`` acts on factor ``i``)."""
    a = amplitudes(psi)
    n = _factor_count(a.shape[-1])
    full = ops[0]
    for op in ops[1:]:
        full = np.kron(full, op)
    out = a @ np.asarray(full).T
    if isinstance(psi, StateVector):
        field = psi.field if not np.iscomplexobj(out) else COMPLEX
        return StateVector(out, field)
    return out
