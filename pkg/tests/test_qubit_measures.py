import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rebittangle.qubit_measures import (
    NumericalError, bipartite_tangle_pure, d_terms, hyperdeterminant, mixed_tangle_2q,
    pair_tangle, pure_tangle_2q, spin_flip, tangle_routes_2q, three_tangle,
    three_tangle_by_residual, wootters_lambdas,
)
from rebittangle.states import COMPLEX, DensityMatrix, catalog, ghz, random_density, random_pure

seeds = st.integers(0, 2 ** 32 - 1)


def _numpy_tangle(rho):
    # reference: eigenvalues of rho rho~ via LAPACK
    yy = np.kron([[0, -1j], [1j, 0]], [[0, -1j], [1j, 0]])
    r = rho @ yy @ rho.conj() @ yy
    lam = np.sqrt(np.clip(np.sort(np.linalg.eigvals(r).real)[::-1], 0, None))
    return max(0.0, lam[0] - lam[1:].sum()) ** 2


def test_golden_pure_values():
    assert pure_tangle_2q(catalog("bell")) == pytest.approx(1.0, abs=1e-15)
    assert pure_tangle_2q(catalog("zero2")) == 0.0
    assert pure_tangle_2q(catalog("prod_i")) == pytest.approx(0.0, abs=1e-15)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_pure_routes_agree(seed):
    psi = random_pure(COMPLEX, 2, seed)
    routes = tangle_routes_2q(psi)
    assert routes["max_discrepancy"] < 1e-12
    assert 0.0 <= routes["formula"] <= 1.0 + 1e-12


def test_batched_pure_tangle():
    psis = random_pure(COMPLEX, 2, 1, size=50)
    out = pure_tangle_2q(psis)
    assert out.shape == (50,)
    for p, v in zip(psis, out):
        assert pure_tangle_2q(p) == pytest.approx(v, abs=1e-15)


@pytest.mark.parametrize("p", [0.0, 0.2, 1 / 3, 0.5, 0.8, 1.0])
def test_werner_states(p):
    psi_m = np.array([0, 1, -1, 0]) / math.sqrt(2)
    rho = p * np.outer(psi_m, psi_m) + (1 - p) * np.eye(4) / 4
    expected = max(0.0, (3 * p - 1) / 2) ** 2
    assert mixed_tangle_2q(rho.astype(complex)) == pytest.approx(expected, abs=1e-12)


@pytest.mark.parametrize("rank", [1, 2, 3, 4])
def test_mixed_tangle_matches_lapack_reference(rank):
    for seed in range(20):
        rho = random_density(COMPLEX, 2, rank, seed).matrix
        assert mixed_tangle_2q(rho) == pytest.approx(_numpy_tangle(rho), abs=1e-7)


def test_mixed_tangle_on_projector_equals_pure():
    psis = random_pure(COMPLEX, 2, 7, size=100)
    rhos = np.einsum("ni,nj->nij", psis, psis.conj())
    np.testing.assert_allclose(mixed_tangle_2q(rhos), pure_tangle_2q(psis), atol=1e-13)


def test_dilation_beats_symmetrized_on_low_rank():
    rhos = [random_density(COMPLEX, 2, 2, s).matrix for s in range(30)]
    for rho in rhos:
        a = mixed_tangle_2q(rho)
        b = mixed_tangle_2q(rho, method="symmetrized")
        assert abs(a - b) < 1e-6
    with pytest.raises(ValueError):
        wootters_lambdas(rhos[0], method="nope")


def test_negative_density_is_numerical_error():
    with pytest.raises(NumericalError):
        mixed_tangle_2q(np.diag([1.2, -0.2, 0, 0]).astype(complex))


def test_spin_flip_keeps_tag_and_is_involution():
    d = catalog("rho_yy")
    assert spin_flip(d).field == "real"
    m = random_density(COMPLEX, 2, 3, 2).matrix
    np.testing.assert_allclose(spin_flip(spin_flip(m)), m, atol=1e-15)


def test_rho_yy_as_qubits_is_separable():
    assert mixed_tangle_2q(catalog("rho_yy")) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("theta", [math.pi / 12, math.pi / 6, math.pi / 4, 0.0, 1.1])
def test_ghz_three_tangle(theta):
    assert three_tangle(ghz(theta)) == pytest.approx(math.sin(2 * theta) ** 2, abs=1e-12)


def test_w_state_has_no_three_tangle():
    w = catalog("w")
    assert three_tangle(w) == pytest.approx(0.0, abs=1e-15)
    assert pair_tangle(w, 0, 1) == pytest.approx(4 / 9, abs=1e-12)
    assert bipartite_tangle_pure(w, 0) == pytest.approx(8 / 9, abs=1e-12)


def test_d_terms_of_tetra():
    d = d_terms(catalog("tetra_phi"))
    assert (d.d1, d.d2, d.d3) == (0.0, 0.0, -1 / 16)
    assert hyperdeterminant(catalog("tetra_phi")) == -1 / 4


def test_hyperdeterminant_is_not_conjugated():
    psi = random_pure(COMPLEX, 3, 5).amplitudes
    phase = np.exp(0.7j)
    np.testing.assert_allclose(hyperdeterminant(phase * psi), phase ** 4 * hyperdeterminant(psi), atol=1e-15)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_three_tangle_by_residual(seed):
    psi = random_pure(COMPLEX, 3, seed)
    t = three_tangle(psi)
    for h in range(3):
        assert three_tangle_by_residual(psi, h) == pytest.approx(t, abs=1e-9)


def test_bad_inputs():
    with pytest.raises(ValueError):
        pair_tangle(random_pure(COMPLEX, 3, 0), 1, 1)
    with pytest.raises(ValueError):
        bipartite_tangle_pure(random_pure(COMPLEX, 3, 0), 3)
    with pytest.raises(ValueError):
        mixed_tangle_2q(np.eye(8) / 8)
    with pytest.raises(ValueError):
        three_tangle(catalog("bell"))
    assert isinstance(DensityMatrix(np.eye(4) / 4, COMPLEX), DensityMatrix)
