import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rebittangle.qubit_measures import three_tangle
from rebittangle.rebit_measures import (
    YY_REAL, mixed_tangle_2r, pair_sigma, project_measure, pure_tangle_2r, rebit_bipartite,
    rebit_three_tangle_by_residual, rebit_three_tangle_pure, sigma_a_b_components,
    sigma_a_bc_components, sigma_a_c_components,
)
from rebittangle.states import (
    COMPLEX, REAL, FieldError, StateError, StateVector, catalog, ghz, permute_factors,
    random_density, random_pure, tetrahedral_states,
)

seeds = st.integers(0, 2 ** 32 - 1)


def test_field_enforcement():
    with pytest.raises(FieldError):
        pure_tangle_2r(catalog("prod_i"))
    with pytest.raises(FieldError):
        pure_tangle_2r(catalog("bell").as_field(COMPLEX))
    with pytest.raises(FieldError):
        mixed_tangle_2r(catalog("rho_yy").as_field(COMPLEX))
    with pytest.raises(FieldError):
        mixed_tangle_2r(np.eye(4, dtype=complex) / 4)
    with pytest.raises(StateError):
        mixed_tangle_2r(np.eye(8) / 8)


def test_rho_yy_is_maximally_entangled_as_rebits():
    assert mixed_tangle_2r(catalog("rho_yy")) == pytest.approx(1.0, abs=1e-15)
    assert mixed_tangle_2r(np.eye(4) / 4) == 0.0


def test_yy_real_matches_complex_yy():
    y = np.array([[0, -1j], [1j, 0]])
    np.testing.assert_array_equal(YY_REAL, np.kron(y, y).real)


@settings(max_examples=100, deadline=None)
@given(seeds)
def test_pure_rebit_tangle_equals_qubit_tangle_and_trace_formula(seed):
    phi = random_pure(REAL, 2, seed).amplitudes
    from rebittangle.qubit_measures import pure_tangle_2q
    s = pure_tangle_2r(phi)
    assert s == pytest.approx(pure_tangle_2q(phi.astype(complex)), abs=1e-14)
    assert s == pytest.approx(mixed_tangle_2r(np.outer(phi, phi)), abs=1e-14)


@pytest.mark.parametrize("rank", [2, 3, 4])
def test_rebit_tangle_not_below_qubit_tangle(rank):
    from rebittangle.qubit_measures import mixed_tangle_2q
    for seed in range(20):
        d = random_density(REAL, 2, rank, seed)
        assert mixed_tangle_2r(d) >= mixed_tangle_2q(d) - 1e-9


def test_tetra_phi_golden_values():
    t = catalog("tetra_phi")
    assert rebit_three_tangle_pure(t) == pytest.approx(-1.0, abs=1e-12)
    for i, j in ((0, 1), (0, 2), (1, 2)):
        assert pair_sigma(t, i, j) == pytest.approx(1.0, abs=1e-12)
    for h in range(3):
        assert rebit_bipartite(t, h) == pytest.approx(1.0, abs=1e-12)


def test_all_tetrahedral_states_reach_minus_one():
    for s in tetrahedral_states():
        assert rebit_three_tangle_pure(s) == pytest.approx(-1.0, abs=1e-12)


def test_ghz_rebit_three_tangle_is_positive():
    assert rebit_three_tangle_pure(ghz(np.pi / 4)) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_residual_route_and_components(seed):
    phi = random_pure(REAL, 3, seed).amplitudes
    s = rebit_three_tangle_pure(phi)
    assert -1.0 - 1e-12 <= s <= 1.0 + 1e-12
    for h in range(3):
        assert rebit_three_tangle_by_residual(phi, h) == pytest.approx(s, abs=1e-9)
    assert sigma_a_bc_components(phi) == pytest.approx(rebit_bipartite(phi, 0), abs=1e-13)
    assert sigma_a_b_components(phi) == pytest.approx(pair_sigma(phi, 0, 1), abs=1e-13)
    assert sigma_a_c_components(phi) == pytest.approx(pair_sigma(phi, 0, 2), abs=1e-13)
    assert abs(s) == pytest.approx(three_tangle(phi.astype(complex)), abs=1e-12)
    for perm in ((1, 0, 2), (2, 1, 0), (1, 2, 0)):
        assert rebit_three_tangle_pure(permute_factors(phi, perm)) == pytest.approx(s, abs=1e-12)


def test_batched_three_tangle():
    phis = random_pure(REAL, 3, 2, size=20)
    out = rebit_three_tangle_pure(phis)
    assert out.shape == (20,)
    assert out[3] == pytest.approx(rebit_three_tangle_pure(phis[3]))


def test_measuring_one_factor_removes_three_tangle():
    t = catalog("tetra_phi")
    for f in range(3):
        ens = project_measure(t, [f])
        assert ens.total_probability == pytest.approx(1.0)
        assert len(ens.outcomes) == 2
        assert ens.average(rebit_three_tangle_pure) == 0.0


def test_measuring_all_factors_gives_four_products():
    ens = project_measure(catalog("tetra_phi"), [0, 1, 2])
    assert len(ens.outcomes) == 4
    assert [o.label for o in ens.outcomes] == ["A=0,B=0,C=0", "A=0,B=1,C=1", "A=1,B=0,C=1", "A=1,B=1,C=0"]
    for o in ens.outcomes:
        assert o.probability == pytest.approx(0.25)
        assert rebit_three_tangle_pure(o.state) == 0.0
        assert o.state.field == REAL


def test_measure_errors():
    with pytest.raises(StateError):
        project_measure(catalog("tetra_phi"), [])
    with pytest.raises(StateError):
        project_measure(catalog("tetra_phi"), [3])
    ens = project_measure(StateVector(np.eye(8)[0], REAL), [0])
    assert len(ens.outcomes) == 1
