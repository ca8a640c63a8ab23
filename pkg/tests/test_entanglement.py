"""Entanglement entropies, histories and phase-space maps."""
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kickedtops.angular import SubspaceSpec
from kickedtops.entanglement import (
    EntanglementMap,
    bipartite_schmidt_coefficients,
    eigenstate_entanglement,
    embed_bipartite,
    entanglement_entropy,
    entanglement_history,
    entanglement_map,
    linear_entropy,
    long_time_average,
)
from kickedtops.floquet import evolve, floquet_system
from kickedtops.states import PhaseSpaceGrid, SubspaceState, delta_theta_from_fz, projected_coherent

BETA = np.pi / 2


def random_state(spec, seed):
    rng = np.random.default_rng(seed)
    d = spec.dimension
    return SubspaceState.normalized(spec, rng.standard_normal(d) + 1j * rng.standard_normal(d))


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.integers(1, 40))
def test_entropy_bounds_and_phase_invariance(seed, J):
    spec = SubspaceSpec.equal(J)
    s = random_state(spec, seed)
    e = entanglement_entropy(s)
    assert -1e-12 <= e <= np.log(spec.dimension) + 1e-12
    phases = np.exp(1j * np.random.default_rng(seed + 1).uniform(0, 2 * np.pi, spec.dimension))
    assert abs(entanglement_entropy(SubspaceState(spec, s.amplitudes * phases)) - e) < 1e-13


def test_entropy_extremes():
    spec = SubspaceSpec.equal(150)
    assert entanglement_entropy(SubspaceState.basis(spec, 4)) == 0
    uniform = SubspaceState.normalized(spec, np.ones(301))
    assert entanglement_entropy(uniform) == pytest.approx(np.log(301), abs=1e-12)
    assert linear_entropy(uniform) == pytest.approx(1 - 1 / 301, abs=1e-12)


@pytest.mark.parametrize("I,J,M", [(5, 5, 0), (5, 5, 2), (4.5, 3, 0.5)])
def test_fixed_basis_entropy_matches_svd_oracle(I, J, M):
    spec = SubspaceSpec.from_spins(I, J, M)
    for seed in range(10):
        s = random_state(spec, seed)
        lam = bipartite_schmidt_coefficients(embed_bipartite(s))
        ref = -np.sum(lam[lam > 1e-300] * np.log(lam[lam > 1e-300]))
        assert abs(entanglement_entropy(s) - ref) < 1e-10


def test_partial_trace_oracle():
    spec = SubspaceSpec.equal(5)
    s = random_state(spec, 3)
    psi = embed_bipartite(s)
    rho_i = psi @ psi.conj().T
    w = np.linalg.eigvalsh(rho_i)
    w = w[w > 1e-15]
    assert abs(-np.sum(w * np.log(w)) - entanglement_entropy(s)) < 1e-10
    assert abs((1 - np.trace(rho_i @ rho_i).real) - linear_entropy(s)) < 1e-12


def test_history_spectral_matches_direct():
    sys_ = floquet_system(20, 1.5, BETA)
    psi = projected_coherent(sys_.spec, 0.4, 1.0)
    hist = entanglement_history(sys_, psi, 100)
    direct = []
    state = psi
    for n in range(101):
        direct.append(entanglement_entropy(state))
        state = evolve(sys_, state, 1, method="direct")
    assert np.abs(hist.series - np.array(direct)).max() < 1e-8


def test_history_basics(mixed_system):
    psi = projected_coherent(mixed_system.spec, np.pi / 2, np.pi / 3)
    h0 = entanglement_history(mixed_system, psi, 0)
    assert h0.series.shape == (1,)
    assert 0 < h0.series[0] == pytest.approx(entanglement_entropy(psi))
    a = entanglement_history(mixed_system, psi, 320).series
    b = entanglement_history(mixed_system, psi, 320).series
    assert np.array_equal(a, b)
    with pytest.raises(ValueError):
        entanglement_history(replace(mixed_system, eigenphases=None, eigenvectors=None), psi, 3)


def test_long_time_average_window():
    assert long_time_average(np.full(400, 2.5)) == 2.5
    series = np.arange(400.0)
    assert long_time_average(series, (300, 320)) == pytest.approx(310)
    assert long_time_average(series, (5, 5)) == 5
    with pytest.raises(ValueError):
        long_time_average(series, (10, 5))
    with pytest.raises(ValueError):
        long_time_average(series[:310], (300, 320))


def test_chaotic_and_regular_histories(mixed_system):
    def history(dfz, dphi):
        psi = projected_coherent(mixed_system.spec, float(delta_theta_from_fz(dfz)), dphi)
        return entanglement_history(mixed_system, psi, 320).series

    sea, island = history(-1.9, 1.0), history(1.9, 1.0)
    # sea: fast rise, saturation with small fluctuations; island: lower with larger oscillations
    assert np.argmax(sea > 0.9 * sea[300:].mean()) < 10
    assert long_time_average(sea) - long_time_average(island) > 0.5
    assert sea[300:].std() < island[300:].std()


def test_eigenstate_entanglement_shape(chaotic_system):
    e = eigenstate_entanglement(chaotic_system)
    assert e.shape == (301,)
    assert np.all((e >= 0) & (e <= np.log(301)))


def test_map_on_small_grid_matches_histories():
    sys_ = floquet_system(10, 1.5, BETA)
    grid = PhaseSpaceGrid.nodes(5, 4)
    emap = entanglement_map(sys_, grid, (30, 40), chunk=7)
    for k in (0, 7, 19):
        psi = projected_coherent(sys_.spec, float(grid.delta_theta[k]), float(grid.delta_phi[k]))
        ref = long_time_average(entanglement_history(sys_, psi, 40), (30, 40))
        assert abs(emap.values[k] - ref) < 1e-12
    assert emap.as_image().shape == (5, 4)


def test_weighted_mean():
    grid = PhaseSpaceGrid.nodes(3, 2)
    emap = EntanglementMap(grid, np.arange(6.0), (0, 0))
    w = grid.weights
    assert emap.weighted_mean() == pytest.approx(np.sum(w * np.arange(6)) / w.sum())
    mask = np.array([1, 1, 0, 0, 0, 0], bool)
    assert emap.weighted_mean(mask) == pytest.approx(0.5)


def test_mixed_map_minimum_at_stable_fixed_point(mixed_system):
    emap = entanglement_map(mixed_system)
    k = int(np.argmin(emap.values))
    # delta_fz = +2 is the fixed point I = +z, J = -z
    assert emap.grid.delta_fz[k] == 2.0
    assert emap.values[k] < 2.0
