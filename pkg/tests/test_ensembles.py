"""Random-state ensembles: closed forms against quadrature, mpmath and Monte Carlo."""
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate
from scipy.special import entr
from scipy.stats import unitary_group, ortho_group

from kickedtops.ensembles import (
    EnsembleReport,
    EnsembleSpec,
    harmonic,
    mc_average,
    mc_average_full,
    pool_reports,
    sample_state,
    sample_states,
    typical_entanglement_full,
    typical_entanglement_oe,
    typical_entanglement_ue,
    typical_linear_entropy,
)
from kickedtops.angular import SubspaceSpec


def test_harmonic_examples():
    assert harmonic(0) == 0
    assert harmonic(1) == 1
    assert harmonic(4) == pytest.approx(25 / 12, abs=1e-15)
    with pytest.raises(ValueError):
        harmonic(-0.5)


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 500))
def test_harmonic_against_mpmath(x):
    assert abs(harmonic(x) - float(mpmath.harmonic(x))) < 1e-12 * max(1, x)


def test_harmonic_half_integer_series_oracle():
    # integral definition H_x = int_0^1 (1 - t^x) / (1 - t) dt at 30 digits
    with mpmath.workdps(30):
        x = mpmath.mpf(301) / 2
        ref = mpmath.quad(lambda t: (1 - t ** x) / (1 - t), [0, 0.5, 0.9, 0.99, 1])
    assert abs(harmonic(150.5) - float(ref)) < 1e-10


def test_closed_form_examples():
    assert typical_entanglement_ue(1) == 0
    assert typical_entanglement_ue(2) == pytest.approx(0.5)
    assert typical_entanglement_oe(1) == pytest.approx(0, abs=1e-15)
    assert typical_entanglement_oe(301) == pytest.approx(4.98, abs=0.005)
    assert typical_entanglement_ue(301) == pytest.approx(5.286, abs=5e-4)
    assert typical_linear_entropy("UE", 2) == pytest.approx(1 / 3)
    assert typical_linear_entropy("OE", 1) == 0
    assert typical_entanglement_full(2, 2) == pytest.approx(1 / 3, abs=1e-15)
    assert typical_entanglement_full(1, 7) == pytest.approx(0, abs=1e-15)


def test_page_formula_large_equal_dimensions():
    d = 2000
    assert abs(typical_entanglement_full(d, d) - (math.log(d) - 0.5)) < 1e-3


def test_page_formula_digamma_branch_is_continuous():
    d1, d2 = 300, 334
    tail = math.fsum(1.0 / k for k in range(d2 + 1, d1 * d2 + 1))
    assert abs(typical_entanglement_full(d1, d2) - (tail - (d1 - 1) / (2 * d2))) < 1e-10


def test_ue_two_level_quadrature():
    # p = |c_1|^2 is uniform on [0, 1] for Haar-random qubit states
    val, _ = integrate.quad(lambda p: entr(p) + entr(1 - p), 0, 1)
    assert val == pytest.approx(typical_entanglement_ue(2), abs=1e-10)


def test_oe_two_level_quadrature():
    # real unit vectors (cos t, sin t) with t uniform on the circle
    val, _ = integrate.quad(lambda t: entr(np.cos(t) ** 2) + entr(np.sin(t) ** 2), 0, 2 * np.pi)
    assert val / (2 * np.pi) == pytest.approx(typical_entanglement_oe(2), abs=1e-10)


def test_ue_three_level_quadrature():
    # (p1, p2, p3) is uniform on the simplex, density 2
    f = lambda p2, p1: 2 * (entr(p1) + entr(p2) + entr(1 - p1 - p2))
    val, _ = integrate.dblquad(f, 0, 1, 0, lambda p1: 1 - p1)
    assert val == pytest.approx(typical_entanglement_ue(3), abs=1e-8)


def test_oe_three_level_quadrature():
    # real unit vector on the 2-sphere in polar angles, measure sin(a) da db / (4 pi)
    def f(b, a):
        x = np.array([np.sin(a) * np.cos(b), np.sin(a) * np.sin(b), np.cos(a)])
        return entr(x * x).sum() * np.sin(a)

    val, _ = integrate.dblquad(f, 0, np.pi, 0, 2 * np.pi, epsabs=1e-11)
    assert val / (4 * np.pi) == pytest.approx(typical_entanglement_oe(3), abs=1e-8)


@pytest.mark.parametrize("kind", ["UE", "OE"])
@pytest.mark.parametrize("functional", ["entropy", "linear_entropy"])
def test_mc_agrees_at_d10(kind, functional):
    rep = mc_average(EnsembleSpec(kind, 10, seed=11), functional, 20_000)
    assert abs(rep.z_score()) < 3


def test_mc_full_space_page():
    rep = mc_average_full(2, 3, "UE", "entropy", 20_000, seed=5)
    assert abs(rep.z_score()) < 3
    assert mc_average_full(3, 3, "OE", "entropy", 100, seed=5).analytic is None


def test_haar_invariance():
    d, n = 12, 20_000
    for kind, group in (("UE", unitary_group), ("OE", ortho_group)):
        spec = EnsembleSpec(kind, d, seed=3)
        a = sample_states(spec, n)
        Urot = group.rvs(d, random_state=7)
        e_a = entr(np.abs(a) ** 2).sum(1)
        e_b = entr(np.abs(a @ Urot.T) ** 2).sum(1)
        se = math.hypot(e_a.std() / math.sqrt(n), e_b.std() / math.sqrt(n))
        assert abs(e_a.mean() - e_b.mean()) < 3 * se


def test_variance_decreases_with_dimension():
    stds = [mc_average(EnsembleSpec("UE", d, seed=1), "entropy", 10_000).mc_std for d in (4, 16, 64, 301)]
    assert all(a > b for a, b in zip(stds, stds[1:]))


def test_seed_reproducibility():
    a = sample_states(EnsembleSpec("UE", 9, seed=42), 50)
    b = sample_states(EnsembleSpec("UE", 9, seed=42), 50)
    c = sample_states(EnsembleSpec("UE", 9, seed=43), 50)
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    r1 = mc_average(EnsembleSpec("OE", 9, seed=42), "entropy", 5000)
    r2 = mc_average(EnsembleSpec("OE", 9, seed=42), "entropy", 5000)
    assert r1.mc_mean == r2.mc_mean


def test_samples_are_normalized_and_real_for_oe():
    s = sample_states(EnsembleSpec("OE", 7, seed=0), 100)
    assert np.isrealobj(s) and np.allclose(np.linalg.norm(s, axis=1), 1)
    u = sample_states(EnsembleSpec("UE", 7, seed=0), 100)
    assert np.iscomplexobj(u) and np.allclose(np.linalg.norm(u, axis=1), 1)


def test_subspace_sampling_stays_in_span():
    rng = np.random.default_rng(0)
    Q, _ = np.linalg.qr(rng.standard_normal((20, 6)) + 1j * rng.standard_normal((20, 6)))
    spec = EnsembleSpec.from_subspace("UE", Q, seed=2, label="sub")
    assert spec.dimension == 6 and spec.state_dimension == 20
    x = sample_states(spec, 30)
    assert np.allclose(x @ Q.conj() @ Q.T, x)
    rep = mc_average(spec, "entropy", 100)
    assert rep.analytic is None and rep.subspace_id == "sub"
    assert "subspace_id" in rep.to_json_dict()
    with pytest.raises(ValueError):
        EnsembleSpec.from_subspace("UE", 2 * Q)
    st_ = sample_state(EnsembleSpec("UE", 21, seed=0), block_spec=SubspaceSpec.equal(10))
    assert st_.spec.dimension == 21


def test_pool_reports_matches_concatenation():
    rng = np.random.default_rng(0)
    chunks = [rng.normal(size=n) for n in (100, 250, 37)]
    reps = [EnsembleReport("UE", 5, "entropy", None, c.mean(), c.std(ddof=1) / math.sqrt(len(c)), len(c), i,
                           None, c.std(ddof=1)) for i, c in enumerate(chunks)]
    pooled = pool_reports(reps)
    allv = np.concatenate(chunks)
    assert pooled.n_samples == len(allv)
    assert pooled.mc_mean == pytest.approx(allv.mean())
    assert pooled.mc_std == pytest.approx(allv.std(ddof=1))


def test_report_json_fields():
    rep = mc_average(EnsembleSpec("UE", 4, seed=0), "entropy", 10)
    keys = set(rep.to_json_dict())
    assert {"kind", "d", "analytic", "mc_mean", "mc_stderr", "n_samples", "seed"} <= keys


def test_errors():
    for bad in (lambda: typical_entanglement_ue(0), lambda: typical_entanglement_oe(0),
                lambda: typical_linear_entropy("GUE", 3), lambda: typical_entanglement_full(3, 2),
                lambda: EnsembleSpec("XE", 3), lambda: EnsembleSpec("UE", 0),
                lambda: mc_average(EnsembleSpec("UE", 3), "entropy", 1),
                lambda: mc_average(EnsembleSpec("UE", 3), "renyi", 10)):
        with pytest.raises(ValueError):
            bad()
