"""Acceptance criteria, each checked at its stated tolerance.

Every check prints one ``PASS``/``FAIL`` line. Run with pytest, or directly
with ``python tests/test_acceptance.py`` for the summary alone.
"""
import math
import time
from functools import lru_cache

import numpy as np
import pytest

from kickedtops.angular import SubspaceSpec, cg_block
from kickedtops.classical import (
    ClassicalMapParams,
    ClassicalSpinPair,
    classify_grid,
    floquet_step,
    section_embed,
    section_grid,
    section_project,
)
from kickedtops.ensembles import (
    EnsembleSpec,
    mc_average,
    mc_average_full,
    typical_entanglement_full,
    typical_entanglement_oe,
    typical_entanglement_ue,
    typical_linear_entropy,
)
from kickedtops.entanglement import eigenstate_entanglement, entanglement_history, entanglement_map, long_time_average
from kickedtops.filtering import chaotic_subspace, classify_eigenstates, eigenstate_features
from kickedtops.floquet import build_floquet, evolve, floquet_system, time_reversal_residual
from kickedtops.states import PhaseSpaceGrid, delta_theta_from_fz, projected_coherent, section_expectation

BETA = np.pi / 2


def report(number, ok, detail, capsys=None):
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail}"
    if capsys is not None:
        with capsys.disabled():
            print("\n" + line)
    else:
        print(line)
    return ok


@lru_cache(maxsize=None)
def system(alpha):
    return floquet_system(150, alpha, BETA)


@lru_cache(maxsize=None)
def classical_labels(alpha, n=None):
    if n is None:
        fz, phi, w = section_grid(40, 40)
    else:
        grid = PhaseSpaceGrid.nodes(n, n)
        fz, phi, w = grid.delta_fz, grid.delta_phi, grid.weights
    return classify_grid(ClassicalMapParams(alpha, BETA), fz, phi, w)


@lru_cache(maxsize=None)
def ent_map(alpha):
    return entanglement_map(system(alpha), PhaseSpaceGrid.nodes(61, 61), (300, 320))


def check_1():
    t0 = time.perf_counter()
    mean_e = float(eigenstate_entanglement(system(6.0)).mean())
    elapsed = time.perf_counter() - t0
    oe = typical_entanglement_oe(301)
    ok = abs(mean_e - 4.97) <= 0.02 and abs(oe - 4.98) <= 0.005
    return ok, f"mean eigenstate E = {mean_e:.4f} (4.97 +- 0.02), OE(301) = {oe:.4f} (4.98 +- 0.005), {elapsed:.1f} s"


def check_2():
    sys6 = system(6.0)
    t0 = time.perf_counter()
    hist = entanglement_history(sys6, projected_coherent(sys6.spec, np.pi / 2, np.pi / 3), 320)
    avg = long_time_average(hist, (300, 320))
    elapsed = time.perf_counter() - t0
    ue = typical_entanglement_ue(301)
    ok = abs(avg - 5.28) <= 0.03
    return ok, f"long-time average = {avg:.4f} (5.28 +- 0.03; H_301 - 1 = {ue:.4f}), {elapsed:.2f} s"


def check_3():
    labels = classical_labels(1.5, 61)
    emap = ent_map(1.5)
    sea = emap.weighted_mean(labels.chaotic)
    sys3 = system(1.5)
    basis = chaotic_subspace(sys3, classify_eigenstates(eigenstate_features(sys3)))
    rep = mc_average(EnsembleSpec.from_subspace("UE", basis, seed=0), "entropy", 100)
    ok = abs(sea - 5.08) <= 0.10 and abs(rep.mc_mean - 5.13) <= 0.10
    return ok, (f"chaotic-sea average = {sea:.4f} (5.08 +- 0.10), chaotic-subspace UE MC = {rep.mc_mean:.4f} "
                f"(5.13 +- 0.10, dim {basis.shape[1]}, 100 samples)")


def check_4():
    worst, failures = 0.0, []
    for d in (2, 10, 301):
        n = 100_000 if d <= 10 else 10_000
        for kind in ("UE", "OE"):
            for functional in ("entropy", "linear_entropy"):
                rep = mc_average(EnsembleSpec(kind, d, seed=1000 + d), functional, n)
                z = abs(rep.z_score())
                worst = max(worst, z)
                if z >= 3:
                    failures.append(f"{kind}/{functional}/d={d}: z={z:.2f}")
    page = mc_average_full(2, 2, "UE", "entropy", 100_000, seed=7)
    zp = abs(page.mc_mean - 1 / 3) / page.mc_stderr
    ok = not failures and zp < 3 and abs(typical_entanglement_full(2, 2) - 1 / 3) < 1e-15
    detail = f"12 ensemble checks, worst |z| = {worst:.2f}; Page(2,2) MC = {page.mc_mean:.5f}, |z| = {zp:.2f}"
    return ok, detail + ("; " + ", ".join(failures) if failures else "")


def check_5():
    sys6 = system(6.0)
    unit = sys6.unitarity_residual()
    eig = float(sys6.eigen_residuals().max())
    C = cg_block(SubspaceSpec.equal(150)).matrix
    cg = float(max(np.abs(C @ C.T - np.eye(301)).max(), np.abs(C.T @ C - np.eye(301)).max()))
    tr = max(time_reversal_residual(system(a)) for a in (6.0, 1.5))
    rng = np.random.default_rng(0)
    v = rng.standard_normal((8, 2, 3))
    v /= np.linalg.norm(v, axis=-1, keepdims=True)
    start = ClassicalSpinPair(v[:, 0], v[:, 1])
    drift = 0.0
    for alpha in (0.5, 1.5, 6.0):
        s = start
        for _ in range(10_000):
            s = floquet_step(s, ClassicalMapParams(alpha, BETA))
        drift = max(drift, np.abs(np.linalg.norm(s.i_vec, axis=-1) - 1).max(),
                    np.abs(np.linalg.norm(s.j_vec, axis=-1) - 1).max(), np.abs(s.f_z - start.f_z).max())
    fixed = ClassicalSpinPair(np.array([0.0, 0.0, 1.0]), np.array([0.0, 0.0, -1.0]))
    img = floquet_step(fixed, ClassicalMapParams(1.5, BETA))
    exact = np.array_equal(img.i_vec, fixed.i_vec) and np.array_equal(img.j_vec, fixed.j_vec)
    ok = max(unit, eig, cg, tr) < 1e-10 and drift < 1e-10 and exact
    return ok, (f"unitarity {unit:.1e}, eigen residual {eig:.1e}, CG orthogonality {cg:.1e}, time reversal {tr:.1e}, "
                f"classical drift over 1e4 steps {drift:.1e}, fixed point exact: {exact}")


def check_6():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for alpha in (0.5, 1.5):
        U = build_floquet(SubspaceSpec.equal(150), alpha, BETA)
        p = ClassicalMapParams(alpha, BETA)
        for _ in range(10):
            dfz, dphi = rng.uniform(-1.6, 1.6), rng.uniform(0, 2 * np.pi)
            psi = projected_coherent(U.spec, float(delta_theta_from_fz(dfz)), dphi)
            qfz, qphi = section_expectation(evolve(U, psi, 1, method="direct"))
            cfz, cphi = section_project(floquet_step(section_embed(dfz, dphi), p))
            worst = max(worst, abs(qfz - cfz), abs(np.angle(np.exp(1j * (qphi - cphi)))))
    small = floquet_system(20, 1.5, BETA)
    psi = projected_coherent(small.spec, 0.9, 2.2)
    diff = float(np.abs(evolve(small, psi, 100, method="spectral").amplitudes
                        - evolve(small, psi, 100, method="direct").amplitudes).max())
    ok = worst < 0.05 and diff < 1e-8
    return ok, f"Ehrenfest worst one-step deviation {worst:.4f} (< 0.05), spectral vs direct {diff:.1e} (< 1e-8)"


def check_7():
    fr = {a: classical_labels(a).chaotic_fraction for a in (0.5, 1.5, 6.0)}
    labels = classical_labels(1.5, 61)
    m3 = ent_map(1.5)
    gap = m3.weighted_mean(labels.chaotic) - m3.weighted_mean(~labels.chaotic)
    std6 = float(ent_map(6.0).values.std())
    ok = fr[0.5] <= 0.05 and 0.2 <= fr[1.5] <= 0.8 and fr[6.0] >= 0.95 and gap > 0.5 and std6 < 0.05
    return ok, (f"chaotic fractions {fr[0.5]:.3f} / {fr[1.5]:.3f} / {fr[6.0]:.3f} "
                f"(<= 0.05 / 0.2-0.8 / >= 0.95), alpha=3/2 map gap {gap:.3f} (> 0.5), "
                f"alpha=6 map std {std6:.4f} (< 0.05)")


def check_8():
    d = 10_000
    oe = abs(typical_entanglement_oe(d) - (math.log(d) - 2 + math.log(2) + np.euler_gamma))
    ue = abs(typical_entanglement_ue(d) - (math.log(d) - 1 + np.euler_gamma))
    lin = abs(typical_linear_entropy("UE", d) - 1) + abs(typical_linear_entropy("OE", d) - 1)
    ok = oe < 1e-3 and ue < 1e-3
    return ok, f"|OE - asymptote| = {oe:.2e}, |UE - asymptote| = {ue:.2e} at d = 1e4 (< 1e-3); linear entropies within {lin:.1e} of 1"


CHECKS = {1: check_1, 2: check_2, 3: check_3, 4: check_4, 5: check_5, 6: check_6, 7: check_7, 8: check_8}


@pytest.mark.parametrize("number", sorted(CHECKS))
def test_criterion(number, capsys):
    ok, detail = CHECKS[number]()
    assert report(number, ok, detail, capsys), detail


if __name__ == "__main__":
    results = [report(n, *CHECKS[n]()) for n in sorted(CHECKS)]
    print(f"{sum(results)}/{len(results)} criteria passed")
