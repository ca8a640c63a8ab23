"""Floquet operator of the kicked coupled tops within one fixed-F_z block.

In the uncoupled basis (ascending ``m_J``)

    U[m', m] = sum_F exp(-i (alpha F(F+1) / (2 J) + beta m)) <F|m'> <F|m>,

i.e. ``U = exp(-i alpha F^2 / 2J) exp(-i beta J_z)`` with the coupling scaled
by the spin size so that ``alpha`` is the classical precession rate.
"""
from __future__ import annotations

import os
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
import scipy.linalg as sla
from scipy import stats

from .angular import CACHE_ENV_VAR, SubspaceSpec, cg_block, op_f_squared

__all__ = [
    "FloquetSystem",
    "EigensolverError",
    "build_floquet",
    "diagonalize",
    "floquet_system",
    "time_reversal_residual",
    "evolve",
    "evolve_many",
    "spacing_diagnostic",
    "wigner_surmise_cdf",
]

TWO_PI = 2 * np.pi
_DEGENERACY_TOL = 1e-8
_TIE_TOL = 1e-12
_RESIDUAL_LIMIT = 1e-10


class EigensolverError(RuntimeError):
    """Raised when a Floquet diagonalization fails its residual checks."""


@dataclass(frozen=True)
class FloquetSystem:
    spec: SubspaceSpec
    alpha: float
    beta: float
    matrix: np.ndarray
    eigenphases: np.ndarray | None = None
    eigenvectors: np.ndarray | None = None

    @property
    def dimension(self) -> int:
        return self.spec.dimension

    @property
    def has_eigensystem(self) -> bool:
        return self.eigenvectors is not None

    def unitarity_residual(self) -> float:
        U = self.matrix
        return float(np.abs(U.conj().T @ U - np.eye(len(U))).max())

    def eigen_residuals(self) -> np.ndarray:
        """``||U v_k - exp(-i phi_k) v_k||_2`` for each eigenpair."""
        V = self.eigenvectors
        return np.linalg.norm(self.matrix @ V - V * np.exp(-1j * self.eigenphases), axis=0)


def _coupling_scale(spec: SubspaceSpec) -> float:
    # alpha is the classical rate for unit spins; the quantum coupling is alpha/J
    return spec.spin_j if spec.spin_j > 0 else 1.0


def build_floquet(spec: SubspaceSpec, alpha: float, beta: float) -> FloquetSystem:
    """Dense Floquet matrix of the block (no eigensystem yet)."""
    block = cg_block(spec)
    C = block.matrix
    coupling = np.exp(-1j * alpha * op_f_squared(spec) / (2 * _coupling_scale(spec)))
    kick = np.exp(-1j * beta * spec.m_j)
    U = (C.T * coupling) @ C * kick[None, :]
    U.setflags(write=False)
    return FloquetSystem(spec, float(alpha), float(beta), U)


def _fix_phase(V):
    # first component above 1e-8 of the column maximum made real positive
    mags = np.abs(V)
    first = np.argmax(mags > 1e-8 * mags.max(axis=0, keepdims=True), axis=0)
    lead = V[first, np.arange(V.shape[1])]
    return V * (np.abs(lead) / lead)[None, :]


def _orthonormalize_clusters(phases, V):
    # phases are sorted; gaps are measured on the circle
    d = len(phases)
    if d < 2:
        return V
    gaps = np.diff(phases)
    starts = np.flatnonzero(np.concatenate([[True], gaps > _DEGENERACY_TOL]))
    bounds = list(starts) + [d]
    V = V.copy()
    for a, b in zip(bounds[:-1], bounds[1:]):
        if b - a > 1:
            q, _ = np.linalg.qr(V[:, a:b])
            V[:, a:b] = q
    return V


def diagonalize(system: FloquetSystem) -> FloquetSystem:
    """Full eigendecomposition ``U v_k = exp(-i phi_k) v_k``.

    Uses the complex Schur form, which is diagonal for a normal matrix and
    yields an orthonormal eigenbasis directly. Phases are mapped to
    ``[0, 2 pi)`` and sorted; exact ties are ordered by the first significant
    eigenvector component. Each eigenvector has its first significant
    component real and positive.

    Raises
    ------
    EigensolverError
        If the eigen-residuals or eigenbasis unitarity exceed 1e-10.
    """
    U = np.asarray(system.matrix)
    T, Z = sla.schur(U, output="complex")
    lam = np.diag(T)
    phases = np.mod(-np.angle(lam), TWO_PI)
    phases[phases >= TWO_PI] = 0.0
    Z = _fix_phase(Z)
    first_sig = np.argmax(np.abs(Z) > 1e-8 * np.abs(Z).max(axis=0, keepdims=True), axis=0)
    tie_key = np.round(phases / _TIE_TOL) * _TIE_TOL
    order = np.lexsort((first_sig, tie_key))
    phases, Z = phases[order], Z[:, order]
    Z = _orthonormalize_clusters(phases, Z)
    out = replace(system, eigenphases=phases, eigenvectors=Z)
    res = out.eigen_residuals()
    ortho = float(np.abs(Z.conj().T @ Z - np.eye(len(Z))).max())
    if res.max() > _RESIDUAL_LIMIT or ortho > _RESIDUAL_LIMIT:
        raise EigensolverError(
            f"diagonalization failed: max residual {res.max():.3e}, "
            f"eigenbasis unitarity error {ortho:.3e}"
        )
    return out


_EIGEN_CACHE_VERSION = 1


def _eigen_cache_path(system: FloquetSystem, cache_dir) -> Path:
    ti, tj, tm = system.spec.key()
    tag = f"{system.alpha.hex()}_{system.beta.hex()}".replace(".", "").replace("+", "").replace("-", "m")
    return Path(cache_dir) / f"eig_v{_EIGEN_CACHE_VERSION}_{ti}_{tj}_{tm}_{tag}.npz"


def floquet_system(J, alpha, beta, m_f=0) -> FloquetSystem:
    """Build and diagonalize the Floquet block for equal spins ``J``.

    With ``KICKEDTOPS_CACHE`` set, the eigensystem is stored in (and reloaded
    from) that directory, keyed by the block and the exact ``alpha, beta``.
    A reloaded eigensystem still has to pass the residual checks.
    """
    system = build_floquet(SubspaceSpec.equal(J, m_f), alpha, beta)
    cache_dir = os.environ.get(CACHE_ENV_VAR)
    if not cache_dir:
        return diagonalize(system)
    path = _eigen_cache_path(system, cache_dir)
    if path.exists():
        with np.load(path) as data:
            if int(data["version"]) == _EIGEN_CACHE_VERSION and np.array_equal(data["matrix"], system.matrix):
                out = replace(system, eigenphases=data["phases"], eigenvectors=data["vectors"])
                if out.eigen_residuals().max() <= _RESIDUAL_LIMIT:
                    return out
    out = diagonalize(system)
    Path(cache_dir).mkdir(parents=True, exist_ok=True)
    np.savez(path, version=_EIGEN_CACHE_VERSION, matrix=system.matrix,
             phases=out.eigenphases, vectors=out.eigenvectors)
    return out


def time_reversal_residual(system: FloquetSystem, matrix=None) -> float:
    """Max-norm of ``exp(i beta J_z) conj(U) exp(-i beta J_z) - U^dagger``.

    ``matrix`` overrides the system's own Floquet matrix (for sensitivity checks).
    """
    U = np.asarray(system.matrix if matrix is None else matrix)
    D = np.exp(1j * system.beta * system.spec.m_j)
    lhs = D[:, None] * U.conj() * D.conj()[None, :]
    return float(np.abs(lhs - U.conj().T).max())


def _amplitudes(state):
    return getattr(state, "amplitudes", state)


def evolve(system: FloquetSystem, state, n: int, method: str = "auto"):
    """Apply ``U**n`` to a state (``n`` may be negative).

    ``method="spectral"`` expands in the Floquet eigenbasis, ``"direct"``
    multiplies by the matrix (or its adjoint) ``|n|`` times. ``"auto"`` picks
    the spectral route whenever an eigensystem is available.
    """
    from .states import SubspaceState

    amps = np.asarray(_amplitudes(state), dtype=complex)
    if method == "auto":
        method = "spectral" if system.has_eigensystem else "direct"
    if method == "spectral":
        if not system.has_eigensystem:
            raise ValueError("spectral evolution needs a diagonalized system")
        V = system.eigenvectors
        a = V.conj().T @ amps
        out = V @ (a * np.exp(-1j * n * system.eigenphases))
    elif method == "direct":
        M = system.matrix if n >= 0 else system.matrix.conj().T
        out = amps
        for _ in range(abs(n)):
            out = M @ out
    else:
        raise ValueError(f"unknown method {method!r}")
    if isinstance(state, SubspaceState):
        return SubspaceState(state.spec, out)
    return out


def evolve_many(system: FloquetSystem, amplitudes, steps) -> np.ndarray:
    """Spectral evolution of one state to many times.

    Returns an array of shape ``(len(steps), d)``.
    """
    V = system.eigenvectors
    a = V.conj().T @ np.asarray(_amplitudes(amplitudes), dtype=complex)
    steps = np.asarray(steps)
    phases = np.exp(-1j * np.outer(steps, system.eigenphases))
    return (phases * a[None, :]) @ V.T


def wigner_surmise_cdf(s):
    """CDF of the orthogonal-class Wigner surmise ``(pi/2) s exp(-pi s^2/4)``."""
    s = np.asarray(s, dtype=float)
    return np.where(s > 0, 1 - np.exp(-np.pi * s * s / 4), 0.0)


def spacing_diagnostic(system: FloquetSystem, bins: int = 30) -> dict:
    """Nearest-neighbour eigenphase spacings compared with the Wigner surmise.

    Spacings between consecutive sorted phases are scaled to unit mean.

    Returns
    -------
    dict with ``spacings``, ``hist`` and ``edges`` (density histogram on
    ``[0, 4]``) and ``ks`` (Kolmogorov-Smirnov distance; NaN with fewer than
    two spacings).
    """
    phases = np.sort(system.eigenphases)
    s = np.diff(phases)
    if s.size and s.mean() > 0:
        s = s / s.mean()
    hist, edges = np.histogram(s, bins=bins, range=(0, 4), density=s.size > 1)
    ks = float(stats.kstest(s, wigner_surmise_cdf).statistic) if s.size >= 2 else float("nan")
    return {"spacings": s, "hist": hist, "edges": edges, "ks": ks}
