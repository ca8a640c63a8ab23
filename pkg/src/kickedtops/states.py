"""Spin coherent states, projected coherent states and Husimi distributions.

Projected coherent states live in the ``M_F = 0`` block of two equal spins J.
They are the product of two spin coherent states with ``theta_I + theta_J = pi``,
projected onto ``M_F = 0`` and renormalized, and depend only on the difference
angles ``delta_theta = theta_I - theta_J`` and ``delta_phi = phi_I - phi_J``.
In the uncoupled basis (ascending ``m_J``) the amplitudes are

    c_m  ~  r**m * (2J)! / ((J - m)! (J + m)!),
    r = exp(i delta_phi) * (1 + sin(delta_theta / 2)) / (1 - sin(delta_theta / 2)).

On the classical section ``delta_fz = I_z - J_z = -2 sin(delta_theta / 2)``, so
``delta_theta = pi`` puts spin J at the north pole (``m_J = J``).

Everything is evaluated in log space; amplitudes spanning hundreds of decades
are fine for J up to several hundred.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

from .angular import SubspaceSpec

__all__ = [
    "SubspaceState",
    "PhaseSpaceGrid",
    "spin_coherent",
    "projected_coherent",
    "projected_coherent_amplitudes",
    "delta_theta_from_fz",
    "fz_from_delta_theta",
    "husimi",
    "husimi_entropy",
    "jz_expectation",
    "raising_correlator",
    "section_expectation",
]

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class SubspaceState:
    """Pure state of a fixed-F_z block, amplitudes over ascending ``m_J``."""

    spec: SubspaceSpec
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.spec.dimension,):
            raise ValueError(f"expected {self.spec.dimension} amplitudes, got shape {amps.shape}")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def normalized(cls, spec, amplitudes):
        amps = np.asarray(amplitudes, dtype=complex)
        return cls(spec, amps / np.linalg.norm(amps))

    @classmethod
    def basis(cls, spec, m_j):
        """Uncoupled basis state with the given ``m_J``."""
        idx = np.flatnonzero(np.isclose(spec.m_j, m_j))
        if idx.size != 1:
            raise ValueError(f"m_J={m_j} not in block")
        amps = np.zeros(spec.dimension, dtype=complex)
        amps[idx[0]] = 1.0
        return cls(spec, amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


def _log_binom(n, k):
    return gammaln(n + 1) - gammaln(k + 1) - gammaln(n - k + 1)


def spin_coherent(J, theta, phi) -> np.ndarray:
    """Spin-J coherent state pointing along ``(theta, phi)``.

    Returns amplitudes over ``m = -J ... J`` (ascending), normalized.
    """
    if not (0 <= theta <= np.pi):
        raise ValueError("theta must lie in [0, pi]")
    m = np.arange(-J, J + 1)
    out = np.zeros(len(m), dtype=complex)
    t = np.tan(theta / 2) if theta < np.pi else np.inf
    if t == 0:
        out[-1] = 1.0
        return out
    if not np.isfinite(t) or t > 1e300:
        out[0] = 1.0
        return out
    logamp = (J - m) * np.log(t) + 0.5 * _log_binom(2 * J, J - m)
    logamp -= logamp.max()
    out = np.exp(logamp) * np.exp(1j * (J - m) * phi)
    return out / np.linalg.norm(out)


def delta_theta_from_fz(delta_fz):
    """Section coordinate ``delta_fz`` -> ``delta_theta`` (inverse of :func:`fz_from_delta_theta`)."""
    return -2 * np.arcsin(np.clip(np.asarray(delta_fz, dtype=float) / 2, -1, 1))


def fz_from_delta_theta(delta_theta):
    return -2 * np.sin(np.asarray(delta_theta, dtype=float) / 2)


def projected_coherent_amplitudes(J, delta_theta, delta_phi) -> np.ndarray:
    """Normalized projected-coherent amplitudes for arrays of difference angles.

    Returns an array of shape ``broadcast(delta_theta, delta_phi).shape + (2J+1,)``.
    ``delta_theta = +-pi`` give the limiting basis states ``m_J = +-J``.
    """
    dth, dph = np.broadcast_arrays(np.asarray(delta_theta, dtype=float),
                                   np.asarray(delta_phi, dtype=float))
    m = np.arange(-J, J + 1)
    s = np.sin(dth / 2)[..., None]
    with np.errstate(divide="ignore"):
        log_r = np.log1p(s) - np.log1p(-s)
    log_comb = gammaln(2 * J + 1) - gammaln(J - m + 1) - gammaln(J + m + 1)
    top = s >= 1 - 1e-15
    bottom = s <= -1 + 1e-15
    safe_log_r = np.where(top | bottom, 0.0, log_r)
    logamp = m * safe_log_r + log_comb
    logamp = logamp - logamp.max(axis=-1, keepdims=True)
    amps = np.exp(logamp) * np.exp(1j * m * dph[..., None])
    amps = np.where(top, (m == J).astype(float), amps)
    amps = np.where(bottom, (m == -J).astype(float), amps)
    return amps / np.linalg.norm(amps, axis=-1, keepdims=True)


def _require_equal_zero(spec: SubspaceSpec):
    if not spec.is_equal_spin or spec.twice_mf != 0:
        raise ValueError("projected coherent states need spin_i == spin_j and m_f == 0")


def projected_coherent(spec: SubspaceSpec, delta_theta, delta_phi) -> SubspaceState:
    """Projected coherent state ``|delta_theta, delta_phi>`` in the ``M_F = 0`` block."""
    _require_equal_zero(spec)
    if not (-np.pi <= delta_theta <= np.pi):
        raise ValueError("delta_theta must lie in [-pi, pi]")
    return SubspaceState(spec, projected_coherent_amplitudes(spec.spin_j, delta_theta, delta_phi))


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Points of the difference-angle phase space with quadrature weights.

    Coordinates are stored as flat arrays. ``delta_fz`` and ``delta_phi`` are
    canonical, so weights are areas in that plane and sum to ``8 pi``.
    """

    delta_fz: np.ndarray
    delta_phi: np.ndarray
    weights: np.ndarray
    shape: tuple

    @property
    def delta_theta(self) -> np.ndarray:
        return delta_theta_from_fz(self.delta_fz)

    @property
    def size(self) -> int:
        return self.delta_fz.size

    @property
    def total_measure(self) -> float:
        return float(self.weights.sum())

    @classmethod
    def cells(cls, n_fz: int = 100, n_phi: int = 100) -> "PhaseSpaceGrid":
        """Cell-centred grid, equal weights (used for Husimi entropies)."""
        fz = -2 + (np.arange(n_fz) + 0.5) * 4 / n_fz
        phi = (np.arange(n_phi) + 0.5) * TWO_PI / n_phi
        F, P = np.meshgrid(fz, phi, indexing="ij")
        w = np.full(F.size, (4 / n_fz) * (TWO_PI / n_phi))
        return cls(F.ravel(), P.ravel(), w, (n_fz, n_phi))

    @classmethod
    def nodes(cls, n_fz: int = 61, n_phi: int = 61) -> "PhaseSpaceGrid":
        """Node grid including the poles ``delta_fz = +-2`` (trapezoid weights in ``delta_fz``)."""
        fz = np.linspace(-2, 2, n_fz)
        phi = np.arange(n_phi) * TWO_PI / n_phi
        wf = np.full(n_fz, 4 / (n_fz - 1))
        wf[[0, -1]] /= 2
        F, P = np.meshgrid(fz, phi, indexing="ij")
        W = np.outer(wf, np.full(n_phi, TWO_PI / n_phi))
        return cls(F.ravel(), P.ravel(), W.ravel(), (n_fz, n_phi))

    def coherent_matrix(self, J) -> np.ndarray:
        """Projected coherent states at all points, shape ``(size, 2J+1)``."""
        return projected_coherent_amplitudes(J, self.delta_theta, self.delta_phi)


def husimi(state, grid: PhaseSpaceGrid, coherent=None) -> np.ndarray:
    """Husimi distribution ``Q = |<delta_theta, delta_phi|psi>|^2`` on ``grid``.

    ``state`` may be a :class:`SubspaceState`, an amplitude vector, or a
    ``(d, k)`` array of column states (returns shape ``(grid.size, k)``).
    ``coherent`` lets callers reuse :meth:`PhaseSpaceGrid.coherent_matrix`.
    """
    if isinstance(state, SubspaceState):
        _require_equal_zero(state.spec)
        amps = state.amplitudes
    else:
        amps = np.asarray(state)
    d = amps.shape[0]
    if coherent is None:
        coherent = grid.coherent_matrix((d - 1) / 2)
    return np.abs(coherent.conj() @ amps) ** 2


def husimi_entropy(Q, grid: PhaseSpaceGrid) -> np.ndarray | float:
    """Coarse-grained Shannon entropy of a Husimi distribution.

    ``q = Q / sum(w Q)`` and ``S_Q = -sum(w q ln q)``; a uniform ``q`` over
    total measure ``V`` gives ``ln V``. Columns of a 2-d ``Q`` are handled
    independently.
    """
    Q = np.asarray(Q, dtype=float)
    w = grid.weights.reshape((-1,) + (1,) * (Q.ndim - 1))
    if np.any(Q < 0):
        raise ValueError("Husimi values must be non-negative")
    mass = np.sum(w * Q, axis=0)
    if np.any(mass <= 0):
        raise ValueError("Husimi distribution is identically zero")
    q = Q / mass
    with np.errstate(divide="ignore", invalid="ignore"):
        terms = np.where(q > 0, q * np.log(q), 0.0)
    s = -np.sum(w * terms, axis=0)
    return float(s) if np.ndim(s) == 0 else s


def jz_expectation(state) -> float:
    """``<J_z> = sum m |c_m|^2``."""
    if isinstance(state, SubspaceState):
        return float(np.sum(state.spec.m_j * np.abs(state.amplitudes) ** 2))
    amps = np.asarray(state)
    d = amps.shape[0]
    m = np.arange(d) - (d - 1) / 2
    return np.einsum("m,m...->...", m, np.abs(amps) ** 2)


def raising_correlator(state: SubspaceState) -> complex:
    """``<I_+ J_->`` in the ``M_F = 0`` block of equal spins.

    Its phase is the mean azimuth difference ``phi_I - phi_J``.
    """
    _require_equal_zero(state.spec)
    c = state.amplitudes
    J = state.spec.spin_j
    m = state.spec.m_j
    # I_+ J_- |m_I=-m, m_J=m> = (J(J+1) - m(m-1)) |-(m-1), m-1>
    coef = J * (J + 1) - m[1:] * (m[1:] - 1)
    return complex(np.sum(np.conj(c[:-1]) * coef * c[1:]))


def section_expectation(state: SubspaceState):
    """Quantum analogue of the section point: ``(<I_z - J_z>/J, arg<I_+ J_->)``."""
    J = state.spec.spin_j
    dfz = -2 * jz_expectation(state) / J
    return dfz, float(np.mod(np.angle(raising_correlator(state)), TWO_PI))
