"""Entanglement of states in a fixed-F_z block.

Inside such a block the uncoupled product basis is a Schmidt basis for every
state, so the Schmidt coefficients are simply ``|c_m|^2`` and the
entanglement is their Shannon entropy (natural log).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import entr

from .floquet import FloquetSystem
from .states import PhaseSpaceGrid, SubspaceState, projected_coherent_amplitudes

__all__ = [
    "EntanglementHistory",
    "DEFAULT_WINDOW",
    "schmidt_coefficients",
    "entanglement_entropy",
    "linear_entropy",
    "eigenstate_entanglement",
    "entanglement_history",
    "long_time_average",
    "entanglement_map",
    "EntanglementMap",
    "bipartite_schmidt_coefficients",
    "embed_bipartite",
]

DEFAULT_WINDOW = (300, 320)


def _amps(state):
    return state.amplitudes if isinstance(state, SubspaceState) else np.asarray(state)


def schmidt_coefficients(state) -> np.ndarray:
    """Schmidt probabilities ``lambda_m = |c_m|^2`` (along the last axis)."""
    return np.abs(_amps(state)) ** 2


def entanglement_entropy(state, axis=-1):
    """``-sum lambda ln lambda``; stacked states reduce along ``axis``."""
    e = entr(schmidt_coefficients(state)).sum(axis=axis)
    return float(e) if np.ndim(e) == 0 else e


def linear_entropy(state, axis=-1):
    """``1 - sum lambda^2``."""
    lam = schmidt_coefficients(state)
    s = 1 - np.sum(lam * lam, axis=axis)
    return float(s) if np.ndim(s) == 0 else s


def eigenstate_entanglement(system: FloquetSystem) -> np.ndarray:
    """Entanglement of every Floquet eigenstate, in eigenphase order."""
    return entanglement_entropy(system.eigenvectors, axis=0)


def embed_bipartite(state: SubspaceState) -> np.ndarray:
    """Amplitude matrix ``psi[m_I, m_J]`` of a block state in the full product space.

    Rows run over ascending ``m_I``, columns over ascending ``m_J``.
    """
    spec = state.spec
    di, dj = spec.twice_i + 1, spec.twice_j + 1
    psi = np.zeros((di, dj), dtype=complex)
    rows = np.round(spec.m_i + spec.spin_i).astype(int)
    cols = np.round(spec.m_j + spec.spin_j).astype(int)
    psi[rows, cols] = state.amplitudes
    return psi


def bipartite_schmidt_coefficients(psi) -> np.ndarray:
    """Squared singular values of a bipartite amplitude matrix, descending."""
    s = np.linalg.svd(np.asarray(psi), compute_uv=False)
    return s * s


@dataclass
class EntanglementHistory:
    alpha: float
    beta: float
    J: float
    initial: tuple | None
    series: np.ndarray

    @property
    def steps(self) -> np.ndarray:
        return np.arange(len(self.series))


def entanglement_history(system: FloquetSystem, initial, n_max: int,
                         label: tuple | None = None) -> EntanglementHistory:
    """Entanglement ``E_n`` of ``U**n |initial>`` for ``n = 0 ... n_max``.

    Evaluated spectrally: ``lambda_m(n) = |sum_k a_k exp(-i n phi_k) c_m^(k)|^2``.
    """
    if not system.has_eigensystem:
        raise ValueError("entanglement_history needs a diagonalized system")
    V = system.eigenvectors
    a = V.conj().T @ np.asarray(_amps(initial), dtype=complex)
    series = np.empty(n_max + 1)
    chunk = 256
    for start in range(0, n_max + 1, chunk):
        n = np.arange(start, min(start + chunk, n_max + 1))
        states = (np.exp(-1j * np.outer(n, system.eigenphases)) * a) @ V.T
        series[n] = entanglement_entropy(states, axis=1)
    return EntanglementHistory(system.alpha, system.beta, system.spec.spin_j, label, series)


def _check_window(window, n_max=None):
    lo, hi = window
    if hi < lo or lo < 0:
        raise ValueError(f"empty averaging window {window}")
    if n_max is not None and hi > n_max:
        raise ValueError(f"window {window} extends past n_max={n_max}")
    return int(lo), int(hi)


def long_time_average(history, window=DEFAULT_WINDOW) -> float:
    """Mean of ``E_n`` over ``window[0] <= n <= window[1]`` (inclusive)."""
    series = history.series if isinstance(history, EntanglementHistory) else np.asarray(history)
    lo, hi = _check_window(window, len(series) - 1)
    return float(np.mean(series[lo : hi + 1]))


@dataclass
class EntanglementMap:
    grid: PhaseSpaceGrid
    values: np.ndarray
    window: tuple
    chaotic: np.ndarray | None = field(default=None)

    def weighted_mean(self, mask=None) -> float:
        w = self.grid.weights if mask is None else self.grid.weights * mask
        return float(np.sum(w * self.values) / np.sum(w))

    def as_image(self) -> np.ndarray:
        return self.values.reshape(self.grid.shape)


def entanglement_map(system: FloquetSystem, grid: PhaseSpaceGrid | None = None,
                     window=DEFAULT_WINDOW, chunk: int = 512) -> EntanglementMap:
    """Long-time average entanglement for a projected coherent state at every grid point.

    The default grid is the 61 x 61 node grid of :meth:`PhaseSpaceGrid.nodes`.
    """
    if not system.has_eigensystem:
        raise ValueError("entanglement_map needs a diagonalized system")
    if grid is None:
        grid = PhaseSpaceGrid.nodes()
    lo, hi = _check_window(window)
    V = system.eigenvectors
    J = system.spec.spin_j
    steps = np.arange(lo, hi + 1)
    phase = np.exp(-1j * np.outer(steps, system.eigenphases))
    out = np.empty(grid.size)
    dth, dph = grid.delta_theta, grid.delta_phi
    for start in range(0, grid.size, chunk):
        sl = slice(start, min(start + chunk, grid.size))
        psi0 = projected_coherent_amplitudes(J, dth[sl], dph[sl])  # (k, d)
        A = V.conj().T @ psi0.T  # (d, k)
        acc = np.zeros(psi0.shape[0])
        for p in phase:
            acc += entanglement_entropy(V @ (p[:, None] * A), axis=0)
        out[sl] = acc / len(steps)
    return EntanglementMap(grid, out, (lo, hi))
