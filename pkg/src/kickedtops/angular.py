"""Angular-momentum algebra for a fixed-F_z block of two coupled spins.

Quantum numbers may be half-integers. They are validated and stored as doubled
integers so that selection rules are exact integer arithmetic.

Basis ordering used throughout the package:

* uncoupled index: ascending ``m_J`` (the partner spin carries ``m_I = M_F - m_J``)
* coupled index: ascending ``F``

Clebsch-Gordan coefficients are obtained from the three-term recursion of the
Wigner 3j symbol in its third angular momentum (Schulten & Gordon; Luscombe &
Luban). The recursion runs backward from ``F_max`` and, where a classically
forbidden region exists at small ``F``, forward from ``F_min``; the two pieces
are matched in the classically allowed region and normalized at the end.
No factorials are evaluated, so the result stays accurate at J ~ 150 and beyond.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np

__all__ = [
    "SubspaceSpec",
    "CGBlock",
    "clebsch_gordan",
    "three_j_column",
    "cg_block",
    "op_f_squared",
    "op_j_z",
    "op_i_dot_j",
    "CACHE_ENV_VAR",
]

CACHE_ENV_VAR = "KICKEDTOPS_CACHE"
_CACHE_VERSION = 1
_RESCALE = 1e100


def _twice(x, name="quantum number") -> int:
    t = 2 * x
    ti = int(round(t))
    if abs(t - ti) > 1e-9:
        raise ValueError(f"{name} must be an integer or half-integer, got {x!r}")
    return ti


@dataclass(frozen=True)
class SubspaceSpec:
    """Fixed-F_z block of the product space of spins ``spin_i`` and ``spin_j``.

    Stored as doubled integers; construct with :meth:`from_spins`.
    """

    twice_i: int
    twice_j: int
    twice_mf: int = 0

    def __post_init__(self):
        if self.twice_i < 0 or self.twice_j < 0:
            raise ValueError("spin magnitudes must be non-negative")
        if abs(self.twice_mf) > self.twice_i + self.twice_j:
            raise ValueError(
                f"m_f={self.twice_mf / 2} exceeds spin_i + spin_j = "
                f"{(self.twice_i + self.twice_j) / 2}"
            )
        if (self.twice_i + self.twice_j + self.twice_mf) % 2:
            raise ValueError("m_f must differ from spin_i + spin_j by an integer")

    @classmethod
    def from_spins(cls, spin_i, spin_j, m_f=0) -> "SubspaceSpec":
        return cls(_twice(spin_i, "spin_i"), _twice(spin_j, "spin_j"), _twice(m_f, "m_f"))

    @classmethod
    def equal(cls, J, m_f=0) -> "SubspaceSpec":
        """Block with ``spin_i == spin_j == J``."""
        return cls.from_spins(J, J, m_f)

    @property
    def spin_i(self) -> float:
        return self.twice_i / 2

    @property
    def spin_j(self) -> float:
        return self.twice_j / 2

    @property
    def m_f(self) -> float:
        return self.twice_mf / 2

    @property
    def _twice_mj_range(self) -> tuple[int, int]:
        lo = max(-self.twice_j, self.twice_mf - self.twice_i)
        hi = min(self.twice_j, self.twice_mf + self.twice_i)
        return lo, hi

    @property
    def dimension(self) -> int:
        lo, hi = self._twice_mj_range
        return (hi - lo) // 2 + 1

    @property
    def m_j(self) -> np.ndarray:
        """``m_J`` values of the uncoupled basis, ascending."""
        lo, hi = self._twice_mj_range
        return np.arange(lo, hi + 1, 2) / 2

    @property
    def m_i(self) -> np.ndarray:
        return self.m_f - self.m_j

    @property
    def f_values(self) -> np.ndarray:
        """Total angular momenta ``F`` present in the block, ascending."""
        lo = max(abs(self.twice_i - self.twice_j), abs(self.twice_mf))
        hi = self.twice_i + self.twice_j
        return np.arange(lo, hi + 1, 2) / 2

    @property
    def is_equal_spin(self) -> bool:
        return self.twice_i == self.twice_j

    def key(self) -> tuple[int, int, int]:
        return (self.twice_i, self.twice_j, self.twice_mf)


@dataclass(frozen=True)
class CGBlock:
    """Orthogonal change of basis within one block.

    ``matrix[a, b] = <F_a, M_F | I, M_F - m_b; J, m_b>``; rows follow
    ``f_values`` and columns follow ``spec.m_j``.
    """

    spec: SubspaceSpec
    matrix: np.ndarray
    f_values: np.ndarray

    def to_coupled(self, amplitudes):
        """Uncoupled amplitudes -> coupled amplitudes."""
        return self.matrix @ amplitudes

    def to_uncoupled(self, amplitudes):
        return self.matrix.T @ amplitudes


def _coef_a(j1, j2, j, m3):
    return np.sqrt(max((j * j - (j1 - j2) ** 2) * ((j1 + j2 + 1) ** 2 - j * j) * (j * j - m3 * m3), 0.0))


def _coef_b(j1, j2, j, m1, m2):
    return (2 * j + 1) * ((m1 + m2) * (j1 * (j1 + 1) - j2 * (j2 + 1)) - (m1 - m2) * j * (j + 1))


def three_j_column(j1, j2, m1, m2):
    """Wigner 3j symbols ``(j1 j2 j; m1 m2 -m1-m2)`` for every allowed ``j``.

    Returns
    -------
    js : ndarray
        ``j`` from ``max(|j1-j2|, |m1+m2|)`` to ``j1+j2``.
    values : ndarray
        The corresponding 3j symbols.
    """
    t1, t2, tm1, tm2 = (_twice(v) for v in (j1, j2, m1, m2))
    if abs(tm1) > t1 or abs(tm2) > t2 or (t1 - tm1) % 2 or (t2 - tm2) % 2:
        raise ValueError(f"invalid projections m1={m1}, m2={m2} for j1={j1}, j2={j2}")
    j1, j2, m1, m2 = t1 / 2, t2 / 2, tm1 / 2, tm2 / 2
    m3 = -(m1 + m2)
    jmin = max(abs(j1 - j2), abs(m3))
    jmax = j1 + j2
    n = int(round(jmax - jmin)) + 1
    js = jmin + np.arange(n)
    if n < 1:
        return js, np.zeros(0)
    sign_top = -1.0 if int(round(j1 - j2 - m3)) % 2 else 1.0
    if n == 1:
        return js, np.array([sign_top / np.sqrt(2 * jmin + 1)])

    # x(j) f(j+1) + y(j) f(j) + z(j) f(j-1) = 0
    def x(j):
        return j * _coef_a(j1, j2, j + 1, m3)

    def y(j):
        return _coef_b(j1, j2, j, m1, m2)

    def z(j):
        return (j + 1) * _coef_a(j1, j2, j, m3)

    back = np.zeros(n + 1)
    back[n - 1] = 1.0
    for i in range(n - 1, 0, -1):
        j = jmin + i
        back[i - 1] = -(y(j) * back[i] + x(j) * back[i + 1]) / z(j)
        if abs(back[i - 1]) > _RESCALE:
            back[: n + 1] /= _RESCALE
    back = back[:n]

    # jmin == 0 forces j1 == j2 and m3 == 0: no forbidden region below the
    # allowed band, and the forward seed is undefined (x(0) == 0).
    if jmin > 0:
        fwd = np.zeros(n)
        fwd[0] = 1.0
        fwd[1] = -y(jmin) / x(jmin)
        stop = n - 1
        for i in range(1, n - 1):
            j = jmin + i
            fwd[i + 1] = -(y(j) * fwd[i] + z(j) * fwd[i - 1]) / x(j)
            # leave once the pairwise magnitude stops growing
            if abs(fwd[i + 1]) + abs(fwd[i]) < abs(fwd[i]) + abs(fwd[i - 1]):
                stop = i + 1
                break
            if abs(fwd[i + 1]) > _RESCALE:
                fwd[: i + 2] /= _RESCALE
        lo = max(0, stop - 2)
        h = fwd[lo : stop + 1]
        g = back[lo : stop + 1]
        denom = float(h @ h)
        if denom > 0.0:
            scale = float(g @ h) / denom
            spliced = back.copy()
            spliced[: stop + 1] = scale * fwd[: stop + 1]
            if np.all(np.isfinite(spliced)) and scale != 0.0:
                back = spliced

    norm = np.sqrt(np.sum((2 * js + 1) * back * back))
    values = back / norm
    if values[-1] != 0.0:
        values *= sign_top * np.sign(values[-1])
    return js, values


def clebsch_gordan(I, m_I, J, m_J, F, M) -> float:
    """``<F, M | I, m_I; J, m_J>`` in the Condon-Shortley convention.

    Selection-rule violations (``m_I + m_J != M`` or ``F`` outside the
    triangle) return exactly 0. Malformed quantum numbers raise ValueError.
    """
    tI, tmI, tJ, tmJ, tF, tM = (_twice(v) for v in (I, m_I, J, m_J, F, M))
    for tj, tm in ((tI, tmI), (tJ, tmJ), (tF, tM)):
        if tj < 0 or abs(tm) > tj or (tj - tm) % 2:
            raise ValueError(f"invalid quantum numbers j={tj / 2}, m={tm / 2}")
    if tmI + tmJ != tM:
        return 0.0
    if tF < abs(tI - tJ) or tF > tI + tJ or (tI + tJ - tF) % 2:
        return 0.0
    js, vals = three_j_column(tI / 2, tJ / 2, tmI / 2, tmJ / 2)
    idx = int(round(tF / 2 - js[0]))
    if idx < 0 or idx >= len(js):
        return 0.0
    phase = -1.0 if ((tI - tJ + tM) // 2) % 2 else 1.0
    return float(phase * np.sqrt(tF + 1) * vals[idx])


def _cache_path(spec: SubspaceSpec, cache_dir) -> Path:
    ti, tj, tm = spec.key()
    return Path(cache_dir) / f"cg_v{_CACHE_VERSION}_{ti}_{tj}_{tm}.npz"


def _compute_block(spec: SubspaceSpec) -> np.ndarray:
    f_values = spec.f_values
    m_j = spec.m_j
    d = spec.dimension
    matrix = np.zeros((len(f_values), d))
    I, J, M = spec.spin_i, spec.spin_j, spec.m_f
    phase_sign = -1.0 if (int(round(I - J + M)) % 2) else 1.0
    for b, mj in enumerate(m_j):
        js, vals = three_j_column(I, J, M - mj, mj)
        # js spans exactly f_values for every column of the block
        matrix[:, b] = phase_sign * np.sqrt(2 * js + 1) * vals
    return matrix


@lru_cache(maxsize=16)
def _cached_block(key) -> CGBlock:
    spec = SubspaceSpec(*key)
    cache_dir = os.environ.get(CACHE_ENV_VAR)
    if cache_dir:
        path = _cache_path(spec, cache_dir)
        if path.exists():
            with np.load(path) as data:
                if int(data["version"]) == _CACHE_VERSION and tuple(data["key"]) == key:
                    matrix = data["matrix"]
                    matrix.setflags(write=False)
                    return CGBlock(spec, matrix, spec.f_values)
    matrix = _compute_block(spec)
    if cache_dir:
        Path(cache_dir).mkdir(parents=True, exist_ok=True)
        np.savez(_cache_path(spec, cache_dir), version=_CACHE_VERSION,
                 key=np.array(key), matrix=matrix)
    matrix.setflags(write=False)
    return CGBlock(spec, matrix, spec.f_values)


def cg_block(spec: SubspaceSpec) -> CGBlock:
    """Clebsch-Gordan transform between the uncoupled and coupled bases of a block.

    Blocks are memoized in-process. If the ``KICKEDTOPS_CACHE`` environment
    variable names a directory, blocks are also stored there as ``.npz`` files
    tagged with a format version; a cached block is bit-identical to a fresh
    computation.
    """
    return _cached_block(spec.key())


def op_f_squared(spec: SubspaceSpec) -> np.ndarray:
    """Eigenvalues ``F(F+1)`` of F^2, diagonal in the coupled basis."""
    f = spec.f_values
    return f * (f + 1)


def op_j_z(spec: SubspaceSpec) -> np.ndarray:
    """Diagonal of J_z in the uncoupled basis (the ``m_J`` values)."""
    return spec.m_j.copy()


def op_i_dot_j(spec: SubspaceSpec) -> np.ndarray:
    """I.J as a dense symmetric matrix in the uncoupled basis."""
    block = cg_block(spec)
    I, J = spec.spin_i, spec.spin_j
    diag = (op_f_squared(spec) - I * (I + 1) - J * (J + 1)) / 2
    return block.matrix.T @ (diag[:, None] * block.matrix)
