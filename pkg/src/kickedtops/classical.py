"""Classical kicked coupled tops on the product of two unit spheres.

One period of the map kicks spin J about the z axis by ``beta`` and then
precesses both spins about ``F = I + J`` by ``alpha * |F|``. Both rotations are
right-handed, which is the Heisenberg-picture flow of the quantum Floquet
operator ``exp(-i alpha F^2 / 2J) exp(-i beta J_z)``.

All functions accept stacked states: ``i_vec`` and ``j_vec`` of shape
``(..., 3)``. Section coordinates on the ``F_z = 0`` surface are
``delta_fz = I_z - J_z`` in [-2, 2] and ``delta_phi = phi_I - phi_J`` in
[0, 2 pi); both are canonical up to a constant factor, so a uniform grid in
them carries the Liouville measure.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ClassicalSpinPair",
    "ClassicalMapParams",
    "SectionPoint",
    "kick_rotate",
    "precess",
    "floquet_step",
    "inverse_step",
    "iterate",
    "section_embed",
    "section_project",
    "poincare_section",
    "lyapunov_exponent",
    "lyapunov_exponents",
    "divergence_exponent",
    "section_grid",
    "classify_grid",
    "GridClassification",
    "occupancy_fraction",
    "canonical_jacobian_det",
]

TWO_PI = 2 * np.pi
FD_STEP = 1e-7
RENORM_EVERY = 10
DEFAULT_THRESHOLD = 0.05
DEFAULT_LYAPUNOV_STEPS = 2000


@dataclass(frozen=True)
class ClassicalSpinPair:
    """Two unit spins. Arrays may carry leading batch dimensions."""

    i_vec: np.ndarray
    j_vec: np.ndarray

    @property
    def f_vec(self):
        return self.i_vec + self.j_vec

    @property
    def f_z(self):
        return self.i_vec[..., 2] + self.j_vec[..., 2]

    def as_array(self):
        """Concatenated ``(..., 6)`` array ``[I, J]``."""
        return np.concatenate([self.i_vec, self.j_vec], axis=-1)

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        return cls(x[..., :3], x[..., 3:])


@dataclass(frozen=True)
class ClassicalMapParams:
    alpha: float
    beta: float

    def __post_init__(self):
        if not (np.isfinite(self.alpha) and np.isfinite(self.beta)):
            raise ValueError("alpha and beta must be finite")


@dataclass(frozen=True)
class SectionPoint:
    delta_fz: float
    delta_phi: float


def _rotate_z(v, angle):
    c, s = np.cos(angle), np.sin(angle)
    out = np.empty_like(v)
    out[..., 0] = c * v[..., 0] - s * v[..., 1]
    out[..., 1] = s * v[..., 0] + c * v[..., 1]
    out[..., 2] = v[..., 2]
    return out


def _rodrigues(v, axis, cos_a, sin_a):
    k_dot_v = np.sum(axis * v, axis=-1, keepdims=True)
    return v * cos_a + np.cross(axis, v) * sin_a + axis * k_dot_v * (1 - cos_a)


def kick_rotate(state: ClassicalSpinPair, beta) -> ClassicalSpinPair:
    """Rotate J about the space-fixed z axis by ``beta``; I is untouched."""
    return ClassicalSpinPair(state.i_vec, _rotate_z(np.asarray(state.j_vec, dtype=float), beta))


def precess(state: ClassicalSpinPair, alpha) -> ClassicalSpinPair:
    """Rotate both spins about ``F`` by the angle ``alpha * |F|``.

    At ``|F| = 0`` the rotation angle vanishes and the state is returned
    unchanged.
    """
    i_vec = np.asarray(state.i_vec, dtype=float)
    j_vec = np.asarray(state.j_vec, dtype=float)
    f = i_vec + j_vec
    f_norm = np.linalg.norm(f, axis=-1, keepdims=True)
    tiny = f_norm < 1e-12
    axis = np.where(tiny, 0.0, f / np.where(tiny, 1.0, f_norm))
    angle = np.where(tiny, 0.0, alpha * f_norm)
    cos_a, sin_a = np.cos(angle), np.sin(angle)
    return ClassicalSpinPair(_rodrigues(i_vec, axis, cos_a, sin_a),
                             _rodrigues(j_vec, axis, cos_a, sin_a))


def floquet_step(state: ClassicalSpinPair, params: ClassicalMapParams) -> ClassicalSpinPair:
    return precess(kick_rotate(state, params.beta), params.alpha)


def inverse_step(state: ClassicalSpinPair, params: ClassicalMapParams) -> ClassicalSpinPair:
    # F is invariant under precession, so undoing it uses the same axis
    return kick_rotate(precess(state, -params.alpha), -params.beta)


def iterate(state: ClassicalSpinPair, params: ClassicalMapParams, n_steps: int):
    """Apply ``floquet_step`` ``n_steps`` times (inverse map for negative counts)."""
    step = floquet_step if n_steps >= 0 else inverse_step
    for _ in range(abs(n_steps)):
        state = step(state, params)
    return state


def section_embed(delta_fz, delta_phi) -> ClassicalSpinPair:
    """Unique ``F_z = 0`` state with the given section coordinates.

    The cyclic mean azimuth is set to zero, i.e. ``phi_I = delta_phi / 2`` and
    ``phi_J = -delta_phi / 2``.
    """
    delta_fz = np.asarray(delta_fz, dtype=float)
    delta_phi = np.asarray(delta_phi, dtype=float)
    if np.any(np.abs(delta_fz) > 2 + 1e-12):
        raise ValueError("delta_fz must lie in [-2, 2]")
    iz = np.clip(delta_fz / 2, -1.0, 1.0)
    rho = np.sqrt(1 - iz * iz)
    half = delta_phi / 2
    i_vec = np.stack([rho * np.cos(half), rho * np.sin(half), iz], axis=-1)
    j_vec = np.stack([rho * np.cos(half), -rho * np.sin(half), -iz], axis=-1)
    return ClassicalSpinPair(i_vec, j_vec)


def section_project(state: ClassicalSpinPair, check=True):
    """Section coordinates ``(delta_fz, delta_phi)`` of an ``F_z = 0`` state."""
    i_vec, j_vec = np.asarray(state.i_vec), np.asarray(state.j_vec)
    if check and np.any(np.abs(i_vec[..., 2] + j_vec[..., 2]) >= 1e-9):
        raise ValueError("state is not on the F_z = 0 surface")
    delta_fz = i_vec[..., 2] - j_vec[..., 2]
    phi_i = np.arctan2(i_vec[..., 1], i_vec[..., 0])
    phi_j = np.arctan2(j_vec[..., 1], j_vec[..., 0])
    return delta_fz, np.mod(phi_i - phi_j, TWO_PI)


def poincare_section(params: ClassicalMapParams, initial_points, n_steps: int):
    """Stroboscopic orbits in section coordinates.

    Parameters
    ----------
    initial_points : sequence of (delta_fz, delta_phi) or SectionPoint
    n_steps : int
        Orbit length; the initial point is element 0.

    Returns
    -------
    ndarray, shape (n_orbits, n_steps, 2)
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    pts = np.array([(p.delta_fz, p.delta_phi) if isinstance(p, SectionPoint) else p
                    for p in initial_points], dtype=float).reshape(-1, 2)
    state = section_embed(pts[:, 0], pts[:, 1])
    orbits = np.empty((len(pts), n_steps, 2))
    for n in range(n_steps):
        dfz, dphi = section_project(state, check=False)
        orbits[:, n, 0] = dfz
        orbits[:, n, 1] = dphi
        state = floquet_step(state, params)
    return orbits


def _retract(x):
    """Normalize each spin of a ``(..., 6)`` array back to the unit sphere."""
    out = np.empty_like(x)
    out[..., :3] = x[..., :3] / np.linalg.norm(x[..., :3], axis=-1, keepdims=True)
    out[..., 3:] = x[..., 3:] / np.linalg.norm(x[..., 3:], axis=-1, keepdims=True)
    return out


def _project_tangent(x, v):
    out = np.empty_like(v)
    for sl in (slice(0, 3), slice(3, 6)):
        s = x[..., sl]
        out[..., sl] = v[..., sl] - s * np.sum(s * v[..., sl], axis=-1, keepdims=True)
    return out


def _step_array(x, params):
    nxt = floquet_step(ClassicalSpinPair.from_array(x), params)
    return nxt.as_array()


def _initial_tangent(x):
    # fixed generic direction; deterministic for given inputs
    v0 = np.array([0.3, -0.7, 0.2, 0.5, 0.4, -0.6])
    v = _project_tangent(x, np.broadcast_to(v0, x.shape).copy())
    return v / np.linalg.norm(v, axis=-1, keepdims=True)


def lyapunov_exponents(params: ClassicalMapParams, delta_fz, delta_phi,
                       n_steps: int = DEFAULT_LYAPUNOV_STEPS, fd_step: float = FD_STEP,
                       renorm_every: int = RENORM_EVERY):
    """Largest Lyapunov exponent (per map step) for a batch of section points.

    The tangent vector is advanced by a central finite difference of
    ``floquet_step`` on the sphere product, projected onto the tangent space
    of the image, and renormalized every ``renorm_every`` steps.
    """
    if n_steps < 100:
        raise ValueError("n_steps must be >= 100")
    x = section_embed(delta_fz, delta_phi).as_array()
    v = _initial_tangent(x)
    log_growth = np.zeros(x.shape[:-1])
    for n in range(1, n_steps + 1):
        norm = np.linalg.norm(v, axis=-1, keepdims=True)
        u = v / norm
        plus = _step_array(_retract(x + fd_step * u), params)
        minus = _step_array(_retract(x - fd_step * u), params)
        x = _step_array(x, params)
        v = _project_tangent(x, (plus - minus) / (2 * fd_step)) * norm
        if n % renorm_every == 0 or n == n_steps:
            norm = np.linalg.norm(v, axis=-1)
            log_growth += np.log(norm)
            v = v / norm[..., None]
    return log_growth / n_steps


def lyapunov_exponent(params: ClassicalMapParams, ic, n_steps: int = DEFAULT_LYAPUNOV_STEPS) -> float:
    """Largest Lyapunov exponent for a single section point ``ic``."""
    if isinstance(ic, SectionPoint):
        ic = (ic.delta_fz, ic.delta_phi)
    return float(lyapunov_exponents(params, ic[0], ic[1], n_steps))


def divergence_exponent(params: ClassicalMapParams, delta_fz, delta_phi,
                        n_steps: int = DEFAULT_LYAPUNOV_STEPS, separation: float = 1e-9):
    """Two-trajectory (Benettin) estimate of the largest Lyapunov exponent.

    A companion orbit is kept at distance ``separation`` and pulled back along
    the separation vector after every step; the mean log stretch is returned.
    """
    x = section_embed(delta_fz, delta_phi).as_array()
    y = _retract(x + separation * _initial_tangent(x))
    total = np.zeros(x.shape[:-1])
    for _ in range(n_steps):
        x = _step_array(x, params)
        y = _step_array(y, params)
        diff = y - x
        dist = np.linalg.norm(diff, axis=-1)
        total += np.log(dist / separation)
        y = _retract(x + diff * (separation / dist)[..., None])
    return total / n_steps


def section_grid(n_fz: int = 40, n_phi: int = 40):
    """Cell-centred grid over the section with equal Liouville weights.

    Returns ``(delta_fz, delta_phi, weights)`` as flat arrays; the weights are
    cell areas in ``(delta_fz, delta_phi)`` and sum to ``8 pi``.
    """
    fz = -2 + (np.arange(n_fz) + 0.5) * 4 / n_fz
    phi = (np.arange(n_phi) + 0.5) * TWO_PI / n_phi
    F, P = np.meshgrid(fz, phi, indexing="ij")
    w = np.full(F.size, 4 / n_fz * TWO_PI / n_phi)
    return F.ravel(), P.ravel(), w


@dataclass
class GridClassification:
    delta_fz: np.ndarray
    delta_phi: np.ndarray
    weights: np.ndarray
    lyapunov: np.ndarray
    chaotic: np.ndarray
    threshold: float

    @property
    def chaotic_fraction(self) -> float:
        """Measure-weighted fraction of chaotic points."""
        return float(np.sum(self.weights * self.chaotic) / np.sum(self.weights))


def classify_grid(params: ClassicalMapParams, delta_fz=None, delta_phi=None, weights=None,
                  threshold: float = DEFAULT_THRESHOLD, n_steps: int = DEFAULT_LYAPUNOV_STEPS):
    """Label section points chaotic when their Lyapunov exponent exceeds ``threshold``.

    Without explicit points the default 40 x 40 :func:`section_grid` is used.
    """
    if delta_fz is None:
        delta_fz, delta_phi, weights = section_grid()
    delta_fz = np.asarray(delta_fz, dtype=float)
    delta_phi = np.asarray(delta_phi, dtype=float)
    if weights is None:
        weights = np.ones_like(delta_fz)
    lam = lyapunov_exponents(params, delta_fz, delta_phi, n_steps)
    return GridClassification(delta_fz, delta_phi, np.asarray(weights, dtype=float),
                              lam, lam > threshold, threshold)


def occupancy_fraction(orbit, bins=(20, 20)) -> float:
    """Fraction of equal-measure section bins visited by an orbit ``(n, 2)``."""
    orbit = np.asarray(orbit).reshape(-1, 2)
    hist, _, _ = np.histogram2d(orbit[:, 0], orbit[:, 1], bins=bins,
                                range=[[-2, 2], [0, TWO_PI]])
    return float(np.count_nonzero(hist) / hist.size)


def _to_canonical(x):
    i_vec, j_vec = x[..., :3], x[..., 3:]
    return np.stack([i_vec[..., 2], np.arctan2(i_vec[..., 1], i_vec[..., 0]),
                     j_vec[..., 2], np.arctan2(j_vec[..., 1], j_vec[..., 0])], axis=-1)


def _from_canonical(q):
    iz, pi_, jz, pj = q[..., 0], q[..., 1], q[..., 2], q[..., 3]
    ri, rj = np.sqrt(1 - iz ** 2), np.sqrt(1 - jz ** 2)
    return np.stack([ri * np.cos(pi_), ri * np.sin(pi_), iz,
                     rj * np.cos(pj), rj * np.sin(pj), jz], axis=-1)


def canonical_jacobian_det(params: ClassicalMapParams, canonical_point, h: float = 1e-6) -> float:
    """Determinant of the one-step Jacobian in ``(I_z, phi_I, J_z, phi_J)``.

    Symplectic maps give exactly 1; computed by central differences.
    """
    q0 = np.asarray(canonical_point, dtype=float)
    jac = np.empty((4, 4))
    for k in range(4):
        dq = np.zeros(4)
        dq[k] = h
        qp = _to_canonical(_step_array(_from_canonical(q0 + dq), params))
        qm = _to_canonical(_step_array(_from_canonical(q0 - dq), params))
        diff = qp - qm
        diff[[1, 3]] = (diff[[1, 3]] + np.pi) % TWO_PI - np.pi
        jac[:, k] = diff / (2 * h)
    return float(np.linalg.det(jac))
