"""Separation of Floquet eigenstates into regular and chaotic classes.

Each eigenstate is reduced to two features: the Husimi entropy ``s_q`` on a
shared phase-space grid and the normalized ``<J_z>/J``. Chaotic states are
delocalized over the sea (large ``s_q``) and, for the mixed map at
``alpha = 3/2``, sit near the unstable north pole (large ``<J_z>``). Regular
ladders either keep ``<J_z>`` fixed while ``s_q`` grows, or hug the stable
south pole.

The rule is a lower-left-open box: chaotic when ``s_q >= s_q_min`` and
``jz/J >= jz_min``. A grey zone of ``margin`` times each feature's range on
either side of a boundary is labelled ambiguous and left out of the chaotic
subspace.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path

import numpy as np

from .entanglement import eigenstate_entanglement
from .floquet import FloquetSystem
from .states import PhaseSpaceGrid, husimi, husimi_entropy, jz_expectation

__all__ = [
    "EigenstateFeatures",
    "FilterConfig",
    "eigenstate_features",
    "classify_eigenstates",
    "chaotic_subspace",
    "label_counts",
    "REGULAR",
    "CHAOTIC",
    "AMBIGUOUS",
]

REGULAR, CHAOTIC, AMBIGUOUS = "regular", "chaotic", "ambiguous"


@dataclass(frozen=True)
class EigenstateFeatures:
    k: int
    phase: float
    s_q: float
    jz: float
    J: float
    entanglement: float
    label: str | None = None

    @property
    def jz_normalized(self) -> float:
        return self.jz / self.J


@dataclass(frozen=True)
class FilterConfig:
    """Box thresholds in ``(s_q, <J_z>/J)``.

    The defaults were calibrated on ``alpha = 3/2, beta = pi/2, J = 150`` with
    the default 100 x 100 Husimi grid; ``s_q`` values depend on that grid.
    """

    s_q_min: float = 1.2
    jz_min: float = -0.2
    margin: float = 0.05
    method: str = "box"
    extra: dict = field(default_factory=dict)

    @classmethod
    def from_json(cls, path) -> "FilterConfig":
        return cls(**json.loads(Path(path).read_text()))

    def to_json(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2))


def eigenstate_features(system: FloquetSystem, grid: PhaseSpaceGrid | None = None):
    """Husimi entropy, ``<J_z>`` and entanglement of every eigenstate (unlabelled)."""
    if not system.has_eigensystem:
        raise ValueError("eigenstate_features needs a diagonalized system")
    if grid is None:
        grid = PhaseSpaceGrid.cells()
    V = system.eigenvectors
    J = system.spec.spin_j
    s_q = husimi_entropy(husimi(V, grid), grid)
    jz = jz_expectation(V)
    ent = eigenstate_entanglement(system)
    return [EigenstateFeatures(k, float(system.eigenphases[k]), float(s_q[k]), float(jz[k]), J, float(ent[k]))
            for k in range(V.shape[1])]


def _kmeans_labels(x, seed=0, n_iter=100):
    # two-cluster Lloyd iteration on standardized features; higher s_q cluster is chaotic
    z = (x - x.mean(0)) / np.where(x.std(0) > 0, x.std(0), 1.0)
    rng = np.random.default_rng(seed)
    centers = z[rng.choice(len(z), 2, replace=False)]
    for _ in range(n_iter):
        assign = np.argmin(((z[:, None, :] - centers[None]) ** 2).sum(-1), axis=1)
        new = np.array([z[assign == c].mean(0) if np.any(assign == c) else centers[c] for c in range(2)])
        if np.allclose(new, centers):
            break
        centers = new
    chaotic_cluster = int(np.argmax(centers[:, 0]))
    return np.where(assign == chaotic_cluster, CHAOTIC, REGULAR)


def classify_eigenstates(features, config: FilterConfig | None = None):
    """Attach ``regular`` / ``chaotic`` / ``ambiguous`` labels.

    With ``config.method == "kmeans"`` a two-cluster k-means in the
    standardized feature plane replaces the box (no grey zone).
    """
    config = config or FilterConfig()
    feats = list(features)
    if not feats:
        return []
    s = np.array([f.s_q for f in feats])
    jz = np.array([f.jz_normalized for f in feats])
    if config.method == "kmeans":
        labels = _kmeans_labels(np.column_stack([s, jz]), seed=config.extra.get("seed", 0))
        return [replace(f, label=str(lab)) for f, lab in zip(feats, labels)]
    if config.method != "box":
        raise ValueError(f"unknown filter method {config.method!r}")
    ds = config.margin * (s.max() - s.min())
    dj = config.margin * (jz.max() - jz.min())
    inside = (s >= config.s_q_min) & (jz >= config.jz_min)
    near_s = (np.abs(s - config.s_q_min) <= ds) & (jz >= config.jz_min - dj)
    near_j = (np.abs(jz - config.jz_min) <= dj) & (s >= config.s_q_min - ds)
    grey = near_s | near_j
    labels = np.where(grey, AMBIGUOUS, np.where(inside, CHAOTIC, REGULAR))
    return [replace(f, label=str(lab)) for f, lab in zip(feats, labels)]


def label_counts(features) -> dict:
    out = {REGULAR: 0, CHAOTIC: 0, AMBIGUOUS: 0}
    for f in features:
        out[f.label] = out.get(f.label, 0) + 1
    return out


def chaotic_subspace(system: FloquetSystem, features) -> np.ndarray:
    """Orthonormal basis (columns) spanned by the chaotic-labelled eigenvectors.

    Raises ValueError if no state is labelled chaotic.
    """
    idx = [f.k for f in features if f.label == CHAOTIC]
    if not idx:
        raise ValueError("no eigenstate is labelled chaotic")
    return system.eigenvectors[:, sorted(idx)]
