"""Random pure states and their typical entanglement.

States uniform under the Haar measure of the unitary (UE) or orthogonal (OE)
group are drawn as normalized vectors of i.i.d. complex or real standard
Gaussians, which induces the same invariant measure as the hyperspherical
angle parameterization.

Inside a fixed-F_z block the Schmidt basis is fixed, so the typical
entanglement of a random block state is the Shannon entropy of a random state
with respect to a fixed basis:

* UE: ``H_d - 1``
* OE: ``H_{d/2} + ln 4 - 2`` (``H_x = psi(x + 1) + gamma`` for non-integer x)

For a full ``d1 x d2`` space the UE value is Page's formula.

Seed contract: a given ``seed`` (and ``chunk`` size) always reproduces the
same stream of samples; independent streams come from
``numpy.random.SeedSequence(seed).spawn``.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.special import digamma, entr

__all__ = [
    "EnsembleSpec",
    "EnsembleReport",
    "harmonic",
    "typical_entanglement_ue",
    "typical_entanglement_oe",
    "typical_entanglement_full",
    "typical_linear_entropy",
    "sample_coefficients",
    "sample_state",
    "sample_states",
    "mc_average",
    "mc_average_full",
    "pool_reports",
]

EULER_GAMMA = float(np.euler_gamma)
_KINDS = ("UE", "OE")
_FUNCTIONALS = ("entropy", "linear_entropy")


def harmonic(x) -> float:
    """Harmonic number ``H_x``; exact partial sum for integers, digamma otherwise."""
    if x < 0:
        raise ValueError("harmonic number needs x >= 0")
    if float(x).is_integer():
        n = int(x)
        return math.fsum(1.0 / k for k in range(1, n + 1))
    return float(digamma(x + 1) + EULER_GAMMA)


def typical_entanglement_ue(d: int) -> float:
    if d < 1:
        raise ValueError("d must be >= 1")
    return harmonic(d) - 1


def typical_entanglement_oe(d: int) -> float:
    if d < 1:
        raise ValueError("d must be >= 1")
    return harmonic(d / 2) + math.log(4) - 2


def typical_entanglement_full(d1: int, d2: int) -> float:
    """Page average ``sum_{k=d2+1}^{d1 d2} 1/k - (d1 - 1) / (2 d2)`` for ``d2 >= d1``.

    The sum starts above the larger dimension, so ``d1 = 1`` gives 0.
    """
    if d1 < 1:
        raise ValueError("d1 must be >= 1")
    if d1 > d2:
        raise ValueError("need d2 >= d1")
    n = d1 * d2
    if n <= 100_000:
        tail = math.fsum(1.0 / k for k in range(d2 + 1, n + 1))
    else:
        tail = float(digamma(n + 1) - digamma(d2 + 1))
    return tail - (d1 - 1) / (2 * d2)


def typical_linear_entropy(kind: str, d: int) -> float:
    """``1 - 3/(d+2)`` for OE, ``1 - 2/(d+1)`` for UE."""
    kind = _check_kind(kind)
    if d < 1:
        raise ValueError("d must be >= 1")
    return 1 - 3 / (d + 2) if kind == "OE" else 1 - 2 / (d + 1)


def _check_kind(kind):
    k = str(kind).upper()
    if k not in _KINDS:
        raise ValueError(f"kind must be one of {_KINDS}, got {kind!r}")
    return k


@dataclass(frozen=True)
class EnsembleSpec:
    """Random-state ensemble, optionally restricted to the span of ``basis``.

    ``basis`` is a ``(block_dim, k)`` array with orthonormal columns; samples
    are then random combinations of the columns, returned in the block basis.
    """

    kind: str
    dimension: int
    basis: np.ndarray | None = None
    seed: int | None = 0
    label: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "kind", _check_kind(self.kind))
        if self.basis is not None:
            B = np.asarray(self.basis)
            if B.ndim != 2:
                raise ValueError("basis must be a 2-d array of column vectors")
            gram = B.conj().T @ B
            if np.abs(gram - np.eye(B.shape[1])).max() > 1e-10:
                raise ValueError("basis columns are not orthonormal")
            object.__setattr__(self, "dimension", B.shape[1])
        if self.dimension < 1:
            raise ValueError("dimension must be >= 1")

    @classmethod
    def from_subspace(cls, kind, basis, seed=0, label=None):
        basis = np.asarray(basis)
        return cls(kind, basis.shape[1], basis, seed, label)

    @property
    def state_dimension(self) -> int:
        return self.dimension if self.basis is None else self.basis.shape[0]


def sample_coefficients(kind: str, dim: int, n: int, rng) -> np.ndarray:
    """``n`` normalized Gaussian vectors of length ``dim`` (complex for UE)."""
    kind = _check_kind(kind)
    if kind == "UE":
        z = rng.standard_normal((n, dim)) + 1j * rng.standard_normal((n, dim))
    else:
        z = rng.standard_normal((n, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def sample_states(spec: EnsembleSpec, n: int, rng=None) -> np.ndarray:
    """``n`` random states as rows, expressed in the block basis."""
    if rng is None:
        rng = np.random.default_rng(spec.seed)
    c = sample_coefficients(spec.kind, spec.dimension, n, rng)
    if spec.basis is None:
        return c
    return c @ np.asarray(spec.basis).T


def sample_state(spec: EnsembleSpec, rng=None, block_spec=None):
    """One random state; wrapped in a SubspaceState when ``block_spec`` is given."""
    psi = sample_states(spec, 1, rng)[0]
    if block_spec is not None:
        from .states import SubspaceState

        return SubspaceState(block_spec, psi)
    return psi


def _functional(name):
    if name == "entropy":
        return lambda p: entr(p).sum(axis=1)
    if name == "linear_entropy":
        return lambda p: 1 - np.sum(p * p, axis=1)
    raise ValueError(f"functional must be one of {_FUNCTIONALS}, got {name!r}")


@dataclass
class EnsembleReport:
    kind: str
    d: int
    functional: str
    analytic: float | None
    mc_mean: float
    mc_stderr: float
    n_samples: int
    seed: int | None
    subspace_id: str | None = None
    mc_std: float | None = None

    def z_score(self) -> float:
        if self.analytic is None:
            return float("nan")
        return (self.mc_mean - self.analytic) / self.mc_stderr

    def to_json_dict(self) -> dict:
        out = asdict(self)
        if out["subspace_id"] is None:
            del out["subspace_id"]
        return out


def _analytic(kind, functional, spec):
    if spec.basis is not None:
        return None
    if functional == "entropy":
        return typical_entanglement_ue(spec.dimension) if kind == "UE" else typical_entanglement_oe(spec.dimension)
    return typical_linear_entropy(kind, spec.dimension)


def mc_average(spec: EnsembleSpec, functional: str = "entropy", n_samples: int = 10_000,
               chunk: int = 4096) -> EnsembleReport:
    """Monte-Carlo mean and standard error of an entanglement functional.

    Sampling proceeds in chunks from ``default_rng(spec.seed)``; for an
    unrestricted ensemble the closed-form value is attached as ``analytic``.
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    f = _functional(functional)
    rng = np.random.default_rng(spec.seed)
    vals = np.empty(n_samples)
    for start in range(0, n_samples, chunk):
        k = min(chunk, n_samples - start)
        psi = sample_states(spec, k, rng)
        vals[start : start + k] = f(np.abs(psi) ** 2)
    std = float(vals.std(ddof=1))
    return EnsembleReport(spec.kind, spec.dimension, functional, _analytic(spec.kind, functional, spec),
                          float(vals.mean()), std / math.sqrt(n_samples), n_samples, spec.seed,
                          spec.label, std)


def mc_average_full(d1: int, d2: int, kind: str = "UE", functional: str = "entropy",
                    n_samples: int = 10_000, seed: int | None = 0, chunk: int = 4096) -> EnsembleReport:
    """Monte-Carlo entanglement of random states on the full ``d1 x d2`` space.

    Schmidt coefficients come from singular values of the amplitude matrix.
    The Page value is attached for UE entropy only.
    """
    kind = _check_kind(kind)
    if d1 > d2:
        raise ValueError("need d2 >= d1")
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    f = _functional(functional)
    rng = np.random.default_rng(seed)
    vals = np.empty(n_samples)
    for start in range(0, n_samples, chunk):
        k = min(chunk, n_samples - start)
        psi = sample_coefficients(kind, d1 * d2, k, rng).reshape(k, d1, d2)
        s = np.linalg.svd(psi, compute_uv=False)
        vals[start : start + k] = f(s * s)
    analytic = typical_entanglement_full(d1, d2) if (kind == "UE" and functional == "entropy") else None
    std = float(vals.std(ddof=1))
    return EnsembleReport(kind, d1 * d2, functional, analytic, float(vals.mean()),
                          std / math.sqrt(n_samples), n_samples, seed, f"full_{d1}x{d2}", std)


def pool_reports(reports) -> EnsembleReport:
    """Merge reports from independent streams by pooled mean and variance."""
    reports = list(reports)
    n = np.array([r.n_samples for r in reports], dtype=float)
    means = np.array([r.mc_mean for r in reports])
    var = np.array([(r.mc_std if r.mc_std is not None else r.mc_stderr * math.sqrt(r.n_samples)) ** 2
                    for r in reports])
    total = n.sum()
    mean = float(np.sum(n * means) / total)
    ss = np.sum((n - 1) * var + n * (means - mean) ** 2)
    std = float(math.sqrt(ss / (total - 1)))
    r0 = reports[0]
    return EnsembleReport(r0.kind, r0.d, r0.functional, r0.analytic, mean, std / math.sqrt(total),
                          int(total), None, r0.subspace_id, std)
