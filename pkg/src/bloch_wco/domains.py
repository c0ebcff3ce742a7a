"""Invariant geometry of the unit disk, the euclidean unit ball and the unit polydisk.

The metric form is normalised so that it equals the identity at the origin.
Distance to the origin, boundary gap and seeded sampling are the only
geometric primitives the rest of the package needs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Points closer than this to the boundary are rejected as members.
MEMBERSHIP_TOL = 1e-12

# Smallest boundary gap reachable by sampling and refinement.
GAP_FLOOR = 1e-9

_KINDS = ("disk", "ball", "polydisk")


class DomainError(ValueError):
    """Point outside the open domain (or hugging its boundary)."""


@dataclass(frozen=True)
class DomainSpec:
    """One of the three supported domains together with its complex dimension."""

    kind: str
    dim: int = 1

    def __post_init__(self) -> None:
        if self.kind not in _KINDS:
            raise ValueError(f"unknown domain kind {self.kind!r}; expected one of {_KINDS}")
        if not isinstance(self.dim, int) or self.dim < 1:
            raise ValueError("dim must be a positive integer")
        if self.kind == "disk" and self.dim != 1:
            raise ValueError("the disk is one-dimensional; use 'ball' or 'polydisk' for dim > 1")

    @property
    def is_round(self) -> bool:
        """True when the boundary is a euclidean sphere (disk and ball)."""
        return self.kind in ("disk", "ball")


def disk() -> DomainSpec:
    return DomainSpec("disk", 1)


def ball(dim: int) -> DomainSpec:
    return DomainSpec("ball", dim)


def polydisk(dim: int) -> DomainSpec:
    return DomainSpec("polydisk", dim)


# ---------------------------------------------------------------------------
# point handling


def as_point(domain: DomainSpec, z) -> np.ndarray:
    """Coerce to a (dim,) complex vector."""
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    if z.shape != (domain.dim,):
        raise ValueError(f"expected a point with {domain.dim} coordinates, got shape {z.shape}")
    return z


def as_points(domain: DomainSpec, Z) -> np.ndarray:
    """Coerce to an (n, dim) complex array of points."""
    Z = np.asarray(Z, dtype=np.complex128)
    if Z.ndim == 1:
        Z = Z[None, :]
    if Z.ndim != 2 or Z.shape[1] != domain.dim:
        raise ValueError(f"expected points with {domain.dim} coordinates, got shape {Z.shape}")
    return np.ascontiguousarray(Z)


def boundary_gap_batch(domain: DomainSpec, Z: np.ndarray) -> np.ndarray:
    """Distance-to-boundary surrogate: 1 - ||z|| (round) or min_j(1 - |z_j|)."""
    if domain.is_round:
        return 1.0 - np.linalg.norm(Z, axis=1)
    return 1.0 - np.max(np.abs(Z), axis=1)


def boundary_gap(domain: DomainSpec, z) -> float:
    z = as_point(domain, z)
    gap = float(boundary_gap_batch(domain, z[None, :])[0])
    if gap < MEMBERSHIP_TOL:
        raise DomainError(f"point at boundary gap {gap:.3e} is outside the open {domain.kind}")
    return gap


def contains_batch(domain: DomainSpec, Z: np.ndarray) -> np.ndarray:
    return boundary_gap_batch(domain, Z) >= MEMBERSHIP_TOL


def require_inside(domain: DomainSpec, z) -> np.ndarray:
    z = as_point(domain, z)
    if not contains_batch(domain, z[None, :])[0]:
        raise DomainError(f"point {z} lies outside the open {domain.kind} (tolerance {MEMBERSHIP_TOL})")
    return z


# ---------------------------------------------------------------------------
# metric forms


def metric_forms(domain: DomainSpec, Z: np.ndarray) -> np.ndarray:
    """Gram matrices G_z of the invariant metric, shape (n, dim, dim)."""
    n, d = Z.shape
    if domain.kind in ("disk", "polydisk"):
        diag = 1.0 / (1.0 - np.abs(Z) ** 2) ** 2
        G = np.zeros((n, d, d), dtype=np.complex128)
        idx = np.arange(d)
        G[:, idx, idx] = diag
        return G
    s = np.sum(np.abs(Z) ** 2, axis=1)
    eye = np.eye(d, dtype=np.complex128)
    zz = Z[:, :, None] * np.conj(Z[:, None, :])
    return ((1.0 - s)[:, None, None] * eye + zz) / (1.0 - s)[:, None, None] ** 2


def metric_form(domain: DomainSpec, z) -> np.ndarray:
    z = require_inside(domain, z)
    return metric_forms(domain, z[None, :])[0]


def _ball_rank_one_coeff(s: np.ndarray, coeff: np.ndarray) -> np.ndarray:
    """Safe coefficient for the z z* term (any finite value works at s = 0)."""
    return np.where(s == 0.0, 0.0, coeff / np.where(s == 0.0, 1.0, s))


def gram_sqrt_batch(domain: DomainSpec, Z: np.ndarray) -> np.ndarray:
    """Hermitian square roots G_z^(1/2), shape (n, dim, dim)."""
    n, d = Z.shape
    if domain.kind in ("disk", "polydisk"):
        diag = 1.0 / (1.0 - np.abs(Z) ** 2)
        G = np.zeros((n, d, d), dtype=np.complex128)
        idx = np.arange(d)
        G[:, idx, idx] = diag
        return G
    s = np.sum(np.abs(Z) ** 2, axis=1)
    r = np.sqrt(1.0 - s)
    eye = np.eye(d, dtype=np.complex128)
    zz = Z[:, :, None] * np.conj(Z[:, None, :])
    c = _ball_rank_one_coeff(s, (1.0 - r) / (1.0 - s))
    return (r / (1.0 - s))[:, None, None] * eye + c[:, None, None] * zz


def gram_inv_sqrt_batch(domain: DomainSpec, Z: np.ndarray) -> np.ndarray:
    """Hermitian inverse square roots G_z^(-1/2)."""
    n, d = Z.shape
    if domain.kind in ("disk", "polydisk"):
        diag = 1.0 - np.abs(Z) ** 2
        G = np.zeros((n, d, d), dtype=np.complex128)
        idx = np.arange(d)
        G[:, idx, idx] = diag
        return G
    s = np.sum(np.abs(Z) ** 2, axis=1)
    r = np.sqrt(1.0 - s)
    eye = np.eye(d, dtype=np.complex128)
    zz = Z[:, :, None] * np.conj(Z[:, None, :])
    c = _ball_rank_one_coeff(s, (1.0 - s) - r)
    return r[:, None, None] * eye + c[:, None, None] * zz


def apply_gram_inv(domain: DomainSpec, Z: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Apply G_z^(-1) to vectors X of shape (n, dim)."""
    if domain.kind in ("disk", "polydisk"):
        return X * (1.0 - np.abs(Z) ** 2) ** 2
    s = np.sum(np.abs(Z) ** 2, axis=1)
    inner = np.sum(np.conj(Z) * X, axis=1)
    return (1.0 - s)[:, None] * (X - inner[:, None] * Z)


# ---------------------------------------------------------------------------
# distance to the origin


def distance_origin_batch(domain: DomainSpec, Z: np.ndarray) -> np.ndarray:
    """Invariant distance to the origin.

    Disk and ball: arctanh of the euclidean norm.  Polydisk: the product-metric
    distance, the euclidean norm of the per-coordinate disk distances.
    """
    if domain.is_round:
        return np.arctanh(np.clip(np.linalg.norm(Z, axis=1), 0.0, 1.0 - 1e-17))
    per = np.arctanh(np.clip(np.abs(Z), 0.0, 1.0 - 1e-17))
    return np.sqrt(np.sum(per**2, axis=1))


def bergman_distance_origin(domain: DomainSpec, z) -> float:
    z = require_inside(domain, z)
    return float(distance_origin_batch(domain, z[None, :])[0])


def distance_origin_sum_bound_batch(domain: DomainSpec, Z: np.ndarray) -> np.ndarray:
    """Upper bound for the distance to 0: sum of per-coordinate disk distances."""
    if domain.is_round:
        return distance_origin_batch(domain, Z)
    return np.sum(np.arctanh(np.clip(np.abs(Z), 0.0, 1.0 - 1e-17)), axis=1)


# ---------------------------------------------------------------------------
# sampling

_STRATEGIES = ("uniform", "boundary_biased", "shell")


def _rng(seed: int, tag: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, tag]))


def _unit_directions(rng: np.random.Generator, count: int, dim: int) -> np.ndarray:
    v = rng.normal(size=(count, 2 * dim))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v[:, :dim] + 1j * v[:, dim:]


def _uniform_disk(rng: np.random.Generator, count: int, rmax: np.ndarray | float = 1.0) -> np.ndarray:
    r = np.sqrt(rng.uniform(size=count)) * rmax
    th = rng.uniform(0.0, 2.0 * np.pi, size=count)
    return r * np.exp(1j * th)


def sample(
    domain: DomainSpec,
    strategy: str,
    count: int,
    seed: int,
    delta: float | None = None,
) -> np.ndarray:
    """Deterministic point sets; identical arguments give identical arrays.

    ``uniform`` draws from the normalised volume measure.  ``boundary_biased``
    makes the boundary gap log-uniform on [1e-9, 1].  ``shell`` makes the gap
    log-uniform on [delta/10, delta), so every point has gap < delta.
    """
    if strategy not in _STRATEGIES:
        raise ValueError(f"unknown sampling strategy {strategy!r}")
    if count < 1:
        raise ValueError("count must be >= 1")
    if strategy == "shell":
        if delta is None or not (0.0 < delta < 1.0):
            raise ValueError("shell sampling needs 0 < delta < 1")
    d = domain.dim
    rng = _rng(seed, _STRATEGIES.index(strategy) + 1)

    if strategy == "uniform":
        if domain.is_round:
            r = rng.uniform(size=count) ** (1.0 / (2 * d))
            return r[:, None] * _unit_directions(rng, count, d)
        return np.column_stack([_uniform_disk(rng, count) for _ in range(d)])

    if strategy == "boundary_biased":
        gap = 10.0 ** (-9.0 * rng.uniform(size=count))
    else:
        gap = delta * 10.0 ** (rng.uniform(size=count) - 1.0)

    if domain.is_round:
        return (1.0 - gap)[:, None] * _unit_directions(rng, count, d)

    # polydisk: one coordinate carries the prescribed gap, the others stay
    # strictly further from the boundary so the total gap is exact
    Z = np.column_stack([_uniform_disk(rng, count, rmax=(1.0 - gap)) for _ in range(d)])
    cols = rng.integers(0, d, size=count)
    th = rng.uniform(0.0, 2.0 * np.pi, size=count)
    Z[np.arange(count), cols] = (1.0 - gap) * np.exp(1j * th)
    return Z


# ---------------------------------------------------------------------------
# projections used by the refinement machinery


def clamp_gap_batch(domain: DomainSpec, Z: np.ndarray, lo: float, hi: float | None = None) -> np.ndarray:
    """Rescale points so the boundary gap lands in [lo, hi).

    Round domains rescale radially; the polydisk rescales the offending
    coordinates (all too-close ones for the lower clamp, the minimal-gap one
    for the upper clamp).
    """
    Z = Z.copy()
    if domain.is_round:
        nrm = np.linalg.norm(Z, axis=1)
        gap = 1.0 - nrm
        target = np.clip(gap, lo, None if hi is None else hi * (1.0 - 1e-9))
        need = target != gap
        if np.any(need):
            safe = np.where(nrm == 0.0, 1.0, nrm)
            scale = np.where(need, (1.0 - target) / safe, 1.0)
            Z *= scale[:, None]
            # points at the origin cannot be pushed outward radially
            at0 = need & (nrm == 0.0)
            if np.any(at0):
                Z[at0, 0] = 1.0 - target[at0]
        return Z
    radii = np.abs(Z)
    # lower clamp: pull every too-close coordinate in
    too_close = radii > 1.0 - lo
    if np.any(too_close):
        safe = np.where(radii == 0.0, 1.0, radii)
        scale = np.where(too_close, (1.0 - lo) / safe, 1.0)
        Z *= scale
    if hi is not None:
        gap = 1.0 - np.max(np.abs(Z), axis=1)
        target = hi * (1.0 - 1e-9)
        need = gap >= hi
        if np.any(need):
            j = np.argmax(np.abs(Z), axis=1)
            rows = np.nonzero(need)[0]
            zj = Z[rows, j[rows]]
            r = np.abs(zj)
            phase = np.where(r == 0.0, 1.0 + 0j, zj / np.where(r == 0.0, 1.0, r))
            Z[rows, j[rows]] = (1.0 - target) * phase
    return Z
