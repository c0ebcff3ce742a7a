"""Bloch-space quantities: invariant gradient, semi-norm, sup norm, point evaluation.

The invariant gradient Q_f(z) is the norm of the holomorphic gradient measured
against the domain metric; closed forms are used per domain and a generic
Rayleigh fallback (through the inverse metric form) is kept for cross checks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import backends, dictionary
from .domains import (
    DomainSpec,
    clamp_gap_batch,
    distance_origin_batch,
    metric_forms,
    require_inside,
    sample,
)
from .engine import SupConfig, SupEstimate, _ascent, _dseed, _top_k
from .expr import ScalarMap, SingularityError
from .tape import compile_expr

# shell-decay diagnostic thresholds: verdict "decays" needs the innermost
# shell supremum below TOL_DECAY, "persists" needs it above TOL_PERSIST
TOL_DECAY = 5e-3
TOL_PERSIST = 1e-1

DEFAULT_DECAY_SHELLS = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)


def q_from_grads(domain: DomainSpec, Z: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Closed-form invariant gradient from holomorphic gradients (batch)."""
    if domain.kind == "disk":
        return (1.0 - np.abs(Z[:, 0]) ** 2) * np.abs(grads[:, 0])
    if domain.kind == "polydisk":
        w = (1.0 - np.abs(Z) ** 2) * np.abs(grads)
        return np.sqrt(np.sum(w**2, axis=1))
    s = np.sum(np.abs(Z) ** 2, axis=1)
    norm2 = np.sum(np.abs(grads) ** 2, axis=1)
    radial = np.abs(np.sum(Z * grads, axis=1)) ** 2
    return np.sqrt((1.0 - s) * np.maximum(norm2 - radial, 0.0))


def rayleigh_q_from_grads(domain: DomainSpec, Z: np.ndarray, grads: np.ndarray) -> np.ndarray:
    """Generic invariant gradient sqrt(g* G_z^{-1} g) with g = conj(grad f)."""
    G = metric_forms(domain, Z)
    g = np.conj(grads)
    sol = np.linalg.solve(G, g[:, :, None])[:, :, 0]
    quad = np.real(np.sum(np.conj(g) * sol, axis=1))
    return np.sqrt(np.maximum(quad, 0.0))


def q_f(f: ScalarMap, domain: DomainSpec, z) -> float:
    """Invariant gradient of f at a single interior point."""
    z = require_inside(domain, z)
    jet = f.jet(z)
    return float(q_from_grads(domain, z[None, :], jet.grad[None, :])[0])


def q_field(f: ScalarMap, domain: DomainSpec):
    """Batch field z -> Q_f(z) built on the tape backends."""
    t = compile_expr(f.expr, domain.dim)

    def field(Z: np.ndarray):
        vals, grads, ok = backends.eval_jets(t, Z)
        q = q_from_grads(domain, Z, np.where(ok[:, None], grads, 0.0))
        return np.where(ok, q, np.nan), ok

    return field


def abs_field(f: ScalarMap, domain: DomainSpec):
    """Batch field z -> |f(z)|."""
    t = compile_expr(f.expr, domain.dim)

    def field(Z: np.ndarray):
        vals, ok = backends.eval_values(t, Z)
        return np.where(ok, np.abs(vals), np.nan), ok

    return field


def beta_sup(f: ScalarMap, domain: DomainSpec, cfg: SupConfig) -> SupEstimate:
    """Supremum estimate of the invariant gradient (the Bloch semi-norm)."""
    from .engine import sup_estimate

    return sup_estimate(q_field(f, domain), domain, cfg)


def bloch_norm(f: ScalarMap, domain: DomainSpec, cfg: SupConfig) -> tuple[float, SupEstimate]:
    """|f(0)| plus the semi-norm estimate."""
    est = beta_sup(f, domain, cfg)
    f0 = abs(f.eval(np.zeros(domain.dim, dtype=np.complex128)))
    return float(f0 + est.value), est


def hinf_sup(f: ScalarMap, domain: DomainSpec, cfg: SupConfig) -> SupEstimate:
    """Supremum estimate of |f|, with shell-growth divergence detection."""
    from .engine import sup_estimate

    return sup_estimate(abs_field(f, domain), domain, cfg)


# ---------------------------------------------------------------------------
# extremal point evaluation


@dataclass(frozen=True)
class OmegaValue:
    """Extremal point evaluation over normalised functions vanishing at 0."""

    lower: float
    upper: float
    exact: bool

    @property
    def value(self) -> float:
        return self.upper


def omega(domain: DomainSpec, z) -> OmegaValue:
    """Exact on disk and ball (equal to the distance to 0); an interval on the polydisk.

    The polydisk upper endpoint is the product-metric distance; the lower
    endpoint sweeps the built-in dictionary of normalised members vanishing
    at the origin.
    """
    z = require_inside(domain, z)
    dist = float(distance_origin_batch(domain, z[None, :])[0])
    if domain.is_round:
        return OmegaValue(dist, dist, True)
    lower = 0.0
    for m in dictionary.point_evaluation_members(domain, z):
        if m.beta_bound <= 0:
            continue
        try:
            v = abs(m.scalar_map().eval(z)) / m.beta_bound
        except SingularityError:
            continue
        lower = max(lower, float(v))
    return OmegaValue(min(lower, dist), dist, False)


def omega_upper_batch(domain: DomainSpec, W: np.ndarray) -> np.ndarray:
    """Upper endpoint of omega on a batch of points (exact value where known)."""
    return distance_origin_batch(domain, W)


# ---------------------------------------------------------------------------
# boundary decay diagnostic


@dataclass
class DecayReport:
    shell_sups: tuple[tuple[float, float | None], ...]
    verdict: str  # decays | persists | inconclusive


def little_bloch_decay(
    f: ScalarMap,
    domain: DomainSpec,
    shells: tuple[float, ...] = DEFAULT_DECAY_SHELLS,
    cfg: SupConfig | None = None,
) -> DecayReport:
    """Shell suprema of the invariant gradient near the boundary.

    ``decays`` needs the innermost shell supremum under TOL_DECAY with the
    final three shells non-increasing; suprema stabilising above TOL_PERSIST
    mean the gradient persists at the boundary.
    """
    prev = 1.0
    for d in shells:
        if not (0.0 < d < 1.0) or d >= prev:
            raise ValueError("shells must be strictly decreasing within (0, 1)")
        prev = d
    cfg = cfg or SupConfig()
    field = q_field(f, domain)
    sups: list[float | None] = []
    for i, delta in enumerate(shells):
        Z = sample(domain, "shell", cfg.n_shell, _dseed(cfg.seed, 40 + i), delta=delta)
        vals, ok = field(Z)
        if not np.any(ok):
            sups.append(None)
            continue
        masked = np.where(ok, vals, -np.inf)
        best = float(np.max(masked))
        if cfg.refine_iters > 0:
            top = _top_k(vals, ok, 4)
            proj = lambda X, _d=delta: clamp_gap_batch(domain, X, _d / 10.0, _d)
            b, _, _ = _ascent(field, Z[top], proj, cfg.refine_iters)
            best = max(best, float(np.max(b)))
        sups.append(best)
    table = tuple((float(d), s) for d, s in zip(shells, sups))
    inner = sups[-1]
    tail = [s for s in sups[-3:] if s is not None]
    non_increasing = all(tail[i] >= tail[i + 1] - 1e-12 for i in range(len(tail) - 1))
    if inner is None:
        verdict = "inconclusive"
    elif inner < TOL_DECAY and non_increasing:
        verdict = "decays"
    elif inner > TOL_PERSIST:
        verdict = "persists"
    else:
        verdict = "inconclusive"
    return DecayReport(table, verdict)
