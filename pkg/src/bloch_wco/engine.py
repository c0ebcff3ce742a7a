"""Seeded estimation engine: global suprema, boundary limsups and divergence flags.

Estimates are maxima over evaluated points (never extrapolated), polished by
deterministic coordinate-wise golden-style ascent.  Divergence is decided by
regressing per-shell suprema against log10(1/gap); boundary limsups are
decided from cumulative shell suprema of the field over points whose trigger
quantity has entered each shell.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .domains import (
    GAP_FLOOR,
    DomainSpec,
    boundary_gap_batch,
    clamp_gap_batch,
    sample,
)

FieldFn = Callable[[np.ndarray], tuple[np.ndarray, np.ndarray]]

# flat-slope coefficient of the finiteness rule; divergence needs 5x the slope
FINITE_SLOPE_COEFF = 0.02
DIVERGENT_SLOPE_FACTOR = 5.0

# limsup verdict thresholds on the innermost cumulative shell supremum
LIMSUP_ZERO_TOL = 5e-3
LIMSUP_POSITIVE_TOL = 1e-1

_SINGULAR_FRACTION_LIMIT = 0.01


class EngineError(RuntimeError):
    """Estimation failed (typically too many singular sample evaluations)."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class SupConfig:
    """Engine configuration; identical configs give bitwise-identical results."""

    seed: int = 42
    n_uniform: int = 20000
    n_boundary: int = 20000
    shells: tuple[float, ...] = (1e-2, 1e-3, 1e-4, 1e-5, 1e-6)
    refine_top_k: int = 16
    refine_iters: int = 60
    tol: float = 1e-6
    n_shell: int = 2000
    min_shell_points: int = 200
    mutation_rounds: int = 8
    mutations_per_round: int = 512

    def __post_init__(self) -> None:
        if self.n_uniform < 1 or self.n_boundary < 1 or self.n_shell < 1:
            raise ValueError("sample counts must be >= 1")
        if not self.shells:
            raise ValueError("at least one shell is required")
        prev = 1.0
        for d in self.shells:
            if not (0.0 < d < 1.0) or d >= prev:
                raise ValueError("shells must be strictly decreasing within (0, 1)")
            prev = d
        if self.refine_top_k < 1 or self.refine_iters < 0:
            raise ValueError("refine_top_k must be >= 1 and refine_iters >= 0")
        if self.tol <= 0:
            raise ValueError("tol must be positive")

    def replace(self, **kw) -> "SupConfig":
        from dataclasses import replace

        return replace(self, **kw)


@dataclass
class SupEstimate:
    value: float
    witness: np.ndarray
    shell_table: tuple[tuple[float, float | None], ...]
    converged: bool
    divergent: bool
    slope: float
    n_evals: int
    n_singular: int

    @property
    def settled(self) -> bool:
        return self.converged or self.divergent


@dataclass
class LimsupEstimate:
    shell_table: tuple[tuple[float, float | None], ...]
    shell_counts: tuple[int, ...]
    slope: float
    verdict: str  # zero | positive | inconclusive
    note: str = ""
    min_trigger: float = float("nan")
    witness: np.ndarray | None = None
    n_evals: int = 0


def _dseed(seed: int, tag: int) -> int:
    return int(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, int(tag)]).generate_state(1)[0])


def _rng(seed: int, *tags: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed) & 0xFFFFFFFF, *map(int, tags)]))


# ---------------------------------------------------------------------------
# coordinate-wise ascent


def _ascent(
    objective: FieldFn,
    X0: np.ndarray,
    project: Callable[[np.ndarray], np.ndarray],
    iters: int,
    h0: float = 0.25,
    record: list | None = None,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Maximise the objective from each row of X0 by per-coordinate line probes.

    Keeps the best evaluated point per candidate; the step shrinks for a
    candidate whenever a full sweep over its 2*dim real coordinates fails to
    improve it.  Deterministic, and a longer run extends a shorter one.
    """
    X = project(np.array(X0, dtype=np.complex128, copy=True))
    vals, ok = objective(X)
    best = np.where(ok, vals, -np.inf)
    if record is not None:
        record.append((X.copy(), np.where(ok, vals, np.nan)))
    k, d = X.shape
    h = np.full(k, h0)
    n_evals = k
    for _ in range(iters):
        improved = np.zeros(k, dtype=bool)
        for c in range(2 * d):
            for sgn in (1.0, -1.0):
                Xc = X.copy()
                if c < d:
                    Xc[:, c] += sgn * h
                else:
                    Xc[:, c - d] += 1j * sgn * h
                Xc = project(Xc)
                v, okc = objective(Xc)
                n_evals += k
                v = np.where(okc, v, -np.inf)
                if record is not None:
                    record.append((Xc.copy(), np.where(okc, v, np.nan)))
                upd = v > best
                if np.any(upd):
                    X[upd] = Xc[upd]
                    best[upd] = v[upd]
                    improved |= upd
        h = np.where(improved, h, 0.5 * h)
    return best, X, n_evals


def _top_k(vals: np.ndarray, ok: np.ndarray, k: int) -> np.ndarray:
    """Indices of the k largest valid entries, best first, ties by lowest index."""
    masked = np.where(ok, vals, -np.inf)
    order = np.argsort(-masked, kind="stable")
    order = order[np.isfinite(masked[order])]
    return order[:k]


def _shell_slope(shells, sups) -> tuple[float, float]:
    xs, ys = [], []
    for d, s in zip(shells, sups):
        if s is not None:
            xs.append(-np.log10(d))
            ys.append(s)
    if len(xs) < 2:
        return float("nan"), -np.inf
    slope = float(np.polyfit(xs, ys, 1)[0])
    return slope, float(max(ys))


def _flags(shells, sups) -> tuple[bool, bool, float]:
    slope, max_sup = _shell_slope(shells, sups)
    if not np.isfinite(slope):
        return False, False, slope
    thr = FINITE_SLOPE_COEFF * (max_sup + 1.0)
    divergent = slope > DIVERGENT_SLOPE_FACTOR * thr
    populated = all(s is not None for s in sups)
    converged = (not divergent) and slope < thr and populated
    return converged, divergent, slope


# ---------------------------------------------------------------------------
# global supremum


def sup_estimate(field: FieldFn, domain: DomainSpec, cfg: SupConfig) -> SupEstimate:
    """Seeded supremum estimate of a pointwise field over the domain."""
    blocks = [
        sample(domain, "uniform", cfg.n_uniform, _dseed(cfg.seed, 1)),
        sample(domain, "boundary_biased", cfg.n_boundary, _dseed(cfg.seed, 2)),
    ]
    for i, delta in enumerate(cfg.shells):
        blocks.append(sample(domain, "shell", cfg.n_shell, _dseed(cfg.seed, 3 + i), delta=delta))
    Z = np.vstack(blocks)
    vals, ok = field(Z)
    n_evals = len(Z)
    n_singular = int(np.sum(~ok))
    if n_singular > _SINGULAR_FRACTION_LIMIT * len(Z):
        bad = int(np.nonzero(~ok)[0][0])
        raise EngineError(
            f"{n_singular}/{len(Z)} sample evaluations were singular", witness=Z[bad]
        )
    masked = np.where(ok, vals, -np.inf)
    best_i = int(np.argmax(masked))
    value = float(masked[best_i])
    witness = Z[best_i].copy()

    gaps = boundary_gap_batch(domain, Z)
    shell_sups: list[float | None] = []
    shell_cands: list[np.ndarray] = []
    shell_ids: list[int] = []
    for i, delta in enumerate(cfg.shells):
        mask = ok & (gaps >= delta / 10.0) & (gaps < delta)
        if np.any(mask):
            idx = np.nonzero(mask)[0]
            sub = idx[_top_k(vals[idx], np.ones(len(idx), dtype=bool), 4)]
            shell_sups.append(float(np.max(masked[idx])))
            for j in sub:
                shell_cands.append(Z[j])
                shell_ids.append(i)
        else:
            shell_sups.append(None)

    if cfg.refine_iters > 0:
        # global polish, free to approach the boundary down to the gap floor
        top = _top_k(vals, ok, cfg.refine_top_k)
        if len(top):
            proj = lambda X: clamp_gap_batch(domain, X, GAP_FLOOR)
            b, Xb, ne = _ascent(field, Z[top], proj, cfg.refine_iters)
            n_evals += ne
            j = int(np.argmax(b))
            if b[j] > value:
                value = float(b[j])
                witness = Xb[j].copy()
        # per-shell polish, clamped to each shell's gap band
        if shell_cands:
            X0 = np.asarray(shell_cands)
            ids = np.asarray(shell_ids)

            def proj_shell(X: np.ndarray) -> np.ndarray:
                out = X.copy()
                for i in np.unique(ids):
                    delta = cfg.shells[i]
                    rows = ids == i
                    out[rows] = clamp_gap_batch(domain, X[rows], delta / 10.0, delta)
                return out

            b, Xb, ne = _ascent(field, X0, proj_shell, cfg.refine_iters)
            n_evals += ne
            for i in np.unique(ids):
                rows = np.nonzero(ids == i)[0]
                s = float(np.max(b[rows]))
                if np.isfinite(s):
                    cur = shell_sups[i]
                    shell_sups[i] = s if cur is None else max(cur, s)
            j = int(np.argmax(b))
            if b[j] > value:
                value = float(b[j])
                witness = Xb[j].copy()

    converged, divergent, slope = _flags(cfg.shells, shell_sups)
    table = tuple((float(d), (None if s is None else float(s))) for d, s in zip(cfg.shells, shell_sups))
    return SupEstimate(value, witness, table, converged, divergent, slope, n_evals, n_singular)


# ---------------------------------------------------------------------------
# boundary limsup along a trigger quantity


def _project_to_gap(domain: DomainSpec, Z: np.ndarray, g: np.ndarray) -> np.ndarray:
    """Rescale each row so its boundary gap equals the matching entry of g."""
    Z = Z.copy()
    if domain.is_round:
        nrm = np.linalg.norm(Z, axis=1)
        safe = np.where(nrm == 0.0, 1.0, nrm)
        Z *= ((1.0 - g) / safe)[:, None]
        at0 = nrm == 0.0
        if np.any(at0):
            Z[at0, 0] = 1.0 - g[at0]
        return Z
    radii = np.abs(Z)
    cap = (1.0 - g)[:, None]
    factor = np.minimum(1.0, cap / np.where(radii == 0.0, 1.0, radii))
    Z *= factor
    rows = np.arange(len(Z))
    j = np.argmax(np.abs(Z), axis=1)
    zj = Z[rows, j]
    r = np.abs(zj)
    phase = np.where(r == 0.0, 1.0 + 0j, zj / np.where(r == 0.0, 1.0, r))
    Z[rows, j] = (1.0 - g) * phase
    return Z


def _mutate(
    rng: np.random.Generator,
    seeds: np.ndarray,
    seed_gaps: np.ndarray,
    count: int,
    scale: float,
    domain: DomainSpec,
) -> np.ndarray:
    """Perturb seed points; half free (interior-clamped), half gap-preserving."""
    k = len(seeds)
    pick = rng.integers(0, k, size=count)
    base = seeds[pick]
    noise = rng.normal(size=(count, seeds.shape[1])) + 1j * rng.normal(size=(count, seeds.shape[1]))
    props = base + scale * noise
    props = clamp_gap_batch(domain, props, GAP_FLOOR)
    half = count // 2
    if half:
        g = np.maximum(seed_gaps[pick[:half]], GAP_FLOOR)
        props[:half] = _project_to_gap(domain, props[:half], g)
    return props


def shell_limsup(
    field: FieldFn,
    trigger: FieldFn,
    domain: DomainSpec,
    cfg: SupConfig,
) -> LimsupEstimate:
    """Cumulative shell suprema of ``field`` as ``trigger`` tends to zero.

    The shell at delta collects every sampled point with trigger < delta.
    Points are found by direct sampling, by deterministic descent of the
    trigger, and by seeded mutation around the best points found so far; an
    innermost shell that stays empty after the budget means the trigger is
    bounded away from zero, and the limsup is vacuously zero.
    """
    pool = np.vstack(
        [
            sample(domain, "uniform", cfg.n_uniform, _dseed(cfg.seed, 11)),
            sample(domain, "boundary_biased", cfg.n_boundary, _dseed(cfg.seed, 12)),
        ]
    )
    tvals, tok = trigger(pool)
    n_evals = len(pool)
    pts = [pool[tok]]
    trig = [tvals[tok]]

    # descend the trigger to seed the inner shells
    if np.any(tok):
        idx = _top_k(-tvals, tok, 8)
        record: list = []

        def neg_trigger(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
            v, o = trigger(X)
            return -v, o

        _, _, ne = _ascent(
            neg_trigger,
            pool[idx],
            lambda X: clamp_gap_batch(domain, X, GAP_FLOOR),
            cfg.refine_iters,
            record=record,
        )
        n_evals += ne
        for Xc, v in record:
            good = np.isfinite(v)
            pts.append(Xc[good])
            trig.append(-v[good])

    P = np.vstack(pts)
    T = np.concatenate(trig)
    if len(T) == 0:
        table = tuple((float(d), None) for d in cfg.shells)
        return LimsupEstimate(
            table,
            tuple(0 for _ in cfg.shells),
            float("nan"),
            "inconclusive",
            "trigger evaluation failed at every sample",
            float("nan"),
            None,
            n_evals,
        )
    min_trigger = float(np.min(T))

    # mutation rounds until each shell holds enough points
    for k, delta in enumerate(cfg.shells):
        for rnd in range(cfg.mutation_rounds):
            if int(np.sum(T < delta)) >= cfg.min_shell_points:
                break
            rng = _rng(cfg.seed, 13, k, rnd)
            inside = np.nonzero(T < delta)[0]
            if len(inside) == 0:
                order = np.argsort(T, kind="stable")[:64]
            else:
                order = inside[np.argsort(T[inside], kind="stable")[::-1][:64]]
            seeds = P[order]
            sgaps = boundary_gap_batch(domain, seeds)
            scales = [delta / 3.0, delta, 3.0 * delta, np.sqrt(delta) / 3.0, np.sqrt(delta)]
            per = max(cfg.mutations_per_round // len(scales), 1)
            for si, sc in enumerate(scales):
                props = _mutate(_rng(cfg.seed, 14, k, rnd, si), seeds, sgaps, per, sc, domain)
                tv, to = trigger(props)
                n_evals += len(props)
                keep = to & (tv < delta)
                if np.any(keep):
                    P = np.vstack([P, props[keep]])
                    T = np.concatenate([T, tv[keep]])
            min_trigger = min(min_trigger, float(np.min(T)))

    outer = cfg.shells[0]
    cand = np.nonzero(T < outer)[0]
    counts = [int(np.sum(T < d)) for d in cfg.shells]
    sups: list[float | None] = [None] * len(cfg.shells)
    best_pts: list[np.ndarray | None] = [None] * len(cfg.shells)
    if len(cand):
        fv, fo = field(P[cand])
        n_evals += len(cand)
        masked = np.where(fo, fv, -np.inf)
        for i, delta in enumerate(cfg.shells):
            rows = np.nonzero((T[cand] < delta) & fo)[0]
            if len(rows) == 0:
                continue
            j = rows[int(np.argmax(masked[rows]))]
            sups[i] = float(masked[j])
            best_pts[i] = P[cand[j]].copy()
            # constrained polish of the best members of the shell
            if cfg.refine_iters > 0:
                top = rows[_top_k(masked[rows], np.ones(len(rows), dtype=bool), 4)]

                def feasible_field(X: np.ndarray, _d=delta) -> tuple[np.ndarray, np.ndarray]:
                    v, o = field(X)
                    tv, to = trigger(X)
                    good = o & to & (tv < _d)
                    return np.where(good, v, -np.inf), good

                b, Xb, ne = _ascent(
                    feasible_field,
                    P[cand[top]],
                    lambda X: clamp_gap_batch(domain, X, GAP_FLOOR),
                    cfg.refine_iters,
                )
                n_evals += 2 * ne  # each probe evaluates field and trigger
                s = float(np.max(b))
                if np.isfinite(s) and s > sups[i]:
                    sups[i] = s
                    best_pts[i] = Xb[int(np.argmax(b))].copy()
        # cumulative: sup over {trigger < delta} includes every inner shell
        for i in range(len(sups) - 2, -1, -1):
            if sups[i + 1] is not None and (sups[i] is None or sups[i + 1] > sups[i]):
                sups[i] = sups[i + 1]
                best_pts[i] = best_pts[i + 1]
    # the verdict is driven by the innermost populated shell
    witness = next((p for p in reversed(best_pts) if p is not None), None)

    slope, _ = _shell_slope(cfg.shells, sups)
    table = tuple((float(d), (None if s is None else float(s))) for d, s in zip(cfg.shells, sups))

    if counts[-1] == 0:
        note = "empty-shell: range bounded away from boundary"
        return LimsupEstimate(table, tuple(counts), slope, "zero", note, min_trigger, witness, n_evals)
    inner = sups[-1]
    tail = [s for _, s in table[-3:] if s is not None]
    non_increasing = all(tail[i] >= tail[i + 1] - 1e-12 for i in range(len(tail) - 1))
    if inner is not None and inner > LIMSUP_POSITIVE_TOL:
        verdict = "positive"
    elif (
        inner is not None
        and inner < LIMSUP_ZERO_TOL
        and counts[-1] >= cfg.min_shell_points
        and non_increasing
    ):
        verdict = "zero"
    else:
        verdict = "inconclusive"
    return LimsupEstimate(table, tuple(counts), slope, verdict, "", min_trigger, witness, n_evals)
