"""Command-line front end: analysis runs, field grids, the fixture suite, parse checks.

Exit codes: 0 on completion (whatever the verdicts), 2 on configuration or
expression errors, 3 on engine errors (failed self-map guard, singular
symbols, non-convergent solves).  All numeric output carries 9 significant
digits.  The environment variable BLOCH_WCO_SEED overrides the default seed;
an explicit --seed or a seed in the configuration file wins over it.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from dataclasses import dataclass

import numpy as np

from . import __version__
from .backends import active_backend
from .domains import DomainSpec, contains_batch, sample
from .engine import EngineError, LimsupEstimate, SupConfig, SupEstimate
from .expr import ParseError, ScalarMap, SelfMap, SingularityError, self_map_check
from .fixtures import format_table, run_suite
from .operators import (
    FieldContext,
    NumericalError,
    SymbolPair,
    b_phi_batch,
    classify_bounded,
    classify_compact,
    direct_norm_lower,
    hinf_target_report,
    norm_bounds,
    pointwise_fields,
)

DEFAULT_SEED = 42
_BLOCH_CHECKS = ("bounded", "compact", "norm_bounds", "direct_norm", "fields")
_HINF_CHECKS = ("bounded", "compact")


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class AnalysisConfig:
    domain: DomainSpec
    psi: str
    phi: list[str]
    target: str
    checks: tuple[str, ...]
    sup: SupConfig

    @classmethod
    def from_dict(cls, raw: dict, seed_override: int | None = None) -> "AnalysisConfig":
        if not isinstance(raw, dict):
            raise ConfigError("configuration must be a JSON object")
        try:
            dspec = raw["domain"]
            domain = DomainSpec(str(dspec["kind"]), int(dspec.get("dim", 1)))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"bad domain specification: {exc}") from exc
        psi = raw.get("psi")
        phi = raw.get("phi")
        if not isinstance(psi, str):
            raise ConfigError("psi must be an expression string")
        if not isinstance(phi, list) or not all(isinstance(p, str) for p in phi):
            raise ConfigError("phi must be a list of expression strings")
        if len(phi) != domain.dim:
            raise ConfigError(f"phi must have {domain.dim} components, got {len(phi)}")
        target = raw.get("target", "bloch")
        if target not in ("bloch", "hinf"):
            raise ConfigError(f"target must be 'bloch' or 'hinf', not {target!r}")
        allowed = _BLOCH_CHECKS if target == "bloch" else _HINF_CHECKS
        checks = tuple(raw.get("checks", allowed))
        if not checks:
            raise ConfigError("checks must be nonempty")
        for c in checks:
            if c not in allowed:
                raise ConfigError(f"unknown check {c!r} for target {target!r}")
        sup_raw = dict(raw.get("sup", {}))
        if "shells" in sup_raw:
            sup_raw["shells"] = tuple(float(x) for x in sup_raw["shells"])
        if seed_override is not None:
            sup_raw["seed"] = int(seed_override)
        elif "seed" not in sup_raw:
            sup_raw["seed"] = _env_seed()
        try:
            sup = SupConfig(**sup_raw)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"bad sup configuration: {exc}") from exc
        return cls(domain, psi, phi, target, checks, sup)

    def to_dict(self) -> dict:
        return {
            "domain": {"kind": self.domain.kind, "dim": self.domain.dim},
            "psi": self.psi,
            "phi": list(self.phi),
            "target": self.target,
            "checks": list(self.checks),
            "sup": {
                "seed": self.sup.seed,
                "n_uniform": self.sup.n_uniform,
                "n_boundary": self.sup.n_boundary,
                "shells": list(self.sup.shells),
                "refine_top_k": self.sup.refine_top_k,
                "refine_iters": self.sup.refine_iters,
                "tol": self.sup.tol,
                "n_shell": self.sup.n_shell,
            },
        }


def _env_seed() -> int:
    raw = os.environ.get("BLOCH_WCO_SEED")
    if raw is None:
        return DEFAULT_SEED
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(f"BLOCH_WCO_SEED must be an integer, got {raw!r}") from exc


def load_config(path: str, seed_override: int | None = None) -> AnalysisConfig:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return AnalysisConfig.from_dict(raw, seed_override)


def build_pair(config: AnalysisConfig) -> SymbolPair:
    try:
        psi = ScalarMap.parse(config.psi, config.domain.dim)
        phi = SelfMap.parse(config.phi, config.domain)
    except ParseError as exc:
        raise ConfigError(f"expression error: {exc}") from exc
    return SymbolPair(psi, phi, config.domain)


# ---------------------------------------------------------------------------
# serialization


def _round9(obj):
    if isinstance(obj, float):
        return float(f"{obj:.9g}") if math.isfinite(obj) else obj
    if isinstance(obj, dict):
        return {k: _round9(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_round9(v) for v in obj]
    return obj


def _point(z) -> list | None:
    if z is None:
        return None
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    return [[float(c.real), float(c.imag)] for c in z]


def _sup_dict(est: SupEstimate) -> dict:
    return {
        "value": float(est.value),
        "witness": _point(est.witness),
        "shell_table": [[float(d), None if s is None else float(s)] for d, s in est.shell_table],
        "converged": bool(est.converged),
        "divergent": bool(est.divergent),
        "slope": float(est.slope) if math.isfinite(est.slope) else None,
        "n_evals": int(est.n_evals),
        "n_singular": int(est.n_singular),
    }


def _limsup_dict(est: LimsupEstimate) -> dict:
    return {
        "shell_table": [[float(d), None if s is None else float(s)] for d, s in est.shell_table],
        "shell_counts": list(est.shell_counts),
        "slope": float(est.slope) if math.isfinite(est.slope) else None,
        "verdict": est.verdict,
        "note": est.note,
        "min_trigger": float(est.min_trigger) if math.isfinite(est.min_trigger) else None,
        "witness": _point(est.witness),
    }


def _criteria_dict(criteria: dict) -> dict:
    out = {}
    for name, est in criteria.items():
        out[name] = _sup_dict(est) if isinstance(est, SupEstimate) else _limsup_dict(est)
    return out


def _classification_dict(c) -> dict:
    return {
        "verdict": c.verdict,
        "rationale": c.rationale,
        "criteria": _criteria_dict(c.criteria),
        "beta_psi": None if c.beta_psi is None else _sup_dict(c.beta_psi),
        "driving": list(c.driving),
    }


# ---------------------------------------------------------------------------
# commands


def _probe_points(domain: DomainSpec, seed: int) -> np.ndarray:
    pts = [np.zeros((1, domain.dim), dtype=np.complex128)]
    pts.append(sample(domain, "uniform", 4, seed + 101))
    pts.append(sample(domain, "boundary_biased", 4, seed + 102))
    return np.vstack(pts)


def _fields_rows(pair: SymbolPair, seed: int) -> list[dict]:
    rows = []
    for z in _probe_points(pair.domain, seed):
        entry: dict = {"z": _point(z)}
        try:
            pf = pointwise_fields(pair, z)
        except (SingularityError, NumericalError) as exc:  # keep probing the rest
            entry["error"] = str(exc)
            rows.append(entry)
            continue
        entry.update(
            {
                "abs_psi": pf.abs_psi,
                "q_psi": pf.q_psi,
                "b_phi": pf.b_phi,
                "sigma": pf.sigma,
                "tau_upper": pf.tau_upper,
                "t_lower": pf.t_lower,
                "s_disk": pf.s_disk,
                "zc_log": pf.zc_log,
                "zc_jac": pf.zc_jac,
            }
        )
        rows.append(entry)
    return rows


def run_analyze(config: AnalysisConfig) -> dict:
    pair = build_pair(config)
    t_start = time.perf_counter()
    timing: dict[str, float] = {}

    t0 = time.perf_counter()
    guard = self_map_check(pair.phi, config.domain, seed=config.sup.seed + 7)
    timing["self_map_check"] = time.perf_counter() - t0
    guard_dict = {
        "pass": bool(guard.passed),
        "max_image_norm_proxy": float(guard.max_image_norm_proxy),
        "worst_point": _point(guard.worst_point),
        "n_checked": int(guard.n_checked),
        "note": guard.note,
    }
    if not guard.passed:
        raise EngineError(
            f"phi is not a self-map of the {config.domain.kind}: {guard.note} "
            f"(witness {guard_dict['worst_point']})",
            witness=guard.worst_point,
        )

    checks: dict = {}
    if config.target == "bloch":
        bounded = None
        if "bounded" in config.checks or "compact" in config.checks or "norm_bounds" in config.checks:
            t0 = time.perf_counter()
            bounded = classify_bounded(pair, config.sup)
            timing["bounded"] = time.perf_counter() - t0
        if "bounded" in config.checks:
            checks["bounded"] = _classification_dict(bounded)
            # sup-norm diagnostic of the weight: flags unbounded multipliers
            from .blochspace import hinf_sup

            psi_est = hinf_sup(pair.psi, config.domain, config.sup)
            checks["bounded"]["psi_hinf"] = _sup_dict(psi_est)
            checks["bounded"]["psi_hinf"]["verdict"] = (
                "divergent" if psi_est.divergent else ("finite" if psi_est.converged else "inconclusive")
            )
        if "compact" in config.checks:
            t0 = time.perf_counter()
            compact = classify_compact(pair, config.sup, bounded)
            timing["compact"] = time.perf_counter() - t0
            checks["compact"] = _classification_dict(compact)
        if "norm_bounds" in config.checks:
            t0 = time.perf_counter()
            nb = norm_bounds(pair, config.sup, bounded)
            timing["norm_bounds"] = time.perf_counter() - t0
            checks["norm_bounds"] = {
                "lower": nb.lower,
                "upper": nb.upper,
                "pieces": nb.pieces,
                "reliable": nb.reliable,
            }
        if "direct_norm" in config.checks:
            t0 = time.perf_counter()
            dn = direct_norm_lower(pair, config.sup)
            timing["direct_norm"] = time.perf_counter() - t0
            checks["direct_norm"] = {
                "value": dn.value,
                "best_member": dn.best_member,
                "per_member": dn.per_member,
            }
        if "fields" in config.checks:
            t0 = time.perf_counter()
            checks["fields"] = _fields_rows(pair, config.sup.seed)
            timing["fields"] = time.perf_counter() - t0
    else:
        t0 = time.perf_counter()
        rep = hinf_target_report(pair, config.sup, checks=config.checks)
        timing["hinf"] = time.perf_counter() - t0
        checks["hinf"] = {
            "bounded": rep.bounded,
            "norm": rep.norm,
            "compact": rep.compact,
            "rationale": rep.rationale,
            "psi_sup": _sup_dict(rep.psi_sup),
            "eta": _sup_dict(rep.eta),
            "eta_sum": None if rep.eta_sum is None else _sup_dict(rep.eta_sum),
            "compact_limsup": None if rep.compact_limsup is None else _limsup_dict(rep.compact_limsup),
        }

    timing["total"] = time.perf_counter() - t_start
    report = {
        "config": config.to_dict(),
        "engine": {"seed": config.sup.seed, "backend": active_backend(), "version": __version__},
        "self_map_check": guard_dict,
        "checks": checks,
        "timing_seconds": timing,
    }
    return _round9(report)


def emit_report(report: dict, out: str | None) -> None:
    text = json.dumps(report, indent=2) + "\n"
    if out:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"cannot write report to {out}: {exc}") from exc
    else:
        sys.stdout.write(text)


def run_fields_csv(config: AnalysisConfig, grid: int, out: str) -> None:
    """Field grid export for plotting; dim 1 scans re/im, dim 2 the real plane."""
    if grid < 2:
        raise ConfigError("grid must be at least 2")
    domain = config.domain
    if domain.dim > 2:
        raise ConfigError("grid export supports dim <= 2; use sampled probes ('fields' check) instead")
    pair = build_pair(config)
    ctx = FieldContext(pair)
    xs = np.linspace(-1.0, 1.0, grid)
    if domain.dim == 1:
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        Z = (X + 1j * Y).reshape(-1, 1)
    else:
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        Z = np.column_stack([X.reshape(-1), Y.reshape(-1)]).astype(np.complex128)
    inside = contains_batch(domain, Z)
    Z = Z[inside]
    b = ctx.base(Z)
    with np.errstate(all="ignore"):
        abs_psi = np.abs(b["psi"])
        q_psi, _ = ctx._field_q_psi(b, Z)
        bphi = b_phi_batch(domain, Z, b["phi"], b["J"])
        sigma, _ = ctx._field_sigma(b, Z)
        tau = abs_psi * bphi
    columns = []
    for j in range(domain.dim):
        columns.append((f"re_z{j + 1}", Z[:, j].real))
        columns.append((f"im_z{j + 1}", Z[:, j].imag))
    columns += [
        ("abs_psi", abs_psi),
        ("q_psi", q_psi),
        ("b_phi", bphi),
        ("sigma", sigma),
        ("tau_upper", tau),
    ]
    if domain.kind == "disk":
        columns.append(("s_disk", ctx._field_s_disk(b, Z)[0]))
    else:
        columns.append(("zc_log", ctx._field_zc_log(b, Z)[0]))
    if domain.kind == "polydisk":
        columns.append(("zc_jac", ctx._field_zc_jac(b, Z)[0]))
    with open(out, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow([name for name, _ in columns])
        data = [vals for _, vals in columns]
        for i in range(len(Z)):
            writer.writerow([f"{float(v[i]):.9g}" for v in data])


# ---------------------------------------------------------------------------
# entry point


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="bloch-wco",
        description="Weighted composition operators on Bloch-type spaces: "
        "boundedness, compactness, norm bounds and field exports.",
    )
    parser.add_argument("--version", action="version", version=f"bloch-wco {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_an = sub.add_parser("analyze", help="run the checks requested by a JSON config")
    p_an.add_argument("--config", required=True)
    p_an.add_argument("--out", default=None)
    p_an.add_argument("--seed", type=int, default=None)

    p_fl = sub.add_parser("fields", help="export pointwise fields on a grid as CSV")
    p_fl.add_argument("--config", required=True)
    p_fl.add_argument("--grid", type=int, required=True)
    p_fl.add_argument("--out", required=True)
    p_fl.add_argument("--seed", type=int, default=None)

    p_ps = sub.add_parser("paper-suite", help="run the built-in regression fixtures")
    p_ps.add_argument("--filter", default=None)
    p_ps.add_argument("--seed", type=int, default=None)

    p_pc = sub.add_parser("parse-check", help="validate an expression against the grammar")
    p_pc.add_argument("--expr", required=True)
    p_pc.add_argument("--dim", type=int, required=True)

    args = parser.parse_args(argv)

    try:
        if args.command == "analyze":
            config = load_config(args.config, args.seed)
            report = run_analyze(config)
            emit_report(report, args.out)
            return 0
        if args.command == "fields":
            config = load_config(args.config, args.seed)
            run_fields_csv(config, args.grid, args.out)
            return 0
        if args.command == "paper-suite":
            seed = args.seed if args.seed is not None else _env_seed()
            rows, passed = run_suite(args.filter, SupConfig(seed=seed))
            sys.stdout.write(format_table(rows))
            return 0 if passed else 1
        if args.command == "parse-check":
            from .expr import parse, to_source

            try:
                tree = parse(args.expr, args.dim)
            except (ParseError, ValueError) as exc:
                sys.stderr.write(f"parse error: {exc}\n")
                return 2
            sys.stdout.write(f"ok: {to_source(tree)}\n")
            return 0
        parser.error(f"unknown command {args.command!r}")
    except ConfigError as exc:
        sys.stderr.write(f"config error: {exc}\n")
        return 2
    except (EngineError, NumericalError, SingularityError) as exc:
        sys.stderr.write(f"engine error: {exc}\n")
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
