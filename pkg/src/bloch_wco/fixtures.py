"""Built-in regression fixtures: worked examples with known verdicts and values.

Each fixture runs the full pipeline on a fixed symbol pair and asserts frozen
expected verdicts or numbers.  The suite output is deterministic for a fixed
engine configuration, which the release gate relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import domains as dom
from .blochspace import hinf_sup, little_bloch_decay
from .engine import SupConfig
from .expr import ScalarMap, self_map_check
from .operators import (
    SymbolPair,
    classify_bounded,
    classify_compact,
    direct_norm_lower,
    directional_stretch,
    hinf_target_report,
    norm_bounds,
)


@dataclass
class FixtureRow:
    fixture: str
    check: str
    expected: str
    actual: str
    margin: str
    passed: bool


def _fmt(x: float) -> str:
    return f"{x:.9g}"


def _row(fix: str, check: str, expected: str, actual: str, margin: float | None, passed: bool) -> FixtureRow:
    return FixtureRow(fix, check, expected, actual, "-" if margin is None else _fmt(margin), passed)


def _verdict_row(fix: str, check: str, expected: str, actual: str) -> FixtureRow:
    return _row(fix, check, expected, actual, None, actual == expected)


# ---------------------------------------------------------------------------
# fixture runners


def _identity(name: str, domain: dom.DomainSpec) -> Callable[[SupConfig], list[FixtureRow]]:
    def run(cfg: SupConfig) -> list[FixtureRow]:
        pair = SymbolPair.parse(domain, "1", [f"z{j + 1}" for j in range(domain.dim)])
        cb = classify_bounded(pair, cfg)
        cc = classify_compact(pair, cfg, cb)
        nb = norm_bounds(pair, cfg, cb)
        rows = [
            _verdict_row(name, "bounded", "yes", cb.verdict),
            _verdict_row(name, "compact", "no", cc.verdict),
            _row(name, "norm_lower", "1", _fmt(nb.lower), abs(nb.lower - 1.0), abs(nb.lower - 1.0) <= 1e-6),
            _row(name, "norm_upper", "1", _fmt(nb.upper), abs(nb.upper - 1.0), abs(nb.upper - 1.0) <= 1e-6),
        ]
        tau_inner = cc.criteria["tau"].shell_table[-1][1]
        ok = tau_inner is not None and 0.99 <= tau_inner <= 1.01
        rows.append(
            _row(name, "tau_innermost_shell", "[0.99, 1.01]",
                 "none" if tau_inner is None else _fmt(tau_inner),
                 None if tau_inner is None else abs(tau_inner - 1.0), ok)
        )
        return rows

    return run


def _ball_log_weight(cfg: SupConfig) -> list[FixtureRow]:
    # log weight paired with a reflection-contraction: bounded even though the
    # weight itself is unbounded
    name = "ball_log_weight_bounded"
    b2 = dom.ball(2)
    pair = SymbolPair.parse(b2, "0.5*plog(1 - hdot((1, 0)))", ["(1 - z1)/2", "-z2/2"])
    cb = classify_bounded(pair, cfg)
    hs = hinf_sup(pair.psi, b2, cfg)
    inner = hs.shell_table[-1][1]
    rows = [
        _verdict_row(name, "bounded", "yes", cb.verdict),
        _verdict_row(name, "psi_hinf_divergent", "True", str(hs.divergent)),
        _row(name, "psi_hinf_innermost_shell", ">= 3", "none" if inner is None else _fmt(inner),
             None if inner is None else inner - 3.0, inner is not None and inner >= 3.0),
    ]
    return rows


def _ball_compact(cfg: SupConfig) -> list[FixtureRow]:
    name = "ball_vanishing_weight_compact"
    b2 = dom.ball(2)
    pair = SymbolPair.parse(b2, "1 - z1", ["(1 + z1)/2", "0"])
    cb = classify_bounded(pair, cfg)
    cc = classify_compact(pair, cfg, cb)
    stretch = directional_stretch(pair.phi, b2, [1.0 - 1e-5, 0.0], [1.0, 0.0])
    return [
        _verdict_row(name, "bounded", "yes", cb.verdict),
        _verdict_row(name, "compact", "yes", cc.verdict),
        _row(name, "stretch_along_e1_near_1", "> 0.1", _fmt(stretch), stretch - 0.1, stretch > 0.1),
    ]


def _poly_bounded(cfg: SupConfig) -> list[FixtureRow]:
    name = "polydisk_log_weight_bounded"
    p2 = dom.polydisk(2)
    pair = SymbolPair.parse(p2, "plog(2/(1 - z1))", ["(1 - z1)/2", "0"])
    cb = classify_bounded(pair, cfg)
    return [_verdict_row(name, "bounded", "yes", cb.verdict)]


def _poly_compact(cfg: SupConfig) -> list[FixtureRow]:
    name = "polydisk_vanishing_weight_compact"
    p2 = dom.polydisk(2)
    pair = SymbolPair.parse(p2, "1 - z1", ["(1 + z1)/2", "0"])
    cb = classify_bounded(pair, cfg)
    cc = classify_compact(pair, cfg, cb)
    beta = cb.beta_psi.value
    return [
        _verdict_row(name, "bounded", "yes", cb.verdict),
        _verdict_row(name, "compact", "yes", cc.verdict),
        _row(name, "beta_psi_positive", "> 0", _fmt(beta), beta, beta > 0.0),
    ]


def _poly3_compact(cfg: SupConfig) -> list[FixtureRow]:
    # dim-3 variant with the active coordinate in second place
    name = "polydisk3_coordinate_placement_compact"
    p3 = dom.polydisk(3)
    pair = SymbolPair.parse(p3, "1 - z2", ["0", "(1 + z2)/2", "0"])
    cb = classify_bounded(pair, cfg)
    cc = classify_compact(pair, cfg, cb)
    return [
        _verdict_row(name, "bounded", "yes", cb.verdict),
        _verdict_row(name, "compact", "yes", cc.verdict),
    ]


def _hinf_contraction(cfg: SupConfig) -> list[FixtureRow]:
    name = "hinf_scaled_identity_norm"
    b2 = dom.ball(2)
    pair = SymbolPair.parse(b2, "1", ["0.9*z1", "0.9*z2"])
    rep = hinf_target_report(pair, cfg)
    expected = float(np.arctanh(0.9))
    rows = [_verdict_row(name, "bounded", "yes", rep.bounded)]
    if rep.norm is None:
        rows.append(_row(name, "norm", _fmt(expected), "none", None, False))
    else:
        err = abs(rep.norm - expected)
        rows.append(_row(name, "norm", _fmt(expected), _fmt(rep.norm), err, err <= 1e-3))
    rows.append(_verdict_row(name, "compact", "yes", rep.compact))
    return rows


def _hinf_constant(cfg: SupConfig) -> list[FixtureRow]:
    name = "hinf_constant_symbol_norm"
    b2 = dom.ball(2)
    pair = SymbolPair.parse(b2, "1", ["0", "0"])
    rep = hinf_target_report(pair, cfg)
    rows = [_verdict_row(name, "bounded", "yes", rep.bounded)]
    if rep.norm is None:
        rows.append(_row(name, "norm", "1", "none", None, False))
    else:
        err = abs(rep.norm - 1.0)
        rows.append(_row(name, "norm", "1", _fmt(rep.norm), err, err <= 1e-12))
    return rows


def _hinf_multiplier(cfg: SupConfig) -> list[FixtureRow]:
    name = "hinf_multiplier_unbounded"
    b2 = dom.ball(2)
    pair = SymbolPair.parse(b2, "z1", ["z1", "z2"])
    rep = hinf_target_report(pair, cfg, checks=("bounded",))
    return [
        _verdict_row(name, "bounded", "no", rep.bounded),
        _verdict_row(name, "eta_divergent", "True", str(rep.eta.divergent)),
    ]


def _decay_polynomial(cfg: SupConfig) -> list[FixtureRow]:
    name = "gradient_decay_polynomial_ball"
    rep = little_bloch_decay(ScalarMap.parse("z1^2 + z2", 2), dom.ball(2), cfg=cfg)
    return [_verdict_row(name, "decay", "decays", rep.verdict)]


def _decay_log(cfg: SupConfig) -> list[FixtureRow]:
    name = "gradient_decay_log_disk"
    rep = little_bloch_decay(ScalarMap.parse("plog(1 - z1)", 1), dom.disk(), cfg=cfg)
    inner = rep.shell_sups[-1][1]
    rows = [_verdict_row(name, "decay", "persists", rep.verdict)]
    ok = inner is not None and 1.9 <= inner <= 2.0 + 1e-6
    rows.append(
        _row(name, "innermost_shell_sup", "[1.9, 2]", "none" if inner is None else _fmt(inner),
             None if inner is None else abs(inner - 2.0), ok)
    )
    return rows


def _disk_sandwich(cfg: SupConfig) -> list[FixtureRow]:
    name = "disk_norm_sandwich"
    pair = SymbolPair.parse(dom.disk(), "z1", ["z1/2"])
    cb = classify_bounded(pair, cfg)
    nb = norm_bounds(pair, cfg, cb)
    dn = direct_norm_lower(pair, cfg)
    rows = [
        _verdict_row(name, "bounded", "yes", cb.verdict),
        _row(name, "lower_le_upper", "True", str(nb.lower <= nb.upper + 1e-12), None, nb.lower <= nb.upper + 1e-12),
        _row(name, "direct_ge_lower", f">= {_fmt(nb.lower)} - 1e-6", _fmt(dn.value),
             dn.value - nb.lower, dn.value >= nb.lower - 1e-6),
        _row(name, "direct_le_upper", f"<= {_fmt(nb.upper)} + 1e-6", _fmt(dn.value),
             nb.upper - dn.value, dn.value <= nb.upper + 1e-6),
    ]
    return rows


def _self_map_guard(cfg: SupConfig) -> list[FixtureRow]:
    name = "self_map_guard"
    b2 = dom.ball(2)
    good = self_map_check(SymbolPair.parse(b2, "1", ["(1 - z1)/2", "-z2/2"]).phi, b2)
    bad = self_map_check(SymbolPair.parse(dom.disk(), "1", ["2*z1"]).phi, dom.disk())
    rows = [
        _verdict_row(name, "contraction_passes", "True", str(good.passed)),
        _verdict_row(name, "dilation_fails", "False", str(bad.passed)),
        _row(name, "dilation_witness_radius", "> 0.5", _fmt(abs(bad.worst_point[0])),
             abs(bad.worst_point[0]) - 0.5, abs(bad.worst_point[0]) > 0.5),
    ]
    return rows


FIXTURES: tuple[tuple[str, Callable[[SupConfig], list[FixtureRow]]], ...] = (
    ("identity_disk", _identity("identity_disk", dom.disk())),
    ("identity_ball2", _identity("identity_ball2", dom.ball(2))),
    ("identity_ball3", _identity("identity_ball3", dom.ball(3))),
    ("identity_polydisk2", _identity("identity_polydisk2", dom.polydisk(2))),
    ("identity_polydisk3", _identity("identity_polydisk3", dom.polydisk(3))),
    ("ball_log_weight_bounded", _ball_log_weight),
    ("ball_vanishing_weight_compact", _ball_compact),
    ("polydisk_log_weight_bounded", _poly_bounded),
    ("polydisk_vanishing_weight_compact", _poly_compact),
    ("polydisk3_coordinate_placement_compact", _poly3_compact),
    ("hinf_scaled_identity_norm", _hinf_contraction),
    ("hinf_constant_symbol_norm", _hinf_constant),
    ("hinf_multiplier_unbounded", _hinf_multiplier),
    ("gradient_decay_polynomial_ball", _decay_polynomial),
    ("gradient_decay_log_disk", _decay_log),
    ("disk_norm_sandwich", _disk_sandwich),
    ("self_map_guard", _self_map_guard),
)


def run_suite(name_filter: str | None = None, cfg: SupConfig | None = None) -> tuple[list[FixtureRow], bool]:
    cfg = cfg or SupConfig()
    rows: list[FixtureRow] = []
    for name, runner in FIXTURES:
        if name_filter and name_filter not in name:
            continue
        rows.extend(runner(cfg))
    return rows, all(r.passed for r in rows)


def format_table(rows: list[FixtureRow]) -> str:
    headers = ("fixture", "check", "expected", "actual", "margin", "status")
    cells = [headers] + [
        (r.fixture, r.check, r.expected, r.actual, r.margin, "PASS" if r.passed else "FAIL") for r in rows
    ]
    widths = [max(len(row[i]) for row in cells) for i in range(len(headers))]
    lines = []
    for i, row in enumerate(cells):
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * w for w in widths))
    n_pass = sum(r.passed for r in rows)
    lines.append("")
    lines.append(f"{n_pass}/{len(rows)} checks passed")
    return "\n".join(lines) + "\n"
