"""Operator-level quantities and verdicts for f -> psi * (f o phi).

Implements the pullback metric stretch of the composition symbol, the
pointwise criterion fields, boundedness and compactness classification on
the Bloch space, two-sided operator-norm bounds, direct dictionary-driven
norm probes, and the report for the operator mapping into the bounded
holomorphic functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from . import backends, dictionary
from .blochspace import (
    beta_sup,
    hinf_sup,
    omega,
    omega_upper_batch,
    q_field,
    q_from_grads,
)
from .domains import (
    DomainSpec,
    boundary_gap_batch,
    gram_inv_sqrt_batch,
    gram_sqrt_batch,
    metric_forms,
    apply_gram_inv,
    require_inside,
)
from .engine import LimsupEstimate, SupConfig, SupEstimate, shell_limsup, sup_estimate
from .expr import Mul, ScalarMap, SelfMap, SingularityError, substitute
from .tape import compile_expr

_PENCIL_DIRECT_MAX_DIM = 4
_POWER_TOL = 1e-12
_POWER_MAX_ITERS = 500


class NumericalError(RuntimeError):
    """An eigensolve or iteration failed to converge; carries diagnostics."""


@dataclass(frozen=True)
class SymbolPair:
    """Weight psi and composition symbol phi over a common domain."""

    psi: ScalarMap
    phi: SelfMap
    domain: DomainSpec

    def __post_init__(self) -> None:
        if self.psi.dim != self.domain.dim:
            raise ValueError("psi dimension does not match the domain")
        if self.phi.domain != self.domain:
            raise ValueError("phi is defined over a different domain")

    @classmethod
    def parse(cls, domain: DomainSpec, psi_text: str, phi_texts) -> "SymbolPair":
        return cls(ScalarMap.parse(psi_text, domain.dim), SelfMap.parse(phi_texts, domain), domain)

    def phi0(self) -> np.ndarray:
        return self.phi.eval(np.zeros(self.domain.dim, dtype=np.complex128))

    def psi0(self) -> complex:
        return self.psi.eval(np.zeros(self.domain.dim, dtype=np.complex128))


# ---------------------------------------------------------------------------
# pullback stretch of the composition symbol


def _sanitize_pencil_rows(
    domain: DomainSpec, phiZ: np.ndarray, J: np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Mask rows where the pencil is undefined (non-finite data, image at or
    beyond the boundary) so dense solvers never see NaN input."""
    bad = (
        ~np.all(np.isfinite(J), axis=(1, 2))
        | ~np.all(np.isfinite(phiZ), axis=1)
        | (boundary_gap_batch(domain, np.where(np.isfinite(phiZ), phiZ, 0.0)) <= 0.0)
    )
    if np.any(bad):
        J = np.where(bad[:, None, None], 0.0, J)
        phiZ = np.where(bad[:, None], 0.0, phiZ)
    return bad, phiZ, J


def b_phi_pencil_batch(
    domain: DomainSpec, Z: np.ndarray, phiZ: np.ndarray, J: np.ndarray
) -> np.ndarray:
    """Largest generalised pencil root via the Hermitian reduction.

    Computes the top singular value of G_phi^(1/2) J G_z^(-1/2), which squares
    to the largest eigenvalue of (J* G_phi J, G_z).
    """
    bad, phiZ, J = _sanitize_pencil_rows(domain, phiZ, J)
    C = gram_sqrt_batch(domain, phiZ) @ J @ gram_inv_sqrt_batch(domain, Z)
    with np.errstate(all="ignore"):
        sv = np.linalg.svd(C, compute_uv=False)
    out = sv[:, 0]
    out[bad] = np.nan
    return out


def b_phi_power_batch(
    domain: DomainSpec, Z: np.ndarray, phiZ: np.ndarray, J: np.ndarray
) -> np.ndarray:
    """Power iteration on G_z^(-1) (J* G_phi J) for higher dimensions."""
    n, d = Z.shape
    bad, phiZ, J = _sanitize_pencil_rows(domain, phiZ, J)
    G_phi = metric_forms(domain, phiZ)
    A = np.conj(np.swapaxes(J, 1, 2)) @ G_phi @ J
    G_z = metric_forms(domain, Z)
    v = np.full((n, d), 1.0 / np.sqrt(d), dtype=np.complex128)
    lam = np.zeros(n)
    done = np.zeros(n, dtype=bool)
    for it in range(_POWER_MAX_ITERS):
        Av = (A @ v[:, :, None])[:, :, 0]
        Bv = (G_z @ v[:, :, None])[:, :, 0]
        num = np.real(np.sum(np.conj(v) * Av, axis=1))
        den = np.real(np.sum(np.conj(v) * Bv, axis=1))
        lam_new = num / np.maximum(den, 1e-300)
        w = apply_gram_inv(domain, Z, Av)
        nw = np.linalg.norm(w, axis=1)
        dead = nw < 1e-300
        lam_new = np.where(dead, 0.0, lam_new)
        done |= dead | (np.abs(lam_new - lam) <= _POWER_TOL * np.maximum(np.abs(lam_new), 1.0))
        lam = lam_new
        if np.all(done):
            break
        v = np.where(dead[:, None], v, w / np.where(dead, 1.0, nw)[:, None])
    else:
        bad = int(np.nonzero(~done)[0][0])
        stuck = int(np.nonzero(~done)[0][0])
        raise NumericalError(
            f"power iteration did not reach {_POWER_TOL} in {_POWER_MAX_ITERS} iterations "
            f"(point {Z[stuck]}, last value {lam[stuck]})"
        )
    out = np.sqrt(np.maximum(lam, 0.0))
    out[bad] = np.nan
    return out


def b_phi_batch(
    domain: DomainSpec,
    Z: np.ndarray,
    phiZ: np.ndarray,
    J: np.ndarray,
    method: str = "auto",
) -> np.ndarray:
    if method not in ("auto", "pencil", "power"):
        raise ValueError(f"unknown b_phi method {method!r}")
    if method == "auto":
        if domain.kind == "disk":
            with np.errstate(all="ignore"):
                vals = (
                    (1.0 - np.abs(Z[:, 0]) ** 2)
                    * np.abs(J[:, 0, 0])
                    / (1.0 - np.abs(phiZ[:, 0]) ** 2)
                )
                return np.where(np.abs(phiZ[:, 0]) < 1.0, vals, np.nan)
        method = "pencil" if domain.dim <= _PENCIL_DIRECT_MAX_DIM else "power"
    if method == "pencil":
        return b_phi_pencil_batch(domain, Z, phiZ, J)
    return b_phi_power_batch(domain, Z, phiZ, J)


def b_phi(phi: SelfMap, domain: DomainSpec, z, method: str = "auto") -> float:
    """Maximal metric stretch of phi at a single point."""
    from .expr import jacobian

    z = require_inside(domain, z)
    J = jacobian(phi, z)
    w = phi.eval(z)
    return float(b_phi_batch(domain, z[None, :], w[None, :], J[None, :, :], method=method)[0])


def directional_stretch(phi: SelfMap, domain: DomainSpec, z, u) -> float:
    """Metric stretch of phi at z along one direction u."""
    from .expr import jacobian

    z = require_inside(domain, z)
    u = np.asarray(u, dtype=np.complex128)
    J = jacobian(phi, z)
    w = phi.eval(z)
    Gz = metric_forms(domain, z[None, :])[0]
    Gw = metric_forms(domain, w[None, :])[0]
    Ju = J @ u
    num = float(np.real(np.conj(Ju) @ Gw @ Ju))
    den = float(np.real(np.conj(u) @ Gz @ u))
    return float(np.sqrt(num / den))


# ---------------------------------------------------------------------------
# batched field context


class FieldContext:
    """Caches tapes for a symbol pair and exposes the criterion fields."""

    def __init__(self, pair: SymbolPair):
        self.pair = pair
        self.domain = pair.domain
        d = self.domain.dim
        self.psi_tape = compile_expr(pair.psi.expr, d)
        self.phi_tapes = [compile_expr(c, d) for c in pair.phi.components]

    def base(self, Z: np.ndarray) -> dict:
        n, d = Z.shape
        psi_v, psi_g, ok = backends.eval_jets(self.psi_tape, Z)
        phi_v = np.empty((n, d), dtype=np.complex128)
        J = np.empty((n, d, d), dtype=np.complex128)
        for k, t in enumerate(self.phi_tapes):
            v, g, o = backends.eval_jets(t, Z)
            phi_v[:, k] = v
            J[:, k, :] = g
            ok = ok & o
        return {"psi": psi_v, "psi_grad": psi_g, "phi": phi_v, "J": J, "ok": ok}

    # individual fields -------------------------------------------------

    def _finish(self, vals: np.ndarray, ok: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        good = ok & np.isfinite(vals)
        return np.where(good, vals, np.nan), good

    def field(self, name: str):
        fn = getattr(self, f"_field_{name}", None)
        if fn is None:
            raise ValueError(f"unknown field {name!r}")

        def field_fn(Z: np.ndarray):
            return fn(self.base(Z), Z)

        return field_fn

    def trigger(self):
        """Boundary gap of the image phi(z), the limit trigger for compactness."""

        def trig(Z: np.ndarray):
            b = self.base(Z)
            gap = boundary_gap_batch(self.domain, b["phi"])
            good = b["ok"] & np.isfinite(gap) & (gap > 0.0)
            return np.where(good, gap, np.nan), good

        return trig

    def _field_abs_psi(self, b, Z):
        return self._finish(np.abs(b["psi"]), b["ok"])

    def _field_q_psi(self, b, Z):
        with np.errstate(all="ignore"):
            q = q_from_grads(self.domain, Z, b["psi_grad"])
        return self._finish(q, b["ok"])

    def _field_tau(self, b, Z):
        with np.errstate(all="ignore"):
            vals = np.abs(b["psi"]) * b_phi_batch(self.domain, Z, b["phi"], b["J"])
        return self._finish(vals, b["ok"])

    def _field_s_disk(self, b, Z):
        if self.domain.kind != "disk":
            raise ValueError("s_disk is a disk-only field")
        with np.errstate(all="ignore"):
            vals = (
                (1.0 - np.abs(Z[:, 0]) ** 2)
                * np.abs(b["psi_grad"][:, 0])
                * np.log(2.0 / (1.0 - np.abs(b["phi"][:, 0]) ** 2))
            )
        return self._finish(vals, b["ok"])

    def _field_zc_log(self, b, Z):
        with np.errstate(all="ignore"):
            if self.domain.kind == "ball":
                s = np.sum(np.abs(Z) ** 2, axis=1)
                grad_norm = np.linalg.norm(b["psi_grad"], axis=1)
                r2 = np.sum(np.abs(b["phi"]) ** 2, axis=1)
                vals = (1.0 - s) * grad_norm * np.log(2.0 / (1.0 - r2))
            elif self.domain.kind == "polydisk":
                lhs = np.sum((1.0 - np.abs(Z) ** 2) * np.abs(b["psi_grad"]), axis=1)
                rhs = np.sum(np.log(4.0 / (1.0 - np.abs(b["phi"]) ** 2)), axis=1)
                vals = lhs * rhs
            else:
                vals = (
                    (1.0 - np.abs(Z[:, 0]) ** 2)
                    * np.abs(b["psi_grad"][:, 0])
                    * np.log(2.0 / (1.0 - np.abs(b["phi"][:, 0]) ** 2))
                )
        return self._finish(vals, b["ok"])

    def _field_zc_jac(self, b, Z):
        if self.domain.kind != "polydisk":
            raise ValueError("zc_jac is a polydisk-only field")
        with np.errstate(all="ignore"):
            w = (1.0 - np.abs(Z) ** 2)[:, None, :] / (1.0 - np.abs(b["phi"]) ** 2)[:, :, None]
            vals = np.sum(np.abs(b["J"]) * w, axis=(1, 2))
        return self._finish(vals, b["ok"])

    def _field_tau_zc(self, b, Z):
        vals, ok = self._field_zc_jac(b, Z)
        return self._finish(np.abs(b["psi"]) * vals, ok)

    def _field_sigma(self, b, Z):
        with np.errstate(all="ignore"):
            q = q_from_grads(self.domain, Z, b["psi_grad"])
            vals = omega_upper_batch(self.domain, b["phi"]) * q
        return self._finish(vals, b["ok"])

    def _field_eta(self, b, Z):
        with np.errstate(all="ignore"):
            vals = np.abs(b["psi"]) * omega_upper_batch(self.domain, b["phi"])
        return self._finish(vals, b["ok"])

    def _field_eta_sum(self, b, Z):
        with np.errstate(all="ignore"):
            per = 2.0 * np.arctanh(np.clip(np.abs(b["phi"]), 0.0, 1.0 - 1e-17))
            vals = np.abs(b["psi"]) * np.sum(per, axis=1)
        return self._finish(vals, b["ok"])

    def _field_hinf_compact(self, b, Z):
        with np.errstate(all="ignore"):
            if self.domain.is_round:
                r = np.linalg.norm(b["phi"], axis=1)
                vals = np.abs(b["psi"]) * np.log(2.0 / (1.0 - r))
            else:
                per = 2.0 * np.arctanh(np.clip(np.abs(b["phi"]), 0.0, 1.0 - 1e-17))
                vals = np.abs(b["psi"]) * np.sum(per, axis=1)
        return self._finish(vals, b["ok"])

    # dictionary lower bound for the pullback stretch --------------------

    def t_lower_batch(self, Z: np.ndarray, b: dict | None = None) -> tuple[np.ndarray, np.ndarray]:
        b = b or self.base(Z)
        domain, d = self.domain, self.domain.dim
        phi, J = b["phi"], b["J"]
        n = len(Z)
        best = np.zeros(n)
        with np.errstate(all="ignore"):
            # coordinate pullbacks (and, per coordinate, the aimed blaschke factor
            # off the round domains)
            for k in range(d):
                row = J[:, k, :]
                q = q_from_grads(domain, Z, row)
                best = np.maximum(best, q)
                if domain.kind in ("disk", "polydisk"):
                    denom = 1.0 - np.abs(phi[:, k]) ** 2
                    best = np.maximum(best, q / denom)
            if domain.is_round:
                r = np.linalg.norm(phi, axis=1)
                safe_r = np.where(r == 0.0, 1.0, r)
                # arctanh pairing aimed along phi(z); optimal for the identity
                gradf = np.conj(phi) / (safe_r * (1.0 - r**2))[:, None]
                gradf = np.where((r == 0.0)[:, None], 0.0, gradf)
                row = np.einsum("nk,nkj->nj", gradf, J)
                best = np.maximum(best, q_from_grads(domain, Z, row))
                # log kernel aimed at phi(z), semi-norm bound 2
                gradg = np.conj(phi) / (1.0 - r**2)[:, None]
                row = np.einsum("nk,nkj->nj", gradg, J)
                best = np.maximum(best, q_from_grads(domain, Z, row) / dictionary.LOG_FAMILY_BETA)
            else:
                # weighted arctanh combinations, uniform and aimed
                per = np.arctanh(np.clip(np.abs(phi), 0.0, 1.0 - 1e-17))
                phases = np.exp(-1j * np.angle(phi))
                for c in (np.ones((n, d)), per):
                    nrm = np.linalg.norm(c, axis=1)
                    cn = c / np.where(nrm == 0.0, 1.0, nrm)[:, None]
                    gradf = cn * phases / (1.0 - np.abs(phi) ** 2)
                    row = np.einsum("nk,nkj->nj", gradf, J)
                    q = q_from_grads(domain, Z, row)
                    best = np.maximum(best, np.where(nrm == 0.0, 0.0, q))
        good = b["ok"] & np.isfinite(best)
        return np.where(good, best, np.nan), good


def t_phi_lower(pair: SymbolPair, z) -> float:
    """Dictionary lower bound for the pullback stretch over unit Bloch functions."""
    z = require_inside(pair.domain, z)
    ctx = FieldContext(pair)
    vals, ok = ctx.t_lower_batch(z[None, :])
    if not ok[0]:
        raise SingularityError("symbol evaluation failed", "t_phi_lower")
    return float(vals[0])


# ---------------------------------------------------------------------------
# pointwise fields


@dataclass(frozen=True)
class PointwiseFields:
    abs_psi: float
    q_psi: float
    b_phi: float
    sigma: float
    tau_upper: float
    t_lower: float
    s_disk: float | None
    zc_log: float | None
    zc_jac: float | None


def pointwise_fields(pair: SymbolPair, z) -> PointwiseFields:
    z = require_inside(pair.domain, z)
    ctx = FieldContext(pair)
    Z = z[None, :]
    b = ctx.base(Z)
    if not b["ok"][0]:
        raise SingularityError("symbol evaluation failed", "pointwise_fields")
    abs_psi = float(np.abs(b["psi"][0]))
    q_psi = float(ctx._field_q_psi(b, Z)[0][0])
    bphi = float(b_phi_batch(pair.domain, Z, b["phi"], b["J"])[0])
    sigma = float(ctx._field_sigma(b, Z)[0][0])
    tau_upper = abs_psi * bphi
    t_lower = abs_psi * float(ctx.t_lower_batch(Z, b)[0][0])
    s_disk = float(ctx._field_s_disk(b, Z)[0][0]) if pair.domain.kind == "disk" else None
    zc_log = float(ctx._field_zc_log(b, Z)[0][0]) if pair.domain.kind != "disk" else None
    zc_jac = float(ctx._field_zc_jac(b, Z)[0][0]) if pair.domain.kind == "polydisk" else None
    return PointwiseFields(abs_psi, q_psi, bphi, sigma, tau_upper, t_lower, s_disk, zc_log, zc_jac)


# ---------------------------------------------------------------------------
# classification


def _criterion_names(domain: DomainSpec) -> tuple[str, ...]:
    if domain.kind == "disk":
        return ("s_disk", "tau")
    if domain.kind == "ball":
        return ("zc_log", "tau")
    return ("zc_log", "tau_zc")


@dataclass
class Classification:
    verdict: str  # yes | no | inconclusive
    rationale: str
    criteria: dict
    beta_psi: SupEstimate | None = None
    driving: tuple[str, ...] = ()


def classify_bounded(pair: SymbolPair, cfg: SupConfig) -> Classification:
    """Boundedness on the Bloch space from the domain criterion suprema."""
    ctx = FieldContext(pair)
    names = _criterion_names(pair.domain)
    ests: dict[str, SupEstimate] = {}
    for name in names:
        ests[name] = sup_estimate(ctx.field(name), pair.domain, cfg)
    beta_psi = beta_sup(pair.psi, pair.domain, cfg)

    divergent = [n for n in names if ests[n].divergent]
    unsettled = [n for n in names if not ests[n].settled]
    if divergent:
        verdict = "no"
        rationale = f"criterion '{divergent[0]}' grows along the boundary shells"
    elif unsettled:
        verdict = "inconclusive"
        rationale = f"criterion '{unsettled[0]}' neither stabilises nor grows decisively"
    else:
        verdict = "yes"
        rationale = "all criterion suprema converged"
    return Classification(verdict, rationale, ests, beta_psi, names)


def classify_compact(
    pair: SymbolPair, cfg: SupConfig, bounded: Classification | None = None
) -> Classification:
    """Compactness: criterion fields must vanish as phi(z) approaches the boundary."""
    if bounded is None:
        bounded = classify_bounded(pair, cfg)
    if bounded.verdict == "no":
        return Classification(
            "no", "the operator is not bounded, hence not compact", {}, bounded.beta_psi, ()
        )
    if bounded.verdict == "inconclusive":
        return Classification(
            "inconclusive", "boundedness is unresolved", {}, bounded.beta_psi, ()
        )
    ctx = FieldContext(pair)
    names = _criterion_names(pair.domain)
    report_names = names if "tau" in names else names + ("tau",)
    trig = ctx.trigger()
    ests: dict[str, LimsupEstimate] = {}
    for name in report_names:
        ests[name] = shell_limsup(ctx.field(name), trig, pair.domain, cfg)

    verdicts = [ests[n].verdict for n in names]
    if any(v == "positive" for v in verdicts):
        bad = names[verdicts.index("positive")]
        verdict = "no"
        rationale = f"shell suprema of '{bad}' stabilise away from zero"
    elif all(v == "zero" for v in verdicts):
        verdict = "yes"
        rationale = "all criterion fields vanish toward the boundary of the image"
    else:
        bad = names[[v == "inconclusive" for v in verdicts].index(True)]
        verdict = "inconclusive"
        rationale = f"boundary behaviour of '{bad}' is unresolved"
    return Classification(verdict, rationale, ests, bounded.beta_psi, names)


# ---------------------------------------------------------------------------
# norm bounds


@dataclass
class NormBounds:
    lower: float
    upper: float
    pieces: dict
    reliable: bool
    estimates: dict = dc_field(default_factory=dict)


def norm_bounds(
    pair: SymbolPair, cfg: SupConfig, bounded: Classification | None = None
) -> NormBounds:
    """Two-sided operator-norm bounds from the weight norm and criterion suprema.

    On the polydisk the extremal point evaluation at phi(0) is an interval;
    the lower endpoint feeds the norm lower bound and the upper endpoint the
    upper bound, so both sides stay valid.
    """
    ctx = FieldContext(pair)
    if bounded is None:
        bounded = classify_bounded(pair, cfg)
    beta_psi = bounded.beta_psi if bounded.beta_psi is not None else beta_sup(pair.psi, pair.domain, cfg)
    psi0 = abs(pair.psi0())
    bloch_norm_psi = psi0 + beta_psi.value
    om = omega(pair.domain, pair.phi0())
    tau_est = bounded.criteria.get("tau")
    if not isinstance(tau_est, SupEstimate):
        tau_est = sup_estimate(ctx.field("tau"), pair.domain, cfg)
    sigma_est = sup_estimate(ctx.field("sigma"), pair.domain, cfg)
    lower = max(bloch_norm_psi, psi0 * om.lower)
    upper = max(bloch_norm_psi, psi0 * om.upper + tau_est.value + sigma_est.value)
    pieces = {
        "bloch_norm_psi": float(bloch_norm_psi),
        "omega_phi0": (float(om.lower), float(om.upper)),
        "tau": float(tau_est.value),
        "sigma": float(sigma_est.value),
    }
    return NormBounds(
        float(lower),
        float(upper),
        pieces,
        reliable=bounded.verdict == "yes",
        estimates={"tau": tau_est, "sigma": sigma_est, "beta_psi": beta_psi},
    )


@dataclass
class DirectNormLower:
    value: float
    best_member: str
    per_member: dict


def direct_norm_lower(pair: SymbolPair, cfg: SupConfig, members=None) -> DirectNormLower:
    """Largest ratio ||psi * (f o phi)|| / ||f|| over the built-in dictionary.

    Semi-norm bounds of the members are exact or safe upper bounds, so the
    result is a true operator-norm lower bound up to estimation error.
    """
    if members is None:
        members = dictionary.norm_probe_members(pair.domain, pair.phi0())
    psi0 = pair.psi0()
    phi0 = pair.phi0()
    table: dict[str, float] = {}
    best, best_name = -np.inf, ""
    for m in members:
        f = m.scalar_map()
        composed = Mul(pair.psi.expr, substitute(m.expr, pair.phi.components))
        w_map = ScalarMap(composed, pair.domain.dim)
        est = sup_estimate(q_field(w_map, pair.domain), pair.domain, cfg)
        f_at_phi0 = f.eval(phi0)
        f_at_0 = f.eval(np.zeros(pair.domain.dim, dtype=np.complex128))
        num = abs(psi0 * f_at_phi0) + est.value
        den = abs(f_at_0) + m.beta_bound
        val = float(num / den)
        table[m.name] = val
        if val > best:
            best, best_name = val, m.name
    return DirectNormLower(float(best), best_name, table)


# ---------------------------------------------------------------------------
# target space of bounded holomorphic functions


@dataclass
class HinfReport:
    psi_sup: SupEstimate
    eta: SupEstimate
    eta_sum: SupEstimate | None
    bounded: str
    norm: float | None
    compact: str
    compact_limsup: LimsupEstimate | None
    rationale: str


def hinf_target_report(pair: SymbolPair, cfg: SupConfig, checks=("bounded", "compact")) -> HinfReport:
    """Boundedness, norm and compactness of the operator into H-infinity.

    The norm equals max(sup |psi|, sup |psi| * omega(phi)) where the extremal
    point evaluation is exact (disk and ball); the polydisk verdict uses the
    coordinate-sum log criterion instead and reports no norm.
    """
    ctx = FieldContext(pair)
    domain = pair.domain
    psi_est = hinf_sup(pair.psi, domain, cfg)
    eta_est = sup_estimate(ctx.field("eta"), domain, cfg)
    eta_sum_est = None
    if domain.kind == "polydisk":
        eta_sum_est = sup_estimate(ctx.field("eta_sum"), domain, cfg)
        drivers = [psi_est, eta_sum_est]
    else:
        drivers = [psi_est, eta_est]

    if any(e.divergent for e in drivers):
        bounded = "no"
        rationale = "the weight or the weighted point-evaluation supremum diverges"
    elif all(e.converged for e in drivers):
        bounded = "yes"
        rationale = "weight and weighted point evaluation are uniformly bounded"
    else:
        bounded = "inconclusive"
        rationale = "a driving supremum is unsettled"

    norm = None
    if bounded == "yes" and domain.kind != "polydisk":
        norm = float(max(psi_est.value, eta_est.value))

    compact = "inconclusive"
    compact_est = None
    if "compact" in checks:
        compact_est = shell_limsup(ctx.field("hinf_compact"), ctx.trigger(), domain, cfg)
        if psi_est.divergent or compact_est.verdict == "positive":
            compact = "no"
        elif psi_est.converged and compact_est.verdict == "zero":
            compact = "yes"
    return HinfReport(psi_est, eta_est, eta_sum_est, bounded, norm, compact, compact_est, rationale)
