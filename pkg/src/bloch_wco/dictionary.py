"""Built-in families of Bloch test functions.

Members are holomorphic expressions with a known bound on their invariant
gradient supremum (exact for the workhorse families, a safe upper bound for
the logarithmic ones).  Dividing an evaluated quantity by such a bound keeps
every dictionary-driven estimate a genuine lower bound, which is what the
point-evaluation extremals, the pullback-stretch witnesses and the direct
operator-norm probes all rely on.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domains import DomainSpec
from .expr import Add, Coord, Div, Expr, Hdot, Lit, Mul, Plog, Pow, ScalarMap, Sub, to_source

# beta bound for the squared-log family: 4 * (2 + pi / (2 log 2))
SQUARED_LOG_BETA = 4.0 * (2.0 + math.pi / (2.0 * math.log(2.0)))
LOG_FAMILY_BETA = 2.0
KERNEL_RATIO_BETA = 4.0


@dataclass(frozen=True)
class Member:
    """A dictionary entry: expression, dimension, semi-norm bound."""

    name: str
    expr: Expr
    dim: int
    beta_bound: float
    beta_exact: bool

    def scalar_map(self) -> ScalarMap:
        return ScalarMap(self.expr, self.dim)

    def source(self) -> str:
        return to_source(self.expr)


def constant_one(dim: int) -> Member:
    return Member("one", Lit(1.0 + 0j), dim, 0.0, True)


def coordinate(j: int, dim: int) -> Member:
    # invariant gradient peaks at the origin with value 1 on all three domains
    return Member(f"coord_{j}", Coord(j), dim, 1.0, True)


def _atanh_expr(inner: Expr) -> Expr:
    # arctanh as half the principal log of (1 + w)/(1 - w); both factors stay
    # in the right half plane for |w| < 1, so the branch never jumps
    return Mul(Lit(0.5), Sub(Plog(Add(Lit(1.0), inner)), Plog(Sub(Lit(1.0), inner))))


def ball_atanh(direction: np.ndarray, dim: int) -> Member:
    """arctanh of the pairing with a unit vector; semi-norm exactly 1."""
    lam = np.asarray(direction, dtype=np.complex128)
    nrm = np.linalg.norm(lam)
    if nrm <= 0:
        lam = np.zeros(dim, dtype=np.complex128)
        lam[0] = 1.0
    else:
        lam = lam / nrm
    return Member("atanh_pairing", _atanh_expr(Hdot(tuple(lam))), dim, 1.0, True)


def polydisk_atanh_combo(coeffs: np.ndarray, phases: np.ndarray, dim: int) -> Member:
    """Weighted sum of per-coordinate arctanh maps; semi-norm exactly ||c||."""
    c = np.asarray(coeffs, dtype=float)
    nrm = float(np.linalg.norm(c))
    if nrm <= 0:
        c = np.zeros(dim)
        c[0] = 1.0
        nrm = 1.0
    c = c / nrm
    acc: Expr | None = None
    for j in range(dim):
        if c[j] == 0.0:
            continue
        rotated = Mul(Lit(np.exp(-1j * float(phases[j]))), Coord(j + 1))
        term = Mul(Lit(complex(c[j])), _atanh_expr(rotated))
        acc = term if acc is None else Add(acc, term)
    assert acc is not None
    return Member("atanh_combo", acc, dim, 1.0, True)


def disk_mobius(a: complex) -> Member:
    """(a - w) / (1 - conj(a) w): the optimal pullback witness; semi-norm 1."""
    a = complex(a)
    expr = Div(Sub(Lit(a), Coord(1)), Sub(Lit(1.0), Mul(Lit(a.conjugate()), Coord(1))))
    return Member("mobius", expr, 1, 1.0, True)


def polydisk_mobius(j: int, a: complex, dim: int) -> Member:
    a = complex(a)
    expr = Div(Sub(Lit(a), Coord(j)), Sub(Lit(1.0), Mul(Lit(a.conjugate()), Coord(j))))
    return Member(f"mobius_{j}", expr, dim, 1.0, True)


def ball_log(a: np.ndarray, dim: int) -> Member:
    """log(2 / (1 - <w, a>)) for a in the closed ball; semi-norm at most 2."""
    a = np.asarray(a, dtype=np.complex128)
    expr = Plog(Div(Lit(2.0), Sub(Lit(1.0), Hdot(tuple(a)))))
    return Member("log_kernel", expr, dim, LOG_FAMILY_BETA, False)


def ball_squared_log(a: np.ndarray, dim: int) -> Member:
    """Squared log kernel, normalised by log(2 / (1 - ||a||^2))."""
    a = np.asarray(a, dtype=np.complex128)
    s = float(np.sum(np.abs(a) ** 2))
    denom = math.log(2.0 / max(1.0 - s, 1e-300))
    if denom <= 0:
        denom = math.log(2.0)
    expr = Div(Pow(Plog(Div(Lit(2.0), Sub(Lit(1.0), Hdot(tuple(a))))), 2), Lit(denom))
    return Member("squared_log_kernel", expr, dim, SQUARED_LOG_BETA, False)


def ball_kernel_ratio(a: np.ndarray, dim: int) -> Member:
    """(1 - ||a||^2) / (1 - <w, a>); semi-norm at most 4."""
    a = np.asarray(a, dtype=np.complex128)
    s = float(np.sum(np.abs(a) ** 2))
    expr = Div(Lit(1.0 - s), Sub(Lit(1.0), Hdot(tuple(a))))
    return Member("kernel_ratio", expr, dim, KERNEL_RATIO_BETA, False)


def polydisk_log(j: int, b: complex, dim: int) -> Member:
    """log(4 / (1 - w_j conj(b))); semi-norm at most 2."""
    b = complex(b)
    expr = Plog(Div(Lit(4.0), Sub(Lit(1.0), Mul(Coord(j), Lit(b.conjugate())))))
    return Member(f"log_coord_{j}", expr, dim, LOG_FAMILY_BETA, False)


# ---------------------------------------------------------------------------
# aimed collections


def norm_probe_members(domain: DomainSpec, phi0: np.ndarray) -> list[Member]:
    """Dictionary for direct operator-norm lower bounds, aimed at phi(0)."""
    d = domain.dim
    members = [constant_one(d)]
    members += [coordinate(j + 1, d) for j in range(d)]
    a = np.asarray(phi0, dtype=np.complex128)
    if domain.kind == "disk":
        members.append(disk_mobius(complex(a[0])))
        members.append(ball_atanh(a, 1))
        members.append(ball_log(a, 1))
    elif domain.kind == "ball":
        members.append(ball_atanh(a, d))
        members.append(ball_log(a, d))
        members.append(ball_kernel_ratio(a, d))
    else:
        members.append(polydisk_atanh_combo(np.abs(np.arctanh(np.clip(np.abs(a), 0, 1 - 1e-12))), np.angle(a), d))
        for j in range(d):
            members.append(polydisk_mobius(j + 1, complex(a[j]), d))
            members.append(polydisk_log(j + 1, complex(a[j]), d))
    return members


def point_evaluation_members(domain: DomainSpec, w: np.ndarray) -> list[Member]:
    """Normalised members vanishing at 0, aimed to be large at w."""
    d = domain.dim
    w = np.asarray(w, dtype=np.complex128)
    members = [coordinate(j + 1, d) for j in range(d)]
    if domain.is_round:
        members.append(ball_atanh(w, d))
    else:
        members.append(
            polydisk_atanh_combo(np.arctanh(np.clip(np.abs(w), 0, 1 - 1e-12)), np.angle(w), d)
        )
        for j in range(d):
            members.append(polydisk_atanh_combo(_unit(d, j), np.angle(w), d))
    return members


def _e1(d: int) -> np.ndarray:
    v = np.zeros(d, dtype=np.complex128)
    v[0] = 1.0
    return v


def _unit(d: int, j: int) -> np.ndarray:
    v = np.zeros(d)
    v[j] = 1.0
    return v
