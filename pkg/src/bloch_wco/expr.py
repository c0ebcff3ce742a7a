"""Holomorphic expression DSL: parsing, printing, evaluation and exact first derivatives.

Grammar (exact)::

    expr   := term (('+'|'-') term)*
    term   := factor (('*'|'/') factor)*
    factor := base ('^' int)?
    base   := number | 'i' | 'z'IDX | '(' expr ')' | '-' base
            | 'exp(' expr ')' | 'plog(' expr ')' | 'hdot(' cvec ')' | 'conj(' cconst ')'

Numbers are decimal with an optional imaginary suffix ``i``; ``cvec`` is a
parenthesised comma list of complex constants.  ``conj`` is only allowed on
constants, so every parsable map is holomorphic and forward-mode dual numbers
give exact derivatives.  Subtrees built entirely from constants are folded to
a single literal at parse time (which is what makes printing round-trip), but
a constant subexpression that cannot be evaluated, such as ``1/0``, is kept
and fails at evaluation time instead.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .domains import DomainSpec, as_point, boundary_gap_batch, MEMBERSHIP_TOL


class ParseError(ValueError):
    """Syntax or validation error, carrying the character position."""

    def __init__(self, message: str, pos: int):
        super().__init__(f"{message} (at position {pos})")
        self.pos = pos


class SingularityError(ArithmeticError):
    """Evaluation hit a pole or a logarithm of zero; carries the subexpression."""

    def __init__(self, message: str, source: str):
        super().__init__(f"{message} in '{source}'")
        self.source = source


# ---------------------------------------------------------------------------
# AST


class Expr:
    __slots__ = ()


@dataclass(frozen=True)
class Lit(Expr):
    value: complex


@dataclass(frozen=True)
class Coord(Expr):
    index: int  # 1-based


@dataclass(frozen=True)
class Neg(Expr):
    arg: Expr


@dataclass(frozen=True)
class Add(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Sub(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Mul(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Div(Expr):
    left: Expr
    right: Expr


@dataclass(frozen=True)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True)
class ExpNode(Expr):
    arg: Expr


@dataclass(frozen=True)
class Plog(Expr):
    arg: Expr


@dataclass(frozen=True)
class Hdot(Expr):
    weights: tuple[complex, ...]


def plog_value(v: complex) -> complex:
    """Principal logarithm with the cut approached from above on the negative axis."""
    if v.imag == 0.0:
        v = complex(v.real, 0.0)
    if v == 0:
        raise ZeroDivisionError("log of zero")
    return complex(np.log(v))


def ipow_value(v: complex, n: int) -> complex:
    """Integer power by binary exponentiation (shared with the batch backends)."""
    r = complex(1.0)
    p = v
    e = abs(n)
    while e:
        if e & 1:
            r = r * p
        e >>= 1
        if e:
            p = p * p
    if n < 0:
        if r == 0:
            raise ZeroDivisionError("zero raised to a negative power")
        r = 1.0 / r
    return r


# ---------------------------------------------------------------------------
# tokenizer

_NUMBER = re.compile(r"(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?i?")
_NAME = re.compile(r"[A-Za-z]+\d*")


@dataclass(frozen=True)
class _Token:
    kind: str  # number | name | op
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    out: list[_Token] = []
    i, n = 0, len(text)
    while i < n:
        c = text[i]
        if c.isspace():
            i += 1
            continue
        if c in "+-*/^(),":
            out.append(_Token("op", c, i))
            i += 1
            continue
        m = _NUMBER.match(text, i)
        if m:
            out.append(_Token("number", m.group(0), i))
            i = m.end()
            continue
        m = _NAME.match(text, i)
        if m:
            out.append(_Token("name", m.group(0), i))
            i = m.end()
            continue
        raise ParseError(f"unexpected character {c!r}", i)
    out.append(_Token("op", "", n))  # end marker
    return out


# ---------------------------------------------------------------------------
# parser

_FUNCS = ("exp", "plog", "hdot", "conj")


class _Parser:
    def __init__(self, text: str, dim: int):
        self.text = text
        self.dim = dim
        self.toks = _tokenize(text)
        self.k = 0

    def peek(self) -> _Token:
        return self.toks[self.k]

    def pop(self) -> _Token:
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, text: str) -> _Token:
        t = self.pop()
        if t.text != text:
            raise ParseError(f"expected {text!r}, found {t.text!r}" if t.text else f"expected {text!r}, found end of input", t.pos)
        return t

    # grammar ----------------------------------------------------------

    def parse(self) -> Expr:
        e = self.expr()
        t = self.peek()
        if t.text != "":
            raise ParseError(f"unexpected trailing input {t.text!r}", t.pos)
        return e

    def expr(self) -> Expr:
        e = self.term()
        while self.peek().text in ("+", "-"):
            op = self.pop().text
            rhs = self.term()
            e = _fold(Add(e, rhs) if op == "+" else Sub(e, rhs))
        return e

    def term(self) -> Expr:
        e = self.factor()
        while self.peek().text in ("*", "/"):
            op = self.pop().text
            rhs = self.factor()
            e = _fold(Mul(e, rhs) if op == "*" else Div(e, rhs))
        return e

    def factor(self) -> Expr:
        e = self.base()
        if self.peek().text == "^":
            self.pop()
            e = _fold(Pow(e, self.int_literal()))
        return e

    def int_literal(self) -> int:
        sign = 1
        if self.peek().text == "-":
            self.pop()
            sign = -1
        t = self.pop()
        if t.kind != "number" or not t.text.isdigit():
            raise ParseError("expected an integer exponent", t.pos)
        return sign * int(t.text)

    def base(self) -> Expr:
        t = self.pop()
        if t.text == "-":
            return _fold(Neg(self.base()))
        if t.text == "(":
            e = self.expr()
            self.expect(")")
            return e
        if t.kind == "number":
            if t.text.endswith("i"):
                return Lit(complex(0.0, float(t.text[:-1] or "1")))
            return Lit(complex(float(t.text), 0.0))
        if t.kind == "name":
            return self.name(t)
        raise ParseError(f"unexpected token {t.text!r}" if t.text else "unexpected end of input", t.pos)

    def name(self, t: _Token) -> Expr:
        if t.text == "i":
            return Lit(1j)
        if t.text[0] == "z" and t.text[1:].isdigit():
            idx = int(t.text[1:])
            if not 1 <= idx <= self.dim:
                raise ParseError(f"coordinate z{idx} out of range for dimension {self.dim}", t.pos)
            return Coord(idx)
        if t.text in _FUNCS:
            self.expect("(")
            if t.text == "hdot":
                weights = self.cvec()
                self.expect(")")
                if len(weights) != self.dim:
                    raise ParseError(f"hdot vector has {len(weights)} entries, expected {self.dim}", t.pos)
                return Hdot(weights)
            e = self.expr()
            self.expect(")")
            if t.text == "exp":
                return _fold(ExpNode(e))
            if t.text == "plog":
                return _fold(Plog(e))
            # conj: only constants keep the map holomorphic
            c = constant_value(e)
            if c is None:
                raise ParseError("conj() applies only to constant subexpressions", t.pos)
            return Lit(complex(c).conjugate())
        raise ParseError(f"unknown identifier {t.text!r}", t.pos)

    def cvec(self) -> tuple[complex, ...]:
        self.expect("(")
        vals: list[complex] = []
        while True:
            t0 = self.peek()
            e = self.expr()
            c = constant_value(e)
            if c is None:
                raise ParseError("hdot entries must be complex constants", t0.pos)
            vals.append(complex(c))
            if self.peek().text == ",":
                self.pop()
                continue
            self.expect(")")
            return tuple(vals)


def constant_value(e: Expr) -> complex | None:
    """Value of a coordinate-free subtree, or None if it involves a coordinate."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, (Coord, Hdot)):
        return None
    try:
        if isinstance(e, Neg):
            v = constant_value(e.arg)
            return None if v is None else -v
        if isinstance(e, (Add, Sub, Mul, Div)):
            a = constant_value(e.left)
            b = constant_value(e.right)
            if a is None or b is None:
                return None
            if isinstance(e, Add):
                return a + b
            if isinstance(e, Sub):
                return a - b
            if isinstance(e, Mul):
                return a * b
            return a / b
        if isinstance(e, Pow):
            v = constant_value(e.base)
            return None if v is None else ipow_value(v, e.exponent)
        if isinstance(e, ExpNode):
            v = constant_value(e.arg)
            if v is None:
                return None
            with np.errstate(all="ignore"):
                return complex(np.exp(v))
        if isinstance(e, Plog):
            v = constant_value(e.arg)
            return None if v is None else plog_value(v)
    except (ZeroDivisionError, OverflowError):
        return None
    raise TypeError(f"unknown node {e!r}")


def _fold(e: Expr) -> Expr:
    """Collapse literal-only subtrees when they evaluate to a finite value."""
    children = []
    for name in ("arg", "left", "right", "base"):
        if hasattr(e, name):
            children.append(getattr(e, name))
    if children and all(isinstance(c, Lit) for c in children):
        v = constant_value(e)
        if v is not None and np.isfinite(v.real) and np.isfinite(v.imag):
            return Lit(v)
    return e


def parse(text: str, dim: int) -> Expr:
    """Parse an expression over coordinates z1..z<dim>."""
    if not text or not text.strip():
        raise ParseError("empty expression", 0)
    if dim < 1:
        raise ValueError("dim must be >= 1")
    return _Parser(text, dim).parse()


# ---------------------------------------------------------------------------
# printer

_LEVEL_ADD, _LEVEL_MUL, _LEVEL_NEG, _LEVEL_POW, _LEVEL_ATOM = 1, 2, 3, 4, 5


def _num_str(x: float) -> str:
    return repr(float(x))


def _lit_str(v: complex) -> tuple[str, int]:
    re_, im = v.real, v.imag
    if im == 0.0:
        if re_ < 0 or (re_ == 0 and np.signbit(re_)):
            return f"-{_num_str(-re_)}", _LEVEL_NEG
        return _num_str(re_), _LEVEL_ATOM
    if re_ == 0.0:
        if im < 0:
            return f"-{_num_str(-im)}i", _LEVEL_NEG
        return f"{_num_str(im)}i", _LEVEL_ATOM
    sign = "-" if im < 0 else "+"
    head, _ = _lit_str(complex(re_, 0.0))
    return f"({head} {sign} {_num_str(abs(im))}i)", _LEVEL_ATOM


def to_source(e: Expr) -> str:
    return _print(e)[0]


def _wrap(child: Expr, need: int) -> str:
    s, lvl = _print(child)
    return f"({s})" if lvl < need else s


def _print(e: Expr) -> tuple[str, int]:
    if isinstance(e, Lit):
        return _lit_str(e.value)
    if isinstance(e, Coord):
        return f"z{e.index}", _LEVEL_ATOM
    if isinstance(e, Neg):
        # the grammar hangs '^' on a possibly negated base, so a negated
        # power must keep its parentheses
        arg = _print(e.arg)
        inner = f"({arg[0]})" if arg[1] <= _LEVEL_POW else arg[0]
        return f"-{inner}", _LEVEL_NEG
    if isinstance(e, Add):
        return f"{_wrap(e.left, _LEVEL_ADD)} + {_wrap(e.right, _LEVEL_MUL)}", _LEVEL_ADD
    if isinstance(e, Sub):
        return f"{_wrap(e.left, _LEVEL_ADD)} - {_wrap(e.right, _LEVEL_MUL)}", _LEVEL_ADD
    if isinstance(e, Mul):
        return f"{_wrap(e.left, _LEVEL_MUL)}*{_wrap(e.right, _LEVEL_NEG)}", _LEVEL_MUL
    if isinstance(e, Div):
        return f"{_wrap(e.left, _LEVEL_MUL)}/{_wrap(e.right, _LEVEL_NEG)}", _LEVEL_MUL
    if isinstance(e, Pow):
        return f"{_wrap(e.base, _LEVEL_ATOM)}^{e.exponent}", _LEVEL_POW
    if isinstance(e, ExpNode):
        return f"exp({to_source(e.arg)})", _LEVEL_ATOM
    if isinstance(e, Plog):
        return f"plog({to_source(e.arg)})", _LEVEL_ATOM
    if isinstance(e, Hdot):
        entries = ", ".join(_lit_str(w)[0] for w in e.weights)
        return f"hdot(({entries}))", _LEVEL_ATOM
    raise TypeError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# evaluation with exact first derivatives (complex dual numbers)


@dataclass(frozen=True)
class Jet:
    """Value and holomorphic gradient at a point."""

    value: complex
    grad: np.ndarray  # (dim,) complex


def _jet(e: Expr, z: np.ndarray) -> tuple[complex, np.ndarray]:
    dim = z.shape[0]
    if isinstance(e, Lit):
        return e.value, np.zeros(dim, dtype=np.complex128)
    if isinstance(e, Coord):
        g = np.zeros(dim, dtype=np.complex128)
        g[e.index - 1] = 1.0
        return complex(z[e.index - 1]), g
    if isinstance(e, Neg):
        v, g = _jet(e.arg, z)
        return -v, -g
    if isinstance(e, Add):
        v1, g1 = _jet(e.left, z)
        v2, g2 = _jet(e.right, z)
        return v1 + v2, g1 + g2
    if isinstance(e, Sub):
        v1, g1 = _jet(e.left, z)
        v2, g2 = _jet(e.right, z)
        return v1 - v2, g1 - g2
    if isinstance(e, Mul):
        v1, g1 = _jet(e.left, z)
        v2, g2 = _jet(e.right, z)
        return v1 * v2, v1 * g2 + v2 * g1
    if isinstance(e, Div):
        v1, g1 = _jet(e.left, z)
        v2, g2 = _jet(e.right, z)
        if v2 == 0:
            raise SingularityError("division by zero", to_source(e))
        q = v1 / v2
        return q, (g1 - q * g2) / v2
    if isinstance(e, Pow):
        v, g = _jet(e.base, z)
        n = e.exponent
        if n == 0:
            return 1.0 + 0j, np.zeros(dim, dtype=np.complex128)
        try:
            p = ipow_value(v, n - 1)
        except ZeroDivisionError:
            raise SingularityError("zero raised to a negative power", to_source(e)) from None
        return p * v, n * p * g
    if isinstance(e, ExpNode):
        v, g = _jet(e.arg, z)
        with np.errstate(all="ignore"):
            w = complex(np.exp(v))
        return w, w * g
    if isinstance(e, Plog):
        v, g = _jet(e.arg, z)
        try:
            w = plog_value(v)
        except ZeroDivisionError:
            raise SingularityError("logarithm of zero", to_source(e)) from None
        return w, g / v
    if isinstance(e, Hdot):
        w = np.conj(np.asarray(e.weights, dtype=np.complex128))
        return complex(z @ w), w
    raise TypeError(f"unknown node {e!r}")


def free_coords(e: Expr) -> set[int]:
    if isinstance(e, Coord):
        return {e.index}
    if isinstance(e, Hdot):
        return set(range(1, len(e.weights) + 1))
    out: set[int] = set()
    for name in ("arg", "left", "right", "base"):
        if hasattr(e, name):
            out |= free_coords(getattr(e, name))
    return out


def substitute(e: Expr, components: tuple[Expr, ...]) -> Expr:
    """Replace z_j by components[j-1]; hdot becomes the matching weighted sum."""
    if isinstance(e, Lit):
        return e
    if isinstance(e, Coord):
        return components[e.index - 1]
    if isinstance(e, Neg):
        return _fold(Neg(substitute(e.arg, components)))
    if isinstance(e, Add):
        return _fold(Add(substitute(e.left, components), substitute(e.right, components)))
    if isinstance(e, Sub):
        return _fold(Sub(substitute(e.left, components), substitute(e.right, components)))
    if isinstance(e, Mul):
        return _fold(Mul(substitute(e.left, components), substitute(e.right, components)))
    if isinstance(e, Div):
        return _fold(Div(substitute(e.left, components), substitute(e.right, components)))
    if isinstance(e, Pow):
        return _fold(Pow(substitute(e.base, components), e.exponent))
    if isinstance(e, ExpNode):
        return _fold(ExpNode(substitute(e.arg, components)))
    if isinstance(e, Plog):
        return _fold(Plog(substitute(e.arg, components)))
    if isinstance(e, Hdot):
        acc: Expr | None = None
        for j, w in enumerate(e.weights):
            term = _fold(Mul(components[j], Lit(complex(w).conjugate())))
            acc = term if acc is None else _fold(Add(acc, term))
        assert acc is not None
        return acc
    raise TypeError(f"unknown node {e!r}")


# ---------------------------------------------------------------------------
# maps


@dataclass(frozen=True)
class ScalarMap:
    """A holomorphic scalar-valued expression over dim coordinates."""

    expr: Expr
    dim: int

    @classmethod
    def parse(cls, text: str, dim: int) -> "ScalarMap":
        return cls(parse(text, dim), dim)

    def eval(self, z) -> complex:
        return self.jet(z).value

    def jet(self, z) -> Jet:
        z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
        if z.shape != (self.dim,):
            raise ValueError(f"expected {self.dim} coordinates, got shape {z.shape}")
        v, g = _jet(self.expr, z)
        return Jet(v, g)

    def source(self) -> str:
        return to_source(self.expr)


def eval_jet(f: ScalarMap, z) -> Jet:
    return f.jet(z)


@dataclass(frozen=True)
class SelfMap:
    """A holomorphic map of a domain into itself, one expression per coordinate."""

    components: tuple[Expr, ...]
    domain: DomainSpec

    def __post_init__(self) -> None:
        if len(self.components) != self.domain.dim:
            raise ValueError(f"expected {self.domain.dim} components, got {len(self.components)}")

    @classmethod
    def parse(cls, texts, domain: DomainSpec) -> "SelfMap":
        return cls(tuple(parse(t, domain.dim) for t in texts), domain)

    @classmethod
    def identity(cls, domain: DomainSpec) -> "SelfMap":
        return cls(tuple(Coord(j + 1) for j in range(domain.dim)), domain)

    def eval(self, z) -> np.ndarray:
        z = as_point(self.domain, z)
        return np.array([_jet(c, z)[0] for c in self.components], dtype=np.complex128)

    def sources(self) -> list[str]:
        return [to_source(c) for c in self.components]


def jacobian(phi: SelfMap, z) -> np.ndarray:
    """Matrix whose row k is the holomorphic gradient of component k."""
    z = as_point(phi.domain, z)
    rows = []
    for c in phi.components:
        rows.append(_jet(c, z)[1])
    return np.array(rows, dtype=np.complex128)


@dataclass(frozen=True)
class SelfMapReport:
    passed: bool
    max_image_norm_proxy: float
    worst_point: np.ndarray
    witnesses: tuple
    n_checked: int
    note: str = ""


def self_map_check(phi: SelfMap, domain: DomainSpec, count: int = 4000, seed: int = 7) -> SelfMapReport:
    """Sampled guard for the self-map hypothesis.

    Evaluates the map on uniform plus boundary-biased samples and passes only
    when every image lies inside the domain (with the membership tolerance).
    A singularity inside the domain fails the check with a witness.
    """
    from . import backends, tape  # local import to avoid a cycle
    from .domains import sample

    if count < 1:
        raise ValueError("count must be >= 1")
    n1 = count // 2
    Z = np.vstack(
        [
            sample(domain, "uniform", max(n1, 1), seed),
            sample(domain, "boundary_biased", max(count - n1, 1), seed + 1),
        ]
    )
    vals = np.empty_like(Z)
    ok = np.ones(len(Z), dtype=bool)
    for k, comp in enumerate(phi.components):
        t = tape.compile_expr(comp, domain.dim)
        v, good = backends.eval_values(t, Z)
        vals[:, k] = v
        ok &= good
    if domain.is_round:
        proxy = np.linalg.norm(vals, axis=1)
    else:
        proxy = np.max(np.abs(vals), axis=1)
    proxy = np.where(ok, proxy, np.inf)
    worst = int(np.argmax(proxy))
    if not np.all(ok):
        bad = int(np.nonzero(~ok)[0][0])
        return SelfMapReport(
            False, float("inf"), Z[bad], (Z[bad],), len(Z), note="singularity inside the domain"
        )
    gap = boundary_gap_batch(domain, vals)
    passed = bool(np.all(gap >= MEMBERSHIP_TOL))
    note = "" if passed else "image leaves the domain"
    return SelfMapReport(passed, float(proxy[worst]), Z[worst], (Z[worst],), len(Z), note=note)
