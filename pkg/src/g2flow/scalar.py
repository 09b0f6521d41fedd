"""Exact scalars: rationals, sparse Laurent polynomials, and the float fallback.

Every tensor in the package holds entries that are ``int``, ``Q`` (gmpy2 rationals),
``Laurent`` or (float mode only) ``float``.  ``Laurent`` is a sparse Laurent
polynomial in named variables with rational coefficients; it carries

* polynomial coefficient fields over the frame model (variables ``x0``..``x6``),
* the ansatz scalars ``f`` and ``h`` as formal symbols,
* closed-form time laws written in a base ``u`` with ``u**N = 1 + b t``.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from numbers import Rational

import gmpy2

# gmpy2's rationals interoperate with fractions.Fraction and are much faster.
Q = gmpy2.mpq

__all__ = [
    "Q",
    "Laurent",
    "Mode",
    "MODE",
    "set_mode",
    "exact",
    "is_zero",
    "to_float",
    "nth_root",
    "var",
]


@dataclass
class Mode:
    kind: str = "exact"
    rel_tol: float = 1e-9


MODE = Mode(
    kind=os.environ.get("G2FLOW_MODE", "exact"),
    rel_tol=float(os.environ.get("G2FLOW_TOL", "1e-9")),
)


def set_mode(kind: str, rel_tol: float | None = None) -> None:
    if kind not in ("exact", "float"):
        raise ValueError(f"unknown scalar mode {kind!r}")
    MODE.kind = kind
    if rel_tol is not None:
        MODE.rel_tol = rel_tol


def exact(x) -> object:
    """Parse ``x`` (int, rational, 'p/q' or decimal string) into the active scalar field.

    Floats are refused in exact mode: a binary float is not the decimal the
    user typed, so strings must be used instead.
    """
    if MODE.kind == "float":
        return float(Q(x)) if isinstance(x, str) else float(x)
    if isinstance(x, float):
        raise TypeError("exact mode does not accept binary floats; pass a string")
    return Q(x)


def _key_mul(a: tuple, b: tuple) -> tuple:
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for v, e in b:
        e2 = d.get(v, 0) + e
        if e2:
            d[v] = e2
        else:
            d.pop(v, None)
    return tuple(sorted(d.items()))


class Laurent:
    """Sparse Laurent polynomial with ``Q`` coefficients.

    Terms are stored as ``{monomial: coeff}`` where a monomial is a sorted tuple
    of ``(variable, exponent)`` pairs with nonzero exponents.
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        if terms is None:
            self.terms = {}
        elif isinstance(terms, dict):
            self.terms = {k: Q(c) for k, c in terms.items() if c != 0}
        else:
            c = Q(terms)
            self.terms = {(): c} if c else {}

    @classmethod
    def monomial(cls, coeff=1, **exps) -> "Laurent":
        key = tuple(sorted((v, e) for v, e in exps.items() if e))
        return cls({key: Q(coeff)})

    # -- structure ----------------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and () in self.terms)

    def constant(self) -> Q:
        return self.terms.get((), Q(0))

    def is_monomial(self) -> bool:
        return len(self.terms) == 1

    def variables(self) -> set[str]:
        return {v for k in self.terms for v, _ in k}

    def degree_in(self, name: str) -> tuple[int, int]:
        exps = [dict(k).get(name, 0) for k in self.terms] or [0]
        return min(exps), max(exps)

    # -- arithmetic ---------------------------------------------------------
    @staticmethod
    def _lift(other):
        if isinstance(other, Laurent):
            return other
        if isinstance(other, (int, Rational)):
            return Laurent(other)
        return NotImplemented

    def __add__(self, other):
        if isinstance(other, float):
            return self.evaluate({}) + other
        o = self._lift(other)
        if o is NotImplemented:
            return o
        t = dict(self.terms)
        for k, c in o.terms.items():
            s = t.get(k, 0) + c
            if s:
                t[k] = s
            else:
                t.pop(k, None)
        out = Laurent()
        out.terms = t
        return out

    __radd__ = __add__

    def __neg__(self):
        out = Laurent()
        out.terms = {k: -c for k, c in self.terms.items()}
        return out

    def __pos__(self):
        return self

    def __sub__(self, other):
        if isinstance(other, float):
            return self.evaluate({}) - other
        o = self._lift(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, float):
            return self.evaluate({}) * other
        if isinstance(other, (int, Rational)):
            if other == 0:
                return Laurent()
            out = Laurent()
            out.terms = {k: c * other for k, c in self.terms.items()}
            return out
        if not isinstance(other, Laurent):
            return NotImplemented
        t: dict = {}
        for k1, c1 in self.terms.items():
            for k2, c2 in other.terms.items():
                k = _key_mul(k1, k2)
                s = t.get(k, 0) + c1 * c2
                if s:
                    t[k] = s
                else:
                    t.pop(k, None)
        out = Laurent()
        out.terms = t
        return out

    __rmul__ = __mul__

    def inverse(self) -> "Laurent":
        if not self.is_monomial():
            raise ZeroDivisionError(f"cannot invert non-monomial Laurent polynomial {self}")
        (k, c), = self.terms.items()
        out = Laurent()
        out.terms = {tuple((v, -e) for v, e in k): 1 / c}
        return out

    def __truediv__(self, other):
        if isinstance(other, float):
            return self.evaluate({}) / other
        if isinstance(other, (int, Rational)):
            return self * (1 / Q(other))
        if isinstance(other, Laurent):
            if other.is_constant() and not other.is_zero():
                return self * (1 / other.constant())
            return self * other.inverse()
        return NotImplemented

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if not isinstance(n, int):
            raise TypeError("Laurent powers must be integers")
        if n < 0:
            return self.inverse() ** (-n)
        out = Laurent(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, float):
            return False
        o = self._lift(other)
        if o is NotImplemented:
            return NotImplemented
        return self.terms == o.terms

    __hash__ = None

    # -- calculus and evaluation --------------------------------------------
    def diff(self, name: str) -> "Laurent":
        t: dict = {}
        for k, c in self.terms.items():
            d = dict(k)
            e = d.get(name, 0)
            if not e:
                continue
            if e == 1:
                del d[name]
            else:
                d[name] = e - 1
            t[tuple(sorted(d.items()))] = c * e
        out = Laurent()
        out.terms = t
        return out

    def subs(self, values: dict) -> "Laurent":
        """Substitute variables by scalars or Laurent polynomials."""
        out = Laurent()
        for k, c in self.terms.items():
            term = Laurent({(): c})
            rest = []
            for v, e in k:
                if v in values:
                    term = term * (_pow(values[v], e))
                else:
                    rest.append((v, e))
            if rest:
                term = term * Laurent({tuple(rest): 1})
            out = out + term
        return out

    def evaluate(self, values: dict):
        total = 0
        for k, c in self.terms.items():
            term = c if MODE.kind == "exact" else float(c)
            for v, e in k:
                term = term * _pow(values[v], e)
            total = total + term
        return total

    def reduce_power(self, name: str, n: int, value) -> "Laurent":
        """Rewrite with ``name**n == value`` so every exponent lies in ``[0, n)``."""
        value = Q(value)
        out: dict = {}
        for k, c in self.terms.items():
            d = dict(k)
            e = d.pop(name, 0)
            q, r = divmod(e, n)
            if r:
                d[name] = r
            key = tuple(sorted(d.items()))
            s = out.get(key, 0) + c * value**q
            if s:
                out[key] = s
            else:
                out.pop(key, None)
        res = Laurent()
        res.terms = out
        return res

    def __repr__(self):
        if not self.terms:
            return "0"
        parts = []
        for k, c in sorted(self.terms.items()):
            mono = "*".join(f"{v}^{e}" if e != 1 else v for v, e in k)
            parts.append(f"{c}*{mono}" if mono else f"{c}")
        return " + ".join(parts)


def _pow(x, e: int):
    if e >= 0:
        return x**e
    return (1 / x) ** (-e) if not isinstance(x, Laurent) else x.inverse() ** (-e)


def var(name: str) -> Laurent:
    return Laurent.monomial(1, **{name: 1})


def is_zero(x, scale: float = 1.0) -> bool:
    """Exact zero test; in float mode, ``|x| <= rel_tol * scale``."""
    if isinstance(x, Laurent):
        return x.is_zero()
    if isinstance(x, float):
        return abs(x) <= MODE.rel_tol * max(scale, 1.0)
    return x == 0


def to_float(x, values: dict | None = None) -> float:
    if isinstance(x, Laurent):
        return float(x.evaluate(values or {}))
    return float(x)


def _rational_root(q, n: int) -> object:
    if q < 0:
        if n % 2 == 0:
            return None
        r = _rational_root(-q, n)
        return None if r is None else -r
    num, ok1 = gmpy2.iroot(q.numerator, n)
    den, ok2 = gmpy2.iroot(q.denominator, n)
    if ok1 and ok2:
        return Q(int(num), int(den))
    return None


def nth_root(x, n: int):
    """Exact n-th root when one exists in the same ring, else ``None``.

    Rationals need perfect n-th power numerator and denominator; Laurent
    polynomials must be monomials whose exponents are all divisible by n.
    Floats always succeed (real root, sign preserved for odd n).
    """
    if isinstance(x, float):
        if x < 0 and n % 2:
            return -((-x) ** (1.0 / n))
        return x ** (1.0 / n) if x >= 0 else None
    if isinstance(x, Laurent):
        if x.is_constant():
            r = _rational_root(x.constant(), n)
            return None if r is None else Laurent(r)
        if not x.is_monomial():
            return None
        (k, c), = x.terms.items()
        if any(e % n for _, e in k):
            return None
        r = _rational_root(c, n)
        if r is None:
            return None
        return Laurent({tuple((v, e // n) for v, e in k): r})
    return _rational_root(Q(x), n)
