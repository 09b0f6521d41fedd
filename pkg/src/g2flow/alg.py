"""Dense exterior and tensor algebra over exact scalars, for frames of dimension <= 8.

Forms are ``AltForm`` objects: a map from strictly increasing index tuples to
coefficients, so ``a = sum_I a_I e^I``.  Everything else (vectors, symmetric
2-tensors, 4-tensors) is a numpy object array holding covariant components in
the frame.  ``Metric`` carries the matrix, its inverse and an explicit
orientation form; the sign of the Hodge star comes from that form alone.
"""

from __future__ import annotations

import itertools
import math
from functools import cached_property

import numpy as np

from .scalar import Q, Laurent, MODE, is_zero, nth_root

__all__ = [
    "AltForm",
    "Metric",
    "wedge",
    "contract",
    "hodge_star",
    "form_inner",
    "tensor_contract",
    "perm_sign",
    "det",
    "inverse",
    "solve",
    "zeros",
    "identity",
    "raise_index",
    "trace",
    "sym_inner",
    "matmul",
    "sym",
    "outer",
]


def zeros(*shape) -> np.ndarray:
    a = np.empty(shape, dtype=object)
    a.fill(Q(0))
    return a


def identity(n: int) -> np.ndarray:
    a = zeros(n, n)
    for i in range(n):
        a[i, i] = Q(1)
    return a


def perm_sign(seq) -> int:
    """Sign of the permutation sorting ``seq``; 0 if it has repeats."""
    seq = list(seq)
    if len(set(seq)) != len(seq):
        return 0
    sign = 1
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            if seq[i] > seq[j]:
                sign = -sign
    return sign


def _clean(x):
    # Collapse constant Laurent values so hot loops stay on rationals.
    if isinstance(x, Laurent) and x.is_constant():
        return x.constant()
    return x


class AltForm:
    """Alternating k-form on an n-dimensional frame."""

    __slots__ = ("dim", "degree", "coeffs")

    def __init__(self, dim: int, degree: int, coeffs: dict | None = None):
        if not 0 <= degree:
            raise ValueError("negative degree")
        self.dim = dim
        self.degree = degree
        self.coeffs: dict = {}
        if degree > dim or not coeffs:
            return
        for idx, c in coeffs.items():
            idx = tuple(idx)
            if len(idx) != degree:
                raise ValueError(f"index {idx} has wrong length for degree {degree}")
            s = perm_sign(idx)
            if s == 0:
                continue
            key = tuple(sorted(idx))
            if key[-1] >= dim if key else False:
                raise IndexError(f"index {idx} out of range for dim {dim}")
            val = self.coeffs.get(key, 0) + (c if s > 0 else -c)
            if is_zero(val):
                self.coeffs.pop(key, None)
            else:
                self.coeffs[key] = val

    # -- construction --------------------------------------------------------
    @classmethod
    def basis(cls, dim: int, *idx: int, coeff=1) -> "AltForm":
        return cls(dim, len(idx), {idx: Q(coeff)})

    @classmethod
    def scalar(cls, dim: int, value) -> "AltForm":
        return cls(dim, 0, {(): value})

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "AltForm":
        k = arr.ndim
        n = arr.shape[0] if k else 0
        coeffs = {}
        for idx in itertools.combinations(range(n), k):
            c = arr[idx]
            if not is_zero(c):
                coeffs[idx] = c
        return cls(n, k, coeffs)

    @classmethod
    def from_vector(cls, v) -> "AltForm":
        return cls(len(v), 1, {(i,): c for i, c in enumerate(v)})

    def to_array(self) -> np.ndarray:
        if self.degree > 5:
            raise ValueError("dense arrays are limited to degree <= 5")
        arr = zeros(*([self.dim] * self.degree))
        if self.degree == 0:
            arr[()] = self.coeffs.get((), Q(0))
            return arr
        perms = [(p, perm_sign(p)) for p in itertools.permutations(range(self.degree))]
        for idx, c in self.coeffs.items():
            for p, s in perms:
                arr[tuple(idx[i] for i in p)] = c if s > 0 else -c
        return arr

    def to_vector(self) -> np.ndarray:
        if self.degree != 1:
            raise ValueError("not a 1-form")
        v = zeros(self.dim)
        for (i,), c in self.coeffs.items():
            v[i] = c
        return v

    # -- access --------------------------------------------------------------
    def __getitem__(self, idx) -> object:
        idx = tuple(idx) if not isinstance(idx, int) else (idx,)
        s = perm_sign(idx)
        if s == 0:
            return Q(0)
        c = self.coeffs.get(tuple(sorted(idx)), Q(0))
        return c if s > 0 else -c

    def value(self):
        """The coefficient of a 0-form or of the top basis form."""
        if self.degree == 0:
            return self.coeffs.get((), Q(0))
        if self.degree == self.dim:
            return self.coeffs.get(tuple(range(self.dim)), Q(0))
        raise ValueError("value() needs a 0-form or a top form")

    def is_zero(self) -> bool:
        return not self.coeffs

    def map(self, fn) -> "AltForm":
        return AltForm(self.dim, self.degree, {k: fn(c) for k, c in self.coeffs.items()})

    def embed(self, dim: int, shift: int = 0) -> "AltForm":
        """Same form on a larger frame, indices shifted by ``shift``."""
        return AltForm(dim, self.degree, {tuple(i + shift for i in k): c for k, c in self.coeffs.items()})

    # -- vector space structure ----------------------------------------------
    def _check(self, other: "AltForm"):
        if not isinstance(other, AltForm):
            raise TypeError("expected AltForm")
        if other.dim != self.dim:
            raise ValueError(f"dimension mismatch: {self.dim} vs {other.dim}")
        if other.degree != self.degree and not (self.is_zero() or other.is_zero()):
            raise ValueError(f"degree mismatch: {self.degree} vs {other.degree}")

    def __add__(self, other: "AltForm") -> "AltForm":
        self._check(other)
        deg = self.degree if not self.is_zero() else other.degree
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return AltForm(self.dim, deg, out)

    def __neg__(self) -> "AltForm":
        return AltForm(self.dim, self.degree, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: "AltForm") -> "AltForm":
        return self + (-other)

    def __mul__(self, s) -> "AltForm":
        if isinstance(s, AltForm):
            return wedge(self, s)
        return AltForm(self.dim, self.degree, {k: c * s for k, c in self.coeffs.items()})

    def __rmul__(self, s) -> "AltForm":
        return AltForm(self.dim, self.degree, {k: s * c for k, c in self.coeffs.items()})

    def __truediv__(self, s) -> "AltForm":
        return AltForm(self.dim, self.degree, {k: c / s for k, c in self.coeffs.items()})

    def __xor__(self, other: "AltForm") -> "AltForm":
        return wedge(self, other)

    def __eq__(self, other) -> bool:
        if not isinstance(other, AltForm):
            return NotImplemented
        return (self - other).is_zero() if self.dim == other.dim else False

    __hash__ = None

    def __repr__(self):
        if not self.coeffs:
            return f"AltForm(dim={self.dim}, degree={self.degree}, 0)"
        body = " + ".join(
            f"({c})e^{''.join(map(str, k))}" for k, c in sorted(self.coeffs.items())
        )
        return f"AltForm(dim={self.dim}, degree={self.degree}, {body})"


def _merge_sign(a: tuple, b: tuple) -> int:
    inv = 0
    for i in a:
        for j in b:
            if i == j:
                return 0
            if i > j:
                inv += 1
    return -1 if inv & 1 else 1


def wedge(a: AltForm, b: AltForm) -> AltForm:
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    deg = a.degree + b.degree
    if deg > a.dim:
        return AltForm(a.dim, deg)
    out: dict = {}
    for I, ca in a.coeffs.items():
        for J, cb in b.coeffs.items():
            s = _merge_sign(I, J)
            if s == 0:
                continue
            K = tuple(sorted(I + J))
            v = ca * cb if s > 0 else -(ca * cb)
            out[K] = out[K] + v if K in out else v
    return AltForm(a.dim, deg, out)


def contract(X, a: AltForm) -> AltForm:
    """Interior product X ⌟ a, with X given by frame components."""
    if a.degree == 0:
        raise ValueError("cannot contract a vector into a 0-form")
    if len(X) != a.dim:
        raise ValueError("dimension mismatch")
    out: dict = {}
    for I, c in a.coeffs.items():
        for r, i in enumerate(I):
            x = X[i]
            if is_zero(x):
                continue
            K = I[:r] + I[r + 1:]
            v = x * c if r % 2 == 0 else -(x * c)
            out[K] = out[K] + v if K in out else v
    return AltForm(a.dim, a.degree - 1, out)


# -- matrices over exact rings ------------------------------------------------

def det(mat) -> object:
    mat = np.asarray(mat, dtype=object)
    n = mat.shape[0]
    if n == 0:
        return Q(1)
    if n <= 4:
        total = Q(0)
        for p in itertools.permutations(range(n)):
            term = Q(perm_sign(p))
            for i in range(n):
                x = mat[i, p[i]]
                if is_zero(x):
                    term = None
                    break
                term = term * x
            if term is not None:
                total = total + term
        return _clean(total)
    m = mat.copy()
    result = Q(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if not is_zero(m[r, c])), None)
        if piv is None:
            return Q(0)
        if piv != c:
            m[[c, piv]] = m[[piv, c]]
            result = -result
        p = m[c, c]
        result = result * p
        for r in range(c + 1, n):
            if not is_zero(m[r, c]):
                fct = m[r, c] / p
                m[r, c:] = m[r, c:] - fct * m[c, c:]
    return _clean(result)


def solve(mat, rhs) -> np.ndarray:
    """Gauss–Jordan solve of ``mat @ x = rhs`` (rhs may be a matrix)."""
    a = np.array(mat, dtype=object)
    b = np.array(rhs, dtype=object)
    vec = b.ndim == 1
    if vec:
        b = b.reshape(-1, 1)
    n = a.shape[0]
    aug = np.concatenate([a, b], axis=1)
    for c in range(n):
        piv = next((r for r in range(c, n) if not is_zero(aug[r, c])), None)
        if piv is None:
            raise ZeroDivisionError("singular matrix")
        if piv != c:
            aug[[c, piv]] = aug[[piv, c]]
        p = aug[c, c]
        aug[c] = np.array([_clean(x / p) for x in aug[c]], dtype=object)
        for r in range(n):
            if r != c and not is_zero(aug[r, c]):
                fct = aug[r, c]
                aug[r] = np.array([_clean(x) for x in aug[r] - fct * aug[c]], dtype=object)
    x = aug[:, n:]
    return x[:, 0] if vec else x


def inverse(mat) -> np.ndarray:
    mat = np.asarray(mat, dtype=object)
    n = mat.shape[0]
    if all(is_zero(mat[i, j]) for i in range(n) for j in range(n) if i != j):
        out = zeros(n, n)
        for i in range(n):
            out[i, i] = _clean(1 / mat[i, i]) if not isinstance(mat[i, i], float) else 1.0 / mat[i, i]
        return out
    return solve(mat, identity(n))


def _positive(x) -> bool:
    if isinstance(x, Laurent):
        # formal variables are positive reals; all-positive coefficients suffice
        return not x.is_zero() and all(c > 0 for c in x.terms.values())
    return x > 0


class Metric:
    """Riemannian metric on a frame with a chosen orientation form."""

    def __init__(self, matrix, orientation: AltForm | None = None, check: bool = True):
        g = np.array(matrix, dtype=object)
        n = g.shape[0]
        if g.shape != (n, n):
            raise ValueError("metric must be square")
        self.dim = n
        self.g = g
        if check:
            for i in range(n):
                for j in range(i + 1, n):
                    if not is_zero(g[i, j] - g[j, i]):
                        raise ValueError("metric is not symmetric")
            for k in range(1, n + 1):
                if not _positive(det(g[:k, :k])):
                    raise ValueError("metric is not positive definite")
        self.inv = inverse(g)
        if orientation is None:
            root = nth_root(det(g), 2)
            if root is None:
                if MODE.kind == "exact":
                    raise ValueError("sqrt(det g) is not exact; pass an orientation form")
                root = float(det(g)) ** 0.5
            orientation = AltForm(n, n, {tuple(range(n)): root})
        if orientation.degree != n or orientation.dim != n:
            raise ValueError("orientation must be a top-degree form")
        self.vol = orientation
        if check and not is_zero(form_inner(self, orientation, orientation) - 1):
            raise ValueError("orientation form does not have unit norm")

    @classmethod
    def euclidean(cls, n: int) -> "Metric":
        return cls(identity(n), AltForm.basis(n, *range(n)))

    @classmethod
    def diagonal(cls, entries, orientation: AltForm | None = None) -> "Metric":
        n = len(entries)
        g = zeros(n, n)
        for i, e in enumerate(entries):
            g[i, i] = e
        return cls(g, orientation)

    @cached_property
    def is_diagonal(self) -> bool:
        n = self.dim
        return all(is_zero(self.g[i, j]) for i in range(n) for j in range(n) if i != j)

    def raise_map(self, k: int) -> dict:
        """``I -> [(J, minor)]`` so that raised components are ``a^I = sum minor * a_J``."""
        cache = self.__dict__.setdefault("_raise_cache", {})
        if k in cache:
            return cache[k]
        n = self.dim
        combos = list(itertools.combinations(range(n), k))
        table = {}
        if self.is_diagonal:
            for I in combos:
                c = Q(1)
                for i in I:
                    c = c * self.inv[i, i]
                table[I] = [(I, _clean(c))]
        else:
            for I in combos:
                row = []
                for J in combos:
                    m = det(self.inv[np.ix_(I, J)]) if k else Q(1)
                    if not is_zero(m):
                        row.append((J, m))
                table[I] = row
        cache[k] = table
        return table

    def raise_form(self, a: AltForm) -> dict:
        table = self.raise_map(a.degree)
        out = {}
        for I, row in table.items():
            s = None
            for J, m in row:
                c = a.coeffs.get(J)
                if c is None:
                    continue
                s = m * c if s is None else s + m * c
            if s is not None and not is_zero(s):
                out[I] = s
        return out

    def flat(self, X) -> np.ndarray:
        return self.g.dot(np.asarray(X, dtype=object))

    def sharp(self, alpha) -> np.ndarray:
        if isinstance(alpha, AltForm):
            alpha = alpha.to_vector()
        return self.inv.dot(np.asarray(alpha, dtype=object))

    def scaled(self, c) -> "Metric":
        root = nth_root(c, 2)
        if root is None:
            root = float(c) ** 0.5
        return Metric(self.g * c, self.vol * root**self.dim, check=False)


def form_inner(m: Metric, a: AltForm, b: AltForm):
    if a.degree != b.degree:
        raise ValueError(f"degree mismatch: {a.degree} vs {b.degree}")
    up = m.raise_form(b)
    total = Q(0)
    for I, c in a.coeffs.items():
        if I in up:
            total = total + c * up[I]
    return _clean(total)


def hodge_star(m: Metric, a: AltForm) -> AltForm:
    n = m.dim
    if a.dim != n:
        raise ValueError("dimension mismatch")
    lam = m.vol.value()
    full = tuple(range(n))
    out = {}
    for I, c in m.raise_form(a).items():
        Ic = tuple(i for i in full if i not in I)
        s = perm_sign(I + Ic)
        out[Ic] = lam * c if s > 0 else -(lam * c)
    return AltForm(n, n - a.degree, out)


# -- index tensors ------------------------------------------------------------

def tensor_contract(pattern: str, *tensors, metric: Metric | None = None):
    """Evaluate an index contraction of covariant tensors.

    ``pattern`` uses einsum syntax; every letter repeated among the inputs and
    absent from the output is contracted through the inverse metric, i.e. one
    of its occurrences is raised first.  ``tensor_contract("abc,abc->", phi,
    phi, metric=g)`` is ``phi_abc phi^abc``.
    """
    if "->" not in pattern:
        raise ValueError("pattern must contain '->'")
    lhs, out = pattern.split("->")
    subs = lhs.split(",")
    if len(subs) != len(tensors):
        raise ValueError("pattern does not match the number of tensors")
    arrays = []
    for s, t in zip(subs, tensors):
        arr = t.to_array() if isinstance(t, AltForm) else np.asarray(t, dtype=object)
        if arr.ndim != len(s):
            raise ValueError(f"subscripts {s!r} do not match tensor of rank {arr.ndim}")
        arrays.append(arr)
    counts: dict = {}
    for s in subs:
        for ch in s:
            counts[ch] = counts.get(ch, 0) + 1
    for ch, cnt in counts.items():
        if cnt > 2 or (cnt == 2 and ch in out):
            raise ValueError(f"malformed index pattern: {ch!r}")
    if metric is not None and not _is_identity(metric.inv):
        seen = set()
        for ti, s in enumerate(subs):
            for pos, ch in enumerate(s):
                if counts[ch] == 2 and ch not in out:
                    if ch in seen:
                        arrays[ti] = raise_index(arrays[ti], metric, pos)
                    seen.add(ch)
    res = np.einsum(pattern, *arrays)
    if isinstance(res, np.ndarray):
        if res.ndim == 0:
            return _clean(res[()])
        return np.vectorize(_clean, otypes=[object])(res)
    return _clean(res)


def _is_identity(a) -> bool:
    n = a.shape[0]
    return all((a[i, j] == 1) if i == j else is_zero(a[i, j]) for i in range(n) for j in range(n))


def raise_index(arr: np.ndarray, m: Metric, axis: int) -> np.ndarray:
    res = np.tensordot(m.inv, arr, axes=([1], [axis]))
    return np.moveaxis(res, 0, axis)


def trace(h, m: Metric):
    return _clean(np.einsum("ab,ab->", m.inv, np.asarray(h, dtype=object)))


def matmul(a, b, m: Metric) -> np.ndarray:
    """(a b)_ij = a_ik g^kl b_lj."""
    return np.asarray(a, dtype=object).dot(m.inv).dot(np.asarray(b, dtype=object))


def sym_inner(a, b, m: Metric):
    """Full contraction a_{i..} b^{i..} of two covariant tensors of equal rank."""
    a = np.asarray(a, dtype=object)
    b = np.asarray(b, dtype=object)
    for ax in range(b.ndim):
        b = raise_index(b, m, ax)
    return _clean(np.sum(a * b))


def sym(a) -> np.ndarray:
    a = np.asarray(a, dtype=object)
    return (a + a.T) * Q(1, 2)


def outer(u, v) -> np.ndarray:
    return np.multiply.outer(np.asarray(u, dtype=object), np.asarray(v, dtype=object))


def factorial(k: int) -> int:
    return math.factorial(k)
