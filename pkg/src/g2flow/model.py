"""Exact frame calculus on Lie-group frame models.

A ``FrameModel`` is a global coframe ``e^0..e^{n-1}`` with constant structure
constants, ``[e_i, e_j] = c^k_ij e_k`` and ``de^k = -1/2 c^k_ij e^i ^ e^j``,
plus the action of each frame vector field on coefficient functions.  The
coefficient functions are ``Laurent`` polynomials in coordinates ``x0..``;
invariant tensors simply have constant coefficients.

The contact Calabi–Yau test bed is the 7-dimensional Heisenberg group with
``e^0 = dx0 + x1 dx2 + x3 dx4 + x5 dx6`` and ``e^i = dx^i`` otherwise, so
``de^0 = e^12 + e^34 + e^56`` and the transverse geometry is flat.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .alg import (
    AltForm,
    Metric,
    _clean,
    hodge_star,
    inverse,
    tensor_contract,
    wedge,
    zeros,
)
from .scalar import Q, Laurent, is_zero, var

__all__ = [
    "FrameModel",
    "Connection",
    "Curvature",
    "heisenberg",
    "abelian",
    "frame_d",
    "levi_civita",
    "covariant_derivative",
    "covariant_derivative_vector",
    "curvature",
    "transverse_curvature",
    "divergence",
    "divergence_vector",
    "curl",
    "curl_vector",
    "lie_derivative_metric",
    "codifferential",
    "hodge_laplacian",
    "ETA",
    "OMEGA",
    "RE_UPSILON",
    "IM_UPSILON",
    "VOL_D",
]


def _zero_derivation(_x):
    return Q(0)


@dataclass(eq=False)
class FrameModel:
    """Coframe with constant structure constants ``c[k, i, j] = c^k_ij``."""

    c: np.ndarray
    derivations: list = field(default_factory=list)
    name: str = "frame"

    def __post_init__(self):
        n = self.c.shape[0]
        if not self.derivations:
            self.derivations = [_zero_derivation] * n
        self._de = []
        for k in range(n):
            coeffs = {}
            for i in range(n):
                for j in range(i + 1, n):
                    if not is_zero(self.c[k, i, j]):
                        coeffs[(i, j)] = -self.c[k, i, j]
            self._de.append(AltForm(n, 2, coeffs))
        self._d_basis: dict = {}

    @property
    def dim(self) -> int:
        return self.c.shape[0]

    def de(self, k: int) -> AltForm:
        return self._de[k]

    def apply(self, j: int, x):
        """e_j acting on a coefficient function."""
        if isinstance(x, Laurent):
            return _clean(self.derivations[j](x))
        return Q(0)

    def d_basis(self, I: tuple) -> AltForm:
        if I not in self._d_basis:
            n = self.dim
            total = AltForm(n, len(I) + 1)
            for r, k in enumerate(I):
                left = AltForm.basis(n, *I[:r]) if r else AltForm.scalar(n, 1)
                right = AltForm.basis(n, *I[r + 1:]) if r + 1 < len(I) else AltForm.scalar(n, 1)
                term = wedge(wedge(left, self._de[k]), right)
                total = total + (term if r % 2 == 0 else -term)
            self._d_basis[I] = total
        return self._d_basis[I]

    def is_constant(self, x) -> bool:
        return all(is_zero(self.apply(j, x)) for j in range(self.dim))

    def jacobi_residual(self) -> np.ndarray:
        c = self.c
        t = np.einsum("mij,lmk->lijk", c, c)
        return t + np.einsum("lijk->ljki", t) + np.einsum("lijk->lkij", t)


def _coordinate_field(comps: dict) -> Callable:
    # comps: coordinate name -> Laurent coefficient of d/dx
    def derive(x: Laurent):
        out = Laurent()
        for name, coef in comps.items():
            dx = x.diff(name)
            if not dx.is_zero():
                out = out + coef * dx
        return out

    return derive


def heisenberg(c_override: dict | None = None) -> FrameModel:
    """The 7-dimensional Heisenberg model with de^0 = e^12 + e^34 + e^56.

    ``c_override`` maps ``(k, i, j)`` to replacement structure constants
    (antisymmetry in ``i, j`` is applied); it exists to build corrupted models
    for negative controls.
    """
    n = 7
    c = zeros(n, n, n)
    for a in (1, 3, 5):
        c[0, a, a + 1] = Q(-1)
        c[0, a + 1, a] = Q(1)
    for (k, i, j), v in (c_override or {}).items():
        c[k, i, j] = Q(v)
        c[k, j, i] = -Q(v)
    fields = []
    for j in range(n):
        comps = {f"x{j}": Laurent(1)}
        if j in (2, 4, 6):
            comps["x0"] = -var(f"x{j - 1}")
        fields.append(_coordinate_field(comps))
    return FrameModel(c, fields, name="heisenberg")


def abelian(n: int) -> FrameModel:
    fields = [_coordinate_field({f"x{j}": Laurent(1)}) for j in range(n)]
    return FrameModel(zeros(n, n, n), fields, name=f"R{n}")


def _basis7(*idx):
    return AltForm.basis(7, *idx)


ETA = _basis7(0)
OMEGA = _basis7(1, 2) + _basis7(3, 4) + _basis7(5, 6)
# Upsilon_0 = (e1 + i e2)(e3 + i e4)(e5 + i e6)
RE_UPSILON = _basis7(1, 3, 5) - _basis7(1, 4, 6) - _basis7(2, 3, 6) - _basis7(2, 4, 5)
IM_UPSILON = _basis7(1, 3, 6) + _basis7(1, 4, 5) + _basis7(2, 3, 5) - _basis7(2, 4, 6)
VOL_D = _basis7(1, 2, 3, 4, 5, 6)


# -- exterior derivative -------------------------------------------------------

def frame_d(model: FrameModel, a: AltForm) -> AltForm:
    n = model.dim
    if a.dim != n:
        raise ValueError("form dimension does not match the frame")
    out = AltForm(n, a.degree + 1)
    acc: dict = {}
    for I, c in a.coeffs.items():
        if isinstance(c, Laurent):
            for j in range(n):
                if j in I:
                    continue
                dc = model.apply(j, c)
                if is_zero(dc):
                    continue
                pos = sum(1 for i in I if i < j)
                key = tuple(sorted(I + (j,)))
                v = dc if pos % 2 == 0 else -dc
                acc[key] = acc[key] + v if key in acc else v
        dI = model.d_basis(I)
        for K, s in dI.coeffs.items():
            v = s * c
            acc[K] = acc[K] + v if K in acc else v
    if acc:
        out = AltForm(n, a.degree + 1, acc)
    return out


# -- Levi-Civita connection and curvature ----------------------------------------

@dataclass(eq=False)
class Connection:
    """Levi-Civita connection of a frame-constant metric.

    ``gamma[i, j, k] = Γ^k_ij`` so that ``∇_{e_i} e_j = Γ^k_ij e_k``.
    """

    model: FrameModel
    metric: Metric
    gamma: np.ndarray

    def torsion_residual(self) -> np.ndarray:
        g = self.gamma
        return np.einsum("ijk->kij", g) - np.einsum("jik->kij", g) - self.model.c

    def compatibility_residual(self) -> np.ndarray:
        # (∇_i g)_jk = -Γ^m_ij g_mk - Γ^m_ik g_jm for constant g
        G, g = self.gamma, self.metric.g
        return -np.einsum("ijm,mk->ijk", G, g) - np.einsum("ikm,jm->ijk", G, g)


def levi_civita(model: FrameModel, metric: Metric) -> Connection:
    n = model.dim
    g = metric.g
    for i in range(n):
        for j in range(n):
            if not model.is_constant(g[i, j]):
                raise ValueError("levi_civita needs metric coefficients constant in the frame")
    C = np.einsum("mij,mk->ijk", model.c, g)  # C_ijk = g([e_i, e_j], e_k)
    low = (C - np.einsum("ijk->kij", C) + np.einsum("ijk->jki", C)) * Q(1, 2)
    # low[i,j,k] = 1/2 (C_ijk - C_jki + C_kij)
    gamma = np.einsum("ijl,lk->ijk", low, metric.inv)
    gamma = np.vectorize(_clean, otypes=[object])(gamma)
    return Connection(model, metric, gamma)


def covariant_derivative(conn: Connection, t) -> np.ndarray:
    """∇t for a covariant tensor (or AltForm); the derivative index comes first."""
    if isinstance(t, AltForm):
        t = t.to_array()
    t = np.asarray(t, dtype=object)
    model = conn.model
    n = model.dim
    r = t.ndim
    out = zeros(*([n] * (r + 1)))
    if any(isinstance(x, Laurent) for x in t.flat):
        for i in range(n):
            out[i] = np.vectorize(lambda x, i=i: model.apply(i, x), otypes=[object])(t) if r else model.apply(i, t[()])
    G = conn.gamma
    for s in range(r):
        term = np.tensordot(G, t, axes=([2], [s]))  # (i, a_s, rest...)
        term = np.moveaxis(term, 1, s + 1)
        out = out - term
    return np.vectorize(_clean, otypes=[object])(out)


def covariant_derivative_vector(conn: Connection, X) -> np.ndarray:
    """D[i, j] = (∇_{e_i} X)^j."""
    X = np.asarray(X, dtype=object)
    model = conn.model
    n = model.dim
    D = zeros(n, n)
    for i in range(n):
        for j in range(n):
            D[i, j] = model.apply(i, X[j])
    D = D + np.einsum("imj,m->ij", conn.gamma, X)
    return np.vectorize(_clean, otypes=[object])(D)


@dataclass(eq=False)
class Curvature:
    rm: np.ndarray  # Rm_ijkl = g(R(e_i, e_j) e_k, e_l)
    ric: np.ndarray
    scalar: object
    norm2: object
    transverse_norm2: object | None = None


def curvature(conn: Connection, vertical: tuple[int, ...] | None = None) -> Curvature:
    G, c, m = conn.gamma, conn.model.c, conn.metric
    # R^l_{kij} = Γ^m_jk Γ^l_im - Γ^m_ik Γ^l_jm - c^m_ij Γ^l_mk
    R = (
        np.einsum("jkm,iml->lkij", G, G)
        - np.einsum("ikm,jml->lkij", G, G)
        - np.einsum("mij,mkl->lkij", c, G)
    )
    rm = np.einsum("mkij,ml->ijkl", R, m.g)
    ric = np.einsum("ikij->jk", R)
    rm = np.vectorize(_clean, otypes=[object])(rm)
    ric = np.vectorize(_clean, otypes=[object])(ric)
    scalar = _clean(np.einsum("jk,jk->", m.inv, ric))
    norm2 = tensor_contract("ijkl,ijkl->", rm, rm, metric=m)
    tn = None
    if vertical is not None:
        tn = transverse_curvature(conn, vertical)
    return Curvature(rm, ric, scalar, norm2, tn)


def transverse_curvature(conn: Connection, vertical: tuple[int, ...] = (0,)):
    """|Rm^D|^2 of the transverse connection on the horizontal distribution.

    ∇^D_X Y = π_D(∇_X Y) for horizontal X and ∇^D_ξ Y = π_D[ξ, Y] for the
    vertical directions; the horizontal frame is assumed g-orthogonal to the
    vertical one (true for every metric of the ansatz family).
    """
    G, c, m = conn.gamma, conn.model.c, conn.metric
    n = conn.model.dim
    H = [i for i in range(n) if i not in vertical]
    GT = zeros(n, n, n)
    for i in range(n):
        for j in H:
            for k in H:
                GT[i, j, k] = c[k, i, j] if i in vertical else G[i, j, k]
    R = (
        np.einsum("jkm,iml->lkij", GT, GT)
        - np.einsum("ikm,jml->lkij", GT, GT)
        - np.einsum("mij,mkl->lkij", c, GT)
    )
    rmD = np.einsum("mkij,ml->ijkl", R, m.g)[np.ix_(H, H, H, H)]
    ih = inverse(m.g[np.ix_(H, H)])
    up = rmD
    for ax in range(4):
        up = np.moveaxis(np.tensordot(ih, up, axes=([1], [ax])), 0, ax)
    return _clean(np.sum(rmD * up))


# -- divergence, curl, Lie derivative of the metric -----------------------------

def divergence_vector(conn: Connection, X):
    D = covariant_derivative_vector(conn, X)
    return _clean(sum(D[i, i] for i in range(conn.model.dim)))


def divergence(conn: Connection, h) -> np.ndarray:
    """(div h)_a = ∇^b h_ba."""
    Dh = covariant_derivative(conn, h)
    return np.vectorize(_clean, otypes=[object])(np.einsum("cb,cba->a", conn.metric.inv, Dh))


def curl(conn: Connection, h, phi: AltForm) -> np.ndarray:
    """(Curl h)_ab = (∇_m h_an) φ_b^{mn}."""
    Dh = covariant_derivative(conn, h)
    return tensor_contract("man,bmn->ab", Dh, phi.to_array(), metric=conn.metric)


def curl_vector(conn: Connection, X, phi: AltForm) -> np.ndarray:
    """Curl X as a 1-form: (Curl X)_k = φ_ijk ∇^i X^j."""
    Xb = conn.metric.flat(X)
    D = covariant_derivative(conn, Xb)  # D[a, b] = ∇_a X_b
    return tensor_contract("ijk,ij->k", phi.to_array(), D, metric=conn.metric)


def lie_derivative_metric(conn: Connection, X) -> np.ndarray:
    Xb = conn.metric.flat(X)
    D = covariant_derivative(conn, Xb)
    return D + D.T


# -- codifferential and Hodge Laplacian ----------------------------------------------

def codifferential(model: FrameModel, m: Metric, a: AltForm) -> AltForm:
    """d* = (-1)^{n(k+1)+1} * d * on k-forms."""
    n, k = m.dim, a.degree
    if k == 0:
        return AltForm(n, 0)
    sign = -1 if (n * (k + 1) + 1) % 2 else 1
    out = hodge_star(m, frame_d(model, hodge_star(m, a)))
    out = AltForm(n, k - 1, out.coeffs)
    return out if sign > 0 else -out


def hodge_laplacian(model: FrameModel, m: Metric, a: AltForm) -> AltForm:
    dd = frame_d(model, codifferential(model, m, a)) if a.degree > 0 else AltForm(m.dim, 0)
    ddd = codifferential(model, m, frame_d(model, a)) if a.degree < m.dim else AltForm(m.dim, a.degree)
    res = AltForm(m.dim, a.degree, dd.coeffs) + AltForm(m.dim, a.degree, ddd.coeffs)
    return res
