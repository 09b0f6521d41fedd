"""Pointwise G2 linear algebra: metric from a positive 3-form, the i/j maps,
type decompositions of 2- and 3-forms, and torsion extraction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .alg import (
    AltForm,
    Metric,
    _clean,
    contract,
    det,
    form_inner,
    hodge_star,
    solve,
    wedge,
    zeros,
)
from .scalar import Q, MODE, is_zero, nth_root, to_float

__all__ = [
    "G2Structure",
    "TorsionForms",
    "metric_from_phi",
    "standard_phi",
    "i_op",
    "j_op",
    "decompose2",
    "decompose3",
    "torsion_forms",
    "full_torsion",
]


def standard_phi(n: int = 7) -> AltForm:
    """φ0 = e^0 ∧ ω0 + ReΥ0 on the frame (e^0, e^1..e^6)."""
    b = lambda *i: AltForm.basis(n, *i)
    omega = b(1, 2) + b(3, 4) + b(5, 6)
    re = b(1, 3, 5) - b(1, 4, 6) - b(2, 3, 6) - b(2, 4, 5)
    return wedge(b(0), omega) + re


def _unit(n: int, i: int) -> list:
    v = [Q(0)] * n
    v[i] = Q(1)
    return v


def _b_matrix(phi: AltForm) -> np.ndarray:
    n = phi.dim
    hooks = [contract(_unit(n, i), phi) for i in range(n)]
    B = zeros(n, n)
    for i in range(n):
        hp = wedge(hooks[i], phi)
        for j in range(i, n):
            B[i, j] = B[j, i] = wedge(hooks[j], hp).value()
    return B


def metric_from_phi(phi: AltForm) -> tuple[Metric, AltForm]:
    """Metric and volume form determined by a positive 3-form.

    With B_ij ref = (e_i⌟φ)∧(e_j⌟φ)∧φ against ref = e^{0..6}, the volume
    factor is λ = det(B/6)^(1/9) and g = (B/6)/λ.  The ninth root is taken
    exactly when it exists; otherwise the computation falls back to floats.
    """
    if phi.dim != 7 or phi.degree != 3:
        raise ValueError("metric_from_phi needs a 3-form in dimension 7")
    B6 = _b_matrix(phi) * Q(1, 6)
    D = det(B6)
    if is_zero(D):
        raise ValueError("3-form is not positive: degenerate bilinear form")
    lam = nth_root(D, 9)
    if lam is None:
        if MODE.kind == "exact":
            warnings.warn("det(B/6) has no exact ninth root; using floating point", RuntimeWarning)
        B6 = np.vectorize(to_float, otypes=[object])(B6)
        lam = nth_root(float(to_float(D)), 9)
    g = np.vectorize(lambda x: _clean(x / lam), otypes=[object])(B6)
    vol = AltForm(7, 7, {tuple(range(7)): lam})
    try:
        m = Metric(g, vol)
    except ValueError as exc:
        raise ValueError(f"3-form is not positive: {exc}") from None
    return m, vol


@dataclass(eq=False)
class G2Structure:
    phi: AltForm
    metric: Metric | None = None

    def __post_init__(self):
        if self.metric is None:
            self.metric, _ = metric_from_phi(self.phi)

    @property
    def vol(self) -> AltForm:
        return self.metric.vol

    @cached_property
    def psi(self) -> AltForm:
        return hodge_star(self.metric, self.phi)

    @cached_property
    def phi_array(self) -> np.ndarray:
        return self.phi.to_array()

    @cached_property
    def psi_array(self) -> np.ndarray:
        return self.psi.to_array()

    def star(self, a: AltForm) -> AltForm:
        return hodge_star(self.metric, a)

    def inner(self, a: AltForm, b: AltForm):
        return form_inner(self.metric, a, b)


def i_op(g2: G2Structure, h) -> AltForm:
    """i(h)_ijk = h_i^l φ_ljk + h_j^l φ_ilk + h_k^l φ_ijl."""
    h = np.asarray(h, dtype=object)
    hm = h.dot(g2.metric.inv)  # h_i^l
    P = g2.phi_array
    arr = (
        np.einsum("il,ljk->ijk", hm, P)
        + np.einsum("ilk,jl->ijk", P, hm)
        + np.einsum("ijl,kl->ijk", P, hm)
    )
    return AltForm.from_array(np.vectorize(_clean, otypes=[object])(arr))


def j_op(g2: G2Structure, gamma: AltForm) -> np.ndarray:
    """j(γ)(X, Y) = ∗((X⌟φ)∧(Y⌟φ)∧γ)."""
    n = 7
    lam = g2.vol.value()
    hooks = [contract(_unit(n, i), g2.phi) for i in range(n)]
    out = zeros(n, n)
    for i in range(n):
        hg = wedge(hooks[i], gamma)
        for j in range(i, n):
            out[i, j] = out[j, i] = _clean(wedge(hooks[j], hg).value() / lam)
    return out


def decompose2(g2: G2Structure, beta: AltForm) -> tuple[AltForm, AltForm]:
    """Split β into its Ω²_7 and Ω²_14 parts."""
    s = g2.star(wedge(g2.phi, beta))
    b7 = (beta + s) * Q(1, 3)
    b14 = (beta * 2 - s) * Q(1, 3)
    return b7, b14


def decompose3(g2: G2Structure, gamma: AltForm) -> tuple[AltForm, AltForm, AltForm]:
    """Split γ into Ω³_1, Ω³_7 and Ω³_27 parts."""
    m = g2.metric
    g1 = g2.phi * _clean(g2.inner(gamma, g2.phi) / 7)
    rhs = [g2.inner(gamma, contract(_unit(7, i), g2.psi)) for i in range(7)]
    X = solve(m.g * 4, rhs)
    g7 = contract(list(X), g2.psi)
    g27 = gamma - g1 - g7
    return g1, g7, g27


@dataclass(eq=False)
class TorsionForms:
    tau0: object
    tau1: AltForm
    tau2: AltForm
    tau3: AltForm

    def is_zero(self) -> bool:
        return (
            is_zero(self.tau0)
            and self.tau1.is_zero()
            and self.tau2.is_zero()
            and self.tau3.is_zero()
        )


def _project_onto(images: list[AltForm], target: AltForm, m: Metric) -> list:
    n = len(images)
    G = zeros(n, n)
    for i in range(n):
        for j in range(i, n):
            G[i, j] = G[j, i] = form_inner(m, images[i], images[j])
    rhs = [form_inner(m, target, images[i]) for i in range(n)]
    return [_clean(x) for x in solve(G, rhs)]


def torsion_forms(g2: G2Structure, dphi: AltForm, dpsi: AltForm) -> TorsionForms:
    """Extract τ0..τ3 with dφ = τ0ψ + 3τ1∧φ + ∗τ3 and dψ = 4τ1∧ψ + τ2∧φ.

    Raises ``ValueError`` when the pieces fail to reconstruct the inputs.
    """
    n = 7
    phi, psi, m = g2.phi, g2.psi, g2.metric
    tau0 = _clean(g2.star(wedge(phi, dphi)).value() / 7)
    basis1 = [AltForm.basis(n, i) for i in range(n)]
    if dpsi.is_zero():
        tau1 = AltForm(n, 1)
    else:
        coef = _project_onto([wedge(e, psi) * 4 for e in basis1], dpsi, m)
        tau1 = AltForm(n, 1, {(i,): c for i, c in enumerate(coef)})
    rest5 = dpsi - wedge(tau1, psi) * 4
    tau2 = AltForm(n, 2, (-g2.star(rest5)).coeffs)
    rest4 = dphi - psi * tau0 - wedge(tau1, phi) * 3
    tau3 = AltForm(n, 3, g2.star(rest4).coeffs)

    if not (wedge(tau2, phi) + g2.star(tau2)).is_zero():
        raise ValueError("dψ has a component outside 4τ1∧ψ + τ2∧φ")
    if not (wedge(tau2, phi) - rest5).is_zero():
        raise ValueError("dψ reconstruction failed")
    t1, t7, _ = decompose3(g2, tau3)
    if not (t1.is_zero() and t7.is_zero()):
        raise ValueError("dφ reconstruction failed: τ3 is not of type 27")
    return TorsionForms(tau0, tau1, tau2, tau3)


def full_torsion(g2: G2Structure, tf: TorsionForms) -> np.ndarray:
    """T = (τ0/4) g − τ1♯⌟φ − ½τ2 − ¼ j(τ3)."""
    m = g2.metric
    T = m.g * tf.tau0 * Q(1, 4)
    if not tf.tau1.is_zero():
        X = m.sharp(tf.tau1)
        T = T - contract(list(X), g2.phi).to_array()
    if not tf.tau2.is_zero():
        T = T - tf.tau2.to_array() * Q(1, 2)
    if not tf.tau3.is_zero():
        T = T - j_op(g2, tf.tau3) * Q(1, 4)
    return np.vectorize(_clean, otypes=[object])(T)
