"""Laplacian coflow, Laplacian flow and Hitchin flow on the contact Calabi–Yau ansatz.

The ansatz is φ_t = f h² η0∧ω0 + h³ ReΥ0 with metric f²η0² + h²g_D0.  Each
flow reduces to two ODEs for (f, h) whose solutions are power laws
c(1 + b t)^α.  For exact work every law of a given solution is written as a
Laurent monomial in a base ``u`` with ``u**N = 1 + b t``; evaluating at a
rational t is then reduction modulo that relation, so PDE residuals at
irrational points such as (1 + 10t)^(1/10) are still decided exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Callable

import numpy as np

from .alg import AltForm, Metric, _clean, sym_inner, tensor_contract, trace, wedge
from .g2core import G2Structure, full_torsion, torsion_forms
from .model import (
    ETA,
    IM_UPSILON,
    OMEGA,
    RE_UPSILON,
    covariant_derivative,
    curvature,
    divergence,
    frame_d,
    heisenberg,
    hodge_laplacian,
    levi_civita,
)
from .scalar import Q, Laurent, MODE, is_zero, nth_root, var

__all__ = [
    "COFLOW",
    "FLOW",
    "HITCHIN",
    "KINDS",
    "DomainError",
    "Surd",
    "PowerLaw",
    "TimeBase",
    "ODESystem",
    "FlowSolution",
    "SingularityReport",
    "NormalizedMetric",
    "coflow",
    "laplacian_flow",
    "hitchin",
    "solution",
    "ansatz_phi",
    "reduce_coflow",
    "reduce_flow",
    "reduce_hitchin",
    "reduction_residual",
    "pde_residual",
    "integrate_numeric",
    "model_constants",
    "norms_along_flow",
    "classify_singularity",
    "normalized_metric",
    "torsion_closed_form",
    "hitchin_ratio",
    "cohomology_coefficient",
    "coflow_time_of_hitchin",
]

COFLOW = "coflow"
FLOW = "laplacian"
HITCHIN = "hitchin"
KINDS = (COFLOW, FLOW, HITCHIN)

INF = math.inf


class DomainError(ValueError):
    """A time or parameter outside the maximal interval of a solution."""


# -- exact values of the form c * B**alpha -----------------------------------------

@dataclass(frozen=True)
class Surd:
    """The positive-base real number ``c * base**alpha`` with rational data."""

    c: object
    base: object
    alpha: object

    def __post_init__(self):
        if self.base <= 0:
            raise ValueError("Surd base must be positive")

    def exact(self):
        """The value as a rational, or ``None`` when it is irrational."""
        a = Q(self.alpha)
        r = nth_root(Q(self.base), int(a.denominator))
        if r is None:
            return None
        return Q(self.c) * r ** int(a.numerator)

    def __float__(self) -> float:
        return float(self.c) * float(self.base) ** float(self.alpha)

    def _power_data(self, other: "Surd"):
        a1, a2 = Q(self.alpha), Q(other.alpha)
        D = math.lcm(int(a1.denominator), int(a2.denominator))
        l = Q(self.c) ** D * Q(self.base) ** int(a1 * D)
        r = Q(other.c) ** D * Q(other.base) ** int(a2 * D)
        return l, r

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, type(Q(0)))) or hasattr(other, "denominator"):
            other = Surd(Q(other), Q(1), Q(0))
        if not isinstance(other, Surd):
            return NotImplemented
        if (Q(self.c) > 0) != (Q(other.c) > 0) or (self.c == 0) != (other.c == 0):
            return False
        l, r = self._power_data(other)
        return l == r

    __hash__ = None

    def __str__(self) -> str:
        q = self.exact()
        if q is not None:
            return str(q)
        a = Q(self.alpha)
        B = Q(self.base)
        body = f"{B}^({a})" if B.denominator == 1 else f"({B})^({a})"
        c = Q(self.c)
        if c == 1:
            return body
        return f"{c}*{body}" if c.denominator == 1 else f"({c})*{body}"


def _value(x):
    """Collapse a Surd to a rational when possible."""
    if isinstance(x, Surd):
        q = x.exact()
        return q if q is not None else x
    return x


# -- power laws ----------------------------------------------------------------

@dataclass(frozen=True)
class PowerLaw:
    """t ↦ c (1 + b t)^α."""

    c: object
    b: object
    alpha: object

    def __post_init__(self):
        object.__setattr__(self, "c", Q(self.c))
        object.__setattr__(self, "b", Q(self.b))
        object.__setattr__(self, "alpha", Q(self.alpha))

    def base_at(self, t):
        return 1 + self.b * Q(t)

    def __call__(self, t):
        t = Q(t)
        B = self.base_at(t)
        if self.alpha == 0 or self.c == 0:
            return self.c
        if B <= 0:
            raise DomainError(f"1 + b t = {B} is not positive")
        if MODE.kind == "float":
            return float(self.c) * float(B) ** float(self.alpha)
        return _value(Surd(self.c, B, self.alpha))

    def _same_base(self, other: "PowerLaw"):
        if self.b != other.b and self.alpha != 0 and other.alpha != 0:
            raise ValueError("power laws with different bases")
        return self.b if self.alpha != 0 else other.b

    def __mul__(self, other):
        if isinstance(other, PowerLaw):
            b = self._same_base(other)
            return PowerLaw(self.c * other.c, b, self.alpha + other.alpha)
        return PowerLaw(self.c * Q(other), self.b, self.alpha)

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, PowerLaw):
            return self * other ** -1
        return PowerLaw(self.c / Q(other), self.b, self.alpha)

    def __pow__(self, r):
        r = Q(r)
        if r.denominator == 1:
            c = self.c ** int(r)
        else:
            root = nth_root(self.c, int(r.denominator))
            if root is None:
                raise ValueError(f"{self.c}^{r} is not rational")
            c = root ** int(r.numerator)
        return PowerLaw(c, self.b, self.alpha * r)

    def derivative(self) -> "PowerLaw":
        return PowerLaw(self.c * self.alpha * self.b, self.b, self.alpha - 1)

    def laurent(self, N: int, name: str = "u") -> Laurent:
        k = self.alpha * N
        if k.denominator != 1:
            raise ValueError(f"exponent {self.alpha} is not a multiple of 1/{N}")
        return Laurent.monomial(self.c, **{name: int(k)})

    def __str__(self) -> str:
        if self.alpha == 0:
            return str(self.c)
        return f"{self.c}*(1 + {self.b}*t)^({self.alpha})"


@dataclass(frozen=True)
class TimeBase:
    """The algebraic base u with u**N = 1 + b t."""

    b: object
    N: int
    name: str = "u"

    @property
    def u(self) -> Laurent:
        return var(self.name)

    def d_dt(self, x):
        """Time derivative of a Laurent expression in u (other variables are constants)."""
        if not isinstance(x, Laurent):
            return Q(0)
        return _clean(x.diff(self.name) * self.u ** (1 - self.N) * (Q(self.b) / self.N))

    def reduce(self, x, t):
        if not isinstance(x, Laurent):
            return x
        return _clean(x.reduce_power(self.name, self.N, 1 + Q(self.b) * Q(t)))

    def value(self, x, t):
        """Exact value of a Laurent monomial in u at time t."""
        r = self.reduce(x, t)
        if not isinstance(r, Laurent):
            return r
        if not r.is_monomial() or r.variables() - {self.name}:
            raise ValueError(f"cannot evaluate {r} as a single surd")
        (k, c), = r.terms.items()
        e = dict(k).get(self.name, 0)
        B = 1 + Q(self.b) * Q(t)
        if MODE.kind == "float":
            return float(c) * float(B) ** (e / self.N)
        return _value(Surd(c, B, Q(e, self.N)))

    def law(self, x: Laurent) -> PowerLaw:
        if not isinstance(x, Laurent):
            return PowerLaw(x, self.b, 0)
        if x.is_zero():
            return PowerLaw(0, self.b, 0)
        if not x.is_monomial() or x.variables() - {self.name}:
            raise ValueError(f"{x} is not a monomial in {self.name}")
        (k, c), = x.terms.items()
        return PowerLaw(c, self.b, Q(dict(k).get(self.name, 0), self.N))


# -- the ansatz and the three reduced systems ---------------------------------------

def ansatz_phi(f, h) -> AltForm:
    return wedge(ETA, OMEGA) * (f * h * h) + RE_UPSILON * (h * h * h)


@dataclass(frozen=True)
class ODESystem:
    kind: str
    rhs: Callable
    equations: str

    def __call__(self, f, h):
        return self.rhs(f, h)


def reduce_coflow() -> ODESystem:
    """d/dt h⁴ = 4f² and d/dt (f h³) = 0, i.e. h' = f²/h³, f' = −3f³/h⁴."""
    return ODESystem(
        COFLOW,
        lambda f, h: (-3 * f**3 / h**4, f**2 / h**3),
        "d/dt h^4 = 4 f^2, d/dt (f h^3) = 0",
    )


def reduce_flow() -> ODESystem:
    """d/dt (f h²) = 4f³/h² and d/dt h³ = 0, i.e. f' = 4f³/h⁴, h' = 0."""
    return ODESystem(
        FLOW,
        lambda f, h: (4 * f**3 / h**4, 0 * h),
        "d/dt (f h^2) = 4 f^3 / h^2, d/dt h^3 = 0",
    )


def reduce_hitchin() -> ODESystem:
    """d/dt h⁴ = 2 f h² and d/dt (f h³) = 0, i.e. h' = f/(2h), f' = −3f²/(2h²)."""
    return ODESystem(
        HITCHIN,
        lambda f, h: (-3 * f**2 / (2 * h**2), f / (2 * h)),
        "d/dt h^4 = 2 f h^2, d/dt (f h^3) = 0",
    )


_SYSTEMS = {COFLOW: reduce_coflow, FLOW: reduce_flow, HITCHIN: reduce_hitchin}


def _flow_sides(kind: str, model, g2: G2Structure, dt: Callable) -> tuple[AltForm, AltForm]:
    """(∂_t of the evolving form, right-hand side of the flow)."""
    m = g2.metric
    if kind == COFLOW:
        return g2.psi.map(dt), hodge_laplacian(model, m, g2.psi)
    if kind == FLOW:
        return g2.phi.map(dt), hodge_laplacian(model, m, g2.phi)
    return g2.psi.map(dt), frame_d(model, g2.phi)


def reduction_residual(system: ODESystem) -> AltForm:
    """∂_t(form) − RHS with f, h formal and (f', h') taken from the ODE system.

    The flow operators are computed on the model; a zero result shows that
    the ansatz is preserved and evolves exactly by the stated ODEs.
    """
    f, h = var("f"), var("h")
    fd, hd = system(f, h)
    g2 = G2Structure(ansatz_phi(f, h))

    def dt(c):
        if not isinstance(c, Laurent):
            return Q(0)
        return _clean(c.diff("f") * fd + c.diff("h") * hd)

    lhs, rhs = _flow_sides(system.kind, heisenberg(), g2, dt)
    return lhs - rhs


# -- solutions -------------------------------------------------------------------

@dataclass(eq=False)
class FlowSolution:
    kind: str
    eps: object
    f: PowerLaw
    h: PowerLaw
    base: TimeBase
    interval: tuple

    @property
    def system(self) -> ODESystem:
        return _SYSTEMS[self.kind]()

    def contains(self, t) -> bool:
        lo, hi = self.interval
        return lo < Q(t) < hi

    def check_time(self, t):
        if not self.contains(t):
            raise DomainError(
                f"t = {t} is outside the maximal interval ({self.interval[0]}, {self.interval[1]}) of the {self.kind} solution"
            )

    @cached_property
    def f_u(self) -> Laurent:
        return self.f.laurent(self.base.N, self.base.name)

    @cached_property
    def h_u(self) -> Laurent:
        return self.h.laurent(self.base.N, self.base.name)

    def at(self, t) -> tuple:
        self.check_time(t)
        return self.f(t), self.h(t)

    @cached_property
    def structure(self) -> G2Structure:
        """The G2-structure along the solution, coefficients in the base u."""
        return G2Structure(ansatz_phi(self.f_u, self.h_u))

    @cached_property
    def state(self) -> "_FlowState":
        return _FlowState(self)

    @cached_property
    def residual(self) -> AltForm:
        """Flow equation residual with the closed form substituted, symbolic in u."""
        lhs, rhs = _flow_sides(self.kind, heisenberg(), self.structure, self.base.d_dt)
        return lhs - rhs


def _check_eps(eps) -> object:
    eps = Q(eps)
    if eps <= 0:
        raise DomainError("epsilon must be positive")
    return eps


def coflow(eps=1) -> FlowSolution:
    """f = ε(1+10ε²t)^(−3/10), h = (1+10ε²t)^(1/10) on (−1/10ε², ∞)."""
    eps = _check_eps(eps)
    b = 10 * eps**2
    return FlowSolution(
        COFLOW, eps, PowerLaw(eps, b, Q(-3, 10)), PowerLaw(1, b, Q(1, 10)),
        TimeBase(b, 10), (-1 / b, INF),
    )


def laplacian_flow(eps=1) -> FlowSolution:
    """f = ε(1−8ε²t)^(−1/2), h = 1 on (−∞, 1/8ε²)."""
    eps = _check_eps(eps)
    b = -8 * eps**2
    return FlowSolution(
        FLOW, eps, PowerLaw(eps, b, Q(-1, 2)), PowerLaw(1, b, 0),
        TimeBase(b, 2), (-INF, -1 / b),
    )


def hitchin(eps=1) -> FlowSolution:
    """f = ε(1+(5/2)εt)^(−3/5), h = (1+(5/2)εt)^(1/5) on (−2/5ε, ∞)."""
    eps = _check_eps(eps)
    b = Q(5, 2) * eps
    return FlowSolution(
        HITCHIN, eps, PowerLaw(eps, b, Q(-3, 5)), PowerLaw(1, b, Q(1, 5)),
        TimeBase(b, 5), (-1 / b, INF),
    )


def solution(kind: str, eps=1) -> FlowSolution:
    try:
        return {COFLOW: coflow, FLOW: laplacian_flow, HITCHIN: hitchin}[kind](eps)
    except KeyError:
        raise ValueError(f"unknown flow {kind!r}; expected one of {KINDS}") from None


def pde_residual(sol: FlowSolution, t=None) -> AltForm:
    """Residual of the flow equation with the closed form substituted.

    Computed symbolically in u and, if ``t`` is given, reduced at that time.
    For the Hitchin flow only ∂ψ/∂t − dφ is returned; dψ = 0 is checked
    through ``state.dpsi``.
    """
    res = sol.residual
    if t is None:
        return res
    sol.check_time(t)
    return res.map(lambda c: sol.base.reduce(c, t))


# -- model constants and the recomputed state ---------------------------------------

def _grad_norm2(conn, T, m: Metric):
    DT = covariant_derivative(conn, T)
    return tensor_contract("abc,abc->", DT, DT, metric=m)


def _torsion_from_nabla_phi(conn, g2: G2Structure) -> np.ndarray:
    # T_ij = (1/24) ∇_i φ_lmn ψ_j^{lmn}
    Dphi = covariant_derivative(conn, g2.phi)
    T = tensor_contract("ilmn,jlmn->ij", Dphi, g2.psi_array, metric=g2.metric) * Q(1, 24)
    return np.vectorize(_clean, otypes=[object])(T)


@dataclass(frozen=True)
class ModelConstants:
    """Coefficients with |Rm|² = c_rm f⁴/h⁸ and |∇T|² = c_grad f⁴/h⁸ on the model."""

    c_rm: object
    c_grad: object
    rm_transverse: object


_CONSTANTS: list = []


def model_constants() -> ModelConstants:
    """Computed once on the model at f = h = 1 and cached."""
    if not _CONSTANTS:
        model = heisenberg()
        g2 = G2Structure(ansatz_phi(Q(1), Q(1)))
        conn = levi_civita(model, g2.metric)
        T = _torsion_from_nabla_phi(conn, g2)
        cur = curvature(conn, vertical=(0,))
        _CONSTANTS.append(ModelConstants(cur.norm2, _grad_norm2(conn, T, g2.metric), cur.transverse_norm2))
    return _CONSTANTS[0]


class _FlowState:
    """Everything recomputed from φ_t through g2core and the frame model."""

    def __init__(self, sol: FlowSolution):
        self.sol = sol
        model = heisenberg()
        g2 = sol.structure
        m = g2.metric
        self.g2 = g2
        self.dphi = frame_d(model, g2.phi)
        self.dpsi = frame_d(model, g2.psi)
        self.torsion_forms = torsion_forms(g2, self.dphi, self.dpsi)
        self.T_forms = full_torsion(g2, self.torsion_forms)
        conn = levi_civita(model, m)
        self.conn = conn
        self.T = _torsion_from_nabla_phi(conn, g2)
        self.curv = curvature(conn, vertical=(0,))
        self.normT2 = sym_inner(self.T, self.T, m)
        self.trT = trace(self.T, m)
        self.normGradT2 = _grad_norm2(conn, self.T, m)
        self.divT = divergence(conn, self.T)
        self.pde_residual = sol.residual
        self.vol_density = g2.vol.value()
        # ψ = ½h⁴ω² − f h³ η∧ImΥ: the η∧ImΥ coefficient tracks the class [ψ]
        key, c0 = next(iter(wedge(ETA, IM_UPSILON).coeffs.items()))
        self.cohom = _clean(-g2.psi[key] / c0)


def _closed_forms(sol: FlowSolution) -> dict:
    eps, b = sol.eps, sol.base.b
    k = model_constants()
    if sol.kind == COFLOW:
        a1, a2, av = Q(-1), Q(-2), Q(3, 10)
        cohom = PowerLaw(eps, b, 0)
    elif sol.kind == FLOW:
        a1, a2, av = Q(-1), Q(-2), Q(-1, 2)
        cohom = PowerLaw(eps, b, Q(-1, 2))
    else:
        a1, a2, av = Q(-2), Q(-4), Q(3, 5)
        cohom = PowerLaw(eps, b, 0)
    T2 = PowerLaw(Q(15, 4) * eps**2, b, a1)
    grad = PowerLaw(k.c_grad * eps**4, b, a2)
    rm = PowerLaw(k.c_rm * eps**4, b, a2)
    lam2 = PowerLaw((k.c_rm + Q(225, 16) + k.c_grad) * eps**4, b, a2)
    vol = PowerLaw(eps, b, av)
    return {
        "normT2": T2,
        "normGradT2": grad,
        "normRm2": rm,
        "Lambda2": lam2,
        "volDensity": vol,
        "HitchinRatio": vol / eps,
        "cohomCoeff": cohom / eps,
    }


@dataclass(frozen=True)
class Comparison:
    closed: object
    recomputed: object

    @property
    def agree(self) -> bool:
        return _equal(self.closed, self.recomputed)


def _equal(a, b) -> bool:
    if isinstance(a, float) or isinstance(b, float):
        fa, fb = float(a), float(b)
        return abs(fa - fb) <= MODE.rel_tol * max(1.0, abs(fa), abs(fb))
    if isinstance(a, Surd):
        return a == b
    if isinstance(b, Surd):
        return b == a
    return a == b


def _sqrt_value(x):
    if isinstance(x, float):
        return math.sqrt(x)
    if isinstance(x, Surd):
        return math.sqrt(float(x))
    return _value(Surd(1, x, Q(1, 2))) if x > 0 else Q(0)


def norms_along_flow(sol: FlowSolution, t) -> dict:
    """Each tracked quantity at time t, from the closed form and recomputed."""
    sol.check_time(t)
    st = sol.state
    base = sol.base
    closed = _closed_forms(sol)
    ev = lambda x: base.value(x, t)
    K2 = st.curv.transverse_norm2
    lam2 = st.curv.norm2 + st.normT2**2 + st.normGradT2 + (K2 if not is_zero(K2) else 0)
    eps = sol.eps
    out = {
        "normT2": Comparison(closed["normT2"](t), ev(st.normT2)),
        "normGradT2": Comparison(closed["normGradT2"](t), ev(st.normGradT2)),
        "normRm2": Comparison(closed["normRm2"](t), ev(st.curv.norm2)),
        "Lambda2": Comparison(closed["Lambda2"](t), ev(lam2)),
        "volDensity": Comparison(closed["volDensity"](t), ev(st.vol_density)),
        "HitchinRatio": Comparison(closed["HitchinRatio"](t), ev(st.vol_density / eps)),
        "cohomCoeff": Comparison(closed["cohomCoeff"](t), ev(st.cohom / eps)),
        "normRmD2": Comparison(Q(0), ev(K2)),
    }
    lam_c, lam_r = out["Lambda2"].closed, out["Lambda2"].recomputed
    out["Lambda"] = Comparison(_sqrt_value(lam_c), _sqrt_value(lam_r))
    return out


def torsion_closed_form(sol: FlowSolution) -> tuple[PowerLaw, PowerLaw]:
    """T_t = A(t) η0² + B(t) g_D0 as the pair (A, B)."""
    eps, b = sol.eps, sol.base.b
    if sol.kind == COFLOW:
        return PowerLaw(Q(-3, 2) * eps**3, b, Q(-11, 10)), PowerLaw(eps / 2, b, Q(-3, 10))
    if sol.kind == FLOW:
        return PowerLaw(Q(-3, 2) * eps**3, b, Q(-3, 2)), PowerLaw(eps / 2, b, Q(-1, 2))
    return PowerLaw(Q(-3, 2) * eps**3, b, Q(-11, 5)), PowerLaw(eps / 2, b, Q(-3, 5))


def hitchin_ratio(sol: FlowSolution) -> PowerLaw:
    """H(φ_t)/H(φ_0) as the ratio of the spatially constant volume densities."""
    return sol.f * sol.h**6 / sol.eps


def cohomology_coefficient(sol: FlowSolution) -> PowerLaw:
    """Coefficient of [ψ_t] relative to [ψ_0], read off the η0∧ImΥ0 term."""
    return sol.f * sol.h**3 / sol.eps


# -- numerical cross-check -----------------------------------------------------------

@dataclass
class NumericResult:
    times: list
    f: list
    h: list
    max_rel_error: float


def integrate_numeric(sol: FlowSolution, t0, t1, steps: int = 1000) -> NumericResult:
    """Classical fourth-order Runge–Kutta on the reduced ODEs from the exact state at t0.

    The whole closed interval [t0, t1] must lie inside the open maximal
    interval, so a singular endpoint is rejected before stepping.
    """
    if steps < 1:
        raise ValueError("steps must be positive")
    for t in (t0, t1):
        sol.check_time(t)
    t0, t1 = Q(t0), Q(t1)
    f0, h0 = sol.f(t0), sol.h(t0)
    if t0 == t1:
        return NumericResult([t0], [f0], [h0], 0.0)
    rhs = sol.system
    y = np.array([float(f0), float(h0)])
    F = lambda v: np.array([float(x) for x in rhs(v[0], v[1])])
    dt = float(t1 - t0) / steps
    times, fs, hs = [float(t0)], [y[0]], [y[1]]
    err = 0.0
    for n in range(1, steps + 1):
        k1 = F(y)
        k2 = F(y + dt / 2 * k1)
        k3 = F(y + dt / 2 * k2)
        k4 = F(y + dt * k3)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t = t0 + (t1 - t0) * Q(n, steps)
        fe, he = float(sol.f(t)), float(sol.h(t))
        err = max(err, abs(y[0] - fe) / abs(fe), abs(y[1] - he) / abs(he))
        times.append(float(t))
        fs.append(float(y[0]))
        hs.append(float(y[1]))
    return NumericResult(times, fs, hs, err)


# -- singularities ----------------------------------------------------------------

@dataclass
class SingularityReport:
    direction: str
    finite: bool
    T_sing: object
    type: str | None
    terms: list
    controlling_exponent: object
    rate_exponent: object
    bounded: bool
    summary: str

    def to_dict(self) -> dict:
        fmt = lambda x: str(x) if not isinstance(x, float) else ("inf" if x > 0 else "-inf")
        return {
            "direction": self.direction,
            "finite_time": self.finite,
            "T_sing": fmt(self.T_sing),
            "type": self.type,
            "terms": [{"label": l, "coeff": str(c), "exponent": str(a)} for l, c, a in self.terms],
            "controlling_exponent": str(self.controlling_exponent),
            "rate_exponent": str(self.rate_exponent),
            "rate_bounded": self.bounded,
            "summary": self.summary,
        }


def _lambda_terms(sol: FlowSolution, K) -> list:
    """Λ² as a sum of power laws in 1 + b t: transverse curvature and the model term."""
    closed = _closed_forms(sol)
    terms = []
    K = Q(K)
    if K < 0:
        raise DomainError("K must be non-negative")
    if K != 0:
        # |Rm^D_t|² = |Rm^D_0|² / h⁴
        terms.append(("K^2 |Rm^D|^2 / h^4", (sol.h ** -4) * K**2))
    terms.append(("|Rm|^2 + |T|^4 + |grad T|^2 (model)", closed["Lambda2"]))
    return terms


def classify_singularity(sol: FlowSolution, K=0) -> tuple[SingularityReport, SingularityReport]:
    """Forward and backward reports, decided from power-law exponents.

    Λ² = Σ c_i (1 + b t)^{α_i}.  For b > 0 the forward direction is
    immortal and tΛ is bounded iff 1 + max α_i / 2 ≤ 0 (Type III, else IIb).
    For b < 0 the forward time is T = −1/b and (T − t)Λ is bounded iff
    1 + min α_i / 2 ≥ 0 (Type I, else IIa).
    """
    terms = _lambda_terms(sol, K)
    b = sol.base.b
    ledger = [(l, p.c, p.alpha) for l, p in terms]
    alphas = [p.alpha for _, p in terms if p.c != 0]

    def finite_report(direction: str) -> SingularityReport:
        amin = min(alphas)
        rate = 1 + amin / 2
        bounded = rate >= 0
        T = -1 / b
        if direction == "forward":
            typ = "I" if bounded else "IIa"
            summary = f"finite-time singularity at T = {T}, Type {typ}"
        else:
            typ = None
            summary = f"finite-time singularity at T = {T} (backward)"
        return SingularityReport(direction, True, T, typ, ledger, amin, rate, bounded, summary)

    def infinite_report(direction: str) -> SingularityReport:
        amax = max(alphas)
        rate = 1 + amax / 2
        bounded = rate <= 0
        typ = "III" if bounded else "IIb"
        return SingularityReport(
            direction, False, INF, typ, ledger, amax, rate, bounded,
            f"immortal; infinite-time singularity of Type {typ}",
        )

    def ancient_report(direction: str) -> SingularityReport:
        amax = max(alphas)
        return SingularityReport(
            direction, False, -INF, None, ledger, amax, None, True, "none (ancient)",
        )

    if b > 0:
        return infinite_report("forward"), finite_report("backward")
    return finite_report("forward"), ancient_report("backward")


# -- normalisation ---------------------------------------------------------------

@dataclass
class NormalizedMetric:
    coeff_eta2: PowerLaw
    coeff_gD: PowerLaw
    limits: dict
    values: tuple | None = None


def _limit(p: PowerLaw, forward_b) -> str:
    if p.alpha == 0:
        return "constant"
    # forward: base → ∞ when b > 0 and → 0 when b < 0
    grows = (p.alpha > 0) == (forward_b > 0)
    return "infinity" if grows else "0"


def normalized_metric(sol: FlowSolution, t=None, mode: str = "fixed-volume") -> NormalizedMetric:
    """Rescale g_t by the constant-in-space factor keeping the volume density fixed."""
    if mode != "fixed-volume":
        raise ValueError(f"unknown normalisation {mode!r}")
    ratio = hitchin_ratio(sol)  # vol_t / vol_0
    scale = ratio ** Q(-2, 7)
    ce = sol.f**2 * scale
    cg = sol.h**2 * scale
    limits = {"coeff_eta2": _limit(ce, sol.base.b), "coeff_gD": _limit(cg, sol.base.b)}
    values = None
    if t is not None:
        sol.check_time(t)
        values = (ce(t), cg(t))
    return NormalizedMetric(ce, cg, limits, values)


def coflow_time_of_hitchin(eps, s):
    """The coflow time t(s) at which the coflow reaches the Hitchin state at time s."""
    eps = Q(eps)
    return ((1 + Q(5, 2) * eps * Q(s)) ** 2 - 1) / (10 * eps**2)
