import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from g2flow import flows
from g2flow.alg import wedge
from g2flow.flows import (
    COFLOW,
    FLOW,
    HITCHIN,
    DomainError,
    PowerLaw,
    Surd,
    TimeBase,
    classify_singularity,
    coflow_time_of_hitchin,
    integrate_numeric,
    norms_along_flow,
    normalized_metric,
    pde_residual,
    reduction_residual,
    torsion_closed_form,
)
from g2flow.model import ETA, IM_UPSILON, OMEGA
from g2flow.scalar import Q, set_mode

EPS = [Q(1), Q(1, 2), Q(3)]
TIMES = [Q(0), Q(1, 10), Q(1), Q(7, 3), Q(10)]


# -- exact values --------------------------------------------------------------

def test_surd_equality_by_common_power():
    assert Surd(Q(2), Q(4), Q(1, 2)) == 4
    assert Surd(Q(1), Q(8), Q(1, 3)) == Surd(Q(1), Q(4), Q(1, 2))
    assert Surd(Q(1), Q(2), Q(1, 2)) != Surd(Q(1), Q(3), Q(1, 2))
    assert Surd(Q(1), Q(2), Q(1, 2)) != Surd(Q(-1), Q(2), Q(1, 2))
    assert Surd(Q(1), Q(2), Q(1, 2)).exact() is None
    assert float(Surd(Q(3), Q(2), Q(1, 2))) == pytest.approx(3 * math.sqrt(2))
    with pytest.raises(ValueError):
        Surd(Q(1), Q(-2), Q(1, 2))


def test_surd_rendering():
    assert str(Surd(Q(1), Q(11), Q(-3, 10))) == "11^(-3/10)"
    assert str(Surd(Q(1), Q(693, 16), Q(1, 2))) == "(693/16)^(1/2)"
    assert str(Surd(Q(3, 2), Q(6), Q(1, 2))) == "(3/2)*6^(1/2)"
    assert str(Surd(Q(1), Q(9, 4), Q(1, 2))) == "3/2"


@given(st.fractions(min_value=-2, max_value=2, max_denominator=6),
       st.fractions(min_value=-2, max_value=2, max_denominator=6),
       st.fractions(min_value=0, max_value=5, max_denominator=7))
@settings(max_examples=60, deadline=None)
def test_powerlaw_product_rule(a1, a2, t):
    p, q = PowerLaw(3, 2, a1), PowerLaw(Q(1, 2), 2, a2)
    lhs = (p * q)(t)
    rhs = Surd(Q(3, 2), 1 + 2 * Q(t), Q(a1) + Q(a2))
    assert flows._equal(lhs, flows._value(rhs))


def test_powerlaw_algebra():
    p = PowerLaw(4, 10, Q(-1, 2))
    assert (p**2)(1) == Q(16, 11)
    assert (p ** Q(1, 2)).c == 2
    with pytest.raises(ValueError):
        PowerLaw(2, 10, 1) ** Q(1, 2)
    with pytest.raises(ValueError):
        PowerLaw(1, 10, 1) * PowerLaw(1, 3, 1)
    assert p.derivative().alpha == Q(-3, 2)
    with pytest.raises(DomainError):
        p(Q(-1, 5))


def test_time_base_derivative():
    tb = TimeBase(Q(10), 10)
    # d/dt u^k = (k/N) b u^{k-N}
    assert tb.d_dt(tb.u**3) - (tb.u ** -7) * 3 == 0
    assert tb.reduce(tb.u**13, 1) - tb.u**3 * 11 == 0
    assert tb.value(tb.u**5, Q(3, 10)) == 2


# -- the closed-form solutions --------------------------------------------------------

@pytest.mark.parametrize("eps", EPS)
def test_initial_values(eps):
    # [TRIVIAL] f(0) = eps, h(0) = 1
    for kind in flows.KINDS:
        assert flows.solution(kind, eps).at(0) == (eps, 1)


@pytest.mark.parametrize("eps", EPS)
def test_solution_formulas(eps):
    # [REF] the three closed forms
    co, fl, hi = flows.coflow(eps), flows.laplacian_flow(eps), flows.hitchin(eps)
    assert (co.f.c, co.f.b, co.f.alpha, co.h.alpha) == (eps, 10 * eps**2, Q(-3, 10), Q(1, 10))
    assert (fl.f.c, fl.f.b, fl.f.alpha, fl.h.alpha) == (eps, -8 * eps**2, Q(-1, 2), 0)
    assert (hi.f.c, hi.f.b, hi.f.alpha, hi.h.alpha) == (eps, Q(5, 2) * eps, Q(-3, 5), Q(1, 5))
    assert co.interval == (-1 / (10 * eps**2), flows.INF)
    assert fl.interval == (-flows.INF, 1 / (8 * eps**2))
    assert hi.interval == (-2 / (5 * eps), flows.INF)


@pytest.mark.parametrize("eps", EPS)
def test_f_eps_h_cubed_relation(eps):
    # [REF] f = eps h^-3 for coflow and Hitchin; h = 1 for the flow
    for kind in (COFLOW, HITCHIN):
        sol = flows.solution(kind, eps)
        assert sol.f == sol.h ** -3 * eps
    assert flows.laplacian_flow(eps).h.alpha == 0


def test_flow_ode_from_powerlaw_derivative():
    # [REF] f' = 4 f^3 along the Laplacian flow
    for eps in EPS:
        f = flows.laplacian_flow(eps).f
        assert f.derivative() == f**3 * 4


@pytest.mark.parametrize("kind", flows.KINDS)
def test_reductions_from_full_frame_computation(kind):
    # the reduced ODE reproduces the frame-computed flow equation for formal (f, h)
    assert reduction_residual(flows._SYSTEMS[kind]()).is_zero()


@pytest.mark.parametrize("kind", flows.KINDS)
def test_pde_residual_symbolic(solutions, kind):
    assert pde_residual(solutions[kind]).is_zero()


def test_coflow_preserved_along_all_flows(solutions):
    for sol in solutions.values():
        assert sol.state.dpsi.is_zero()


def test_hitchin_psi(solutions):
    # [REF] psi_t = 1/2 r^4 omega^2 - eps eta ^ Im Upsilon for the Hitchin solution
    sol = solutions[HITCHIN]
    r4 = PowerLaw(1, sol.base.b, Q(4, 5))
    expected = {k: r4 * (c / 2) for k, c in wedge(OMEGA, OMEGA).coeffs.items()}
    for k, c in wedge(ETA, IM_UPSILON).coeffs.items():
        expected[k] = PowerLaw(-c * sol.eps, sol.base.b, 0)
    psi = sol.structure.psi
    assert set(psi.coeffs) == set(expected)
    for k, c in psi.coeffs.items():
        assert sol.base.law(c) == expected[k]


def test_domain_checks():
    fl = flows.laplacian_flow(1)
    with pytest.raises(DomainError):
        fl.at(Q(1, 8))
    with pytest.raises(DomainError):
        flows.coflow(1).at(Q(-1, 10))
    with pytest.raises(DomainError):
        flows.coflow(0)
    with pytest.raises(ValueError):
        flows.solution("ricci", 1)
    with pytest.raises(DomainError):
        pde_residual(fl, Q(1))


# -- norms -----------------------------------------------------------------------

def test_spec_examples_at_zero(solutions):
    # [REF] |T|^2 = 15/4 at t = 0, eps = 1; [DERIVED] |grad T|^2 = 12 from tests/oracles.py
    n = norms_along_flow(solutions[COFLOW], 0)
    assert n["normT2"].closed == n["normT2"].recomputed == Q(15, 4)
    n = norms_along_flow(solutions[FLOW], 0)
    assert n["normT2"].recomputed == Q(15, 4)
    assert n["normGradT2"].recomputed == 12


GRID = [(k, t) for k in flows.KINDS for t in TIMES if flows.solution(k, 1).contains(t)]


@pytest.mark.parametrize("kind, t", GRID)
def test_norms_closed_form_vs_recomputed(solutions, kind, t):
    sol = solutions[kind]
    for key, cmp in norms_along_flow(sol, t).items():
        assert cmp.agree, key


def test_coflow_volume_ratio(solutions):
    # [REF] H(phi_t) = (10t + 1)^{3/10} H(phi_0) at eps = 1
    sol = solutions[COFLOW]
    for t in TIMES:
        assert norms_along_flow(sol, t)["HitchinRatio"].recomputed == flows._value(Surd(1, 1 + 10 * t, Q(3, 10)))


@pytest.mark.parametrize("kind", flows.KINDS)
def test_torsion_closed_form(solutions, kind):
    # [REF] T_t = -3/2 eps^3 B^a eta^2 + 1/2 eps B^b g_D for the coflow; the others by the same route
    sol = solutions[kind]
    A, B = torsion_closed_form(sol)
    T = sol.state.T
    law = sol.base.law
    assert law(T[0, 0]) == A
    assert all(law(T[i, i]) == B for i in range(1, 7))
    assert all(T[i, j] == 0 for i in range(7) for j in range(7) if i != j)


def test_float_mode_norms():
    set_mode("float", 1e-9)
    sol = flows.coflow(1)
    n = norms_along_flow(sol, Q(1, 3))
    assert all(c.agree for c in n.values())
    assert n["normT2"].closed == pytest.approx(15 / 4 / (1 + 10 / 3))


# -- numerics ---------------------------------------------------------------------

@pytest.mark.parametrize("kind", [COFLOW, HITCHIN])
def test_rk4_matches_closed_form(kind):
    res = integrate_numeric(flows.solution(kind, 1), 0, 1, steps=1000)
    assert res.max_rel_error < 1e-8
    assert len(res.times) == 1001


def test_rk4_backward_interval_for_flow():
    res = integrate_numeric(flows.laplacian_flow(1), -1, 0, steps=1000)
    assert res.max_rel_error < 1e-8


def test_rk4_rejects_singular_endpoint():
    with pytest.raises(DomainError):
        integrate_numeric(flows.laplacian_flow(1), 0, Q(1, 8))
    # [0, 1] runs through the singular time 1/8
    with pytest.raises(DomainError):
        integrate_numeric(flows.laplacian_flow(1), 0, 1)


def test_rk4_zero_length():
    res = integrate_numeric(flows.coflow(2), Q(1, 3), Q(1, 3))
    sol = flows.coflow(2)
    assert res.f == [sol.f(Q(1, 3))] and res.h == [sol.h(Q(1, 3))]
    assert res.max_rel_error == 0


# -- singularities and normalisation -------------------------------------------------------

@pytest.mark.parametrize("eps", EPS)
def test_classification(eps):
    # [REF] Type I forward for the flow; Type III for the coflow; IIb with transverse curvature
    fwd, bwd = classify_singularity(flows.laplacian_flow(eps))
    assert fwd.finite and fwd.type == "I" and fwd.T_sing == 1 / (8 * eps**2)
    assert bwd.summary == "none (ancient)"
    fwd, bwd = classify_singularity(flows.coflow(eps))
    assert not fwd.finite and fwd.type == "III"
    assert bwd.finite and bwd.T_sing == -1 / (10 * eps**2)
    fwd, _ = classify_singularity(flows.coflow(eps), K=1)
    assert fwd.type == "IIb"
    fwd, _ = classify_singularity(flows.hitchin(eps))
    assert fwd.type == "III"


def test_classification_rejects_negative_K():
    with pytest.raises(DomainError):
        classify_singularity(flows.coflow(1), K=-1)


def test_classification_report_dict():
    d = classify_singularity(flows.laplacian_flow(1))[0].to_dict()
    assert d["T_sing"] == "1/8" and d["type"] == "I" and d["rate_bounded"]
    assert classify_singularity(flows.coflow(1))[0].to_dict()["T_sing"] == "inf"


@pytest.mark.parametrize("eps", EPS)
def test_normalized_metric(eps):
    # [REF] coefficients, with eps^2 restored on the eta^2 term of the coflow
    nm = normalized_metric(flows.coflow(eps), 0)
    b = 10 * eps**2
    assert nm.coeff_eta2 == PowerLaw(eps**2, b, Q(-24, 35))
    assert nm.coeff_gD == PowerLaw(1, b, Q(4, 35))
    assert nm.values == (eps**2, 1)
    nm = normalized_metric(flows.laplacian_flow(eps), 0)
    b = -8 * eps**2
    assert nm.coeff_eta2 == PowerLaw(eps**2, b, Q(-6, 7))
    assert nm.coeff_gD == PowerLaw(1, b, Q(1, 7))
    assert nm.values == (eps**2, 1)
    assert nm.limits == {"coeff_eta2": "infinity", "coeff_gD": "0"}
    with pytest.raises(ValueError):
        normalized_metric(flows.coflow(eps), mode="fixed-diameter")


@pytest.mark.parametrize("eps", EPS)
@pytest.mark.parametrize("s", [Q(0), Q(1, 5), Q(2), Q(-1, 10)])
def test_hitchin_and_coflow_same_orbit(eps, s):
    co, hi = flows.coflow(eps), flows.hitchin(eps)
    if not hi.contains(s):
        pytest.skip("outside the Hitchin interval")
    t = coflow_time_of_hitchin(eps, s)
    assert co.contains(t)
    assert co.at(t) == hi.at(s)
