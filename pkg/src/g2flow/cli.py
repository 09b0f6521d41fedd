"""Command-line front end: flow time series, verification suites, classification.

Exit codes: 0 success, 1 a verification or cross-check failed, 2 usage or
domain error.
"""

from __future__ import annotations

import contextlib
import csv
import io
import json
import sys
from fractions import Fraction

import click
import numpy as np

from . import cy8, flows
from .flows import DomainError
from .identities import (
    IdentityCase,
    RandomSource,
    _case,
    _trace_free,
    ansatz_instance,
    check_andres,
    check_contractions,
    check_dmu,
    check_grigorian,
    check_laplacian_decomposition,
    check_lie_derivative,
    check_su3_and_j,
    check_symmetry,
    check_torsion,
    contact_symmetries,
    flow_instance,
    random_instance,
    standard_instance,
)
from .model import heisenberg
from .scalar import MODE, Q, Laurent, set_mode, var

SCHEMA_VERSION = 1

COLUMNS = [
    "t", "f", "h", "coeff_eta2", "coeff_gD", "normT2", "normGradT2",
    "normRm2", "Lambda", "volDensity", "HitchinRatio", "cohomCoeff",
]

SUITES = ["contractions", "grigorian", "dmu", "laplacian", "andres", "lie", "su3j", "flows", "cy8"]

SAMPLE_TIMES = [Q(0), Q(1, 10), Q(1), Q(7, 3), Q(10)]
SAMPLE_EPS = [Q(1), Q(1, 2), Q(3)]


class RationalType(click.ParamType):
    """'p/q', integers and base-10 decimals, converted exactly."""

    name = "rational"

    def convert(self, value, param, ctx):
        if isinstance(value, type(Q(0))):
            return value
        try:
            return Q(Fraction(str(value).strip()))
        except (ValueError, ZeroDivisionError):
            self.fail(f"{value!r} is not a rational number", param, ctx)


RATIONAL = RationalType()


def _render(x) -> str:
    if MODE.kind == "float" or isinstance(x, float):
        return repr(float(x))
    return str(x)


def _parse_corruption(spec: str | None) -> dict | None:
    """'k,i,j=v[;k,i,j=v...]' → structure-constant overrides."""
    if not spec:
        return None
    out = {}
    for part in spec.split(";"):
        idx, _, val = part.partition("=")
        k, i, j = (int(s) for s in idx.split(","))
        out[(k, i, j)] = Q(Fraction(val))
    return out


# -- flow run ---------------------------------------------------------------

def _sample_times(t0, t1, samples: int) -> list:
    if samples == 1:
        return [t0]
    return [t0 + (t1 - t0) * Q(k, samples - 1) for k in range(samples)]


def flow_rows(sol: flows.FlowSolution, times: list) -> tuple[list[dict], list[str]]:
    """One row per time with closed-form values; also returns cross-check failures."""
    failures = []
    rows = []
    for t in times:
        n = flows.norms_along_flow(sol, t)
        for key, cmp in n.items():
            if not cmp.agree:
                failures.append(f"t={t}: {key} closed form {cmp.closed} != recomputed {cmp.recomputed}")
        f, h = sol.at(t)
        rows.append({
            "t": t,
            "f": f,
            "h": h,
            "coeff_eta2": (sol.f**2)(t),
            "coeff_gD": (sol.h**2)(t),
            "normT2": n["normT2"].closed,
            "normGradT2": n["normGradT2"].closed,
            "normRm2": n["normRm2"].closed,
            "Lambda": n["Lambda"].closed,
            "volDensity": n["volDensity"].closed,
            "HitchinRatio": n["HitchinRatio"].closed,
            "cohomCoeff": n["cohomCoeff"].closed,
        })
    return rows, failures


def _emit_csv(rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_render(r[c]) for c in COLUMNS])
    return buf.getvalue()


def _emit_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, ensure_ascii=False) + "\n"


def _write(text: str, output: str | None) -> None:
    if output:
        with open(output, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)


# -- verification suites ---------------------------------------------------------

class _Context:
    """Structures shared across the suites of one run."""

    def __init__(self, seed: int, cases: int, corrupt: dict | None):
        self.seed = seed
        self.cases = cases
        self.model = heisenberg(corrupt)
        self.corrupt = corrupt
        self._random = None
        self._flows = None
        self._fixed = None

    @property
    def fixed(self) -> list:
        if self._fixed is None:
            self._fixed = [
                standard_instance(),
                ansatz_instance(1, 1, self.model),
                ansatz_instance(Q(3, 2), Q(2, 3), self.model),
            ]
        return self._fixed

    @property
    def flow_instances(self) -> list:
        if self._flows is None:
            self._flows = [flow_instance(flows.solution(k, 1), self.model) for k in flows.KINDS]
        return self._flows

    @property
    def random(self) -> list:
        if self._random is None:
            src = RandomSource(self.seed)
            self._random = [random_instance(src, self.model, f"#{i} ") for i in range(self.cases)]
        return self._random

    def source(self, salt: str) -> RandomSource:
        # str hashes are salted per process, so derive the sub-seed by hand
        return RandomSource(self.seed * 1000 + sum(map(ord, salt)))


def _suite_contractions(ctx: _Context) -> list[IdentityCase]:
    out = []
    for inst in ctx.fixed + ctx.random:
        out += check_contractions(inst)
    return out


def _suite_grigorian(ctx: _Context) -> list[IdentityCase]:
    out = []
    for inst in ctx.fixed + ctx.flow_instances + ctx.random:
        out += check_torsion(inst) + check_grigorian(inst)
    return out


def _suite_dmu(ctx: _Context) -> list[IdentityCase]:
    src = ctx.source("dmu")
    out = []
    for inst in ctx.fixed[1:]:
        zero = _trace_free(inst, inst.metric.g * 0)
        out.append(check_dmu(inst, zero, "h = 0"))
        eta2 = inst.metric.g * 0
        eta2[0, 0] = Q(1)
        out.append(check_dmu(inst, _trace_free(inst, eta2), "h = trace-free part of eta^2"))
    for inst in ctx.fixed[:1] + ctx.random:
        out.append(check_dmu(inst, _trace_free(inst, src.symmetric()), "random constant trace-free h"))
    return out


def _suite_laplacian(ctx: _Context) -> list[IdentityCase]:
    out = []
    for inst in ctx.fixed + ctx.flow_instances + ctx.random:
        out += check_laplacian_decomposition(inst)
    return out


def _suite_andres(ctx: _Context) -> list[IdentityCase]:
    out = []
    for inst in ctx.fixed + ctx.flow_instances + ctx.random:
        out += check_andres(inst)
    return out


def _radial(n: int = 7):
    comps = [Laurent(0)] + [var(f"x{i}") for i in range(1, n)]
    return np.array(comps, dtype=object)


def _suite_lie(ctx: _Context) -> list[IdentityCase]:
    src = ctx.source("lie")
    out = []
    a0 = ctx.fixed[1]
    for label, X in contact_symmetries():
        out.append(check_lie_derivative(a0, X, label))
        out.append(check_symmetry(a0, X, label))
    out.append(check_lie_derivative(a0, _radial(), "radial transverse field"))
    out.append(check_symmetry(a0, _radial(), "radial transverse field"))
    out.append(check_lie_derivative(ctx.fixed[0], src.vector_field(2), "random polynomial X, degree <= 2"))
    for inst in ctx.random:
        X = src.vector_field(2)
        out.append(check_lie_derivative(inst, X, "random polynomial X, degree <= 2"))
        out.append(check_symmetry(inst, X, "random polynomial X, degree <= 2"))
    return out


def _suite_su3j(ctx: _Context) -> list[IdentityCase]:
    src = ctx.source("su3j")
    out = []
    for k in flows.KINDS:
        for eps in (Q(1), Q(1, 2)):
            out += check_su3_and_j(flows.solution(k, eps), src)
    return out


def flow_cases(sol: flows.FlowSolution) -> list[IdentityCase]:
    pv = f"{sol.kind} solution, eps={sol.eps}"
    times = [t for t in SAMPLE_TIMES if sol.contains(t)]
    st = sol.state
    cases = [
        _case("reduced ODEs preserve the ansatz", f"{sol.kind} system, formal f, h",
              lambda: flows.reduction_residual(sol.system)),
        _case("closed form solves the ODEs", pv, lambda: _ode_residual(sol)),
        _case("initial condition (eps, 1)", pv, lambda: [sol.f(0) - sol.eps, sol.h(0) - 1]),
        _case("d psi_t = 0", pv, lambda: st.dpsi),
        _case("volume density increasing", pv,
              lambda: Q(0) if flows.hitchin_ratio(sol).derivative().c > 0 else Q(1)),
    ]
    for t in times:
        cases.append(_case("PDE residual", f"{pv}, t={t}", lambda t=t: flows.pde_residual(sol, t)))
        for key, cmp in flows.norms_along_flow(sol, t).items():
            cases.append(_case(f"{key}: closed form = recomputed", f"{pv}, t={t}",
                               lambda cmp=cmp: Q(0) if cmp.agree else Q(1)))
    return cases


def _ode_residual(sol: flows.FlowSolution) -> list:
    fd, hd = sol.system(sol.f_u, sol.h_u)
    return [sol.base.d_dt(sol.f_u) - fd, sol.base.d_dt(sol.h_u) - hd]


def _suite_flows(ctx: _Context) -> list[IdentityCase]:
    out = []
    for k in flows.KINDS:
        for eps in SAMPLE_EPS:
            out += flow_cases(flows.solution(k, eps))
    expected = {flows.FLOW: ("I", None), flows.COFLOW: ("III", None), flows.HITCHIN: ("III", None)}
    for k, (fwd, bwd) in expected.items():
        for eps in SAMPLE_EPS:
            rep = flows.classify_singularity(flows.solution(k, eps))
            out.append(_case("classification (forward)", f"{k}, eps={eps}, K=0",
                             lambda rep=rep, fwd=fwd: Q(0) if rep[0].type == fwd else Q(1)))
    rep = flows.classify_singularity(flows.coflow(1), K=1)
    out.append(_case("classification (forward)", "coflow, eps=1, synthetic K=1",
                     lambda: Q(0) if rep[0].type == "IIb" else Q(1)))
    for k in flows.KINDS:
        sol = flows.solution(k, 1)
        lo, hi = sol.interval
        t0, t1 = (Q(0), Q(1)) if hi == flows.INF else (Q(-1), Q(0))
        res = flows.integrate_numeric(sol, t0, t1, 1000)
        out.append(_case("RK4 matches closed form (rel. error < 1e-8)", f"{k}, eps=1, [{t0}, {t1}], 1000 steps",
                         lambda res=res: Q(0) if res.max_rel_error < 1e-8 else Q(res.max_rel_error)))
    return out


def _suite_cy8(ctx: _Context) -> list[IdentityCase]:
    out = []
    for eps in SAMPLE_EPS:
        sol = flows.hitchin(eps)
        out += cy8.closedness_checks(sol)
        c = cy8.build_cy4(sol)
        for t in (None, Q(0), Q(1), Q(10)):
            out += cy8.su4_pointwise_checks(c, t)
    control = cy8.closedness_checks(flows.coflow(1))[0]
    out.append(IdentityCase(
        "negative control: d Phi != 0 with the coflow time law", control.provenance,
        Q(0) if not control.passed else Q(1),
    ))
    return out


_RUNNERS = {
    "contractions": _suite_contractions,
    "grigorian": _suite_grigorian,
    "dmu": _suite_dmu,
    "laplacian": _suite_laplacian,
    "andres": _suite_andres,
    "lie": _suite_lie,
    "su3j": _suite_su3j,
    "flows": _suite_flows,
    "cy8": _suite_cy8,
}


def run_suites(names: list[str], seed: int = 0, cases: int = 20, corrupt: dict | None = None) -> dict:
    ctx = _Context(seed, cases, corrupt)
    report = {"schema_version": SCHEMA_VERSION, "seed": seed, "cases_per_family": cases, "suites": {}}
    if corrupt:
        report["corrupted_constants"] = {f"{k},{i},{j}": str(v) for (k, i, j), v in corrupt.items()}
    ok = True
    for name in names:
        results = _RUNNERS[name](ctx)
        passed = sum(c.passed for c in results)
        report["suites"][name] = {
            "passed": passed,
            "failed": len(results) - passed,
            "cases": [c.to_dict() for c in results],
        }
        ok = ok and passed == len(results)
    report["all_passed"] = ok
    return report


# -- commands ---------------------------------------------------------------

@contextlib.contextmanager
def _scalar_mode(mode: str | None, tol: float | None):
    """Switch the scalar mode for one command and restore it afterwards."""
    saved = (MODE.kind, MODE.rel_tol)
    if mode or tol is not None:
        set_mode(mode or MODE.kind, tol)
    try:
        yield
    finally:
        set_mode(*saved)


@click.group()
@click.version_option(package_name="g2flow")
def main():
    """Flows of coclosed G2-structures on the Heisenberg contact Calabi–Yau model."""


@main.group()
def flow():
    """Closed-form flow solutions."""


@flow.command("run")
@click.option("--flow", "kind", type=click.Choice(flows.KINDS), required=True)
@click.option("--epsilon", type=RATIONAL, default="1", show_default=True)
@click.option("--t0", type=RATIONAL, default="0", show_default=True)
@click.option("--t1", type=RATIONAL, default="1", show_default=True)
@click.option("--samples", type=click.IntRange(min=1), default=11, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--mode", type=click.Choice(["exact", "float"]), envvar="G2FLOW_MODE", default=None)
@click.option("--tol", type=float, envvar="G2FLOW_TOL", default=None)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
def flow_run(kind, epsilon, t0, t1, samples, fmt, mode, tol, output):
    """Emit a time series of the tracked quantities."""
    with _scalar_mode(mode, tol):
        _flow_run(kind, epsilon, t0, t1, samples, fmt, output)


def _flow_run(kind, epsilon, t0, t1, samples, fmt, output):
    try:
        sol = flows.solution(kind, epsilon)
        for t in (t0, t1):
            sol.check_time(t)
    except DomainError as exc:
        raise click.UsageError(str(exc)) from None
    if t1 < t0:
        raise click.UsageError("t1 must not be smaller than t0")
    times = _sample_times(t0, t1, samples)
    rows, failures = flow_rows(sol, times)
    if fmt == "csv":
        text = _emit_csv(rows)
    else:
        text = _emit_json({
            "schema_version": SCHEMA_VERSION,
            "flow": kind,
            "epsilon": str(epsilon),
            "mode": MODE.kind,
            "columns": COLUMNS,
            "rows": [{c: _render(r[c]) if MODE.kind == "exact" else float(r[c]) for c in COLUMNS} for r in rows],
        })
    _write(text, output)
    if failures:
        for f in failures:
            click.echo(f"cross-check failed: {f}", err=True)
        sys.exit(1)


@main.command()
@click.argument("suite", type=click.Choice(SUITES + ["all"]))
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--cases", type=click.IntRange(min=1), default=20, show_default=True)
@click.option("--output", "-o", type=click.Path(dir_okay=False), default=None)
@click.option("--corrupt-constant", "corrupt", envvar="G2FLOW_CORRUPT", hidden=True, default=None)
def verify(suite, seed, cases, output, corrupt):
    """Run a verification suite and write a JSON report."""
    try:
        overrides = _parse_corruption(corrupt)
    except ValueError as exc:
        raise click.UsageError(f"bad --corrupt-constant: {exc}") from None
    names = SUITES if suite == "all" else [suite]
    report = run_suites(names, seed, cases, overrides)
    _write(_emit_json(report), output)
    for name, res in report["suites"].items():
        click.echo(f"{name}: {res['passed']} passed, {res['failed']} failed", err=True)
        for c in res["cases"]:
            if not c["pass"]:
                click.echo(f"  FAIL {c['name']} [{c['inputs']}]: {c.get('offending')}", err=True)
    sys.exit(0 if report["all_passed"] else 1)


@main.command()
@click.option("--flow", "kind", type=click.Choice(flows.KINDS), required=True)
@click.option("--epsilon", type=RATIONAL, default="1", show_default=True)
@click.option("--synthetic-K", "K", type=RATIONAL, default="0", show_default=True)
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text", show_default=True)
def classify(kind, epsilon, K, fmt):
    """Classify the singularities of a solution in both time directions."""
    try:
        sol = flows.solution(kind, epsilon)
        reports = flows.classify_singularity(sol, K)
    except DomainError as exc:
        raise click.UsageError(str(exc)) from None
    if fmt == "json":
        click.echo(_emit_json({
            "schema_version": SCHEMA_VERSION,
            "flow": kind,
            "epsilon": str(epsilon),
            "K": str(K),
            "reports": [r.to_dict() for r in reports],
        }), nl=False)
        return
    for r in reports:
        click.echo(f"{r.direction}: {r.summary}")
        for label, c, a in r.terms:
            click.echo(f"    Lambda^2 term {label}: {c} * (1 + {sol.base.b} t)^({a})")
        if r.rate_exponent is not None:
            click.echo(f"    controlling exponent {r.controlling_exponent}, rate exponent {r.rate_exponent}")


if __name__ == "__main__":
    main()
