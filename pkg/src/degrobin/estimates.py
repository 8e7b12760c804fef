"""Numerical checks of the a priori estimates.

None of the estimates comes with explicit constants, so the harnesses
report the estimated quantities across amplitude sweeps and the checks
are about boundedness and monotone dependence, never about a value of C
or K.
"""

from __future__ import annotations

import math
from dataclasses import asdict, replace

import numpy as np

from .coefficients import B_eval
from .errors import DomainError
from .fd_solver import PowerSource, ProblemSpec, picard_solve
from .norms import (
    RadialGridFunction,
    h1_norm,
    lp_norm,
    power_source_lq_norm,
    trace_report,
    w1s_norm,
    weighted_gradient_integral,
)
from .radial_oracle import RadialExampleSpec, solve_boundary_value, u_profile
from .regimes import Regime, classify

__all__ = [
    "RegimeMismatchError",
    "oracle_grid_function",
    "bounded_regime_q",
    "estimate_harness_linfty",
    "estimate_harness_energy",
    "estimate_harness_w1s",
    "loglog_slope",
]


class RegimeMismatchError(DomainError):
    """The requested q does not belong to the regime a harness checks."""


def oracle_grid_function(spec: RadialExampleSpec, M: int = 4096, grading: float = 2.0) -> RadialGridFunction:
    form = solve_boundary_value(spec)
    r = spec.R * (np.arange(M + 1) / M) ** grading
    r[-1] = spec.R
    return RadialGridFunction(r, u_profile(form, spec, r), spec.N)


def bounded_regime_q(N: int, gamma: float) -> float:
    """A q > N/2 with A/|x|^gamma in L^q: halfway to N/gamma, at most N/2 + 1."""
    top = math.inf if gamma == 0 else N / gamma
    return N / 2 + min(1.0, 0.5 * (top - N / 2))


def _source_in_lq(N, gamma, q):
    return gamma == 0 or q < N / gamma


def estimate_harness_linfty(specs, q: float | None = None) -> list[dict]:
    """B(max u) for data in the bounded regime, with ||f||_{L^q}.

    Each row carries the spec parameters, q, ||f||_q, max u and B(max u).
    Specs whose oracle reports nonexistence are kept as rows with
    status ``"skipped: no bounded radial solution"``.
    """
    rows = []
    for spec in specs:
        qq = bounded_regime_q(spec.N, spec.gamma) if q is None else q
        if classify(spec.N, spec.theta, qq).regime is not Regime.Bounded or not _source_in_lq(spec.N, spec.gamma, qq):
            raise RegimeMismatchError(f"q={qq} is not a bounded-regime exponent for {spec}")
        row = dict(asdict(spec), q=qq, f_Lq=power_source_lq_norm(spec.N, spec.R, spec.A, spec.gamma, qq))
        form = solve_boundary_value(spec)
        if not form.exists:
            row.update(status="skipped: no bounded radial solution", u_max=math.nan, B_u_max=math.nan)
        else:
            u0 = float(u_profile(form, spec, 0.0))
            row.update(status="ok", u_max=u0, B_u_max=float(B_eval(spec.family, u0)))
        rows.append(row)
    return rows


def estimate_harness_energy(specs, q: float, M: int = 4096, solver: str = "oracle") -> list[dict]:
    """Ratio ||u||^(1-theta)_{L^(q**(1-theta))} / ||f||_{L^q} across a sweep.

    ``solver`` is ``"oracle"`` (closed form, needs gamma < 2) or ``"fd"``.
    Also reports the H^1 norm, the weighted gradient integral with the
    test exponent p, and the trace norm in L^(p+1-theta).
    """
    rows = []
    for spec in specs:
        rep = classify(spec.N, spec.theta, q)
        if rep.regime is not Regime.Energy or not _source_in_lq(spec.N, spec.gamma, q):
            raise RegimeMismatchError(f"q={q} is not in the energy window for {spec} ({rep.regime.name})")
        expo = float(rep.summability_exponent)
        p = float(rep.p_test)
        g = _solution(spec, M, solver)
        f_lq = power_source_lq_norm(spec.N, spec.R, spec.A, spec.gamma, q)
        u_norm = lp_norm(g, expo)
        lhs = u_norm ** (1.0 - spec.theta)
        row = dict(
            asdict(spec),
            q=q,
            summability_exponent=expo,
            p_test=p,
            f_Lq=f_lq,
            u_Lexp=u_norm,
            lhs=lhs,
            ratio=lhs / f_lq if f_lq > 0 else None,
            H1=h1_norm(g),
            grad_weighted=weighted_gradient_integral(g, p, spec.theta),
            trace_Lp=trace_report(g, (float(rep.trace_exponent),))["trace_lp"][float(rep.trace_exponent)],
        )
        rows.append(row)
    return rows


def _solution(spec, M, solver):
    if solver == "oracle":
        return oracle_grid_function(spec, M)
    if solver == "fd":
        ps = ProblemSpec(
            N=spec.N, R=spec.R, beta=spec.beta, theta=spec.theta, source=PowerSource(spec.A, spec.gamma), M=M
        )
        return picard_solve(ps).solution
    raise DomainError(f"unknown solver {solver!r}")


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x over positive pairs."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(y)
    if keep.sum() < 2:
        return math.nan
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def estimate_harness_w1s(specs, q: float, meshes=(None,)) -> dict:
    """W^(1,s) norms of solver output for data in the non-energy window.

    ``specs`` are :class:`ProblemSpec` with power sources.  Every spec is
    solved on each mesh size in ``meshes`` (None keeps the spec's M).
    Returns ``{"rows": [...], "slope": d log||u||_W1s / d log A}`` using
    the finest mesh; no pass/fail is attached to the slope.
    """
    rows = []
    for spec in specs:
        src = spec.source
        if not isinstance(src, PowerSource):
            raise DomainError("the W^(1,s) harness needs power-law sources")
        rep = classify(spec.N, spec.theta, q)
        if rep.regime is not Regime.NonEnergy or not _source_in_lq(spec.N, src.gamma, q):
            raise RegimeMismatchError(f"q={q} is not in the non-energy window for gamma={src.gamma}")
        s = float(rep.s)
        for M in meshes:
            run = spec if M is None else replace(spec, M=int(M))
            out = picard_solve(run)
            g = out.solution
            rows.append(
                dict(
                    N=run.N,
                    R=run.R,
                    beta=run.beta,
                    theta=run.theta,
                    A=src.A,
                    gamma=src.gamma,
                    M=run.M,
                    trunc=run.trunc,
                    q=q,
                    s=s,
                    f_Lq=power_source_lq_norm(run.N, run.R, src.A, src.gamma, q),
                    W1s=w1s_norm(g, s),
                    u_max=out.max_u,
                    truncation_active=out.truncation_active,
                )
            )
    finest = max(r["M"] for r in rows) if rows else 0
    fine = [r for r in rows if r["M"] == finest]
    return {"rows": rows, "slope": loglog_slope([r["A"] for r in fine], [r["W1s"] for r in fine])}
