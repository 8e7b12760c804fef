"""Closed-form radial solutions on the ball B_R for the source f = A/|x|^gamma.

With v = B(u) the problem becomes -Laplace(v) = f with the nonlinear
boundary condition dv/dnu + beta F(v) = 0.  Radially,

    v(r) = v(R) + A/(N-gamma) * (R^(2-gamma) - r^(2-gamma)) / (2-gamma)

and v(R) solves F(v(R)) = A R^(1-gamma) / (beta (N-gamma)).  Note the
beta in the denominator: it comes from v'(R) + beta F(v(R)) = 0 and
disappears only when beta = 1.  Since F is strictly increasing the root
is unique; for theta = 1, F is bounded by 1 and no bounded radial
solution exists once the load reaches 1.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np
from scipy import optimize

from .coefficients import B_inv, CoefficientFamily, F_eval
from .errors import DomainError, NonexistenceError

__all__ = [
    "RadialExampleSpec",
    "RadialClosedForm",
    "boundary_load",
    "has_bounded_solution",
    "solve_boundary_value",
    "v_profile",
    "u_profile",
    "ode_residual",
    "ode_residual_parts",
    "existence_threshold",
    "locate_existence_threshold",
]

BISECT_XTOL = 1e-12


@dataclass(frozen=True)
class RadialExampleSpec:
    N: int = 3
    R: float = 1.0
    beta: float = 1.0
    theta: float = 1.0
    A: float = 1.0
    gamma: float = 1.0

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 3:
            raise DomainError(f"N must be an integer >= 3, got {self.N!r}")
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.A >= 0:
            raise DomainError(f"A must be >= 0, got {self.A}")
        if not 0 <= self.gamma < 2:
            raise DomainError(f"gamma must lie in [0, 2), got {self.gamma}")
        # validates theta
        CoefficientFamily(self.theta)

    @property
    def family(self) -> CoefficientFamily:
        return CoefficientFamily(self.theta)


@dataclass(frozen=True)
class RadialClosedForm:
    vR: float
    # A/(N-gamma), 2-gamma, R
    slope: float
    power: float
    R: float
    exists: bool
    load: float

    def _require(self):
        if not self.exists:
            raise NonexistenceError(
                f"boundary load {self.load:g} >= sup F: no bounded radial solution"
            )


def boundary_load(spec: RadialExampleSpec) -> float:
    """Right-hand side of F(v(R)) = A R^(1-gamma) / (beta (N-gamma))."""
    return spec.A * spec.R ** (1.0 - spec.gamma) / (spec.beta * (spec.N - spec.gamma))


def has_bounded_solution(spec: RadialExampleSpec) -> bool:
    return boundary_load(spec) < spec.family.sup_F


def solve_boundary_value(spec: RadialExampleSpec) -> RadialClosedForm:
    fam = spec.family
    load = boundary_load(spec)
    common = dict(
        slope=spec.A / (spec.N - spec.gamma),
        power=2.0 - spec.gamma,
        R=float(spec.R),
        load=load,
    )
    if not has_bounded_solution(spec):
        return RadialClosedForm(vR=np.nan, exists=False, **common)
    if load == 0.0:
        return RadialClosedForm(vR=0.0, exists=True, **common)

    # F(0) = 0 < load; grow the bracket until F exceeds the load
    hi = 1.0
    while F_eval(fam, hi) <= load:
        hi *= 2.0
    vR = optimize.bisect(lambda v: F_eval(fam, v) - load, 0.0, hi, xtol=BISECT_XTOL, maxiter=400)
    return RadialClosedForm(vR=float(vR), exists=True, **common)


def _check_r(r, R):
    r = np.asarray(r, dtype=float)
    if np.any(r < 0) or np.any(r > R * (1 + 1e-14)):
        raise DomainError(f"r must lie in [0, {R}]")
    return np.minimum(r, R)


def v_profile(form: RadialClosedForm, spec: RadialExampleSpec, r):
    form._require()
    r = _check_r(r, spec.R)
    p = form.power
    v = form.vR + form.slope * (spec.R**p - r**p) / p
    return float(v) if v.ndim == 0 else v


def u_profile(form: RadialClosedForm, spec: RadialExampleSpec, r):
    return B_inv(spec.family, v_profile(form, spec, r))


def ode_residual_parts(form: RadialClosedForm, spec: RadialExampleSpec, r) -> dict:
    """Finite-difference check of the radial equation for the sampled v.

    Interior: -v'' - (N-1)/r v' - A r^-gamma by centred differences at the
    interior nodes of ``r`` (which must be strictly positive there).
    Axis: one-sided slope at the first node, only when the grid starts at
    0 and gamma < 1 (for gamma >= 1 the profile has a cusp at the origin).
    Robin: one-sided second-order v'(R) + beta F(v(R)), when the grid
    ends at R.
    """
    form._require()
    r = np.asarray(r, dtype=float)
    if r.ndim != 1 or r.size < 3 or np.any(np.diff(r) <= 0):
        raise DomainError("need an increasing grid with at least 3 points")
    v = v_profile(form, spec, r)
    h0 = r[1:-1] - r[:-2]
    h1 = r[2:] - r[1:-1]
    rm = r[1:-1]
    if np.any(rm <= 0):
        raise DomainError("interior grid points must be positive")
    d2 = 2.0 * (h0 * v[2:] - (h0 + h1) * v[1:-1] + h1 * v[:-2]) / (h0 * h1 * (h0 + h1))
    d1 = (h0**2 * v[2:] + (h1**2 - h0**2) * v[1:-1] - h1**2 * v[:-2]) / (h0 * h1 * (h0 + h1))
    interior = -d2 - (spec.N - 1) / rm * d1 - spec.A * rm ** (-spec.gamma)
    parts = {"interior": float(np.max(np.abs(interior))) if interior.size else 0.0}

    def one_sided(x0, x1, x2, f0, f1, f2):
        # second-order derivative at x0 from three points
        a, b = x1 - x0, x2 - x0
        return (f1 * b**2 - f2 * a**2 - f0 * (b**2 - a**2)) / (a * b * (b - a))

    if r[0] == 0.0 and spec.gamma < 1.0:
        parts["axis"] = abs(float(one_sided(r[0], r[1], r[2], v[0], v[1], v[2])))
    if np.isclose(r[-1], spec.R, rtol=1e-14, atol=0.0):
        dvR = one_sided(r[-1], r[-2], r[-3], v[-1], v[-2], v[-3])
        parts["robin"] = abs(float(dvR + spec.beta * F_eval(spec.family, v[-1])))
    return parts


def ode_residual(form: RadialClosedForm, spec: RadialExampleSpec, r) -> float:
    """Largest of the residuals reported by :func:`ode_residual_parts`."""
    return max(ode_residual_parts(form, spec, r).values())


def existence_threshold(spec: RadialExampleSpec) -> float:
    """Amplitude A* = beta (N-gamma) R^(gamma-1) sup F at which existence fails."""
    return spec.beta * (spec.N - spec.gamma) * spec.R ** (spec.gamma - 1.0) * spec.family.sup_F


def locate_existence_threshold(spec: RadialExampleSpec, A_max: float = 1e6, xtol: float = 1e-12) -> float:
    """Bisection on A for the point where the oracle flips to nonexistence.

    Independent of :func:`existence_threshold`: only the existence test
    used by :func:`solve_boundary_value` is consulted.  Returns inf if a bounded
    solution exists for every A up to ``A_max``.
    """
    def exists(A):
        return has_bounded_solution(replace(spec, A=A))

    if exists(A_max):
        return np.inf
    lo, hi = 0.0, A_max
    while hi - lo > xtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if exists(mid):
            lo = mid
        else:
            hi = mid
    return hi

