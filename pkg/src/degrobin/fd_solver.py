"""Radial solver for -div(b(|u|) grad u) = f on B_R with du/dnu + beta u = 0.

The ball is reduced to (0, R) with weight r^(N-1).  Each Picard step
freezes the coefficient at the previous iterate and solves the linear
conservative (P1 / finite-volume) system

    -(r^(N-1) c(u_frozen) u')' = r^(N-1) f,

whose last row carries the Robin flux beta b(u(R)) u(R) R^(N-1).  The
coefficient argument is truncated at level n, c never drops below
(1+n)^-theta, so every linear system is uniformly elliptic.

On a cell [r_k, r_k+1] the frozen coefficient is the mean of b_n over the
values between u_k and u_k+1, that is

    (B_n(u_k+1) - B_n(u_k)) / (u_k+1 - u_k),

which is the exact average of b_n along the linear interpolant.  With
this choice the discrete flux is the difference quotient of v = B_n(u),
so the scheme is the linear scheme for v written in the variable u.
``coefficient_mean="midpoint"`` evaluates b_n at the averaged nodal value
instead.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import linalg

from .coefficients import B_eval, CoefficientFamily, b_eval
from .errors import DomainError, NonConvergenceError
from .norms import RadialGridFunction, cell_weights, node_weights, sphere_area

__all__ = [
    "PowerSource",
    "TabulatedSource",
    "ProblemSpec",
    "TridiagonalSystem",
    "SolveReport",
    "mesh",
    "source_load",
    "assemble_linear_system",
    "picard_solve",
    "truncation_sweep",
    "weak_residual",
    "poisson_residual",
    "truncated_primitive",
    "radial_flux",
]


@dataclass(frozen=True)
class PowerSource:
    """f(x) = A |x|^-gamma."""

    A: float = 1.0
    gamma: float = 0.0

    def __post_init__(self):
        if not self.A >= 0:
            raise DomainError(f"A must be >= 0, got {self.A}")
        if not self.gamma >= 0:
            raise DomainError(f"gamma must be >= 0, got {self.gamma}")

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.gamma == 0:
            return np.full_like(r, self.A)
        with np.errstate(divide="ignore"):
            return self.A * r ** (-self.gamma)


@dataclass(frozen=True)
class TabulatedSource:
    """Radial samples of f, linearly interpolated (constant beyond the ends)."""

    r: tuple
    f: tuple

    def __post_init__(self):
        r = np.asarray(self.r, dtype=float)
        f = np.asarray(self.f, dtype=float)
        if r.ndim != 1 or r.shape != f.shape or r.size < 2 or np.any(np.diff(r) <= 0):
            raise DomainError("tabulated source needs increasing radii and matching values")
        object.__setattr__(self, "r", tuple(r))
        object.__setattr__(self, "f", tuple(f))

    def __call__(self, r):
        return np.interp(r, self.r, self.f)


@dataclass(frozen=True)
class ProblemSpec:
    N: int = 3
    R: float = 1.0
    beta: float = 1.0
    theta: float = 1.0
    source: PowerSource | TabulatedSource = field(default_factory=PowerSource)
    M: int = 1024
    grading: float | None = None
    trunc: float = 1e3
    max_iter: int = 20_000
    damping: float = 0.7
    tol: float = 1e-10
    # f_n = T_n(f) on the right-hand side as well as T_n in the coefficient
    truncate_source: bool = False
    coefficient_mean: str = "kirchhoff"
    # b == 1, the theta -> 0 limit; for testing against the Laplacian
    unit_coefficient: bool = False

    def __post_init__(self):
        if not isinstance(self.N, (int, np.integer)) or self.N < 3:
            raise DomainError(f"N must be an integer >= 3, got {self.N!r}")
        if not self.R > 0:
            raise DomainError(f"R must be positive, got {self.R}")
        if not self.beta > 0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if not self.M >= 16:
            raise DomainError(f"mesh needs M >= 16 cells, got {self.M}")
        if not self.trunc > 0:
            raise DomainError(f"truncation level must be positive, got {self.trunc}")
        if not self.tol > 0:
            raise DomainError(f"tolerance must be positive, got {self.tol}")
        if not 0 < self.damping <= 1:
            raise DomainError(f"damping must lie in (0, 1], got {self.damping}")
        if self.max_iter < 1:
            raise DomainError("max_iter must be >= 1")
        if self.grading is not None and not self.grading >= 1:
            raise DomainError(f"grading exponent must be >= 1, got {self.grading}")
        if self.coefficient_mean not in ("kirchhoff", "midpoint"):
            raise DomainError(f"unknown coefficient mean {self.coefficient_mean!r}")
        if isinstance(self.source, PowerSource) and self.source.gamma >= self.N:
            raise DomainError("source exponent gamma must be < N for a locally integrable f")
        if not self.unit_coefficient:
            CoefficientFamily(self.theta)

    @property
    def family(self) -> CoefficientFamily:
        return CoefficientFamily.unit() if self.unit_coefficient else CoefficientFamily(self.theta)

    @property
    def mesh_grading(self) -> float:
        if self.grading is not None:
            return float(self.grading)
        if isinstance(self.source, PowerSource) and self.source.gamma >= 1:
            return 2.0
        return 1.0


def mesh(spec: ProblemSpec) -> np.ndarray:
    """Nodes r_i = R (i/M)^g, i = 0..M."""
    x = np.arange(spec.M + 1) / spec.M
    r = spec.R * x**spec.mesh_grading
    r[-1] = spec.R
    return r


def truncated_primitive(family: CoefficientFamily, n: float, t):
    """Odd primitive of s -> b(min(|s|, n)), vanishing at 0."""
    t = np.asarray(t, dtype=float)
    a = np.abs(t)
    inner = B_eval(family, np.minimum(a, n))
    outer = b_eval(family, float(n)) * np.maximum(a - n, 0.0)
    return np.sign(t) * (inner + outer)


def _b_trunc(family, n, t):
    return b_eval(family, np.minimum(np.abs(np.asarray(t, dtype=float)), n))


def cell_coefficient(family, n, u, how="kirchhoff") -> np.ndarray:
    """Frozen coefficient on every cell from the nodal values ``u``."""
    u = np.asarray(u, dtype=float)
    ua, ub = u[:-1], u[1:]
    mid = _b_trunc(family, n, 0.5 * (ua + ub))
    if how == "midpoint":
        return mid
    du = ub - ua
    # below this the midpoint value is exact to O(du^2) ~ 1e-12
    small = np.abs(du) <= 1e-6 * (1.0 + np.abs(ua) + np.abs(ub))
    safe = np.where(small, 1.0, du)
    kir = (truncated_primitive(family, n, ub) - truncated_primitive(family, n, ua)) / safe
    return np.where(small, mid, kir)


def _hat_moments(a, b, lo, hi, m):
    """Integrals of r^m (b-r)/h and r^m (r-a)/h over [lo, hi] within [a, b]."""
    h = b - a
    lo = np.minimum(np.maximum(lo, a), b)
    hi = np.minimum(np.maximum(hi, a), b)

    def J(k):
        # integral of r^k over [lo, hi]; k > -1 guaranteed by the caller
        return (hi ** (k + 1) - lo ** (k + 1)) / (k + 1)

    Jm, Jm1 = J(m), J(m + 1)
    return (b * Jm - Jm1) / h, (Jm1 - a * Jm) / h


def source_load(spec: ProblemSpec, nodes=None) -> np.ndarray:
    """Load vector: |S^(N-1)| times the integral of f phi_i r^(N-1).

    Power sources are integrated exactly (including the cap at level n when
    ``truncate_source`` is set); tabulated sources are lumped onto nodes.
    """
    r = mesh(spec) if nodes is None else np.asarray(nodes, dtype=float)
    src = spec.source
    N = spec.N
    if isinstance(src, TabulatedSource):
        fv = src(r)
        if spec.truncate_source:
            fv = np.clip(fv, -spec.trunc, spec.trunc)
        return fv * node_weights(r, N)

    load = np.zeros_like(r)
    if src.A == 0:
        return load
    a, b = r[:-1], r[1:]
    m = N - 1 - src.gamma
    # f exceeds the cap n exactly on r < rc
    rc = 0.0
    if spec.truncate_source:
        if src.gamma > 0:
            rc = (src.A / spec.trunc) ** (1.0 / src.gamma)
        elif src.A > spec.trunc:
            rc = math.inf
    # part where f is capped at n
    if rc > 0:
        cl, cr = _hat_moments(a, b, a, np.minimum(b, rc), N - 1)
        load[:-1] += spec.trunc * cl
        load[1:] += spec.trunc * cr
    pl, pr = _hat_moments(a, b, np.maximum(a, min(rc, spec.R)), b, m)
    load[:-1] += src.A * pl
    load[1:] += src.A * pr
    return sphere_area(N) * load


@dataclass
class TridiagonalSystem:
    """Symmetric tridiagonal system lower/diag/upper with right-hand side."""

    lower: np.ndarray
    diag: np.ndarray
    upper: np.ndarray
    rhs: np.ndarray

    def solve(self) -> np.ndarray:
        ab = np.zeros((3, self.diag.size))
        ab[0, 1:] = self.upper
        ab[1] = self.diag
        ab[2, :-1] = self.lower
        return linalg.solve_banded((1, 1), ab, self.rhs, check_finite=False)

    def matvec(self, x) -> np.ndarray:
        y = self.diag * x
        y[:-1] += self.upper * x[1:]
        y[1:] += self.lower * x[:-1]
        return y

    def to_dense(self) -> np.ndarray:
        return np.diag(self.diag) + np.diag(self.upper, 1) + np.diag(self.lower, -1)


def assemble_linear_system(spec: ProblemSpec, u_frozen, nodes=None, load=None) -> TridiagonalSystem:
    """Frozen-coefficient system at ``u_frozen`` (array or RadialGridFunction)."""
    r = mesh(spec) if nodes is None else nodes
    u = np.asarray(getattr(u_frozen, "values", u_frozen), dtype=float)
    if u.shape != r.shape:
        raise DomainError("frozen iterate does not live on the spec mesh")
    fam = spec.family
    h = np.diff(r)
    c = cell_coefficient(fam, spec.trunc, u, spec.coefficient_mean)
    if np.any(c <= 0):
        raise FloatingPointError("coefficient underflowed to zero")
    a = c * cell_weights(r, spec.N) / h**2
    diag = np.zeros_like(r)
    diag[:-1] += a
    diag[1:] += a
    robin = spec.beta * _b_trunc(fam, spec.trunc, u[-1]) * sphere_area(spec.N) * spec.R ** (spec.N - 1)
    diag[-1] += robin
    rhs = source_load(spec, r) if load is None else load
    return TridiagonalSystem(lower=-a.copy(), diag=diag, upper=-a.copy(), rhs=np.array(rhs, dtype=float))


@dataclass
class SolveReport:
    solution: RadialGridFunction
    v_equiv: RadialGridFunction
    picard_iterations: int
    final_update_norm: float
    converged: bool
    truncation_active: bool
    weak_residual: float
    update_history: list = field(default_factory=list, repr=False)
    max_history: list = field(default_factory=list, repr=False)
    diagnosis: str = ""
    spec: ProblemSpec | None = field(default=None, repr=False)

    @property
    def max_u(self) -> float:
        return float(np.max(np.abs(self.solution.values)))


def _diagnose(max_hist, window=50):
    tail = np.asarray(max_hist[-window:])
    if tail.size >= 3 and np.all(np.diff(tail) > 0):
        return "monotone growth of max|u|: iterates blow up, a nonexistence regime is likely"
    return "oscillating updates: retry with a smaller damping factor"


def picard_solve(spec: ProblemSpec, raise_on_failure: bool = True) -> SolveReport:
    """Damped frozen-coefficient iteration from u = 0.

    Stops when max|u_k+1 - u_k| <= tol * max|u_k+1| and returns the
    undamped solve of that last step.  On exhaustion of
    ``max_iter`` raises :class:`NonConvergenceError` (carrying the report)
    unless ``raise_on_failure`` is false.
    """
    r = mesh(spec)
    load = source_load(spec, r)
    u = np.zeros_like(r)
    d = spec.damping
    updates, maxes = [], []
    converged = False
    rel = math.inf
    it = 0
    for it in range(1, spec.max_iter + 1):
        sol = assemble_linear_system(spec, u, r, load).solve()
        u_new = (1.0 - d) * u + d * sol
        upd = float(np.max(np.abs(u_new - u)))
        scale = float(np.max(np.abs(u_new)))
        rel = upd / scale if scale > 0 else upd
        u = u_new
        updates.append(rel)
        maxes.append(scale)
        if not np.all(np.isfinite(u)):
            break
        if upd <= spec.tol * scale:
            converged = True
            # the exact solve at the last frozen coefficient; its residual
            # only reflects the coefficient lag, not the damping blend
            u = sol
            break

    grid = RadialGridFunction(r, u, spec.N) if np.all(np.isfinite(u)) else RadialGridFunction(r, np.zeros_like(r), spec.N)
    v = truncated_primitive(spec.family, spec.trunc, grid.values)
    report = SolveReport(
        solution=grid,
        v_equiv=grid.with_values(v),
        picard_iterations=it,
        final_update_norm=rel,
        converged=converged,
        truncation_active=bool(np.max(np.abs(grid.values)) >= spec.trunc),
        weak_residual=weak_residual(spec, grid) if converged else math.nan,
        update_history=updates,
        max_history=maxes,
        spec=spec,
    )
    if not converged:
        report.diagnosis = _diagnose(maxes)
        if raise_on_failure:
            raise NonConvergenceError(
                f"Picard iteration did not converge in {it} steps ({report.diagnosis})", report
            )
    return report


def _solve_level(args):
    spec, n = args
    return picard_solve(replace(spec, trunc=float(n)))


def truncation_sweep(spec: ProblemSpec, levels, jobs: int = 1) -> list[SolveReport]:
    """Solve at every truncation level; results come back in level order."""
    levels = [float(n) for n in levels]
    if any(b <= a for a, b in zip(levels, levels[1:])):
        raise DomainError("truncation levels must be increasing")
    tasks = [(spec, n) for n in levels]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_solve_level, tasks))
    return [_solve_level(t) for t in tasks]


def _residual_vector(spec, r, u, coeff, robin_coeff, load):
    """Hat-function residuals divided by ||grad phi_i||, and the energy sqrt(u.K u)."""
    h = np.diff(r)
    w = cell_weights(r, spec.N) / h**2
    flux = coeff * w * np.diff(u)
    res = np.zeros_like(r)
    # integral of c u' phi_i' over the two cells adjacent to node i
    res[:-1] -= flux
    res[1:] += flux
    res[-1] += robin_coeff * u[-1]
    res -= load
    gnorm = np.zeros_like(r)
    gnorm[:-1] += w
    gnorm[1:] += w
    energy = math.sqrt(float(np.dot(flux, np.diff(u))) + robin_coeff * u[-1] ** 2)
    return res / np.sqrt(gnorm), load / np.sqrt(gnorm), energy


def _normalize(res, ref, energy, scale):
    num = float(np.max(np.abs(res)))
    if scale == "none":
        return num
    den = energy if scale == "energy" else float(np.max(np.abs(ref)))
    return num / den if den > 0 else num


_SCALES = ("energy", "load", "none")


def weak_residual(spec: ProblemSpec, solution, level: float | None = None, scale: str = "energy") -> float:
    """Weak residual over the hat-function test basis.

    For each hat function phi_i the residual of

        int b(|u|) u' phi_i' + beta b(|u(R)|) u(R) phi_i(R) |dB_R| - int f phi_i

    is divided by ||grad phi_i||_L2 and the maximum over i is taken.  The
    default ``scale="energy"`` divides this by the discrete energy norm
    (int b u'^2 + beta b(u(R)) u(R)^2 |dB_R|)^(1/2), giving a
    dimensionless number whose roundoff floor is near machine epsilon.
    ``scale="load"`` divides by the same maximum of the load term instead
    (roundoff floor ~ eps M^2), ``scale="none"`` returns the raw maximum.
    Returns the raw maximum whenever the chosen scale vanishes.

    b is evaluated along the linear interpolant of u with truncation at
    ``level`` (default: the spec's level, i.e. the approximating problem
    actually solved; pass ``math.inf`` for the untruncated problem).
    """
    if scale not in _SCALES:
        raise DomainError(f"scale must be one of {_SCALES}")
    r = mesh(spec)
    u = np.asarray(getattr(solution, "values", solution), dtype=float)
    n = spec.trunc if level is None else level
    fam = spec.family
    coeff = cell_coefficient(fam, n, u, spec.coefficient_mean)
    robin = spec.beta * float(_b_trunc(fam, n, u[-1])) * sphere_area(spec.N) * spec.R ** (spec.N - 1)
    return _normalize(*_residual_vector(spec, r, u, coeff, robin, source_load(spec, r)), scale)


def poisson_residual(spec: ProblemSpec, v, scale: str = "energy") -> float:
    """Weak residual of -Laplace(v) = f, dv/dnu + beta F(v) = 0.

    Normalized as in :func:`weak_residual`; used to check that v = B(u)
    from a nonlinear solve satisfies the linear interior problem.  No
    truncation is applied.
    """
    if scale not in _SCALES:
        raise DomainError(f"scale must be one of {_SCALES}")
    r = mesh(spec)
    v = np.asarray(getattr(v, "values", v), dtype=float)
    fam = spec.family
    vR = v[-1]
    # F(v)/v as the boundary coefficient, F(v) ~ v near 0
    robin_c = fam.F(abs(vR)) / abs(vR) if vR != 0 else 1.0
    robin = spec.beta * robin_c * sphere_area(spec.N) * spec.R ** (spec.N - 1)
    return _normalize(*_residual_vector(spec, r, v, np.ones(r.size - 1), robin, source_load(spec, r)), scale)


def radial_flux(spec: ProblemSpec, u) -> np.ndarray:
    """Nodal flux density -b(|u|) u' (outward); zero at the axis, Robin value at R."""
    r = mesh(spec)
    u = np.asarray(getattr(u, "values", u), dtype=float)
    c = cell_coefficient(spec.family, spec.trunc, u, spec.coefficient_mean)
    q = -c * np.diff(u) / np.diff(r)
    out = np.zeros_like(r)
    out[1:-1] = 0.5 * (q[:-1] + q[1:])
    out[-1] = spec.beta * _b_trunc(spec.family, spec.trunc, u[-1]) * u[-1]
    return out
