"""Norms of radial functions on balls.

A radial function is stored by its values at increasing nodes in [0, R]
and understood as the piecewise-linear interpolant in r.  Integrals over
the ball carry the surface factor |S^(N-1)| and the weight r^(N-1); the
weight is folded into nodal weights (exact moments of the hat functions),
so the quadrature is a trapezoid rule in r that is exact for constants.

Only the span [nodes[0], R] is integrated: a grid starting at r0 > 0
describes the ball with the core B_r0 removed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize

from .errors import DomainError

__all__ = [
    "RadialGridFunction",
    "NormReport",
    "sphere_area",
    "ball_volume",
    "node_weights",
    "cell_weights",
    "lp_norm",
    "gradient",
    "gradient_lp_norm",
    "w1s_norm",
    "h1_norm",
    "weighted_gradient_integral",
    "trace_report",
    "distribution_function",
    "marcinkiewicz_sup",
    "marcinkiewicz_quasinorm",
    "layer_cake_integral",
    "combined_holder",
    "power_source_lq_norm",
    "norm_report",
]


def sphere_area(N: int) -> float:
    """Surface area of the unit sphere in R^N."""
    return 2.0 * math.pi ** (N / 2) / math.gamma(N / 2)


def ball_volume(N: int, R: float = 1.0) -> float:
    return sphere_area(N) * R**N / N


@dataclass(frozen=True)
class RadialGridFunction:
    nodes: np.ndarray
    values: np.ndarray
    N: int

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.size < 2:
            raise DomainError("need at least two nodes")
        if nodes.shape != values.shape:
            raise DomainError("nodes and values differ in length")
        if nodes[0] < 0 or np.any(np.diff(nodes) <= 0):
            raise DomainError("nodes must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise DomainError("values must be finite")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"bad dimension {self.N}")
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "N", int(self.N))

    @property
    def R(self) -> float:
        return float(self.nodes[-1])

    @property
    def boundary_value(self) -> float:
        return float(self.values[-1])

    def with_values(self, values) -> "RadialGridFunction":
        return RadialGridFunction(self.nodes, values, self.N)

    def __call__(self, r):
        return np.interp(r, self.nodes, self.values)


def _gauss(N):
    # exact for polynomials of degree N in r
    return np.polynomial.legendre.leggauss(N // 2 + 1)


def node_weights(nodes, N: int) -> np.ndarray:
    """|S^(N-1)| times the integral of each hat function against r^(N-1)."""
    nodes = np.asarray(nodes, dtype=float)
    x, w = _gauss(N)
    a, b = nodes[:-1], nodes[1:]
    h = b - a
    # local coordinate s in [0, 1]; r = a + h s
    s = 0.5 * (x + 1.0)
    ws = 0.5 * w
    r = a[:, None] + h[:, None] * s[None, :]
    base = h[:, None] * ws[None, :] * r ** (N - 1)
    left = (base * (1.0 - s)[None, :]).sum(axis=1)
    right = (base * s[None, :]).sum(axis=1)
    out = np.zeros_like(nodes)
    out[:-1] += left
    out[1:] += right
    return sphere_area(N) * out


def cell_weights(nodes, N: int) -> np.ndarray:
    """Volume of each spherical shell between consecutive nodes."""
    nodes = np.asarray(nodes, dtype=float)
    a, b = nodes[:-1], nodes[1:]
    # b^N - a^N = (b - a) * sum_k a^k b^(N-1-k), no cancellation
    k = np.arange(N)
    s = (a[:, None] ** k[None, :] * b[:, None] ** (N - 1 - k)[None, :]).sum(axis=1)
    return sphere_area(N) * (b - a) * s / N


def lp_norm(g: RadialGridFunction, p: float) -> float:
    if p == np.inf:
        return float(np.max(np.abs(g.values)))
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return float(np.dot(node_weights(g.nodes, g.N), np.abs(g.values) ** p) ** (1.0 / p))


def gradient(g: RadialGridFunction) -> np.ndarray:
    """Cellwise slope, i.e. the centred difference at each cell midpoint."""
    return np.diff(g.values) / np.diff(g.nodes)


def gradient_lp_norm(g: RadialGridFunction, p: float) -> float:
    if not p >= 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return float(np.dot(cell_weights(g.nodes, g.N), np.abs(gradient(g)) ** p) ** (1.0 / p))


def w1s_norm(g: RadialGridFunction, s: float) -> float:
    return float((lp_norm(g, s) ** s + gradient_lp_norm(g, s) ** s) ** (1.0 / s))


def h1_norm(g: RadialGridFunction) -> float:
    return w1s_norm(g, 2.0)


def weighted_gradient_integral(g: RadialGridFunction, p: float, theta: float) -> float:
    """Integral of |grad u|^2 (1+|u|)^(p-1-theta), the midpoint value of u per cell."""
    mid = 0.5 * np.abs(g.values[1:] + g.values[:-1])
    dens = gradient(g) ** 2 * (1.0 + mid) ** (p - 1.0 - theta)
    return float(np.dot(cell_weights(g.nodes, g.N), dens))


def trace_report(g: RadialGridFunction, p=(2.0,)) -> dict:
    """Boundary value and trace L^p norms on the sphere of radius R.

    A radial function is constant on the sphere, so the L^p norm is
    |dB_R|^(1/p) |u(R)|.
    """
    area = sphere_area(g.N) * g.R ** (g.N - 1)
    uR = abs(g.boundary_value)
    return {"trace_value": uR, "trace_lp": {float(q): area ** (1.0 / q) * uR for q in np.atleast_1d(p)}}


def distribution_function(g: RadialGridFunction, t):
    """Volume of {|g| > t} for the piecewise-linear profile, t > 0.

    In every cell the set where the interpolant of |g| exceeds t is an
    interval (or, if |g| changes sign inside, at most two); it is found by
    linear inversion and measured as a shell volume.  Monotone profiles
    take a shortcut: the superlevel set is a single ball or shell whose
    radius comes from inverse interpolation.
    """
    t_arr = np.atleast_1d(np.asarray(t, dtype=float))
    if np.any(t_arr <= 0):
        raise DomainError("t must be positive")
    cN = sphere_area(g.N) / g.N
    r = g.nodes
    y = np.abs(g.values)
    dy = np.diff(y)
    if (np.all(dy <= 0) or np.all(dy >= 0)) and np.any(dy != 0):
        inc = bool(np.all(dy >= 0))
        ys, rs = (y, r) if inc else (y[::-1], r[::-1])
        # a flat run only matters where the profile leaves it; keep its first node
        keep = np.insert(np.diff(ys) > 0, 0, True)
        ys, rs = ys[keep], rs[keep]
        rc = np.interp(t_arr, ys, rs)
        if inc:
            out = cN * (r[-1] ** g.N - np.where(t_arr < ys[0], r[0], rc) ** g.N)
            out = np.where(t_arr >= ys[-1], 0.0, out)
        else:
            out = cN * (np.where(t_arr < ys[0], r[-1], rc) ** g.N - r[0] ** g.N)
            out = np.where(t_arr >= ys[-1], 0.0, out)
        return float(out[0]) if np.ndim(t) == 0 else out
    # split cells at sign changes so |g| is linear on every piece
    vals = g.values
    sc = np.nonzero(vals[:-1] * vals[1:] < 0)[0]
    if sc.size:
        rz = r[sc] - vals[sc] * (r[sc + 1] - r[sc]) / (vals[sc + 1] - vals[sc])
        r = np.insert(r, sc + 1, rz)
        vals = np.insert(vals, sc + 1, 0.0)
    y = np.abs(vals)
    a, b = r[:-1], r[1:]
    ya, yb = y[:-1], y[1:]
    aN, bN = a**g.N, b**g.N
    lo_y, hi_y = np.minimum(ya, yb), np.maximum(ya, yb)
    # pieces lying entirely above t contribute their whole shell
    order = np.argsort(lo_y)
    lo_sorted = lo_y[order]
    tail = np.concatenate([np.cumsum((bN - aN)[order][::-1])[::-1], [0.0]])
    out = tail[np.searchsorted(lo_sorted, t_arr, side="right")]
    # pieces crossed by t: enumerate the (piece, level) pairs with lo_y <= t < hi_y
    ts = np.sort(t_arr)
    rank = np.argsort(t_arr, kind="stable")
    first = np.searchsorted(ts, lo_y, side="left")
    last = np.searchsorted(ts, hi_y, side="left")
    count = last - first
    piece = np.repeat(np.arange(a.size), count)
    offs = np.arange(count.sum()) - np.repeat(np.cumsum(count) - count, count)
    lev = first[piece] + offs
    tj = ts[lev]
    ai, bi, yai, ybi = a[piece], b[piece], ya[piece], yb[piece]
    cross = (ai + (tj - yai) * (bi - ai) / (ybi - yai)) ** g.N
    part = np.where(yai > tj, cross - aN[piece], bN[piece] - cross)
    out += np.bincount(rank[lev], weights=part, minlength=t_arr.size)
    out *= cN
    return float(out[0]) if np.ndim(t) == 0 else out


def _sup_scan(g, p, n_grid=2000):
    y = np.abs(g.values)
    top = float(y.max())
    if top == 0.0:
        return 0.0
    pos = y[y > 0]
    t_lo = max(float(pos.min()), top * 1e-12) * 0.5
    ts = np.geomspace(t_lo, top, n_grid, endpoint=False)
    vals = ts**p * distribution_function(g, ts)
    k = int(np.argmax(vals))
    best = float(vals[k])
    # refine in log t around the best sample
    lo = math.log(ts[max(k - 1, 0)])
    hi = math.log(ts[min(k + 1, n_grid - 1)]) if k + 1 < n_grid else math.log(top)
    if hi > lo:
        res = optimize.minimize_scalar(
            lambda s: -(math.exp(s) ** p) * distribution_function(g, math.exp(s)),
            bounds=(lo, hi),
            method="bounded",
            options={"xatol": 1e-10},
        )
        best = max(best, -float(res.fun))
    return best


def marcinkiewicz_sup(g: RadialGridFunction, p: float) -> float:
    """sup_t t^p mu_g(t) over a log grid of levels, refined at the argmax."""
    if not p > 1:
        raise DomainError(f"p must be > 1, got {p}")
    return _sup_scan(g, p)


def marcinkiewicz_quasinorm(g: RadialGridFunction, p: float) -> float:
    """||g||_{p,inf} = (sup_t t^p mu_g(t))^(1/p)."""
    return marcinkiewicz_sup(g, p) ** (1.0 / p)


def layer_cake_integral(g: RadialGridFunction, p: float, pts_per_gap: int = 4) -> float:
    """p * integral of t^(p-1) mu_g(t) dt, Gauss-Legendre between node levels."""
    levels = np.unique(np.concatenate([[0.0], np.abs(g.values)]))
    if levels.size < 2:
        return 0.0
    x, w = np.polynomial.legendre.leggauss(pts_per_gap)
    a, b = levels[:-1], levels[1:]
    t = 0.5 * (b - a)[:, None] * (x[None, :] + 1.0) + a[:, None]
    wt = 0.5 * (b - a)[:, None] * w[None, :]
    mu = distribution_function(g, t.ravel()).reshape(t.shape)
    return float(p * np.sum(wt * t ** (p - 1.0) * mu))


def combined_holder(f1: RadialGridFunction, f2: RadialGridFunction, p: float, lam: float = 1.0):
    """Both sides of the domain-plus-boundary Hoelder inequality.

    Interior integrals use the nodal quadrature; boundary integrals the
    sphere |dB_R| with weight ``lam`` and the boundary values.  Returns
    (lhs, rhs).
    """
    if not p > 1:
        raise DomainError(f"p must be > 1, got {p}")
    if f1.N != f2.N or not np.array_equal(f1.nodes, f2.nodes):
        raise DomainError("functions must share the grid")
    q = p / (p - 1.0)
    w = node_weights(f1.nodes, f1.N)
    area = lam * sphere_area(f1.N) * f1.R ** (f1.N - 1)
    a, b = np.abs(f1.values), np.abs(f2.values)
    lhs = np.dot(w, a * b) + area * a[-1] * b[-1]
    rhs = (np.dot(w, a**p) + area * a[-1] ** p) ** (1 / p) * (np.dot(w, b**q) + area * b[-1] ** q) ** (1 / q)
    return float(lhs), float(rhs)


def power_source_lq_norm(N: int, R: float, A: float, gamma: float, q: float, r0: float = 0.0) -> float:
    """Exact ||A |x|^-gamma||_{L^q} over r0 < |x| < R; inf when not summable."""
    if A == 0:
        return 0.0
    m = N - gamma * q
    if m <= 0 and r0 == 0:
        return math.inf
    if m == 0:
        integral = math.log(R / r0)
    else:
        integral = (R**m - r0**m) / m
    return float(A * (sphere_area(N) * integral) ** (1.0 / q))


@dataclass
class NormReport:
    lp: dict = field(default_factory=dict)
    gradient_l2_weighted: float | None = None
    w1s: float | None = None
    h1: float = 0.0
    trace_value: float = 0.0
    trace_lp: dict = field(default_factory=dict)
    marcinkiewicz: dict = field(default_factory=dict)

    def rows(self):
        """Flatten into (name, value) pairs."""
        out = [(f"L{k:g}", v) for k, v in self.lp.items()]
        if self.gradient_l2_weighted is not None:
            out.append(("grad_l2_weighted", self.gradient_l2_weighted))
        if self.w1s is not None:
            out.append(("W1s", self.w1s))
        out.append(("H1", self.h1))
        out.append(("trace_value", self.trace_value))
        out += [(f"trace_L{k:g}", v) for k, v in self.trace_lp.items()]
        out += [(f"marcinkiewicz_{k:g}", v) for k, v in self.marcinkiewicz.items()]
        return out


def norm_report(
    g: RadialGridFunction,
    lp=(1.0, 2.0),
    s: float | None = None,
    weighted=None,
    trace_p=(2.0,),
    marcinkiewicz=(),
) -> NormReport:
    """Collect the norms of ``g``; ``weighted`` is an optional (p, theta) pair."""
    tr = trace_report(g, trace_p)
    return NormReport(
        lp={float(p): lp_norm(g, p) for p in lp},
        gradient_l2_weighted=None if weighted is None else weighted_gradient_integral(g, *weighted),
        w1s=None if s is None else w1s_norm(g, s),
        h1=h1_norm(g),
        trace_value=tr["trace_value"],
        trace_lp=tr["trace_lp"],
        marcinkiewicz={float(p): marcinkiewicz_quasinorm(g, p) for p in marcinkiewicz},
    )
