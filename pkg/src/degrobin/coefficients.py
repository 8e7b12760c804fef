"""Degeneracy coefficient b(s) = (1+s)^-theta and the functions derived from it.

All evaluators accept scalars or numpy arrays and return the same shape.
Closed forms are written through ``log1p``/``expm1`` so that small and
large arguments keep full relative precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

__all__ = [
    "CoefficientFamily",
    "b_eval",
    "B_eval",
    "B_inv",
    "F_eval",
    "gamma_condition_infimum",
    "check_pointwise_inequality",
    "PointwiseCheck",
]


def _scalar(x):
    return type(x) is float or type(x) is int


def _nonneg(x, name):
    if _scalar(x):
        if not x >= 0:
            raise DomainError(f"{name} must be >= 0, got {x!r}")
        return x
    arr = np.asarray(x, dtype=float)
    if np.any(np.isnan(arr)) or np.any(arr < 0):
        raise DomainError(f"{name} must be >= 0, got {x!r}")
    return arr


def _out(arr):
    return float(arr) if np.ndim(arr) == 0 else arr


@dataclass(frozen=True)
class CoefficientFamily:
    """Power family b(s) = (1+s)^-theta with 0 < theta <= 1.

    ``CoefficientFamily.unit()`` gives the theta -> 0 limit b == 1; it is
    only meant for testing the solver against the plain Laplacian.
    """

    theta: float
    _limit: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        theta = float(self.theta)
        object.__setattr__(self, "theta", theta)
        if self._limit and theta == 0.0:
            return
        if not (0.0 < theta <= 1.0):
            raise DomainError(f"theta must lie in (0, 1], got {theta}")

    @classmethod
    def unit(cls) -> "CoefficientFamily":
        return cls(0.0, _limit=True)

    @property
    def is_log(self) -> bool:
        return self.theta == 1.0

    @property
    def B_unbounded(self) -> bool:
        # b is not integrable at infinity for every member of the family
        return True

    @property
    def sup_F(self) -> float:
        return 1.0 if self.is_log else np.inf

    @property
    def gamma_constant(self) -> float:
        """Best constant in t b(t) >= Gamma B(t); zero means the condition fails."""
        return 1.0 - self.theta

    # convenience methods so callers can pass the family around
    def b(self, s):
        return b_eval(self, s)

    def B(self, t):
        return B_eval(self, t)

    def B_inv(self, v):
        return B_inv(self, v)

    def F(self, v):
        return F_eval(self, v)


def b_eval(family: CoefficientFamily, s):
    """Return (1+s)^-theta."""
    s = _nonneg(s, "s")
    if _scalar(s):
        return math.exp(-family.theta * math.log1p(s))
    return _out(np.exp(-family.theta * np.log1p(s)))


def B_eval(family: CoefficientFamily, t):
    """Primitive of b vanishing at zero."""
    t = _nonneg(t, "t")
    a = 1.0 - family.theta
    if _scalar(t):
        return math.log1p(t) if a == 0.0 else math.expm1(a * math.log1p(t)) / a
    if a == 0.0:
        return _out(np.log1p(t))
    return _out(np.expm1(a * np.log1p(t)) / a)


def B_inv(family: CoefficientFamily, v):
    """Inverse of :func:`B_eval` on [0, inf)."""
    v = _nonneg(v, "v")
    a = 1.0 - family.theta
    if _scalar(v):
        try:
            return math.expm1(v) if a == 0.0 else math.expm1(math.log1p(a * v) / a)
        except OverflowError:
            return math.inf
    if a == 0.0:
        return _out(np.expm1(v))
    with np.errstate(over="ignore"):
        return _out(np.expm1(np.log1p(a * v) / a))


def F_eval(family: CoefficientFamily, v):
    """Boundary nonlinearity F(v) = b(B^-1(v)) B^-1(v).

    With w = 1 + B^-1(v) one has F = w^(1-theta) - w^(-theta), and
    w^(1-theta) = 1 + (1-theta) v, which avoids overflowing B^-1.
    """
    v = _nonneg(v, "v")
    theta = family.theta
    a = 1.0 - theta
    if _scalar(v):
        if a == 0.0:
            return -math.expm1(-v)
        x = a * v
        return x if theta == 0.0 else x - math.expm1(-(theta / a) * math.log1p(x))
    if a == 0.0:
        return _out(-np.expm1(-v))
    x = a * v
    if theta == 0.0:
        return _out(x)
    return _out(x - np.expm1(-(theta / a) * np.log1p(x)))


def _tb_over_B(family: CoefficientFamily, t):
    t = np.asarray(t, dtype=float)
    ratio = np.ones_like(t)
    pos = t > 0
    tp = t[pos]
    ratio[pos] = tp * b_eval(family, tp) / B_eval(family, tp)
    return ratio


def gamma_condition_infimum(family: CoefficientFamily, t_max: float, samples: int = 10_000) -> float:
    """Sampled infimum of t b(t) / B(t) over (0, t_max].

    The sample is log-spaced from ``t_max * 1e-12`` (at most 1e-6) up to
    ``t_max``; the t -> 0+ limit, which equals 1, is included as well.
    """
    if not t_max > 0:
        raise DomainError(f"t_max must be positive, got {t_max}")
    if samples < 100:
        raise DomainError(f"need at least 100 samples, got {samples}")
    t_lo = min(t_max * 1e-12, 1e-6)
    t = np.geomspace(t_lo, t_max, int(samples) - 1)
    return float(min(1.0, _tb_over_B(family, t).min()))


@dataclass(frozen=True)
class PointwiseCheck:
    lhs: float
    rhs: float
    holds: bool


_SLACK = 1e-12


def check_pointwise_inequality(p, theta, t) -> PointwiseCheck:
    """Compare both sides of

        t (1+t)^-theta ((1+t)^p - 1)  >=  ((1+t)^((p+1-theta)/2) - 1)^2 / (p+1)

    for t >= 0.  Arguments broadcast; array input gives array sides and an
    elementwise flag.
    """
    p_arr = np.asarray(p, dtype=float)
    th = np.asarray(theta, dtype=float)
    if not np.all(p_arr > 1):
        raise DomainError(f"p must be > 1, got {p}")
    if not np.all((th > 0) & (th <= 1)):
        raise DomainError(f"theta must lie in (0, 1], got {theta}")
    t = np.asarray(_nonneg(t, "t"), dtype=float)
    lt = np.log1p(t)
    lhs = t * np.exp(-th * lt) * np.expm1(p_arr * lt)
    rhs = np.expm1(0.5 * (p_arr + 1.0 - th) * lt) ** 2 / (p_arr + 1.0)
    holds = lhs >= rhs - _SLACK
    if np.ndim(holds) == 0:
        return PointwiseCheck(float(lhs), float(rhs), bool(holds))
    return PointwiseCheck(lhs, rhs, holds)
