"""Regime classification by the summability exponent q of the source.

Given the dimension N, the exponent theta and q, decide which existence
result applies and compute the derived exponents. In exact mode every
input is converted to a :class:`fractions.Fraction` through its decimal
representation, so thresholds such as 4/3 compare without rounding.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, fields
from fractions import Fraction
from numbers import Rational

from .errors import DomainError

__all__ = [
    "Regime",
    "RegimeReport",
    "classify",
    "thresholds",
    "power_source_summability",
    "sobolev_star",
]


class Regime(enum.IntEnum):
    # ordered from weakest to strongest conclusion
    BelowScope = 0
    NonEnergy = 1
    Energy = 2
    Bounded = 3


def _num(x, exact):
    if not exact:
        return float(x)
    if isinstance(x, Rational):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"non-finite input {x}")
    return Fraction(repr(x))


@dataclass(frozen=True)
class RegimeReport:
    N: int
    theta: object
    q: object
    regime: Regime
    q_lower_energy: object
    q_lower_nonenergy: object
    q_bounded: object
    q_double_star: object = None
    summability_exponent: object = None
    s: object = None
    s_conj: object = None
    p_test: object = None
    trace_exponent: object = None

    def as_dict(self, exact_strings: bool = False) -> dict:
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if val is None:
                continue
            if isinstance(val, Regime):
                out[f.name] = val.name
            elif isinstance(val, Fraction):
                out[f.name] = str(val) if exact_strings else float(val)
            else:
                out[f.name] = val
        return out


def thresholds(N: int, theta, exact: bool = True):
    """Return (lower non-energy, lower energy, N/2) thresholds on q."""
    if not isinstance(N, int) or N < 3:
        raise DomainError(f"N must be an integer >= 3, got {N!r}")
    th = _num(theta, exact)
    if not (0 < th <= 1):
        raise DomainError(f"theta must lie in (0, 1], got {theta}")
    two = _num(2, exact)
    lower_nonenergy = (2 * N - N * th) / (N + 2 - N * th)
    lower_energy = 2 * N / (N + 2 - th * (N - 2))
    return lower_nonenergy, lower_energy, N / two


def sobolev_star(N: int, exact: bool = True):
    """2* = 2N/(N-2)."""
    return _num(2 * N, exact) / (N - 2)


def classify(N: int, theta, q, exact: bool = True) -> RegimeReport:
    """Classify (N, theta, q) and fill the exponents meaningful there.

    Boundary values follow the inequalities of the existence results:
    q = N/2 is not Bounded, q equal to a lower threshold belongs to the
    window above it.
    """
    lo_ne, lo_e, half = thresholds(N, theta, exact)
    th = _num(theta, exact)
    qq = _num(q, exact)
    if not qq > 1:
        raise DomainError(f"q must be > 1, got {q}")

    extra = {}
    if qq > half:
        regime = Regime.Bounded
    elif lo_e <= qq < half:
        regime = Regime.Energy
        q2 = qq * N / (N - 2 * qq)
        p = (1 - th) * N * (qq - 1) / (N - 2 * qq)
        extra = dict(
            q_double_star=q2,
            summability_exponent=q2 * (1 - th),
            p_test=p,
            trace_exponent=p + 1 - th,
        )
    elif lo_ne <= qq < lo_e:
        regime = Regime.NonEnergy
        s = (2 * N - N * th) / (N - th)
        extra = dict(s=s, s_conj=th * s / (2 - s))
    else:
        regime = Regime.BelowScope

    return RegimeReport(
        N=N,
        theta=th,
        q=qq,
        regime=regime,
        q_lower_energy=lo_e,
        q_lower_nonenergy=lo_ne,
        q_bounded=half,
        **extra,
    )


def power_source_summability(N: int, gamma: float) -> tuple[float, float]:
    """Summability of A/|x|^gamma on a ball.

    Returns (Marcinkiewicz index, supremum of Lebesgue exponents), both
    N/gamma; the function lies in L^q exactly for q < N/gamma.
    """
    if not 0 <= gamma < N:
        raise DomainError(f"gamma must lie in [0, N), got {gamma}")
    if gamma == 0:
        return math.inf, math.inf
    idx = N / gamma
    return idx, idx
