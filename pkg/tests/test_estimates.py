import math

import numpy as np
import pytest

from degrobin.estimates import (
    RegimeMismatchError,
    bounded_regime_q,
    estimate_harness_energy,
    estimate_harness_linfty,
    estimate_harness_w1s,
    loglog_slope,
    oracle_grid_function,
)
from degrobin.fd_solver import PowerSource, ProblemSpec
from degrobin.radial_oracle import RadialExampleSpec


def test_bounded_q():
    assert bounded_regime_q(3, 1.0) == 2.25
    assert bounded_regime_q(3, 0.0) == 2.5


def test_linfty_harness():
    specs = [RadialExampleSpec(theta=0.5, A=a, gamma=1.0) for a in (0.0, 1.0, 10.0)]
    specs.append(RadialExampleSpec(theta=1.0, A=2.0, gamma=1.0))
    rows = estimate_harness_linfty(specs)
    B = [r["B_u_max"] for r in rows[:3]]
    assert B[0] == 0.0 and B[0] < B[1] < B[2]
    assert rows[3]["status"].startswith("skipped")
    with pytest.raises(RegimeMismatchError):
        estimate_harness_linfty(specs[:1], q=1.4)


def test_energy_harness_bounded_ratio():
    specs = [RadialExampleSpec(theta=0.5, A=a, gamma=1.2) for a in (1.0, 100.0, 1e4)]
    rows = estimate_harness_energy(specs, 1.4, M=1024)
    ratios = [r["ratio"] for r in rows]
    assert ratios[-1] / ratios[0] <= 10
    assert all(math.isfinite(r["H1"]) for r in rows)
    with pytest.raises(RegimeMismatchError):
        estimate_harness_energy(specs, 2.0)


def test_energy_harness_fd_agrees_with_oracle():
    spec = [RadialExampleSpec(theta=0.5, A=1.0, gamma=0.0)]
    a = estimate_harness_energy(spec, 1.4, M=1024)[0]
    b = estimate_harness_energy(spec, 1.4, M=1024, solver="fd")[0]
    assert b["u_Lexp"] == pytest.approx(a["u_Lexp"], rel=1e-3)


def test_w1s_harness_mesh_stable():
    specs = [ProblemSpec(theta=0.5, source=PowerSource(a, 2.3), truncate_source=True) for a in (1.0, 10.0)]
    out = estimate_harness_w1s(specs, 1.3, meshes=(256, 512))
    by = {(r["A"], r["M"]): r["W1s"] for r in out["rows"]}
    for a in (1.0, 10.0):
        assert by[(a, 512)] == pytest.approx(by[(a, 256)], rel=1e-2)
    assert math.isfinite(out["slope"]) and out["slope"] > 0
    with pytest.raises(RegimeMismatchError):
        estimate_harness_w1s(specs, 1.4)


def test_loglog_slope():
    x = np.array([1.0, 10.0, 100.0])
    assert loglog_slope(x, 3 * x**1.5) == pytest.approx(1.5)
    assert math.isnan(loglog_slope([1.0], [1.0]))


def test_oracle_grid_function():
    g = oracle_grid_function(RadialExampleSpec(), M=64)
    assert g.nodes[-1] == 1.0
    assert g.boundary_value == pytest.approx(1.0, abs=1e-9)
