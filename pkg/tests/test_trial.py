import math

import numpy as np
import pytest

from glcell.energy import energy
from glcell.grid import CellConfig, build_grid
from glcell.trial import (
    CELL_SIDE,
    TrialError,
    build_phase,
    build_trial,
    energy_ring_estimates,
    green_residual,
    predicted_density,
    ring_log_slope,
    solve_cell_green,
    trial_config,
    trial_phase,
    verify_upper_bound,
)
from glcell.vortices import cell_boundary_loop, winding


def test_green_solver_residual():
    green = solve_cell_green(128)
    assert green_residual(green) < 1e-9
    assert abs(float(np.mean(green.values))) < 1e-12


def test_green_log_singularity_slope():
    # h = log|x - a1| + smooth: the radial log-slope near the pole is +1
    green = solve_cell_green(256)
    slope = ring_log_slope(green, 0.08, 0.35)
    assert abs(slope - 1.0) < 0.1


def test_green_resolution_validation():
    with pytest.raises(TrialError):
        solve_cell_green(31)
    with pytest.raises(TrialError):
        solve_cell_green(16)


def test_ring_energy_growth():
    # outer Dirichlet energy grows like 2*pi*|log sqrt(b)|; inner stays O(1)
    green = solve_cell_green(256)
    prev = None
    for b in (0.2, 0.05, 0.0125):
        outer, inner = energy_ring_estimates(green, b)
        expected = 2.0 * math.pi * abs(math.log(math.sqrt(b)))
        assert abs(outer - expected) < 0.25 * expected + 2.0
        assert inner < 10.0
        if prev is not None:
            assert outer > prev
        prev = outer


def test_phase_wrap_compliance():
    # the twist constants must be constant along the edges to ~1e-9
    for b, N in ((0.1, 4), (0.25, 1)):
        cfg = trial_config(b, N)
        g = build_grid(cfg)
        phase = trial_phase(b, N, g)
        assert phase.alpha_spread < 1e-9
        assert phase.beta_spread < 1e-9


def test_trial_requires_square_N():
    cfg = CellConfig(b=0.25, N=2, n=64)
    g = build_grid(cfg)
    with pytest.raises(TrialError, match="square N"):
        build_trial(0.25, 2, g)


def test_trial_zeros_at_poles():
    cfg = trial_config(0.1, 4)
    g = build_grid(cfg)
    phase = trial_phase(0.1, 4, g)
    f = build_trial(0.1, 4, g)
    vals = f.u[phase.pole_sites[:, 0], phase.pole_sites[:, 1]]
    assert np.max(np.abs(vals)) == 0.0
    assert phase.pole_sites.shape == (4, 2)


def test_boundary_winding_quantized():
    for N in (1, 4):
        cfg = trial_config(0.1, N)
        g = build_grid(cfg)
        f = build_trial(0.1, N, g)
        assert winding(f, cell_boundary_loop(g.n)) == N


def test_trial_energy_upper_bound():
    b, N = 0.04, 4
    cfg = trial_config(b, N)
    g = build_grid(cfg)
    f = build_trial(b, N, g)
    per_cell = energy(f, b).total / N
    target = 2.0 * math.pi * b * abs(math.log(math.sqrt(b))) - math.pi
    assert abs(per_cell - target) <= 5.0 * b
    report = verify_upper_bound(b, N, g)
    assert report["pass"]
    assert abs(report["g_trial"] - per_cell / (2.0 * math.pi)) < 1e-12


def test_predicted_density_value():
    assert abs(predicted_density(0.01) - (-0.47697)) < 5e-6


def test_twisted_and_gauged_energies_agree():
    # the gauge map removing (alpha, beta) preserves the energy exactly
    b, N = 0.1, 4
    cfg = trial_config(b, N)
    g = build_grid(cfg)
    e_plain = energy(build_trial(b, N, g), b).total
    e_twist = energy(build_trial(b, N, g, twisted=True), b).total
    assert abs(e_plain - e_twist) < 1e-8 * abs(e_plain)


def test_trial_config_shapes():
    cfg = trial_config(0.1, 4)
    k = 2
    assert cfg.n % k == 0
    assert (cfg.n // k) % 2 == 0
    assert cfg.h <= math.sqrt(0.1) / 8.0 + 1e-12
    with pytest.raises(TrialError, match="square N"):
        trial_config(0.1, 3)


def test_build_phase_grid_mismatch():
    cfg = trial_config(0.1, 4)
    g = build_grid(cfg)
    green = solve_cell_green(64)  # wrong resolution for this grid
    if green.m != g.n // 2:
        with pytest.raises(TrialError, match="resolution"):
            build_phase(green, g, 4)
