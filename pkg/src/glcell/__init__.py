"""Ginzburg-Landau cell problem on a magnetic-periodic square.

Minimizes the cell energy over fields with magnetic-periodic boundary
conditions, builds explicit vortex-lattice trial states, detects and
classifies vortices, and verifies the small-b asymptotics of the bulk
energy density g(b).
"""

from .analysis import (
    AnalysisError,
    SweepReport,
    TileAggregate,
    aggregate_tiles,
    build_sweep,
    density_profile_check,
    derivative_bracket,
    potential_check,
    r0,
    run_sweep,
    sweep_to_csv,
    sweep_to_json,
)
from .energy import (
    DiscreteField,
    EnergyBreakdown,
    EnergyError,
    covariant_differences,
    density_moments,
    energy,
    gradient,
)
from .grid import (
    CellConfig,
    ConfigError,
    Grid,
    LinkPhases,
    WrapRule,
    build_grid,
    choose_n,
    link_phases,
    plaquette_fluxes,
    wrap_value,
)
from .minimize import (
    GCurvePoint,
    MinimizationError,
    MinimizationResult,
    SolverSettings,
    estimate_g,
    init_state,
    minimize,
)
from .snapshot import SnapshotError, SnapshotHeader, read_snapshot, write_snapshot
from .trial import (
    CellGreen,
    PhaseField,
    TrialError,
    build_phase,
    build_trial,
    predicted_density,
    solve_cell_green,
    trial_config,
    verify_upper_bound,
)
from .vortices import (
    DiscreteMeasure,
    MeasureDistanceReport,
    SquareReport,
    VortexBall,
    VortexError,
    VorticityField,
    cell_boundary_loop,
    classify_squares,
    find_balls,
    lipschitz_dual_distance,
    vorticity,
    winding,
)

__version__ = "0.1.0"
