import pytest

from glcell.minimize import SolverSettings, init_state, minimize
from glcell.trial import trial_config


@pytest.fixture(scope="session")
def minimizer_b002():
    """Converged minimizer at b = 0.02, N = 16 (shared across acceptance)."""
    b, N = 0.02, 16
    cfg = trial_config(b, N)
    return minimize(init_state("trial", cfg), b,
                    SolverSettings(max_iter=6000), init_label="trial")


@pytest.fixture(scope="session")
def minimizer_b005():
    b, N = 0.05, 16
    cfg = trial_config(b, N)
    return minimize(init_state("trial", cfg), b,
                    SolverSettings(max_iter=6000), init_label="trial")


@pytest.fixture(scope="session")
def derivative_sweep():
    """Shared-resolution sweep around b = 0.02 for the derivative bracket."""
    from glcell.analysis import run_sweep

    return run_sweep([0.015, 0.02, 0.025], 16)
