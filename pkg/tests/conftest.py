import numpy as np
import pytest

from bloch_wco import domains as dom
from bloch_wco.engine import SupConfig

# trimmed engine configuration for unit tests; acceptance uses the default
FAST_CFG = SupConfig(
    n_uniform=4000,
    n_boundary=4000,
    n_shell=800,
    refine_iters=30,
    min_shell_points=100,
    mutations_per_round=256,
)


@pytest.fixture
def fast_cfg():
    return FAST_CFG


def seeded_points(domain, n, seed, boundary_fraction=0.3):
    """Mixed uniform / boundary-biased interior points for property checks."""
    nb = int(n * boundary_fraction)
    return np.vstack(
        [
            dom.sample(domain, "uniform", n - nb, seed),
            dom.sample(domain, "boundary_biased", nb, seed + 1),
        ]
    )
