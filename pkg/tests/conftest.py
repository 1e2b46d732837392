import numpy as np
import pytest

from spinamp.model import SystemParams

TWO_PI = 2.0 * np.pi


@pytest.fixture(scope="session")
def fig_params() -> SystemParams:
    """Matched-drive working point used throughout: gamma/2pi = 12.5,
    G/2pi = 75, Delta/2pi = 412.5, lambda_d/2pi = 40 MHz."""
    return SystemParams.from_mhz(nu_t=412.5, nu_bar=0.0, g=75.0,
                                 lambda_d=40.0, gamma=12.5)
