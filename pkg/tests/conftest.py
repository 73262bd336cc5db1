import tempfile
from pathlib import Path

import numpy as np
import pytest

from supremal.grid import GridDomain, SubdomainMask


@pytest.fixture(autouse=True)
def setup_test_environment():
    """Set up test environment with a temporary directory for report output."""
    with tempfile.TemporaryDirectory() as temp_dir:
        output_dir = Path(temp_dir) / "supremal_test_output"
        output_dir.mkdir(parents=True, exist_ok=True)

        if not output_dir.exists() or not output_dir.is_dir():
            raise RuntimeError(f"Failed to create test output directory: {output_dir}")

        yield output_dir


@pytest.fixture
def output_dir(setup_test_environment):
    return setup_test_environment


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def unit_square():
    """[0,1]^2 at h=0.02 with the interior mask one cell in."""
    domain = GridDomain(lower=[0.0, 0.0], upper=[1.0, 1.0], h=0.02)
    return domain, SubdomainMask.interior_of(domain)


@pytest.fixture
def centered_square():
    """[-1,1]^2 at h=0.05."""
    domain = GridDomain(lower=[-1.0, -1.0], upper=[1.0, 1.0], h=0.05)
    return domain, SubdomainMask.interior_of(domain)
