"""
Hosts generic fixtures that are not specific to datasets, models or
problems.
"""
import numpy as np
import pytest


@pytest.fixture(scope="function")
def temp_file(tmp_path):
    """
    Creates a temporary file path.

    Used by the tests writing datasets, models and reports.

    Parameters
    ----------
    tmp_path : pytest.fixture
        This is a pytest original fixture. It creates a temporary
        folder that gets auto removed once the test is complete.

    Returns
    -------
    Path
        Path to the temp file, not created yet.
    """
    return tmp_path / "test.csv"


@pytest.fixture(scope="function")
def rng():
    return np.random.default_rng(1234)
