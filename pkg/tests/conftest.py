import numpy as np
import pytest

from sashimi.core import MarkedPointPattern, ObservationWindow


@pytest.fixture
def unit_window():
    return ObservationWindow(0.0, 1.0, 0.0, 1.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260818)


def make_pattern(points, marks, window=None):
    points = np.asarray(points, dtype=float)
    if window is None:
        window = ObservationWindow(0.0, 1.0, 0.0, 1.0)
    if isinstance(marks, str):
        marks = [marks] * len(points)
    return MarkedPointPattern(points, np.asarray(marks), window)


@pytest.fixture
def three_type_pattern(rng):
    """A mixed CSR pattern with three types on the unit square."""
    n = 300
    points = rng.uniform(0.0, 1.0, size=(n, 2))
    marks = rng.choice(["tumor", "immune", "stromal"], size=n)
    return make_pattern(points, marks)
