import os
import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

sys.path.insert(0, os.path.dirname(__file__))

from swarmkin.measures import DiscreteMeasure  # noqa: E402

settings.register_profile(
    "default", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_RESULTS: list[str] = []


def random_measure(rng, n, dim, scale=1.0, masses=True):
    x = rng.normal(size=(n, dim)) * scale
    v = rng.normal(size=(n, dim)) * scale
    m = rng.uniform(0.1, 1.0, n) if masses else None
    return DiscreteMeasure.from_arrays(x, v, m)


@st.composite
def measures(draw, min_atoms=1, max_atoms=6, dims=(1, 2), dim=None, bound=3.0):
    d = dim if dim is not None else draw(st.sampled_from(dims))
    n = draw(st.integers(min_atoms, max_atoms))
    coord = st.floats(-bound, bound, allow_nan=False, allow_infinity=False)
    x = np.array(draw(st.lists(st.lists(coord, min_size=d, max_size=d), min_size=n, max_size=n)))
    v = np.array(draw(st.lists(st.lists(coord, min_size=d, max_size=d), min_size=n, max_size=n)))
    m = np.array(draw(st.lists(st.floats(0.05, 1.0), min_size=n, max_size=n)))
    return DiscreteMeasure.from_arrays(x.reshape(n, d), v.reshape(n, d), m)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
