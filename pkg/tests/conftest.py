import numpy as np
import pytest
from hypothesis import HealthCheck, assume, settings
from hypothesis import strategies as st

from epcont.potential import CANONICAL, ModelParams, validate_no_singularity

settings.register_profile(
    "epcont",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.filter_too_much],
)
settings.load_profile("epcont")

# acceptance lines collected by test_acceptance, echoed after the run
ACCEPTANCE_LINES: list[str] = []


@st.composite
def valid_params(draw):
    """Parameter sets that pass the no-singularity scan."""
    a = draw(st.floats(0.2, 2.5))
    b = draw(st.floats(0.3, 4.0)) * draw(st.sampled_from([-1.0, 1.0]))
    q = draw(st.floats(0.4, 2.0))
    p = ModelParams(a, b, q)
    assume(validate_no_singularity(p) is None)
    return p


@pytest.fixture
def canonical():
    return CANONICAL


@pytest.fixture
def r_grid():
    return np.linspace(0.0, 30.0, 1501)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
