import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from rsqp_mimo import GenSpec, generate_instance

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")

seeds = st.integers(min_value=0, max_value=2**32 - 1)
orders = st.sampled_from([2, 4, 8, 16])


@st.composite
def instances(draw, max_m=8, max_n=6, orders=orders, noiseless=None):
    n = draw(st.integers(1, max_n))
    m = draw(st.integers(1, max_m))
    M = draw(orders)
    snr = draw(st.floats(0.0, 40.0))
    quiet = draw(st.booleans()) if noiseless is None else noiseless
    return generate_instance(GenSpec(m, n, M, snr, seed=draw(seeds), noiseless=quiet))


def random_indices(rng, n, M):
    return rng.integers(0, M, size=n)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[key])
