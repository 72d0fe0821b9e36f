import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile(
    "flatlab", deadline=None, max_examples=60, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("flatlab")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def flat_fiber_kernel():
    from flatlab.hartogs import EngineConfig, build_kernel

    return build_kernel(config=EngineConfig(dmax=20, kmax=8), flat_fiber=True)


@pytest.fixture(scope="session")
def hartogs_kernel():
    from flatlab.geometry import HartogsFlat
    from flatlab.hartogs import EngineConfig, build_kernel
    from flatlab.profile import Profile

    return build_kernel(HartogsFlat(Profile(1), n=1), EngineConfig(dmax=20, kmax=2))


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import LINES

    if LINES:
        terminalreporter.section("acceptance criteria")
        for line in LINES:
            terminalreporter.write_line(line)
