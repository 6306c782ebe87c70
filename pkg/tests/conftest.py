import numpy as np
import pytest
from hypothesis import HealthCheck, settings, strategies as st

from tsmatrix.timescale import TimeScale

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

_ACCEPTANCE = []


@st.composite
def time_scales(draw, max_segments=5):
    """Bounded time scales built from random gaps and (possibly zero) segment lengths."""
    k = draw(st.integers(1, max_segments))
    t = draw(st.floats(-2.0, 2.0))
    segs = []
    for i in range(k):
        if i:
            t += draw(st.floats(0.05, 1.0))
        length = draw(st.one_of(st.just(0.0), st.floats(0.05, 1.0)))
        segs.append((t, t + length))
        t += length
    return TimeScale(segs)


@pytest.fixture
def mixed_ts():
    return TimeScale([0.0, 0.25, 0.5, 0.75, (1.0, 2.0)])


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call" and item.module.__name__.endswith("test_acceptance"):
        detail = dict(rep.user_properties).get("detail", "")
        _ACCEPTANCE.append((item.name, rep.passed, detail))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in _ACCEPTANCE:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
