import numpy as np
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=40)
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_polygon(rng, n=None, r_lo=0.5, r_hi=2.0):
    """Convex hull of random points around the origin; contains 0 in its interior."""
    from floatbody.body import vrep_to_hrep

    n = n or int(rng.integers(5, 12))
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    # force angular gaps below pi so the origin is interior
    ang = np.concatenate([ang, ang[:1] + np.arange(1, 4) * 2 * np.pi / 3])
    rad = rng.uniform(r_lo, r_hi, len(ang))
    pts = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    return vrep_to_hrep(pts, "poly")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS):
            terminalreporter.write_line(line)
