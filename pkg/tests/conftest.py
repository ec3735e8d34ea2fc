import math

import pytest
from hypothesis import strategies as st

from steklov_lab.geometry import ArcSet, BoundaryCurve

DISK = BoundaryCurve.circle()
SQUARE = BoundaryCurve.unit_square()
STAR = BoundaryCurve.star(cos_coeffs=(1.0, 0.0, 0.0, 0.15))


@pytest.fixture
def disk():
    return DISK


@pytest.fixture
def square():
    return SQUARE


@pytest.fixture
def half_disk_arcs():
    return ArcSet(DISK, [(0.0, math.pi)])


@st.composite
def arc_sets(draw, curve=DISK, max_arcs=4, max_frac=0.2):
    """Random arc unions covering at most ``max_arcs * max_frac`` of the curve."""
    L = curve.total_length
    n = draw(st.integers(0, max_arcs))
    iv = []
    for _ in range(n):
        a = draw(st.floats(0.0, L, allow_nan=False, exclude_max=True))
        ln = draw(st.floats(1e-3 * L, max_frac * L))
        iv.append((a, a + ln))
    return ArcSet(curve, iv)


def nonempty(s: ArcSet) -> bool:
    return bool(s.intervals)
