import hypothesis.strategies as st
import pytest
from hypothesis import settings

from plqval.plq import QuadraticPiece, from_pieces, quadratic

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@st.composite
def plq_functions(draw, max_pieces=3):
    """Random convex PLQ functions built left to right."""
    lo = draw(st.floats(-3, 3, allow_nan=False))
    k = draw(st.integers(1, max_pieces))
    lengths = draw(st.lists(st.floats(0.1, 2.0), min_size=k, max_size=k))
    value = draw(st.floats(-3, 3))
    slope = draw(st.floats(-3, 3))
    pieces = []
    left = lo
    for length in lengths:
        right = left + length
        a = draw(st.one_of(st.just(0.0), st.floats(0.0, 4.0)))
        pieces.append(QuadraticPiece(left, right, a, slope - 2 * a * left,
                                     value - slope * left + a * left * left))
        value = (a * (right - left) + slope) * (right - left) + value
        slope = slope + 2 * a * (right - left) + draw(st.floats(0.0, 1.0))
        left = right
    return from_pieces(pieces)


@pytest.fixture
def half_square():
    return quadratic(0.5, 0.0, 0.0, -1.0, 1.0)
