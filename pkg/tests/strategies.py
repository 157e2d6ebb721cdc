"""Hypothesis strategies shared by the property tests."""

from hypothesis import strategies as st

from ghlab.trig import TrigPoly

coef = st.floats(-3, 3, allow_nan=False, allow_infinity=False)


@st.composite
def trig_polys(draw, max_degree: int = 4, mean=None):
    deg = draw(st.integers(0, max_degree))
    cos = [draw(coef) if mean is None else mean] + [draw(coef) for _ in range(deg)]
    sin = [draw(coef) for _ in range(deg)]
    return TrigPoly(tuple(cos), tuple(sin))
