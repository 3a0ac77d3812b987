"""Hypothesis strategies for exact polynomial forms."""
from hypothesis import strategies as st

from derham.exterior import Form, multi_indices
from derham.fields import Field


@st.composite
def polys(draw, n, max_deg=3, max_terms=4):
    terms = {}
    for _ in range(draw(st.integers(1, max_terms))):
        alpha = tuple(draw(st.lists(st.integers(0, max_deg), min_size=n, max_size=n)))
        if sum(alpha) > max_deg:
            continue
        terms[alpha] = terms.get(alpha, 0) + draw(st.integers(-6, 6))
    return Field.from_poly(n, terms)


@st.composite
def poly_forms(draw, n=None, q=None, max_deg=3):
    n = draw(st.integers(2, 4)) if n is None else n
    q = draw(st.integers(0, n)) if q is None else q
    idxs = multi_indices(n, q)
    chosen = draw(st.lists(st.sampled_from(idxs), unique=True, max_size=len(idxs)))
    return Form(n, q, {I: draw(polys(n, max_deg)) for I in chosen})
