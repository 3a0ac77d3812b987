import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from derham.bumps import bump_form
from derham.exterior import (Form, QuadratureSpec, basis_form, codiff_sign, codifferential,
                             complement, d, fd_codifferential, fd_d, form_from_json,
                             form_to_json, hodge_star, l2_inner, laplacian_form, multi_indices,
                             perm_sign, random_poly_form, volume_form, wedge)
from derham.fields import Field
from derham.quadrature import QuadratureError

from .strategies import poly_forms


def x(n, i):
    return Field.var(n, i)


def test_multi_indices_and_complement():
    assert multi_indices(4, 2) == ((1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4))
    assert multi_indices(3, 0) == ((),)
    assert complement(4, (1, 3)) == (2, 4)
    assert perm_sign((2, 1, 3)) == -1
    assert perm_sign((3, 1, 2)) == 1


def test_form_validation():
    with pytest.raises(ValueError):
        Form(3, 1, {(4,): Field.const(3, 1)})
    with pytest.raises(ValueError):
        Form(3, 2, {(1,): Field.const(3, 1)})
    assert Form.zero(3, -1).is_zero() and Form.zero(3, 4).is_zero()


def test_exterior_derivative_hand_values():
    n = 3
    u = Form.scalar(x(n, 0) * x(n, 1))
    assert d(u) == Form(n, 1, {(1,): x(n, 1), (2,): x(n, 0)})
    a = Form(n, 1, {(2,): x(n, 0)})          # x1 dx2
    assert d(a) == basis_form(n, (1, 2))


def test_hodge_star_hand_values():
    assert hodge_star(basis_form(3, (1,))) == basis_form(3, (2, 3))
    assert hodge_star(basis_form(3, (2,))) == basis_form(3, (1, 3)) * -1
    assert hodge_star(basis_form(2, (1,))) == basis_form(2, (2,))
    assert hodge_star(basis_form(2, (2,))) == basis_form(2, (1,)) * -1
    assert hodge_star(Form.scalar(Field.const(4, 1))) == volume_form(4)


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_codifferential_sign_closed_form(n):
    # d* = s * *d*, with s matching the interior-product adjoint
    for q in range(1, n + 1):
        assert codiff_sign(n, q) == (-1) ** (n * (q + 1) + 1)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_codifferential_is_minus_divergence(n):
    a = Form(n, 1, {(1,): x(n, 0)})          # x1 dx1
    assert codifferential(a) == Form.scalar(Field.const(n, -1))


@given(poly_forms())
def test_d_squared_and_codiff_squared_vanish(a):
    assert d(d(a)).is_zero()
    assert codifferential(codifferential(a)).is_zero()


@given(poly_forms())
def test_star_star_sign(a):
    n, q = a.n, a.degree
    assert hodge_star(hodge_star(a)) == a * (-1) ** (q * (n - q))


@given(st.integers(2, 5).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_wedge_with_star_is_volume(nq):
    n, q = nq
    for I in multi_indices(n, q):
        assert wedge(basis_form(n, I), hodge_star(basis_form(n, I))) == volume_form(n)


@given(st.integers(2, 4).flatmap(
    lambda n: st.tuples(*(st.integers(0, n),) * 2).flatmap(
        lambda pq: st.tuples(poly_forms(n, pq[0], 2), poly_forms(n, pq[1], 2)))))
def test_leibniz_rule(ab):
    a, b = ab
    if a.degree + b.degree > a.n:
        return
    sign = (-1) ** a.degree
    lhs = d(wedge(a, b))
    rhs = wedge(d(a), b) + wedge(a, d(b)) * sign
    assert lhs == rhs


@given(poly_forms(max_deg=3))
def test_hodge_laplacian_is_minus_componentwise_laplacian(a):
    lhs = d(codifferential(a)) + codifferential(d(a))
    assert lhs == laplacian_form(a) * -1


@given(poly_forms())
def test_json_round_trip(a):
    assert form_from_json(form_to_json(a)) == a


def test_json_round_trip_nonpolynomial():
    n = 3
    c = Field.theta_power(n, 3) * x(n, 0) + Field.gaussian(n, Fraction(3, 2), [1, 0, 0])
    a = Form(n, 2, {(1, 3): c, (2, 3): Field.log_radius(n) * Fraction(1, 7)})
    assert form_from_json(form_to_json(a)) == a


@given(poly_forms(n=3, q=1, max_deg=2))
def test_finite_difference_matches_exact(a):
    X = np.array([[0.3, -0.2, 0.7], [1.1, 0.4, -0.5]])
    for exact, fd in ((d(a), fd_d(a, 1e-3)), (codifferential(a), fd_codifferential(a, 1e-3))):
        for I, c in exact.components():
            assert np.allclose(fd[I].evaluate(X), c.evaluate(X), atol=1e-5)


def test_evaluate_dense_lexicographic():
    a = Form(3, 1, {(3,): Field.const(3, 2), (1,): x(3, 0)})
    vals = a.evaluate_dense(np.array([[5.0, 0, 0]]))
    assert vals.tolist() == [[5.0, 0.0, 2.0]]


@pytest.mark.parametrize("n,q,seed", [(2, 0, 1), (2, 1, 2), (3, 1, 3), (3, 2, 4)])
def test_adjointness_on_bumps(n, q, seed):
    rng = np.random.default_rng(seed)
    a, b = bump_form(rng, n, q), bump_form(rng, n, q + 1)
    spec = QuadratureSpec()
    lhs = l2_inner(d(a), b, spec)
    rhs = l2_inner(a, codifferential(b), spec)
    assert abs(lhs - rhs) <= 10 * spec.tol
    assert lhs.tail_estimate <= spec.tol


def test_l2_inner_known_value():
    # int exp(-2|x|^2) over R^2 = pi/2
    g = Form.scalar(Field.gaussian(2, 1))
    assert math.isclose(l2_inner(g, g), math.pi / 2, rel_tol=1e-9)


def test_l2_inner_rejects_slow_decay():
    slow = Form.scalar(Field.theta_power(3, 1))
    with pytest.raises(QuadratureError):
        l2_inner(slow, slow)


@given(st.integers(0, 2 ** 31 - 1), st.integers(2, 5))
def test_random_poly_forms_are_nonzero(seed, n):
    rng = np.random.default_rng(seed)
    for q in range(n + 1):
        a = random_poly_form(rng, n, q)
        assert not a.is_zero()
        assert all(sum(alpha) <= 3 for c in a.coeffs.values() for alpha in c.poly())
