import math

import numpy as np
import pytest

from derham.bumps import bump_form
from derham.cohomology import generator
from derham.exterior import Form, QuadratureSpec, basis_form, codifferential, d
from derham.fields import Field
from derham.potentials import (DecayError, PreconditionError, check_decay, hodge_decompose,
                               lemma_check, moment_functional, orientation_sign,
                               parse_kernel_choice, potential, representative_from_moments,
                               solve_system, system_residuals)

SPEC = QuadratureSpec()


def test_parse_kernel_choice():
    assert parse_kernel_choice("phi") == ("phi", None)
    assert parse_kernel_choice(("phi_hat_m", 2)) == ("phi_hat", 2)
    assert parse_kernel_choice("phi_m1") == ("phi", 1)
    with pytest.raises(ValueError):
        parse_kernel_choice("psi")


def test_orientation_signs():
    assert [orientation_sign("phi", q) for q in range(3)] == [1, -1, 1]
    assert [orientation_sign("phi_hat", q) for q in range(3)] == [-1, 1, -1]


@pytest.mark.parametrize("n", [2, 3])
def test_potential_of_exact_scalar_recovers_it(n):
    u = Field.gaussian(n, 1, [0.25] + [0] * (n - 1))
    X = np.array([[0.0] * n, [1.0] + [0.0] * (n - 1), [0.3, -0.6] + [0.2] * (n - 2)])
    vals = potential(d(Form.scalar(u)), "phi", X, SPEC).values[:, 0]
    assert np.allclose(vals, u.evaluate(X), atol=1e-6)


def test_potential_hand_value_exp():
    # Phi(d exp(-|x|^2)) at (1, 0, 0) is exp(-1)
    val = potential(d(Form.scalar(Field.gaussian(3, 1))), "phi", [[1.0, 0, 0]], SPEC).values[0, 0]
    assert math.isclose(val, math.exp(-1), abs_tol=1e-7)


@pytest.mark.parametrize("n,q,seed", [(2, 0, 1), (2, 1, 2), (2, 2, 3), (3, 1, 4)])
def test_potential_identities(n, q, seed):
    rng = np.random.default_rng(seed)
    f = d(bump_form(rng, n, q)) if q < n else None
    g = codifferential(bump_form(rng, n, q)) if q >= 1 else None
    rep = lemma_check(f, g, SPEC)
    assert rep.passed, rep.residuals


def test_solve_system_residuals():
    rng = np.random.default_rng(11)
    f = d(bump_form(rng, 2, 1))
    g = codifferential(bump_form(rng, 2, 1))
    u = solve_system(f, g, SPEC)
    res = system_residuals(u, f, g)
    assert max(res.values()) <= 20 * SPEC.tol


def test_preconditions():
    not_closed = Form(2, 1, {(1,): Field.gaussian(2, 1) * Field.var(2, 1)})
    with pytest.raises(PreconditionError):
        lemma_check(not_closed, None, SPEC)
    with pytest.raises(PreconditionError):
        solve_system(None, Form(2, 1, {(1,): Field.gaussian(2, 1) * Field.var(2, 0)}), SPEC)


def test_decay_check():
    fast = Form.scalar(Field.gaussian(3, 1))
    assert check_decay(fast, 5.0) > 50
    slow = Form.scalar(Field.theta_power(3, 3))
    # fitted against w = sqrt(1 + r^2) on r = 3, 6, 12, hence slightly above 3
    assert check_decay(slow, 1.5) == pytest.approx(3.0, abs=0.15)
    with pytest.raises(DecayError):
        check_decay(slow, 3.0)


@pytest.mark.parametrize("n,q,seed", [(2, 1, 5), (3, 1, 6)])
def test_hodge_decomposition(n, q, seed):
    u = bump_form(np.random.default_rng(seed), n, q)
    hd = hodge_decompose(u, SPEC)
    assert hd.residual <= 30 * SPEC.tol
    assert hd.codiff_coexact <= 30 * SPEC.tol
    assert hd.d_coexact_minus_du <= 30 * SPEC.tol


def test_hodge_decomposition_rejects_weight_at_half_dimension():
    with pytest.raises(DecayError):
        hodge_decompose(bump_form(np.random.default_rng(0), 2, 1), SPEC, delta=1.0)


def test_generator_moment_analytic_value():
    # int g ^ d*_y(x1 *dy) for g = d(x1 / (3 theta^3)) equals -4 pi / 9
    tab = moment_functional(generator(3, 1, 1, ()), 0, 0, SPEC)
    raw = [v for v in tab.raw.values() if abs(v) > 1e-8]
    assert len(raw) == 1 and math.isclose(raw[0], -4 * math.pi / 9, abs_tol=SPEC.tol)
    assert math.isclose(tab.max_abs(), 1 / 3, abs_tol=SPEC.tol)


@pytest.mark.parametrize("n,q,m", [(2, 0, 1), (3, 0, 1), (3, 1, 0), (2, 1, 1)])
def test_coboundary_moments_vanish(n, q, m):
    rng = np.random.default_rng(7 + n + q)
    f = d(bump_form(rng, n, 0)) if q == 0 else d(codifferential(bump_form(rng, n, q + 1)))
    assert moment_functional(f, m, q, SPEC).max_abs() <= 10 * SPEC.tol


def test_moment_degree_mismatch():
    with pytest.raises(ValueError):
        moment_functional(basis_form(3, (1,)), 0, 1, SPEC)


def test_representative_is_closed_after_d():
    tab = moment_functional(generator(3, 1, 2, ()), 1, 0, SPEC)
    rep = representative_from_moments(tab, limit_denominator=1000)
    assert rep.degree == 0
    assert d(d(rep)).is_zero()


def test_truncated_potential_decays_faster():
    f = d(bump_form(np.random.default_rng(1), 3, 1))
    X = np.array([[3.2, 1.6, 0.8], [6.4, 3.2, 1.6]])
    full = np.max(np.abs(potential(f, "phi", X, SPEC).values), axis=1)
    trunc = np.max(np.abs(potential(f, ("phi_m", 1), X, SPEC).values), axis=1)
    assert np.log2(full[0] / full[1]) < 3.5
    assert np.log2(trunc[0] / trunc[1]) > 4.5
