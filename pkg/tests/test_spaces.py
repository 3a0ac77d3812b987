import csv
import math
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.optimize import minimize_scalar

from derham.exterior import Form, codifferential, d
from derham.fields import Field, SampledField
from derham.spaces import (InsufficientSampling, SmoothnessBudgetError, TimeSampledForm,
                           aniso_norm, classify_delta, gamma_norm, holder_seminorm,
                           isotropic_norm, make_grid, make_time_grid, time_holder_quotient,
                           verify_time_class, weight, weighted_sup_norm)

WINDOWS = Path(__file__).parent / "data" / "delta_windows.csv"


def test_classifier_matches_frozen_table():
    with WINDOWS.open() as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 240
    for row in rows:
        n, k = int(row["n"]), int(row["k"])
        for delta in (Fraction(k, 10), k / 10):
            win = classify_delta(n, delta)
            assert win.kind == row["window"], (n, k)
            assert (win.m if win.kind == "Injection" else "") == (int(row["m"]) if row["m"] else "")


def test_window_strings():
    assert str(classify_delta(3, 2.5)) == "Injection{m=0}"
    assert str(classify_delta(3, 2)) == "BoundaryExcluded"
    assert classify_delta(3, -1).kind == "NonPositive"
    assert classify_delta(3, 0).kind == "NonPositive"


@given(st.integers(2, 6), st.fractions(min_value=Fraction(1, 100), max_value=20))
def test_windows_partition(n, delta):
    win = classify_delta(n, delta)
    if delta < n - 1:
        assert win.kind == "Isomorphism"
    elif delta.denominator == 1:
        assert win.kind == "BoundaryExcluded"
    else:
        assert win.kind == "Injection" and n - 1 + win.m < delta < n + win.m
    assert classify_delta(n, float(delta)).kind == win.kind


def test_weight():
    assert np.allclose(weight([[0, 0], [3, 4]]), [1.0, math.sqrt(26)])


@pytest.mark.parametrize("n", [2, 3])
def test_grids_are_nested(n):
    coarse, fine = make_grid(n, 0), make_grid(n, 1)
    fine_set = {tuple(np.round(p, 12)) for p in fine.points}
    assert all(tuple(np.round(p, 12)) in fine_set for p in coarse.points)
    assert len(fine.points) > len(coarse.points)


@given(st.floats(0.1, 8.0))
def test_unit_weight_norm(delta):
    u = Form.scalar(SampledField(3, lambda X: weight(X) ** -delta))
    assert abs(weighted_sup_norm(u, 0, delta, make_grid(3, 0)).value - 1.0) <= 1e-14


def oracle_gaussian_sup(delta):
    res = minimize_scalar(lambda r: -(1 + r * r) ** (delta / 2) * math.exp(-r * r),
                          bounds=(0, 10), method="bounded", options={"xatol": 1e-12})
    return max(1.0, -res.fun)


def test_gaussian_sup_norm_example():
    # max of (1+r^2)^(5/2) exp(-r^2) is attained at r^2 = 3/2
    expected = 2.5 ** 2.5 * math.exp(-1.5)
    assert math.isclose(oracle_gaussian_sup(5), expected, rel_tol=1e-9)
    est = weighted_sup_norm(Form.scalar(Field.gaussian(3, 1)), 0, 5, make_grid(3, 1)).value
    assert abs(est - expected) / expected <= 0.05
    assert est <= expected * (1 + 1e-12)


@given(st.floats(0.0, 9.0), st.integers(2, 3))
def test_gaussian_sup_norm_against_oracle(delta, n):
    est = weighted_sup_norm(Form.scalar(Field.gaussian(n, 1)), 0, delta, make_grid(n, 0)).value
    oracle = oracle_gaussian_sup(delta)
    assert abs(est - oracle) / oracle <= 0.05


@pytest.mark.parametrize("n", [2, 3])
def test_refinement_monotone(n):
    u = Form.scalar(Field.gaussian(n, 1, [Fraction(1, 3 + i) for i in range(n)]))
    vals = [isotropic_norm(u, 1, 0.5, 1.5, make_grid(n, lv)).value for lv in range(3)]
    assert vals[0] <= vals[1] <= vals[2]


def test_holder_seminorm_scaling_and_constants():
    grid = make_grid(2, 0)
    u = Form.scalar(Field.gaussian(2, 1) * Field.var(2, 0))
    h = holder_seminorm(u, 0.5, 1.0, grid).value
    assert h > 0
    assert math.isclose(holder_seminorm(u * 3, 0.5, 1.0, grid).value, 3 * h, rel_tol=1e-12)
    assert holder_seminorm(Form.scalar(Field.const(2, 5)), 0.5, 1.0, grid).value == 0.0
    with pytest.raises(ValueError):
        holder_seminorm(u, 1.5, 1.0, grid)


def test_smoothness_budget():
    u = Form.scalar(SampledField(2, lambda X: X[:, 0], smoothness=0))
    with pytest.raises(SmoothnessBudgetError):
        weighted_sup_norm(u, 1, 1.0, make_grid(2, 0))


def test_time_quotient_needs_samples():
    with pytest.raises(InsufficientSampling):
        time_holder_quotient(np.zeros(5), np.linspace(0, 1, 5), 0.5)


def test_time_quotient_hand_value():
    t = np.linspace(0, 1, 9)
    assert math.isclose(time_holder_quotient(t, t, 1.0), 1.0)
    assert math.isclose(time_holder_quotient(np.sqrt(t), t, 0.5), 1.0)


@pytest.mark.parametrize("lam", [0.3, 0.5, 1.0])
def test_time_class_verdicts(lam):
    assert verify_time_class(lambda t: t, 1.0, "C^{s,0}", lam).accepted
    assert verify_time_class(lambda t: t, 1.0, "C^{s,lam/2}", lam).accepted
    assert verify_time_class(lambda t: t ** (lam / 2), 1.0, "C^{s,lam/2}", lam).accepted
    rep = verify_time_class(lambda t: t ** (lam / 4), 1.0, "C^{s,lam/2}", lam)
    assert not rep.accepted and rep.slope < -0.02


def test_time_class_rejects_jump():
    with np.errstate(divide="ignore"):
        assert not verify_time_class(lambda t: 1 / (t - 0.5), 1.0, "C^{s,0}", 0.5).accepted
    rep = verify_time_class(lambda t: np.where(t > 0.51, 1.0, 0.0), 1.0, "C^{s,lam/2}", 0.5)
    assert not rep.accepted


def sample(n, times, scale=1.0):
    g = Field.gaussian(n, 1)
    return TimeSampledForm.from_function(
        lambda t: Form(n, 1, {(1,): g * Fraction(scale * (1 + t)).limit_denominator(10 ** 6),
                              (2,): g * Field.var(n, 0) * Fraction(t * t).limit_denominator(10 ** 6)}),
        times)


def test_gamma_norm_is_sum_of_three_terms():
    n = 2
    grid = make_grid(n, 0)
    u = sample(n, make_time_grid(1.0).times)
    du, su = u.map(d), u.map(codifferential)
    g = gamma_norm(u, du, su, 0, 1, 0.5, 0.25, 1.0, grid)
    parts = (aniso_norm(u, 0, 1, 0.5, 0.25, 1.0, grid).value
             + aniso_norm(du, 0, 1, 0.5, 0.25, 2.0, grid).value
             + aniso_norm(su, 0, 1, 0.5, 0.25, 2.0, grid).value)
    assert g.value == parts


@given(st.floats(0.2, 3.0), st.sampled_from([0.25, 0.5, 1.0]))
def test_mu_monotonicity(scale, lam):
    n = 2
    grid = make_grid(n, 0)
    u = sample(n, make_time_grid(1.0).times, scale)
    assert aniso_norm(u, 0, 0, lam, 0.0, 1.0, grid).value <= aniso_norm(u, 0, 0, lam, lam / 2,
                                                                         1.0, grid).value


def test_aniso_needs_time_samples():
    u = sample(2, np.linspace(0, 1, 4))
    with pytest.raises(InsufficientSampling):
        aniso_norm(u, 0, 0, 0.5, 0.25, 1.0, make_grid(2, 0))


def test_time_derivative_exact_vs_fd():
    times = make_time_grid(1.0, 2).times
    u = sample(2, times)
    fd = u.time_derivative(1)
    X = np.array([[0.3, 0.1]])
    # d/dt of (1 + t) g dx1 is g dx1
    vals = np.array([s[(1,)].evaluate(X)[0] for s in fd.slices])
    assert np.allclose(vals, Field.gaussian(2, 1).evaluate(X)[0])
