import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from derham.exterior import multi_indices
from derham.fields import Field
from derham.kernels import (N2_CONSTANT, PRINTED_N2_CONSTANT, SingularityError, correction_count,
                            expansion_partial_sum, expansion_table, fundamental_field,
                            fundamental_solution, kernel_e_q, kernel_phi, mollified_identity,
                            truncated_kernel)


def test_fundamental_solution_values():
    assert math.isclose(fundamental_solution(3, [1.0, 0, 0]), -1 / (4 * math.pi))
    assert math.isclose(fundamental_solution(2, [math.e, 0]), 1 / (2 * math.pi))
    assert math.isclose(fundamental_solution(4, [0, 2.0, 0, 0]), -1 / (2 * 2 * math.pi ** 2 * 4))
    with pytest.raises(SingularityError):
        fundamental_solution(3, [0, 0, 0])


@pytest.mark.parametrize("n", [2, 3, 4, 5])
def test_fundamental_field_is_harmonic_off_origin(n):
    # no theta factors: agreement on |x| >= 2 is agreement off the origin
    assert fundamental_field(n).laplacian().equals_outer(Field.const(n, 0))


PROFILES = {
    "gauss": lambda n: Field.gaussian(n, 1),
    "shifted": lambda n: Field.gaussian(n, 2, [0.25] + [0] * (n - 1)),
    "poly_gauss": lambda n: Field.gaussian(n, 1.5) * (Field.const(n, 1) + Field.var(n, 0) * Field.var(n, 0)),
}


@pytest.mark.parametrize("n", [2, 3])
@pytest.mark.parametrize("name", sorted(PROFILES))
def test_mollified_identity(n, name):
    val, target = mollified_identity(PROFILES[name](n))
    assert abs(val - target) <= 1e-3


def test_printed_n2_constant_is_off_by_two():
    val, target = mollified_identity(PROFILES["gauss"](2), constant=PRINTED_N2_CONSTANT)
    assert math.isclose(val / target, PRINTED_N2_CONSTANT / N2_CONSTANT, rel_tol=1e-4)
    assert abs(val - target) > 0.5


@pytest.mark.parametrize("n", [2, 3])
def test_expansion_collinear_convergence(n):
    x, y = np.eye(n)[0] * 4, np.eye(n)[0]
    rows = expansion_table(n, x, y, 40)
    assert max(r[3] for r in rows[1:7]) <= 0.6
    assert rows[40][2] <= 1e-6


@given(st.integers(2, 4), st.integers(0, 2 ** 31 - 1))
def test_expansion_converges_for_separated_points(n, seed):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=n)
    x *= 3.0 / np.linalg.norm(x)
    y = rng.normal(size=n)
    y *= rng.uniform(0.0, 1.0) / np.linalg.norm(y)
    exact = fundamental_solution(n, x - y)
    assert abs(expansion_partial_sum(n, 30, x, y) - exact) <= 1e-12


def test_expansion_requires_outer_point():
    with pytest.raises(ValueError):
        expansion_partial_sum(3, 4, [1.0, 0, 0], [2.0, 0, 0])


@given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n))))
def test_kernel_y_derivatives_compose_to_zero(nq):
    # d*_y d*_y = 0 and d_y d_y = 0 on the kernel, with a smooth stand-in base
    n, q = nq
    base = Field.gaussian(n, 1)
    assert kernel_phi(n, q, "phi", base).y_apply("phi").is_zero()
    assert kernel_phi(n, q, "phi_hat", base).y_apply("phi_hat").is_zero()


def test_kernel_e_q_structure():
    ker = kernel_e_q(3, 1)
    assert set(ker.singular) == set(multi_indices(3, 1))
    assert all(f.degree == 2 for f in ker.singular.values())
    vals = ker.evaluate([1.0, 0, 0], [0, 0, 0])
    assert math.isclose(vals[((1,), (2, 3))], -1 / (4 * math.pi))
    with pytest.raises(SingularityError):
        ker.evaluate([1.0, 0, 0], [1.0, 0, 0])


@pytest.mark.parametrize("n,q,m", [(3, 0, 0), (3, 1, 1), (2, 1, 2)])
def test_truncated_kernel_correction_count(n, q, m):
    ker = truncated_kernel(n, q, m, "phi")
    assert all(len(parts) == correction_count(n, q, m) for parts in ker.smooth.values())


def test_truncated_kernel_cancels_far_field():
    """Far from the data the truncated kernel is smaller by extra powers of |x|."""
    n, q, m = 3, 0, 1
    full, trunc = kernel_phi(n, q + 1, "phi"), truncated_kernel(n, q + 1, m, "phi")
    y = np.array([0.2, -0.1, 0.15])
    ratios = []
    for r in (8.0, 16.0):
        x = np.array([r, 0.3 * r, -0.2 * r]) / 1.1
        a = max(abs(v) for v in full.evaluate(x, y).values())
        b = max(abs(v) for v in trunc.evaluate(x, y).values())
        ratios.append(b / a)
    assert ratios[1] < ratios[0] / 2
