"""Acceptance criteria, one test per criterion.

Each test prints a single ``criterion NN: PASS|FAIL`` line (also collected in
the pytest terminal summary).  Runtime budgets are part of each verdict.
Run standalone with ``python3 -m tests.test_acceptance``.
"""
import csv
import math
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
from scipy.optimize import minimize_scalar

from derham.bumps import bump_form
from derham.cohomology import (aniso_representative_basis, class_map_consistency, generator,
                               generator_keys, project_class, solvability_check)
from derham.exterior import (Form, QuadratureSpec, basis_form, codifferential, d, hodge_star,
                             l2_inner, multi_indices, random_poly_form, volume_form, wedge)
from derham.fields import Field, SampledField, poly_laplacian
from derham.harmonics import gram_matrix, harmonic_basis, harmonic_dim, laplacian_rank_dim
from derham.kernels import N2_CONSTANT, PRINTED_N2_CONSTANT, expansion_table, mollified_identity
from derham.potentials import hodge_decompose, lemma_check, moment_functional
from derham.spaces import (TimeSampledForm, aniso_norm, classify_delta, gamma_norm,
                           isotropic_norm, make_grid, make_time_grid, verify_time_class, weight,
                           weighted_sup_norm)
from tests import acceptance_log

TAU = 1e-4
SPEC = QuadratureSpec(tol=TAU)
DATA = Path(__file__).parent / "data"


def conclude(criterion, ok, detail, start, budget):
    elapsed = time.perf_counter() - start
    ok = bool(ok) and elapsed < budget
    acceptance_log.record(criterion, ok, f"{detail}  [{elapsed:.1f}s / {budget:g}s]")
    assert ok, detail


def test_criterion_01_exterior_algebra_exact():
    start = time.perf_counter()
    rng = np.random.default_rng(1)
    forms = []
    while len(forms) < 200:
        n = int(rng.integers(2, 5))
        forms.append(random_poly_form(rng, n, int(rng.integers(0, n + 1))))
    dd = sum(not d(d(a)).is_zero() for a in forms)
    ss = sum(not codifferential(codifferential(a)).is_zero() for a in forms)
    star = sum(hodge_star(hodge_star(a)) != a * (-1) ** (a.degree * (a.n - a.degree))
               for a in forms)
    vol = sum(wedge(basis_form(n, I), hodge_star(basis_form(n, I))) != volume_form(n)
              for n in range(2, 6) for q in range(n + 1) for I in multi_indices(n, q))
    empty = sum(a.is_zero() for a in forms)
    bad = dd + ss + star + vol + empty
    conclude(1, bad == 0, f"200 nonzero forms (zero: {empty}): dd={dd} d*d*={ss} "
                          f"star-star={star} wedge-volume={vol} failures", start, 10)


def test_criterion_02_adjointness():
    start = time.perf_counter()
    gaps = []
    for i, (n, q) in enumerate([(2, 0), (2, 1), (2, 0), (2, 1), (2, 1),
                                (3, 0), (3, 1), (3, 2), (3, 1), (3, 0)]):
        rng = np.random.default_rng(200 + i)
        a, b = bump_form(rng, n, q), bump_form(rng, n, q + 1)
        gaps.append(abs(float(l2_inner(d(a), b, SPEC)) - float(l2_inner(a, codifferential(b), SPEC))))
    worst = max(gaps)
    conclude(2, worst <= 10 * TAU, f"max |(da,b)-(a,d*b)| = {worst:.2e} <= {10 * TAU:g} "
                                   "over 10 pairs", start, 60)


def test_criterion_03_harmonic_bases():
    start = time.perf_counter()
    problems = []
    for n in (2, 3, 4):
        for k in range(7):
            basis = harmonic_basis(n, k)
            if not len(basis) == harmonic_dim(n, k) == laplacian_rank_dim(n, k):
                problems.append(f"dim n={n} k={k}")
            if any(poly_laplacian(h.as_dict, n) for h in basis):
                problems.append(f"laplacian n={n} k={k}")
            G = gram_matrix(basis)
            if G != [[Fraction(int(i == j)) for j in range(len(G))] for i in range(len(G))]:
                problems.append(f"gram n={n} k={k}")
    conclude(3, not problems, f"n<=4, k<=6: problems={problems or 'none'}", start, 30)


def test_criterion_04_expansion_convergence():
    start = time.perf_counter()
    worst_ratio, final = 0.0, 0.0
    for n in (2, 3):
        x, y = np.eye(n)[0] * 4.0, np.eye(n)[0]
        rows = expansion_table(n, x, y, 40)
        worst_ratio = max(worst_ratio, max(r[3] for r in rows[1:7]))
        final = max(final, rows[40][2])
    ok = worst_ratio <= 0.6 and final <= 1e-6
    conclude(4, ok, f"max ratio m=1..6 {worst_ratio:.3f} <= 0.6, remainder at m=40 "
                    f"{final:.1e} <= 1e-6", start, 30)


def test_criterion_05_mollified_identity():
    start = time.perf_counter()
    profiles = [lambda n: Field.gaussian(n, 1),
                lambda n: Field.gaussian(n, 2, [0.25] + [0] * (n - 1)),
                lambda n: Field.gaussian(n, 1.5) * (Field.const(n, 1)
                                                    + Field.var(n, 0) * Field.var(n, 0))]
    errs = []
    for n in (2, 3):
        for make in profiles:
            val, target = mollified_identity(make(n))
            errs.append(abs(val - target))
    val, target = mollified_identity(profiles[0](2), constant=PRINTED_N2_CONSTANT)
    printed = abs(val - target)
    ok = max(errs) <= 1e-3 and printed > 1e-3
    conclude(5, ok, f"max error {max(errs):.1e} <= 1e-3 with n=2 constant {N2_CONSTANT:.6f}; "
                    f"printed constant error {printed:.3f}", start, 60)


def test_criterion_06_potential_identities():
    start = time.perf_counter()
    worst = 0.0
    for n in (2, 3):
        for q in range(n + 1):
            for s in range(5):
                rng = np.random.default_rng(600 + 100 * n + 10 * q + s)
                f = d(bump_form(rng, n, q)) if q < n else None
                g = codifferential(bump_form(rng, n, q)) if q >= 1 else None
                rep = lemma_check(f, g, SPEC)
                worst = max(worst, *rep.residuals.values())
    conclude(6, worst <= 20 * TAU, f"max residual {worst:.2e} <= {20 * TAU:g} over 35 cases",
             start, 600)


def test_criterion_07_hodge_decomposition():
    start = time.perf_counter()
    res, cod = [], []
    for s, q in enumerate((1, 2, 1, 2, 1)):
        hd = hodge_decompose(bump_form(np.random.default_rng(700 + s), 3, q), SPEC)
        res.append(hd.residual)
        cod.append(hd.codiff_coexact)
    ok = max(res) <= 30 * TAU and max(cod) <= 30 * TAU
    conclude(7, ok, f"max |u - d*Phi^u - dPhi u| {max(res):.2e}, max |d*v| {max(cod):.2e} "
                    f"<= {30 * TAU:g}", start, 600)


def test_criterion_08_solvability_dichotomy():
    start = time.perf_counter()
    cob = 0.0
    for q in (0, 1):
        for m in (0, 1):
            rng = np.random.default_rng(800 + 10 * q + m)
            f = (d(bump_form(rng, 3, 0)) if q == 0
                 else d(codifferential(bump_form(rng, 3, q + 1))))
            cob = max(cob, moment_functional(f, m, q, SPEC).max_abs())
            u = bump_form(rng, 3, q)
            cob = max(cob, solvability_check(d(u), codifferential(u) if q else None, m,
                                             SPEC).max_abs)
    weakest = math.inf
    for m in (0, 1):
        for key in generator_keys(3, 0, m):
            weakest = min(weakest, solvability_check(generator(3, *key), None, m, SPEC).max_abs)
    ok = cob <= 10 * TAU and weakest > 10 * TAU
    conclude(8, ok, f"coboundary max pairing {cob:.1e} <= {10 * TAU:g}; weakest generator "
                    f"pairing {weakest:.4f} > {10 * TAU:g}", start, 300)


def test_criterion_09_class_map():
    start = time.perf_counter()
    gaps, same = [], []
    for n, m in ((2, 0), (3, 0), (3, 1)):
        keys = generator_keys(n, 0, m)
        for s, key in enumerate(keys[:3]):
            u = bump_form(np.random.default_rng(900 + 10 * n + s), n, 0)
            gaps.append(class_map_consistency(generator(n, *key), u, m, SPEC).max_gap)
        projected = [project_class(generator(n, *k), m, SPEC, rationalize=1000).form
                     for k in keys]
        same += [(n, m, a, b) for a in range(len(keys)) for b in range(a)
                 if projected[a].equals_outer(projected[b])]
    iso, inj = 0.0, math.inf
    for key in generator_keys(3, 0, 0):
        g = generator(3, *key)
        iso = max(iso, project_class(g, 0, SPEC, window=classify_delta(3, 1.5)).max_coefficient)
        inj = min(inj, project_class(g, 0, SPEC, window=classify_delta(3, 2.5)).max_coefficient)
    u = bump_form(np.random.default_rng(990), 3, 0)
    iso = max(iso, project_class(d(u), 0, SPEC, window=0.5).max_coefficient)
    ok = max(gaps) <= 20 * TAU and not same and iso <= 10 * TAU and inj > 10 * TAU
    conclude(9, ok, f"invariance gap {max(gaps):.1e} <= {20 * TAU:g}; coinciding projections "
                    f"{len(same)}; isomorphism window {iso:.1e} (injection {inj:.3f})",
             start, 300)


def test_criterion_10_window_classifier():
    start = time.perf_counter()
    with (DATA / "delta_windows.csv").open() as fh:
        rows = list(csv.DictReader(fh))
    wrong = 0
    for row in rows:
        win = classify_delta(int(row["n"]), int(row["k"]) / 10)
        expected_m = int(row["m"]) if row["m"] else None
        wrong += win.kind != row["window"] or win.m != expected_m
    conclude(10, len(rows) == 240 and wrong == 0, f"{len(rows)} cases, {wrong} mismatches",
             start, 1)


def _aniso_sample(rng, n, times):
    a, b = (Fraction(float(v)).limit_denominator(100) for v in rng.uniform(0.2, 2.0, 2))
    center = [Fraction(float(v)).limit_denominator(10) for v in rng.uniform(-0.5, 0.5, n)]
    g = Field.gaussian(n, 1, center)

    def at(t):
        t = Fraction(float(t)).limit_denominator(10 ** 6)
        return Form(n, 1, {(1,): g * (a + b * t), (n,): g * Field.var(n, 0) * (t * t)})
    return TimeSampledForm.from_function(at, times)


def test_criterion_11_anisotropic_suite():
    start = time.perf_counter()
    lam, T = 0.5, 1.0
    coherent = all(
        aniso_representative_basis(n, q + 1, m, {key: lambda t: t ** (lam / 2),
                                                 keys[-1]: lambda t: 1 + t},
                                   T, "C^{s,lam/2}", lam=lam).coherent()
        for n, q, m in ((2, 0, 0), (3, 0, 1), (3, 1, 0))
        for keys in [generator_keys(n, q, m)] for key in keys[:1])
    verdicts = [verify_time_class(lambda t: t, T, "C^{s,0}", lam).accepted,
                verify_time_class(lambda t: t, T, "C^{s,lam/2}", lam).accepted,
                verify_time_class(lambda t: t ** (lam / 2), T, "C^{s,lam/2}", lam).accepted,
                not verify_time_class(lambda t: t ** (lam / 4), T, "C^{s,lam/2}", lam).accepted]
    grid = make_grid(2, 0)
    times = make_time_grid(T).times
    rng = np.random.default_rng(11)
    additive, monotone = True, 0
    for i in range(10):
        u = _aniso_sample(rng, 2, times)
        if i < 3:
            du, su = u.map(d), u.map(codifferential)
            total = gamma_norm(u, du, su, 0, 0, lam, 0.25, 1.0, grid).value
            additive &= total == (aniso_norm(u, 0, 0, lam, 0.25, 1.0, grid).value
                                  + aniso_norm(du, 0, 0, lam, 0.25, 2.0, grid).value
                                  + aniso_norm(su, 0, 0, lam, 0.25, 2.0, grid).value)
        monotone += (aniso_norm(u, 0, 0, lam, 0.0, 1.0, grid).value
                     <= aniso_norm(u, 0, 0, lam, lam / 2, 1.0, grid).value)
    ok = coherent and all(verdicts) and additive and monotone == 10
    conclude(11, ok, f"coherent={coherent} time-class={verdicts} gamma-additive={additive} "
                     f"mu-monotone {monotone}/10", start, 300)


def _gaussian_sup_oracle(delta):
    res = minimize_scalar(lambda r: -(1 + r * r) ** (delta / 2) * math.exp(-r * r),
                          bounds=(0, 10), method="bounded", options={"xatol": 1e-12})
    return max(1.0, -res.fun)


def test_criterion_12_norm_estimators():
    start = time.perf_counter()
    unit = 0.0
    for n in (2, 3):
        for delta in (0.5, 2.0, 5.0):
            u = Form.scalar(SampledField(n, lambda X, dl=delta: weight(X) ** -dl))
            unit = max(unit, abs(weighted_sup_norm(u, 0, delta, make_grid(n, 0)).value - 1.0))
    rel = 0.0
    for n in (2, 3):
        for delta in (1.0, 3.0, 5.0):
            est = weighted_sup_norm(Form.scalar(Field.gaussian(n, 1)), 0, delta,
                                    make_grid(n, 1)).value
            oracle = _gaussian_sup_oracle(delta)
            rel = max(rel, abs(est - oracle) / oracle)
    shifted = Form.scalar(Field.gaussian(2, 1, [Fraction(1, 3), Fraction(1, 5)]))
    levels = [isotropic_norm(shifted, 1, 0.5, 1.5, make_grid(2, lv)).value for lv in range(3)]
    monotone = levels[0] <= levels[1] <= levels[2]
    ok = unit <= 1e-14 and rel <= 0.05 and monotone
    conclude(12, ok, f"unit-weight error {unit:.1e}; Gaussian relative error {rel:.3%} <= 5%; "
                     f"refinement {['%.4f' % v for v in levels]}", start, 60)


if __name__ == "__main__":
    failures = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion_"):
            try:
                fn()
            except AssertionError:
                failures += 1
    raise SystemExit(1 if failures else 0)
