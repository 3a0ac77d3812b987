"""Command-line entry point: ``derham <subcommand> [flags]``.

Every subcommand builds a :class:`Report`; the exit status is 1 iff a check
fails (2 for configuration errors).  Data artifacts (Form JSON, CSV tables)
are written to ``--out`` or printed when no directory is given.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import suite
from .bumps import bump_form
from .cohomology import (aniso_representative_basis, generator_keys, project_class,
                         representative_basis, solvability_check)
from .exterior import Form, codifferential, d, form_from_json, form_to_json
from .fields import Field
from .harmonics import gram_matrix, harmonic_basis, harmonic_qform_space, laplacian_rank_dim
from .kernels import expansion_table
from .potentials import hodge_decompose, lemma_check, moment_functional
from .quadrature import QuadratureSpec
from .report import FAIL, PASS, Check, Report, emit
from .spaces import (TimeSampledForm, aniso_norm, classify_delta, gamma_norm, isotropic_norm,
                     make_grid, make_time_grid)

__all__ = ["main", "build_parser"]


def _floats(text: str) -> list:
    return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]


def _common(p: argparse.ArgumentParser, suppress: bool = False) -> None:
    # run-suite suppresses defaults so only flags given explicitly override the config
    def dv(v):
        return argparse.SUPPRESS if suppress else v

    p.add_argument("--n", type=int, default=dv(3))
    p.add_argument("--q", type=int, default=dv(0),
                   help="form degree (for cohomology-basis: degree of the representatives)")
    p.add_argument("--m", type=int, default=dv(0))
    p.add_argument("--delta", type=str, default=dv(None), help="weight exponent (comma list allowed)")
    p.add_argument("--lambda", dest="lam", type=float, default=dv(0.5))
    p.add_argument("--mu", type=float, default=dv(0.25))
    p.add_argument("--T", type=float, default=dv(1.0))
    p.add_argument("--R", type=float, default=dv(None), help="quadrature truncation radius")
    p.add_argument("--eps", type=float, default=dv(None), help="singular shell radius")
    p.add_argument("--tol", type=float, default=dv(None), help="quadrature tolerance tau")
    p.add_argument("--workers", type=int, default=dv(None))
    p.add_argument("--seed", type=int, default=dv(7))
    p.add_argument("--input", type=str, default=dv(None), help="Form JSON file used as input")
    p.add_argument("--out", type=str, default=dv(None), help="output directory")
    p.add_argument("--format", choices=("json", "csv", "plot-data"), default="json")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="derham", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    specs = {
        "verify-algebra": "exact identities of d, d* and the Hodge star",
        "harmonic-basis": "orthonormal harmonic basis (Form JSON) and its Gram matrix (CSV)",
        "kernel-expansion": "convergence table of the harmonic expansion of e(x - y)",
        "potential-check": "residuals of the potential identities for a closed form",
        "hodge-decompose": "split a form into exact and co-exact parts",
        "moments": "moment table of a closed form",
        "norm-estimate": "grid estimate of a weighted norm",
        "classify": "weight window of delta",
        "cohomology-basis": "explicit representatives and the exact rank of their span",
        "solvability": "pairing table of the solvability condition",
        "aniso-check": "time-class and anisotropic norm checks",
        "run-suite": "run the configurable verification suite",
    }
    for name, help_ in specs.items():
        p = sub.add_parser(name, help=help_)
        _common(p, suppress=name == "run-suite")
        if name == "harmonic-basis":
            p.add_argument("--k", type=int, default=None, help="degree (defaults to --m)")
        if name == "kernel-expansion":
            p.add_argument("--x", type=str, default=None)
            p.add_argument("--y", type=str, default=None)
            p.add_argument("--max-m", type=int, default=40)
        if name == "norm-estimate":
            p.add_argument("--space", choices=("iso", "aniso", "gamma"), default="iso")
            p.add_argument("--s", type=int, default=0)
            p.add_argument("--level", type=int, default=0)
        if name == "cohomology-basis":
            p.add_argument("--aniso", action="store_true")
            p.add_argument("--time-class", choices=("C^{s,0}", "C^{s,lam/2}"), default="C^{s,0}")
        if name == "solvability":
            p.add_argument("--input-g", type=str, default=None, help="Form JSON for g")
        if name == "run-suite":
            p.add_argument("--config", type=str, default=None)
            p.add_argument("--checks", type=str, default=argparse.SUPPRESS, help="comma list of check groups")
    return parser


def _spec(args) -> QuadratureSpec:
    kw = {k: getattr(args, k) for k in ("R", "eps", "tol", "workers") if getattr(args, k) is not None}
    return QuadratureSpec(**kw)


def _load_form(path: str | None) -> Form | None:
    return form_from_json(Path(path).read_text()) if path else None


def _delta(args, default: float) -> float:
    return _floats(args.delta)[0] if args.delta else default


def _write_artifact(args, name: str, text: str) -> None:
    if args.out:
        Path(args.out).mkdir(parents=True, exist_ok=True)
        (Path(args.out) / name).write_text(text)
    else:
        sys.stdout.write(text)


def _csv(columns: list, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    w.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# subcommands

def _verify_algebra(args, report: Report) -> None:
    cfg = suite.SuiteConfig(n=[args.n], q=[q for q in range(min(args.n, 2))], seed=args.seed,
                            checks=["algebra"])
    report.add(*suite.CHECK_RUNNERS["algebra"](cfg, report))


def _harmonic_basis(args, report: Report) -> None:
    n = args.n
    k = args.m if args.k is None else args.k
    basis = harmonic_basis(n, k)
    G = gram_matrix(basis)
    identity = all(G[i][j] == (1 if i == j else 0) for i in range(len(G)) for j in range(len(G)))
    report.add(Check.exact("gram_identity", "orthonormal harmonic basis", {"n": n, "k": k},
                           identity))
    report.add(Check.exact("dimension", "harmonic polynomial spaces", {"n": n, "k": k},
                           len(basis) == laplacian_rank_dim(n, k), len(basis)))
    docs = [{"j": h.j, "norm_sq": str(h.norm_sq), "form": form_to_json(Form(n, 0, {(): h.field()}))}
            for h in basis]
    _write_artifact(args, f"harmonic_basis_n{n}_k{k}.json", json.dumps(docs, indent=2) + "\n")
    _write_artifact(args, f"gram_n{n}_k{k}.csv",
                    _csv([f"h{j + 1}" for j in range(len(G))], [[str(v) for v in row] for row in G]))
    if args.q:
        forms = harmonic_qform_space(n, k, args.q)
        _write_artifact(args, f"harmonic_qforms_n{n}_m{k}_q{args.q}.json",
                        json.dumps([form_to_json(f) for f in forms], indent=2) + "\n")


def _kernel_expansion(args, report: Report) -> None:
    n = args.n
    x = np.array(_floats(args.x)) if args.x else np.eye(n)[0] * 4.0
    y = np.array(_floats(args.y)) if args.y else np.eye(n)[0]
    rows = expansion_table(n, x, y, args.max_m)
    report.add_series("expansion", ["m", "remainder", "ratio"],
                      [(m, rem, ratio) for m, _, rem, ratio in rows])
    _write_artifact(args, "expansion.csv",
                    _csv(["m", "partial_sum", "remainder", "ratio"],
                         [(m, repr(float(p)), repr(float(r)), repr(float(q))) for m, p, r, q in rows]))
    inputs = {"n": n, "x": x, "y": y, "max_m": args.max_m}
    tol = args.tol if args.tol is not None else 1e-6
    final = rows[-1][2]
    if args.max_m >= 40:
        report.add(Check.compare("final_remainder", "harmonic expansion of e(x - y)", inputs,
                                 final, tol))
    else:
        report.add(Check.skipped("final_remainder", "harmonic expansion of e(x - y)", inputs,
                                 "fewer than 40 terms requested"))
    rems = [r[2] for r in rows]
    report.add(Check.exact("remainder_nonincreasing", "harmonic expansion of e(x - y)", inputs,
                           all(b <= a * (1 + 1e-12) + 1e-300 for a, b in zip(rems, rems[1:]))))


def _potential_check(args, report: Report) -> None:
    n, q, spec = args.n, args.q, _spec(args)
    f = _load_form(args.input)
    rng = np.random.default_rng(args.seed)
    if f is None:
        f = d(bump_form(rng, n, q))
        g = codifferential(bump_form(rng, n, q)) if q >= 1 else None
    else:
        g = None
    rep = lemma_check(f, g, spec)
    for name, v in rep.residuals.items():
        report.add(Check.compare(name, "potential identities", {"n": n, "q": q, "seed": args.seed},
                                 v, rep.budget))


def _hodge(args, report: Report) -> None:
    n, q, spec = args.n, args.q, _spec(args)
    u = _load_form(args.input) or bump_form(np.random.default_rng(args.seed), n, q)
    hd = hodge_decompose(u, spec, delta=_delta(args, n / 2 + 0.5))
    inputs = {"n": n, "q": u.degree, "seed": args.seed}
    budget = 30 * spec.tol
    report.add(Check.compare("decomposition_residual", "Hodge decomposition", inputs,
                             hd.residual, budget))
    report.add(Check.compare("coexact_part_coclosed", "Hodge decomposition", inputs,
                             hd.codiff_coexact, budget))
    report.add(Check.compare("coexact_part_solves_dv_eq_du", "Hodge decomposition", inputs,
                             hd.d_coexact_minus_du, budget))


def _moments(args, report: Report) -> None:
    n, q, m, spec = args.n, args.q, args.m, _spec(args)
    f = _load_form(args.input) or d(bump_form(np.random.default_rng(args.seed), n, q))
    tab = moment_functional(f, m, q, spec)
    rows = [(k, j, "".join(map(str, I)) or "-", repr(tab.raw[(k, j, I)]), repr(v))
            for (k, j, I), v in sorted(tab.entries.items())]
    _write_artifact(args, "moment_table.csv", _csv(["k", "j", "I", "raw", "coefficient"], rows))
    report.add(Check.compare("moment_tail", "plumbing", {"n": n, "q": q, "m": m},
                             tab.tail_estimate, spec.tol))


def _sample_form(n: int) -> Form:
    return Form(n, 1, {(i + 1,): Field.gaussian(n, 1) * Field.var(n, (i + 1) % n)
                       for i in range(n)})


def _norm_estimate(args, report: Report) -> None:
    n = args.n
    delta = _delta(args, 1.0)
    grid = make_grid(n, args.level)
    u = _load_form(args.input) or _sample_form(n)
    inputs = {"n": n, "delta": delta, "lam": args.lam, "mu": args.mu, "space": args.space,
              "level": args.level}
    if args.space == "iso":
        est = isotropic_norm(u, args.s, args.lam, delta, grid)
    else:
        times = make_time_grid(args.T, 0).times
        ut = TimeSampledForm.from_function(
            lambda t: u * Fraction(1 + t).limit_denominator(10 ** 6), times)
        if args.space == "aniso":
            est = aniso_norm(ut, 0, args.s, args.lam, args.mu, delta, grid)
        else:
            est = gamma_norm(ut, ut.map(d), ut.map(codifferential), 0, args.s, args.lam,
                             args.mu, delta, grid)
    report.add_series("components", ["component", "value"], sorted(est.components.items()))
    report.add(Check.compare("estimate_finite", "weighted Hoelder spaces", inputs,
                             est.value, float("inf")))


def _classify(args, report: Report) -> None:
    deltas = _floats(args.delta) if args.delta else [0.5]
    for delta in deltas:
        win = classify_delta(args.n, delta)
        report.add(Check(f"delta{delta:g}", "weight windows", {"n": args.n, "delta": delta},
                         str(win), "window", PASS))


def _cohomology_basis(args, report: Report) -> None:
    n, q, m = args.n, args.q, args.m
    q_out = q if q >= 1 else 1
    delta = _floats(args.delta)[0] if args.delta else None
    basis = representative_basis(n, q_out, m, delta=delta)
    inputs = {"n": n, "q_out": q_out, "m": m}
    report.add(Check("rank", "finite-dimensional cohomology", inputs,
                     {"rank": basis.rank, "bound": basis.upper_bound, "members": len(basis)},
                     "rank <= bound", PASS if basis.rank <= basis.upper_bound else FAIL))
    docs = [{"key": [k, j, list(I)], "form": form_to_json(f)}
            for (k, j, I), f in zip(basis.keys, basis.members)]
    _write_artifact(args, f"cohomology_basis_n{n}_q{q_out}_m{m}.json",
                    json.dumps(docs, indent=2) + "\n")
    if args.aniso:
        lam = args.lam
        fn = (lambda t: t) if args.time_class == "C^{s,0}" else (lambda t: t ** (lam / 2))
        rep = aniso_representative_basis(n, q_out, m, {basis.keys[0]: fn}, args.T,
                                         args.time_class, lam=lam)
        report.add(Check.exact("aniso_slice_coherence", "time-dependent cohomology",
                               {**inputs, "T": args.T, "time_class": args.time_class},
                               rep.coherent()))


def _solvability(args, report: Report) -> None:
    n, q, m, spec = args.n, args.q, args.m, _spec(args)
    f, g = _load_form(args.input), _load_form(args.input_g)
    if f is None and g is None:
        # default: the coboundary pair (d u, d* u), for which every pairing vanishes
        u = bump_form(np.random.default_rng(args.seed), n, q)
        f = d(u) if q < n else None
        g = codifferential(u) if q >= 1 else None
    rep = solvability_check(f, g, m, spec)
    _write_artifact(args, "pairing_table.csv",
                    _csv(["t", "k", "j", "I", "pairing"],
                         [("" if t is None else t, k, j, I, repr(v)) for t, k, j, I, v in rep.rows()]))
    report.add(Check.compare("max_pairing", "solvability condition",
                             {"n": n, "q": rep.q, "m": m, "seed": args.seed},
                             rep.max_abs, rep.threshold))


def _aniso_check(args, report: Report) -> None:
    cfg = suite.SuiteConfig(n=[args.n], q=[min(args.q, args.n - 1)], m=[args.m], lam=args.lam,
                            mu=args.mu, T=args.T, checks=["aniso"])
    report.add(*suite.CHECK_RUNNERS["aniso"](cfg, report))


_SUITE_FLAGS = {"n": "n", "q": "q", "m": "m", "delta": "delta", "lam": "lam", "mu": "mu",
                "T": "T", "R": "R", "eps": "eps", "tol": "tol", "workers": "workers",
                "seed": "seed", "out": "out", "checks": "checks"}


def _run_suite(args) -> Report:
    given = vars(args)
    overrides = {key: str(given[flag]) for flag, key in _SUITE_FLAGS.items() if flag in given}
    cfg = suite.load_config(getattr(args, "config", None), overrides)
    return suite.run_suite(cfg)


HANDLERS = {
    "verify-algebra": _verify_algebra, "harmonic-basis": _harmonic_basis,
    "kernel-expansion": _kernel_expansion, "potential-check": _potential_check,
    "hodge-decompose": _hodge, "moments": _moments, "norm-estimate": _norm_estimate,
    "classify": _classify, "cohomology-basis": _cohomology_basis,
    "solvability": _solvability, "aniso-check": _aniso_check,
}


def main(argv: list | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "run-suite":
            report = _run_suite(args)
        else:
            report = Report(args.command)
            HANDLERS[args.command](args, report)
    except suite.ConfigError as exc:
        for e in exc.errors:
            print(f"config error: {e}", file=sys.stderr)
        return 2
    out = getattr(args, "out", None)
    if out:
        for p in emit(report, getattr(args, "format", "json"), out):
            print(p, file=sys.stderr)
    for line in report.summary_lines():
        print(line, file=sys.stderr)
    return 0 if report.passed else 1


if __name__ == "__main__":
    sys.exit(main())
