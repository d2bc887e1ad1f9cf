"""Command-line front end.

Every subcommand writes its data to ``--out`` (CSV or JSON) and prints a
JSON summary on standard output.  Diagnostics go to standard error.
Exit codes: 0 success, 1 numerical or model error, 2 usage error.
"""
from __future__ import annotations

import argparse
import sys
import warnings
from pathlib import Path

import numpy as np

from . import io
from .carleman_dae import assemble, carleman_dae, det_product_check, validate_against_ode
from .carleman_ode import MAX_ORDER, ode_from_coefficients
from .errors import CarlemanError
from .expr import load_model
from .fixtures import FIXTURES, load_fixture, reference_fixture
from .kron import condensed_state_matrix
from .simulate import compare, constraint_residuals, simulate_dae, simulate_linear
from .spectral import combination_spectrum, eigenvalues, match_spectra, mode_report
from .taylor import analyze

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not v > 0 or not np.isfinite(v):
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _vector(text: str) -> list[float]:
    try:
        return [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    src = common.add_mutually_exclusive_group()
    src.add_argument("--fixture", choices=FIXTURES, help="bundled model")
    src.add_argument("--model", type=Path, help="JSON model document")
    common.add_argument("--order", type=int, choices=range(1, MAX_ORDER + 1), default=2, metavar="{1,2,3}")
    common.add_argument("--T", type=_positive, default=10.0, help="simulation length (s)")
    common.add_argument("--dt", type=_positive, default=0.01, help="time step (s)")
    common.add_argument("--x0", type=_vector, default=None, help="perturbation dx1,dx2,... from equilibrium")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--format", choices=("csv", "json"), default="csv")

    p = argparse.ArgumentParser(prog="daecarleman", description="Carleman linearization of DAE models.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("check", parents=[common], help="parse, find equilibrium, test regularity")
    sub.add_parser("coeffs", parents=[common], help="write the 18 coefficient blocks")
    sub.add_parser("build-ode", parents=[common], help="Carleman matrix of an ODE model")
    sub.add_parser("build-dae", parents=[common], help="lifted DAE blocks F11, F12, F21, F22")
    sub.add_parser("reduce", parents=[common], help="Kron-reduced matrix Ftilde11")
    sub.add_parser("simulate", parents=[common], help="nonlinear and lifted trajectories")
    sp = sub.add_parser("spectrum", parents=[common], help="eigenvalues and modal data")
    sp.add_argument("--compare", action="store_true", help="match against the combination spectrum")
    sub.add_parser("compare", parents=[common], help="RMS errors of lifted runs vs the nonlinear run")
    vp = sub.add_parser("validate", parents=[common], help="reference-ODE error and determinant identities")
    vp.add_argument("--reference", type=Path, help="substituted ODE model (defaults to the fixture's companion)")
    return p


# ---------------------------------------------------------------------------

def _load(args):
    if args.fixture:
        return load_fixture(args.fixture)
    if args.model:
        return load_model(args.model)
    raise UsageError("one of --fixture or --model is required")


def _perturbation(args, model) -> np.ndarray:
    if args.x0 is None:
        return np.full(model.N, -0.05)
    if len(args.x0) != model.N:
        raise UsageError(f"--x0 has {len(args.x0)} entries, model has {model.N} states")
    return np.array(args.x0)


def _outdir(args) -> Path:
    args.out.mkdir(parents=True, exist_ok=True)
    return args.out


def _emit(summary: dict):
    sys.stdout.write(io.dumps(summary))


def _write_matrices(args, mats: dict) -> list[str]:
    out = _outdir(args)
    return [io.write_matrix(out / name, A, args.format).name for name, A in mats.items()]


def cmd_check(args):
    model = _load(args)
    eq, coeffs = analyze(model)
    summary = {"model": model.name, "equilibrium": eq.to_dict(), "N": model.N, "M": model.M}
    if model.M:
        summary["det_H_1_4"] = coeffs.det_H14
        summary["regular"] = coeffs.det_H14 != 0.0
    _emit(summary)


def cmd_coeffs(args):
    model = _load(args)
    eq, coeffs = analyze(model)
    files = _write_matrices(args, dict(coeffs.blocks()))
    files.append(io.write_json(_outdir(args) / "equilibrium.json", eq.to_dict()).name)
    _emit({"model": model.name, "files": files})


def cmd_build_ode(args):
    model = _load(args)
    if model.M:
        raise UsageError("build-ode needs a model without algebraic variables; use build-dae")
    _, coeffs = analyze(model)
    sys_ = ode_from_coefficients(coeffs, args.order)
    files = _write_matrices(args, {"A_nord": sys_.A_nord, "A_nord_condensed": sys_.condensed()})
    _emit({"model": model.name, "order": args.order, "dim": sys_.A_nord.shape[0], "files": files})


def _dae_coeffs(args):
    model = _load(args)
    if not model.M:
        raise UsageError("model has no algebraic variables; use build-ode")
    eq, coeffs = analyze(model)
    return model, eq, coeffs


def cmd_build_dae(args):
    model, _, coeffs = _dae_coeffs(args)
    s = assemble(coeffs, order=args.order)
    files = _write_matrices(args, {"F": s.full, "F11": s.F11, "F12": s.F12, "F21": s.F21, "F22": s.F22})
    _emit({"model": model.name, "order": args.order, "shape": list(s.full.shape), "files": files})


def cmd_reduce(args):
    model, _, coeffs = _dae_coeffs(args)
    _, red = carleman_dae(coeffs, args.order)
    mats = {"Ftilde11": red.Ftilde11, "Ftilde11_condensed": red.condensed()}
    mats.update({f"Htilde_1_{k}": H for k, H in red.htilde.items()})
    files = _write_matrices(args, mats)
    _emit({
        "model": model.name,
        "order": args.order,
        "det_H_1_4": red.det_H14,
        "det_F22": red.det_F22,
        "cond_F22": red.cond_F22,
        "files": files,
    })


def _lifted_matrix(coeffs, order):
    if coeffs.M:
        return carleman_dae(coeffs, order)[1].Ftilde11
    return ode_from_coefficients(coeffs, order).A_nord


def _runs(args):
    model = _load(args)
    eq, coeffs = analyze(model)
    dx = _perturbation(args, model)
    ref = simulate_dae(model, eq.x_sep + dx, args.T, args.dt, z_guess=eq.z_sep)
    lifted = {
        L: simulate_linear(_lifted_matrix(coeffs, L), dx, model.N, L, args.T, args.dt, eq.x_sep)
        for L in range(1, args.order + 1)
    }
    return model, ref, lifted


def cmd_simulate(args):
    model, ref, lifted = _runs(args)
    out = _outdir(args)
    files = [io.write_trajectory_csv(out / "nonlinear.csv", ref, model.states, model.algebraics).name]
    for L, tr in lifted.items():
        files.append(io.write_trajectory_csv(out / f"lifted_order{L}.csv", tr, model.states).name)
    _emit({
        "model": model.name,
        "steps": int(ref.times.size - 1),
        "max_constraint_residual": float(np.max(constraint_residuals(model, ref))),
        "files": files,
    })


def cmd_compare(args):
    model, ref, lifted = _runs(args)
    report = {"model": model.name, "states": list(model.states)}
    report["orders"] = {str(L): compare(tr, ref).to_dict() for L, tr in lifted.items()}
    io.write_json(_outdir(args) / "compare.json", report)
    _emit(report)


def cmd_spectrum(args):
    model = _load(args)
    _, coeffs = analyze(model)
    base = eigenvalues(coeffs.reduced_jacobian())
    report = {"model": model.name, "order": args.order, "linear": mode_report(base, "A_1_1").to_dict()}
    if args.order > 1:
        lifted = condensed_state_matrix(_lifted_matrix(coeffs, args.order), model.N, args.order)
        lam = eigenvalues(lifted)
        report["lifted"] = mode_report(lam, "condensed Ftilde11").to_dict()
        if args.compare:
            report["match"] = match_spectra(lam, combination_spectrum(base, args.order), 1e-6).to_dict()
    out = _outdir(args)
    io.write_json(out / "spectrum.json", report)
    points = [("linear", l) for l in base]
    if args.order > 1:
        points += [("lifted", l) for l in lam]
        points += [("combination", l) for l in combination_spectrum(base, args.order)]
    with (out / "spectrum_points.csv").open("w") as fh:
        fh.write("set,re,im\n")
        for name, l in points:
            fh.write(f"{name},{io.fmt(l.real)},{io.fmt(l.imag)}\n")
    _emit(report)
    if args.compare and args.order > 1 and not report["match"]["passed"]:
        raise CarlemanError(f"spectrum mismatch: max distance {report['match']['max_distance']:.3e}")


def cmd_validate(args):
    model, eq, coeffs = _dae_coeffs(args)
    if args.reference:
        ref_model = load_model(args.reference)
    elif args.fixture and reference_fixture(args.fixture):
        ref_model = load_fixture(reference_fixture(args.fixture))
    else:
        ref_model = None
    report = {"model": model.name, "order": args.order}
    if ref_model is not None:
        _, ref_coeffs = analyze(ref_model)
        _, red = carleman_dae(coeffs, args.order)
        err = validate_against_ode(red, ode_from_coefficients(ref_coeffs, args.order))
        report["reference"] = ref_model.name
        report["percent_error"] = err
    else:
        print("no reference ODE model; skipping the matrix comparison", file=sys.stderr)
    dets = det_product_check(assemble(coeffs, order=3))
    report["determinants"] = dets.to_dict()
    report["determinants_ok"] = dets.ok
    io.write_json(_outdir(args) / "validate.json", report)
    _emit(report)
    if not dets.ok:
        raise CarlemanError("det(F22) does not match its block factorization")


COMMANDS = {
    "check": cmd_check,
    "coeffs": cmd_coeffs,
    "build-ode": cmd_build_ode,
    "build-dae": cmd_build_dae,
    "reduce": cmd_reduce,
    "simulate": cmd_simulate,
    "compare": cmd_compare,
    "spectrum": cmd_spectrum,
    "validate": cmd_validate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always")
            warnings.showwarning = _warn_to_stderr
            COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (CarlemanError, ArithmeticError, ValueError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_FAIL
    return EXIT_OK


def _warn_to_stderr(message, category, filename, lineno, file=None, line=None):
    print(f"warning: {category.__name__}: {message}", file=sys.stderr)


run = main
