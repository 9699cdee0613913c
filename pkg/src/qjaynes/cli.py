"""Command-line interface.

Commands: ``analyze``, ``evolve``, ``fit``, ``verify`` and ``examples``. A
single JSON report goes to standard output; ``--verbose`` adds a short
summary on standard error.

Exit codes: 0 success, 1 verification failure, 2 bad input, 3 numerical
failure, 4 infeasible or boundary moment targets.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import __version__, tolerances
from .attractors import (
    AttractorError,
    asymptotic_trajectory,
    decompose,
    maximally_mixed_trajectory,
    regime_time,
)
from .channels import canonical_examples
from .files import (
    SCHEMA_VERSION,
    FileFormatError,
    dumps,
    finite_or_text,
    load_channel,
    matrix_to_data,
    parse_constraints,
    parse_state,
    read_document,
    serialize_channel,
)
from .jaynes import (
    CONVERGED,
    DependentConstraintsError,
    ReconstructionError,
    asymptotic_times,
    entropy_report,
    gibbs_state,
    reconstruct_known_state,
    reconstruct_partial,
    reconstruct_stationary,
)
from .motion import MotionBasisError, constant_from_operator, motion_basis
from .operators import DensityMatrixError, validate_density
from .process import DISCRETE, InvalidProcessError, check_time, evolve, unitality_error
from .verify import FAST, FULL, all_passed, run_suite

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_INPUT = 2
EXIT_NUMERICAL = 3
EXIT_INFEASIBLE = 4


class InputError(Exception):
    pass


class NumericalError(Exception):
    pass


def _complex(z) -> list:
    return [float(np.real(z)), float(np.imag(z))]


def spec_summary(spec) -> dict:
    out = {"kind": spec.kind, "dim": spec.dim, "label": spec.label}
    if spec.kind == DISCRETE:
        out["kraus_count"] = len(spec.kraus)
    else:
        out["lindblad_count"] = len(spec.lindblad_ops)
    out["unital"] = bool(unitality_error(spec) <= tolerances.current().tp)
    if spec.meta:
        out["meta"] = dict(spec.meta)
    return out


def analysis_section(dec, basis) -> dict:
    spectrum = []
    for ev in dec.eigenvalues:
        spectrum.append({
            "lambda": _complex(ev.lam),
            "rate": None if ev.rate is None else _complex(ev.rate),
            "omega": float(ev.omega),
            "multiplicity": int(ev.multiplicity),
        })
    sigma_traj = maximally_mixed_trajectory(dec)
    members = []
    for c in basis.constants:
        members.append({
            "label": c.label,
            "parity": c.parity,
            "integral": c.integral,
            "omega": float(c.eigenvalue.omega) if c.eigenvalue is not None else 0.0,
            "C0": matrix_to_data(c(0)),
        })
    return {
        "spectrum": spectrum,
        "dim_attractor": dec.dim_attractor,
        "spectral_gap": None if dec.spectral_gap is None else float(dec.spectral_gap),
        "regime_time": regime_time(dec),
        "t_projector_rank": dec.t_projector.rank,
        "t_projector": matrix_to_data(dec.t_projector.op),
        "sigma_I": matrix_to_data(dec.t_state),
        "sigma_I_trajectory_stationary": sigma_traj.is_stationary,
        "motion_basis": {"size": len(basis), "labels": basis.labels(), "members": members},
    }


def _header(command: str, args) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "tool": f"qjaynes {__version__}",
        "command": command,
        "input": str(args.input),
        "tolerance_overrides": dict(sorted(args.overrides.items())),
    }


def _load_spec(args, check: bool = True):
    try:
        return load_channel(args.input, check=check)
    except (FileFormatError, InvalidProcessError) as exc:
        raise InputError(str(exc)) from None


def _analyze_spec(spec):
    try:
        dec = decompose(spec)
        basis = motion_basis(dec)
    except (AttractorError, MotionBasisError, np.linalg.LinAlgError) as exc:
        raise NumericalError(str(exc)) from None
    return dec, basis


def _load_state(path, dim: int) -> np.ndarray:
    try:
        rho = parse_state(read_document(path), dim)
        return validate_density(rho)
    except FileFormatError as exc:
        raise InputError(f"state file {path}: {exc}") from None
    except DensityMatrixError as exc:
        raise InputError(f"state file {path}: {exc}") from None


def _parse_times(text: str, kind: str) -> list:
    times = []
    for item in text.split(","):
        item = item.strip()
        try:
            times.append(check_time(kind, float(item)))
        except ValueError as exc:
            raise InputError(f"--times: {exc}" if item else "--times: empty entry") from None
    return times


# ---------------------------------------------------------------- commands

def cmd_analyze(args) -> tuple[dict, int]:
    spec = _load_spec(args)
    dec, basis = _analyze_spec(spec)
    report = _header("analyze", args)
    report["spec"] = spec_summary(spec)
    report["analysis"] = analysis_section(dec, basis)
    return report, EXIT_OK


def cmd_evolve(args) -> tuple[dict, int]:
    spec = _load_spec(args)
    rho0 = _load_state(args.state, spec.dim)
    times = _parse_times(args.times, spec.kind)
    dec, basis = _analyze_spec(spec)
    traj = asymptotic_trajectory(dec, rho0)
    samples = []
    for t in times:
        brute = evolve(spec, rho0, t, validate=False)
        asym = traj(t)
        samples.append({
            "t": t,
            "brute_force": matrix_to_data(brute),
            "asymptotic": matrix_to_data(asym),
            "discrepancy": float(np.linalg.norm(brute - asym)),
        })
    report = _header("evolve", args)
    report["spec"] = spec_summary(spec)
    report["analysis"] = analysis_section(dec, basis)
    report["samples"] = samples
    return report, EXIT_OK


def _resolve_constraints(entries, dec, basis):
    subset = []
    for n, entry in enumerate(entries):
        if entry["key"] == "state":
            continue
        try:
            if entry["operator"] is not None:
                c = constant_from_operator(dec, entry["operator"], f"operator[{n}]")
            else:
                c = basis.get(entry["key"])
        except (KeyError, ValueError) as exc:
            raise InputError(f"constraints[{n}]: {exc}") from None
        subset.append((c, entry["target"]))
    return subset


def cmd_fit(args) -> tuple[dict, int]:
    spec = _load_spec(args)
    entries = []
    if args.constraints:
        try:
            entries = parse_constraints(read_document(args.constraints), spec.dim)
        except FileFormatError as exc:
            raise InputError(f"constraints file {args.constraints}: {exc}") from None
    dec, basis = _analyze_spec(spec)
    subset = _resolve_constraints(entries, dec, basis)
    rho0 = None
    if args.mode == "known":
        if args.state:
            rho0 = _load_state(args.state, spec.dim)
        else:
            given = [e["operator"] for e in entries if e["key"] == "state"]
            if not given:
                raise InputError("known mode needs an initial state (--state or a 'state' field)")
            try:
                rho0 = validate_density(given[0])
            except DensityMatrixError as exc:
                raise InputError(f"state: {exc}") from None
    elif args.mode == "stationary":
        for c, _ in subset:
            if not c.integral:
                raise InputError(f"{c.label} is not an integral of motion; stationary mode takes integrals only")
    try:
        if args.mode == "known":
            model = reconstruct_known_state(spec, dec, basis, rho0)
        elif args.mode == "partial":
            model = reconstruct_partial(spec, dec, subset)
        else:
            model = reconstruct_stationary(spec, dec, subset)
    except DependentConstraintsError as exc:
        raise NumericalError(str(exc)) from None
    except (ReconstructionError, AttractorError, np.linalg.LinAlgError) as exc:
        raise NumericalError(str(exc)) from None

    result = model.fit
    constraints = []
    for j, c in enumerate(model.constraints):
        constraints.append({
            "label": c.label,
            "integral": c.integral,
            "target": float(model.targets[j]),
            "gamma": float(result.gammas[j]),
            "achieved": float(result.achieved_moments[j]),
        })
    payload = {
        "mode": args.mode,
        "status": result.status,
        "iterations": result.iterations,
        "residual": float(result.residual_norm),
        "log_partition": float(result.log_partition),
        "min_hessian_eig": float(result.min_hessian_eig),
        "t_eval": model.t_eval,
        "constraints": constraints,
    }
    report = _header("fit", args)
    report["spec"] = spec_summary(spec)
    report["analysis"] = analysis_section(dec, basis)
    report["fit"] = payload
    if result.status != CONVERGED:
        report["entropy"] = None
        report["samples"] = []
        return report, EXIT_INFEASIBLE
    try:
        ent = entropy_report(model, model.t_eval)
    except ReconstructionError as exc:
        raise NumericalError(str(exc)) from None
    report["entropy"] = {"t": model.t_eval, "S": finite_or_text(ent.S), "check": float(ent.check)}
    times = [0] if args.mode == "stationary" else asymptotic_times(dec, model.t_eval)
    report["samples"] = [{"t": t, "state": matrix_to_data(gibbs_state(model, t))} for t in times]
    return report, EXIT_OK


def cmd_verify(args) -> tuple[dict, int]:
    # broken processes are loaded unvalidated so the suite can report them
    spec = _load_spec(args, check=False)
    results = run_suite(spec, suite=args.suite, seed=args.seed)
    checks = []
    for r in results:
        status = "skip" if r.passed is None else ("pass" if r.passed else "fail")
        checks.append({
            "name": r.name,
            "status": status,
            "residual": None if r.residual is None else finite_or_text(r.residual),
            "tolerance": float(r.tolerance),
            "detail": r.detail,
        })
    report = _header("verify", args)
    report["spec"] = {"kind": spec.kind, "dim": spec.dim, "label": spec.label}
    report["suite"] = args.suite
    report["seed"] = args.seed
    report["passed"] = all_passed(results)
    report["checks"] = checks
    return report, EXIT_OK if report["passed"] else EXIT_VERIFY


def cmd_examples(args) -> tuple[dict, int]:
    out = Path(args.out)
    written = []
    try:
        out.mkdir(parents=True, exist_ok=True)
        for stem, spec in canonical_examples(args.seed).items():
            path = out / f"{stem}.json"
            path.write_text(serialize_channel(spec), encoding="utf-8")
            written.append(path.name)
    except OSError as exc:
        raise InputError(f"cannot write examples to {out}: {exc.strerror or exc}") from None
    report = {
        "schema_version": SCHEMA_VERSION,
        "tool": f"qjaynes {__version__}",
        "command": "examples",
        "out": str(out),
        "seed": args.seed,
        "files": written,
    }
    return report, EXIT_OK


# ---------------------------------------------------------------- entry point

def _summary(report: dict) -> str:
    lines = [f"{report['command']}: {report.get('input', report.get('out', ''))}"]
    analysis = report.get("analysis")
    if analysis:
        lines.append(
            f"  attractor dimension {analysis['dim_attractor']}, gap {analysis['spectral_gap']}, "
            f"P rank {analysis['t_projector_rank']}, basis {', '.join(analysis['motion_basis']['labels'])}"
        )
    if "samples" in report and report["command"] == "evolve":
        for s in report["samples"]:
            lines.append(f"  t = {s['t']}: discrepancy {s['discrepancy']:.3e}")
    if "fit" in report:
        f = report["fit"]
        lines.append(f"  fit {f['mode']}: {f['status']} after {f['iterations']} iterations, residual {f['residual']:.3e}")
    if "checks" in report:
        for c in report["checks"]:
            res = "-" if c["residual"] is None else f"{c['residual']:.3e}" if isinstance(c["residual"], float) else c["residual"]
            lines.append(f"  {c['status']:4s} {c['name']:30s} {res}")
    if "files" in report:
        lines.append(f"  wrote {len(report['files'])} files")
    return "\n".join(lines)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-override", action="append", metavar="KEY=VALUE", default=argparse.SUPPRESS,
                        help=f"override a tolerance ({', '.join(tolerances.names())}); repeatable")
    common.add_argument("--verbose", action="store_true", default=argparse.SUPPRESS,
                        help="print a human-readable summary on standard error")

    parser = argparse.ArgumentParser(prog="qjaynes", description=__doc__.splitlines()[0], parents=[common])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", parents=[common], help="attractors, T-state and constants of motion")
    p.add_argument("input", help="channel file")
    p.set_defaults(handler=cmd_analyze)

    p = sub.add_parser("evolve", parents=[common], help="brute-force and asymptotic evolution of a state")
    p.add_argument("input", help="channel file")
    p.add_argument("--state", required=True, help="initial state file")
    p.add_argument("--times", required=True, help="comma-separated times, e.g. 0,10,200")
    p.set_defaults(handler=cmd_evolve)

    p = sub.add_parser("fit", parents=[common], help="generalized Gibbs reconstruction")
    p.add_argument("input", help="channel file")
    p.add_argument("--constraints", help="constraints file")
    p.add_argument("--state", help="initial state file (known mode)")
    p.add_argument("--mode", choices=["known", "partial", "stationary"], default="partial")
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("verify", parents=[common], help="run the invariant checks")
    p.add_argument("input", help="channel file")
    p.add_argument("--suite", choices=[FULL, FAST], default=FULL)
    p.add_argument("--seed", type=int, default=0, help="seed for random test states")
    p.set_defaults(handler=cmd_verify)

    p = sub.add_parser("examples", parents=[common], help="write the canonical example channels")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=20240607, help="seed of the random two-qubit channel")
    p.set_defaults(handler=cmd_examples)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    verbose = getattr(args, "verbose", False)
    try:
        args.overrides = tolerances.parse_overrides(getattr(args, "tol_override", []))
    except ValueError as exc:
        print(f"qjaynes: error: --tol-override: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        with tolerances.override(**args.overrides):
            report, code = args.handler(args)
    except InputError as exc:
        print(f"qjaynes: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalError as exc:
        print(f"qjaynes: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    sys.stdout.write(dumps(report))
    if verbose:
        print(_summary(report), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
