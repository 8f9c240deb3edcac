"""Command-line front end.

Every command writes one JSON object (or a CSV table where noted) with the
resolved configuration echoed back.  Exit codes: 0 success, 2 invalid
arguments, 3 resource budget exceeded, 4 numerical validation failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
import tempfile
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import fock_boson as fb
from . import fock_fermion as ff
from . import matrix_model as mm
from . import moduli as md
from . import qseries as qs
from .errors import NumericalValidationError, ResourceBudgetError

EXIT_OK, EXIT_USAGE, EXIT_RESOURCE, EXIT_VALIDATION = 0, 2, 3, 4


class UsageError(ValueError):
    pass


# serialization ------------------------------------------------------------------


def _plain(obj):
    """Convert results to JSON-ready values: exact numbers become strings."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        return float(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    return obj


def _encode(obj, indent=0) -> str:
    pad = "  " * (indent + 1)
    end = "  " * indent
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(k)}: {_encode(v, indent + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, list):
        if not obj:
            return "[]"
        if all(not isinstance(v, (dict, list)) for v in obj):
            return "[" + ", ".join(_encode(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + _encode(v, indent + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, float):
        if math.isfinite(obj):
            text = format(obj, ".17g")
            return text if any(ch in text for ch in ".en") else text + ".0"
        return json.dumps(str(obj))
    return json.dumps(obj)


def dumps(obj) -> str:
    """JSON with floats written to 17 significant digits."""
    return _encode(_plain(obj)) + "\n"


def write_atomic(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format(v, ".17g") if isinstance(v, float) else v for v in row])
    return buf.getvalue()


# argument helpers -----------------------------------------------------------------


def load_matrix(source: str) -> np.ndarray:
    """Nested JSON array given inline or as a path to a JSON file."""
    text = source
    if not source.lstrip().startswith("["):
        p = Path(source)
        if not p.exists():
            raise UsageError(f"matrix is neither a JSON array nor an existing file: {source}")
        text = p.read_text()
    try:
        return np.asarray(json.loads(text), dtype=float)
    except (json.JSONDecodeError, ValueError) as exc:
        raise UsageError(f"cannot parse matrix: {exc}") from exc


def _complex(text: str) -> complex:
    try:
        return complex(text.replace(" ", ""))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a complex number: {text}") from exc


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be a nonnegative integer")
    return v


def _positive_float(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _require_seed(args, why: str) -> int:
    if args.seed is None:
        raise UsageError(f"--seed is required {why}")
    return args.seed


def _check(value: float, tol: float, what: str) -> None:
    if not value <= tol:
        raise NumericalValidationError(f"{what} {value:.3e} exceeds tolerance {tol:.3e}", value)


# moduli ------------------------------------------------------------------------------


def _orthogonal_report(O: md.OrthogonalMap, tol: float) -> dict:
    rs = md.extract_rs(O)
    derived, literal = md.rs_residuals(rs)
    s_norm = float(np.max(np.abs(rs.S)))
    return {
        "holomorphic": md.is_holomorphic(O, tol),
        "s_norm": s_norm,
        "commutes_with_J0": md.commutes_with_reference(O, tol),
        "derived_res": derived,
        "literal_res": literal,
    }


def cmd_moduli_sample(args):
    seed = _require_seed(args, "for sampling")
    if args.kind == "orthogonal":
        O = md.random_orthogonal(args.n, seed)
        out = {"matrix": O.O, "orthogonality_residual": float(np.max(np.abs(O.O.T @ O.O - np.eye(2 * args.n))))}
        out.update(_orthogonal_report(O, args.tol))
        J = md.pushforward(O, md.reference_structure(args.n))
        out["structure"] = J.J
        return out
    if args.kind == "unitary":
        U = md.random_unitary(args.n, seed)
        O = md.embed_unitary(U)
        out = {"matrix": U.U, "embedded": O.O,
               "unitarity_residual": float(np.max(np.abs(U.U.conj().T @ U.U - np.eye(args.n))))}
        out.update(_orthogonal_report(O, args.tol))
        return out
    rs = md.random_symplectic_rs(args.n, seed, args.max_squeeze)
    derived, literal = md.rs_residuals(rs)
    return {"R": rs.R, "S": rs.S, "derived_res": derived, "literal_res": literal,
            "trace_SSdag": float(np.trace(rs.S @ rs.S.conj().T).real)}


def cmd_moduli_check_cr(args):
    M = load_matrix(args.matrix)
    if M.shape != (2 * args.n, 2 * args.n):
        raise UsageError(f"matrix shape {M.shape} does not match n={args.n}")
    res = float(np.max(np.abs(M.T @ M - np.eye(2 * args.n))))
    _check(res, args.ortho_tol, "orthogonality residual")
    O = md.OrthogonalMap(M, tol=args.ortho_tol)
    return _orthogonal_report(O, args.tol)


def cmd_moduli_rs_residuals(args):
    if args.matrix is not None:
        M = load_matrix(args.matrix)
        rs = md.rs_from_real(M, kind=args.kind, check=False)
    elif args.theta is not None:
        rs = md.pair_rotation_rs(args.theta)
    else:
        raise UsageError("give --theta or --matrix")
    derived, literal = md.rs_residuals(rs)
    out = {"R": rs.R, "S": rs.S, "derived_res": derived, "literal_res": literal}
    if args.theta is not None and args.matrix is None:
        out["expected_literal_res"] = abs(math.cos(args.theta) * math.sin(args.theta))
    return out


# fock ------------------------------------------------------------------------------


def cmd_fock_coherent(args):
    z = np.asarray(args.z if args.z else [0j] * args.n, dtype=complex)
    if z.size != args.n:
        raise UsageError(f"need {args.n} values of --z, got {z.size}")
    fock = fb.build_fock(args.n, args.M)
    state = fb.coherent_state(fock, z)
    resid = fb.eigen_residuals(state, z)
    tails = np.array([fb.coherent_tail(zj, args.M) for zj in z])
    return {
        "norm": state.norm,
        "eigen_residuals": resid,
        "closed_form_tails": tails,
        "vacuum_overlap": complex(np.vdot(fock.vacuum().vector, state.vector)),
    }


def cmd_fock_resolution(args):
    fock = fb.build_fock(args.n, args.M)
    rule = fb.QuadratureRule.gauss_laguerre(args.radial, args.angular)
    dev = fb.resolution_check(fock, rule, args.K)
    _check(dev, args.tol, "resolution-of-identity deviation")
    return {"max_deviation": dev}


def cmd_fock_squeeze(args):
    if args.r is not None:
        if args.n != 1:
            raise UsageError("--r is a single-mode squeeze; use --n 1 or --seed")
        rs = md.single_mode_squeeze_rs(args.r)
        expected = math.sinh(args.r) ** 2
    else:
        seed = _require_seed(args, "for a random symplectic transformation")
        rs = md.random_symplectic_rs(args.n, seed, args.max_squeeze)
        expected = float(np.trace(rs.S @ rs.S.conj().T).real)
    fock = fb.build_fock(args.n, args.M)
    vac = fb.bogoliubov_vacuum(fock, rs, crosscheck=True)
    _check(vac.ccr_residual, args.tol, "interior CCR residual")
    return {
        "mean_old_quanta": vac.mean_old_quanta,
        "expected_mean_old_quanta": expected,
        "ccr_residual": vac.ccr_residual,
        "annihilation_residual": vac.annihilation_residual,
        "leakage": vac.leakage,
        "crosscheck_error": vac.crosscheck_error,
        "crosscheck_note": vac.crosscheck_note,
    }


# fermion ----------------------------------------------------------------------------


def _fermion_blocks(args) -> md.RSBlocks:
    if args.theta is not None:
        return md.pair_rotation_rs(args.theta)
    seed = _require_seed(args, "for a random orthogonal transformation")
    return md.extract_rs(md.random_orthogonal(args.n, seed))


def cmd_fermion_vacuum(args):
    rs = _fermion_blocks(args)
    fock = ff.build_fermion_fock(rs.n)
    vac = ff.fermion_bogoliubov_vacuum(fock, rs)
    _check(vac.car_residual, args.tol, "CAR residual")
    out = {
        "n": rs.n,
        "kernel_dim": vac.kernel_dim,
        "degenerate": vac.degenerate,
        "car_residual": vac.car_residual,
        "mean_old_quanta": vac.mean_old_quanta,
        "trace_SSdag": float(np.trace(rs.S @ rs.S.conj().T).real),
    }
    if vac.state is not None:
        out["state"] = vac.state.vector
        out["parity_weights"] = vac.state.parity_weights()
    return out


def cmd_fermion_crosscheck(args):
    rs = _fermion_blocks(args)
    fock = ff.build_fermion_fock(rs.n)
    cc = ff.thouless_crosscheck(fock, rs)
    if not cc.skipped:
        _check(abs(cc.overlap_error), args.tol, "pairing overlap error")
    return {"n": rs.n, "overlap_error": cc.overlap_error, "skipped": cc.skipped,
            "condition_number": cc.condition_number, "note": cc.note}


# series ----------------------------------------------------------------------------


def _series_rows(series: qs.QSeries):
    for e, c in series.items():
        yield str(Fraction(e, qs.QUARTER)), c.numerator, c.denominator


def _series_result(series: qs.QSeries):
    return {"order": str(series.order),
            "coefficients": [{"exponent": e, "numerator": str(n), "denominator": str(d)}
                             for e, n, d in _series_rows(series)]}


def cmd_series_poincare(args):
    s = qs.poincare_series(args.order)
    if args.format == "csv":
        return csv_text(["exponent", "numerator", "denominator"], _series_rows(s))
    return _series_result(s)


def cmd_series_theta(args):
    s = qs.theta_series(args.which, args.order)
    if args.format == "csv":
        return csv_text(["exponent", "numerator", "denominator"], _series_rows(s))
    return _series_result(s)


def cmd_series_verify(args):
    diff = qs.verify_theta_identity(args.order)
    if diff != 0:
        raise NumericalValidationError(f"theta identity fails: max coefficient difference {diff}",
                                       float(diff))
    out = {"max_coeff_diff": diff}
    if args.t:
        out["floating"] = {format(t, "g"): qs.floating_check(t, max(args.order, 160)) for t in args.t}
    return out


# matrix model ----------------------------------------------------------------------------


def _load_config(args) -> mm.MatrixConfig:
    if args.config:
        try:
            data = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config: {exc}") from exc
        return mm.MatrixConfig.from_dict(data)
    if args.N is None:
        raise UsageError("give --config or --N")
    if args.N < 2:
        raise UsageError("--N must be >= 2")
    seed = _require_seed(args, "to generate random initial data")
    return mm.random_config(args.N, seed, scale=args.scale, R11=args.R11)


def cmd_mm_energy(args):
    cfg = _load_config(args)
    return {
        "N": cfg.N,
        "R11": cfg.R11,
        "P_minus": cfg.P_minus,
        "energy": mm.energy(cfg),
        "kinetic": mm.kinetic(cfg.V, cfg.R11),
        "potential": mm.potential(cfg.X, cfg.R11),
        "gauss_norm": mm.gauss_constraint(cfg),
    }


def cmd_mm_evolve(args):
    cfg = _load_config(args)
    traj = mm.evolve(cfg, args.dt, args.steps, stride=args.stride, scheme=args.scheme)
    if args.final_config:
        write_atomic(args.final_config, dumps(traj.final.to_dict()))
    if args.format == "csv":
        return csv_text(["step", "time", "energy", "trX2", "gauss_norm"], traj.rows())
    e0 = traj.energy[0]
    drift = traj.relative_energy_drift() if e0 != 0 else max(abs(e) for e in traj.energy)
    return {
        "N": cfg.N,
        "P_minus": cfg.P_minus,
        "initial_energy": e0,
        "final_energy": traj.energy[-1],
        "relative_energy_drift": drift,
        "gauss_drift": traj.gauss_charge_drift,
        "final_equals_initial": bool(np.array_equal(traj.final.X, cfg.X)
                                     and np.array_equal(traj.final.V, cfg.V)),
        "initial_config": cfg.to_dict(),
        "final_config": traj.final.to_dict(),
        "series": {"step": traj.steps, "time": traj.times, "energy": traj.energy,
                   "trX2": traj.trace_x2, "gauss_norm": traj.gauss_norm},
    }


# parser -------------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--output", "-o", help="write the result here instead of stdout")
    common.add_argument("--seed", type=int, default=None)

    parser = _Parser(prog="moduli-quanta", description=__doc__.splitlines()[0])
    groups = parser.add_subparsers(dest="group", required=True)

    def add(group, name, func, **kw):
        p = group.add_parser(name, parents=[common], **kw)
        p.set_defaults(func=func)
        return p

    g = groups.add_parser("moduli").add_subparsers(dest="action", required=True)
    p = add(g, "sample", cmd_moduli_sample)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--kind", choices=["orthogonal", "unitary", "symplectic"], default="orthogonal")
    p.add_argument("--max-squeeze", type=_positive_float, default=0.5)
    p.add_argument("--tol", type=_positive_float, default=md.DEFAULT_TOL)
    p = add(g, "check-cr", cmd_moduli_check_cr)
    p.add_argument("--n", type=_positive_int, required=True)
    p.add_argument("--matrix", required=True, help="JSON array or path to a JSON file")
    p.add_argument("--tol", type=_positive_float, default=md.DEFAULT_TOL)
    p.add_argument("--ortho-tol", type=_positive_float, default=1e-10)
    p = add(g, "rs-residuals", cmd_moduli_rs_residuals)
    p.add_argument("--theta", type=float)
    p.add_argument("--matrix")
    p.add_argument("--kind", choices=["orthogonal", "symplectic"], default="orthogonal")

    g = groups.add_parser("fock").add_subparsers(dest="action", required=True)
    p = add(g, "coherent", cmd_fock_coherent)
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--M", type=_positive_int, default=40)
    p.add_argument("--z", type=_complex, action="append")
    p = add(g, "resolution", cmd_fock_resolution)
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--M", type=_positive_int, default=30)
    p.add_argument("--radial", type=_positive_int, default=64)
    p.add_argument("--angular", type=_positive_int, default=128)
    p.add_argument("--K", type=_nonneg_int, default=10)
    p.add_argument("--tol", type=_positive_float, default=1e-8)
    p = add(g, "squeeze", cmd_fock_squeeze)
    p.add_argument("--n", type=_positive_int, default=1)
    p.add_argument("--M", type=_positive_int, default=80)
    p.add_argument("--r", type=float)
    p.add_argument("--max-squeeze", type=_positive_float, default=0.4)
    p.add_argument("--tol", type=_positive_float, default=1e-10)

    g = groups.add_parser("fermion").add_subparsers(dest="action", required=True)
    for name, func in (("vacuum", cmd_fermion_vacuum), ("crosscheck", cmd_fermion_crosscheck)):
        p = add(g, name, func)
        p.add_argument("--n", type=_positive_int, default=2)
        p.add_argument("--theta", type=float, help="two-mode pair rotation angle")
        p.add_argument("--tol", type=_positive_float, default=1e-10)

    g = groups.add_parser("series").add_subparsers(dest="action", required=True)
    p = add(g, "poincare", cmd_series_poincare)
    p.add_argument("--order", type=_nonneg_int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p = add(g, "theta", cmd_series_theta)
    p.add_argument("--which", type=int, choices=[2, 3, 4], required=True)
    p.add_argument("--order", type=_positive_int, required=True)
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p = add(g, "verify", cmd_series_verify)
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--t", type=float, action="append", help="also check numerically at this nome")

    g = groups.add_parser("mm").add_subparsers(dest="action", required=True)
    for name, func in (("evolve", cmd_mm_evolve), ("energy", cmd_mm_energy)):
        p = add(g, name, func)
        p.add_argument("--N", type=int)
        p.add_argument("--config", help="JSON matrix configuration")
        p.add_argument("--scale", type=_positive_float, default=1.0,
                       help="Frobenius norm of each random X and V matrix")
        p.add_argument("--R11", type=_positive_float, default=1.0)
    p = g.choices["evolve"]
    p.add_argument("--dt", type=float, default=1e-3)
    p.add_argument("--steps", type=_nonneg_int, default=1000)
    p.add_argument("--stride", type=_positive_int, default=10)
    p.add_argument("--scheme", choices=sorted(mm.SCHEMES), default="yoshida4")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--final-config", help="also write the final configuration JSON here")
    return parser


def _resolved_config(args) -> dict:
    skip = {"func", "output", "group", "action", "final_config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def run(argv=None) -> int:
    parser = build_parser()
    args = None
    command = " ".join((argv if argv is not None else sys.argv[1:])[:2])
    start = time.perf_counter()
    envelope: dict = {"command": command, "status": "ok"}
    code = EXIT_OK
    try:
        args = parser.parse_args(argv)
        command = f"{args.group} {args.action}"
        envelope["command"] = command
        envelope["config"] = _resolved_config(args)
        if getattr(args, "dt", 0.0) < 0:
            raise UsageError("--dt must be nonnegative")
        if getattr(args, "order", 4) < 4 and command == "series verify":
            raise UsageError("--order must be >= 4")
        result = args.func(args)
        if isinstance(result, str):
            write_atomic(args.output, result)
            return EXIT_OK
        envelope["result"] = result
    except (UsageError, ValueError) as exc:
        code = EXIT_USAGE
        envelope.update(status="error", error={"type": "usage", "message": str(exc)})
    except ResourceBudgetError as exc:
        code = EXIT_RESOURCE
        envelope.update(status="error", error={"type": "resource", "message": str(exc),
                                                "requested": exc.requested, "budget": exc.budget})
    except NumericalValidationError as exc:
        code = EXIT_VALIDATION
        envelope.update(status="error", error={"type": "validation", "message": str(exc),
                                                "residual": exc.residual})
    envelope.setdefault("config", {})
    envelope["timing"] = {"wall_time_s": time.perf_counter() - start}
    text = dumps(envelope)
    output = getattr(args, "output", None) if args is not None else None
    write_atomic(output, text)
    if code == EXIT_USAGE and args is None:
        sys.stderr.write(f"moduli-quanta: {envelope['error']['message']}\n")
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
