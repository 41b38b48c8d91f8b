"""Command-line interface: ``qschur {interp,blaschke,check,negsq} FILE``.

Every run prints one JSON report on stdout and a short summary on stderr.
Exit codes: 0 all checks pass, 2 bad input, 3 verification failure,
4 internal error.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import traceback

import numpy as np

from .blaschke import PointZero, SphereZero, product_build
from .errors import InputError, VerificationError
from .interp import InterpProblem, solve
from .kernels import cara_kernel, hardy_series, kernel_neg_squares, schur_kernel
from .qlinalg import QMatrix, complex_adjoint
from .quat import Quaternion, TwoSphere, qabs, random_units
from .realize import (
    CaraColligation,
    UnitaryColligation,
    check_ag_identity,
    check_cara_kernel,
    eval_cara,
    eval_schur,
    observability_index,
)
from .series import LSeries

EXIT_OK, EXIT_INPUT, EXIT_VERIFY, EXIT_INTERNAL = 0, 2, 3, 4


class Report:
    def __init__(self, command: str, digest: str, params: dict):
        self.command = command
        self.digest = digest
        self.params = params
        self.outputs: dict = {}
        self.diagnostics: dict = {}

    def check(self, name: str, value: float, tol: float):
        self.diagnostics[name] = {"value": float(value), "tol": float(tol), "pass": bool(value <= tol)}

    @property
    def passed(self) -> bool:
        return all(d["pass"] for d in self.diagnostics.values())

    def to_json(self) -> dict:
        return {
            "command": self.command,
            "input_digest": self.digest,
            "params": self.params,
            "outputs": self.outputs,
            "diagnostics": self.diagnostics,
            "status": "pass" if self.passed else "fail",
        }


def _require(data, key):
    if not isinstance(data, dict) or key not in data:
        raise InputError(f"missing field {key!r}")
    return data[key]


# -- interp ---------------------------------------------------------------------


def run_interp(data, args, report: Report):
    prob = InterpProblem.from_json(data)
    sol = solve(prob, degree=args.degree, tol=args.tol, seed=args.seed, verify=False)
    report.outputs["solution"] = sol.to_json()
    for key, tol in sol.tolerances.items():
        report.check(key, sol.diagnostics[key], tol)


# -- blaschke -------------------------------------------------------------------


def parse_zero_set(data):
    points = [PointZero(Quaternion.from_array(np.asarray(_require(z, "a"), dtype=float)), int(z.get("mult", 1)))
              for z in data.get("points", [])]
    spheres = [SphereZero(TwoSphere(float(_require(z, "re")), float(_require(z, "im"))), int(z.get("mult", 1)))
               for z in data.get("spheres", [])]
    return points, spheres


def run_blaschke(data, args, report: Report):
    points, spheres = parse_zero_set(data)
    prod = product_build(points, spheres, args.degree)
    rng = np.random.default_rng(args.seed)
    samples = [z.a.array for z in points]
    for z in spheres:
        samples += [z.sphere.point(u).array for u in random_units(rng, 10)]
    if samples:
        samples = np.array(samples)
        radius = float(np.max(qabs(samples)))
        residual = float(np.max(qabs(prod.series.eval_many(samples))))
        bound = prod.series.tail_bound(radius, bound=1.0)
    else:
        residual = bound = 0.0
    report.outputs["series"] = prod.series.to_json()
    report.outputs["placements"] = [{"a": a.to_json(), "placed": b.to_json()} for a, b in prod.placements]
    report.outputs["origin_mult"] = prod.origin_mult
    report.outputs["tail_bound"] = bound
    report.check("zero_residual", residual, bound + args.tol)


# -- check ----------------------------------------------------------------------


def run_check(data, args, report: Report):
    degree = min(args.degree, 40)
    if args.kind == "schur":
        col = UnitaryColligation.from_json(data)
        mismatch, orientation = check_ag_identity(col, degree)
        rank = observability_index(col.C, col.A)
        report.outputs["orientation"] = orientation
        report.outputs["relation_residuals"] = col.relation_residuals()
        report.outputs["observability_rank"] = rank
        report.outputs["observable"] = rank == col.A.rows
        report.outputs["series"] = eval_schur(col, args.degree).to_json()
        report.check("ag_identity_mismatch", mismatch, args.tol)
    else:
        col = CaraColligation.from_json(data)
        res_i, res_ii = check_cara_kernel(col, degree)
        rank = observability_index(col.C, col.V)
        report.outputs["kernel_residual_ii"] = res_ii
        report.outputs["observability_rank"] = rank
        report.outputs["observable"] = rank == col.V.rows
        report.outputs["series"] = eval_cara(col, args.degree).to_json()
        report.check("kernel_residual_i", res_i, args.tol)


# -- negsq ----------------------------------------------------------------------


def _signature(data, key, default=1.0):
    return QMatrix.from_json(data[key]) if key in data else default


def kernel_from_description(data, degree: int):
    """Build a kernel series from a description ``{"kind": "hardy"|"schur"|"cara", ...}``.

    ``schur`` takes one of ``theta`` (series JSON), ``blaschke`` (zero set) or
    ``interp`` (interpolation problem) plus optional ``J1``/``J2``; ``cara``
    takes ``phi`` and optional ``J``; ``hardy`` takes an optional ``size``.
    An optional ``scale`` multiplies the kernel.
    """
    kind = _require(data, "kind")
    if kind == "hardy":
        K = hardy_series(degree, int(data.get("size", 1)))
    elif kind == "schur":
        if "theta" in data:
            theta = LSeries.from_json(data["theta"]).truncate(degree)
        elif "blaschke" in data:
            points, spheres = parse_zero_set(data["blaschke"])
            theta = product_build(points, spheres, degree).series
        elif "interp" in data:
            theta = solve(InterpProblem.from_json(data["interp"]), degree=degree).B
        else:
            raise InputError("schur kernel needs one of 'theta', 'blaschke', 'interp'")
        K = schur_kernel(theta, _signature(data, "J1"), _signature(data, "J2"))
    elif kind == "cara":
        K = cara_kernel(LSeries.from_json(_require(data, "phi")).truncate(degree), _signature(data, "J"))
    else:
        raise InputError(f"unknown kernel kind {kind!r}")
    scale = float(data.get("scale", 1.0))
    return K.scale(scale) if scale != 1.0 else K


def run_negsq(data, args, report: Report):
    K = kernel_from_description(data, args.degree)
    res = kernel_neg_squares(K, trials=args.trials, seed=args.seed, size=args.size, radius=args.radius)
    report.outputs["kappa"] = res.kappa
    report.outputs["counts"] = res.counts
    report.outputs["summary"] = res.summary()
    if res.witness is not None:
        report.outputs["witness"] = {
            "points": res.witness.points.tolist(),
            "gram_eigenvalues": np.linalg.eigvalsh(complex_adjoint(res.witness.gram)).tolist(),
            "tail_bound": res.witness.tail_bound,
        }
    expected = data.get("expect_kappa")
    if expected is not None:
        report.check("kappa_deviation", abs(res.kappa - int(expected)), 0)


COMMANDS = {"interp": run_interp, "blaschke": run_blaschke, "check": run_check, "negsq": run_negsq}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qschur", description="Quaternionic Schur analysis toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("file", help="input JSON file ('-' for stdin)")
        p.add_argument("--degree", type=int, default=None, help="truncation degree (default 64)")
        p.add_argument("--tol", type=float, default=None, help="verification tolerance (default 1e-8)")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", help="also write the report to this file")
        return p

    common(sub.add_parser("interp", help="solve an interpolation problem"))
    common(sub.add_parser("blaschke", help="build a Blaschke product from a zero set"))
    chk = common(sub.add_parser("check", help="verify a colligation"))
    chk.add_argument("--kind", choices=("schur", "cara"), default="schur")
    neg = common(sub.add_parser("negsq", help="sample negative squares of a kernel"))
    neg.add_argument("--trials", type=int, default=10)
    neg.add_argument("--size", type=int, default=20)
    neg.add_argument("--radius", type=float, default=0.7)
    return parser


DEFAULTS = {"degree": 64, "tol": 1e-8}


def _resolve(args, data):
    """Fill ``--degree``/``--tol`` from the input file when given there, else the defaults."""
    for key, default in DEFAULTS.items():
        if getattr(args, key) is None:
            value = data.get(key, default) if isinstance(data, dict) else default
            setattr(args, key, type(default)(value))


def _params(args) -> dict:
    return {k: v for k, v in sorted(vars(args).items()) if k not in ("command", "file", "out")}


def _emit(doc: dict, out: str | None):
    text = json.dumps(doc, sort_keys=True, indent=2)
    print(text)
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.file == "-":
            raw = sys.stdin.buffer.read()
        else:
            with open(args.file, "rb") as fh:
                raw = fh.read()
    except OSError as exc:
        print(f"qschur: cannot read {args.file}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    digest = hashlib.sha256(raw).hexdigest()
    report = Report(args.command, digest, _params(args))
    code = EXIT_OK
    error = None
    try:
        data = json.loads(raw.decode("utf-8"))
        _resolve(args, data)
        report.params = _params(args)
        COMMANDS[args.command](data, args, report)
        code = EXIT_OK if report.passed else EXIT_VERIFY
    except (InputError, ValueError, KeyError, TypeError, json.JSONDecodeError, UnicodeDecodeError) as exc:
        code, error = EXIT_INPUT, exc
    except VerificationError as exc:
        code, error = EXIT_VERIFY, exc
    except Exception as exc:  # noqa: BLE001 - report anything else as internal
        code, error = EXIT_INTERNAL, exc
        traceback.print_exc(file=sys.stderr)
    doc = report.to_json()
    if error is not None:
        doc["status"] = "error"
        doc["error"] = {"type": type(error).__name__, "message": str(error)}
    _emit(doc, args.out)
    if error is not None:
        print(f"qschur {args.command}: {type(error).__name__}: {error}", file=sys.stderr)
    else:
        failed = [k for k, d in report.diagnostics.items() if not d["pass"]]
        status = "PASS" if not failed else "FAIL (" + ", ".join(failed) + ")"
        print(f"qschur {args.command}: {status}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
