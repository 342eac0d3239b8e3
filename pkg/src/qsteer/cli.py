"""Command-line entry point: classify, export, verify, decompose, reconstruct, scan and steer.

Exit codes: 0 success, 1 analysis failure, 2 input failure, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass

import numpy as np

from . import jsonio
from .discord import scan_theta, zero_discord_A, zero_discord_B_check
from .ellipsoid import ellipsoid_A, ellipsoid_B, ellipsoid_to_theta_bob_frame, is_obese
from .errors import (
    BadDecomposition,
    Incompatible,
    InvalidState,
    LengthMismatch,
    NotPhysical,
    NotPositive,
    NotSeparable,
    SimplexNotFound,
    SteeringError,
)
from .lorentz import PRODUCT_CUTOFF
from .oracles import Tolerances, verify_suite
from .qstate import as_theta, parse_state, state_to_json, to_theta
from .reconstruct import GeometricData, extract_geometry, reconstruct_state
from .separability import BOUNDARY_BAND, SearchConfig, classify_entanglement, decompose_separable, minimal_product_count
from .steering import CONDITION_TOL, Povm, _kernel_residual, complete_steering_check, steer, steer_to_decomposition

EXIT_OK, EXIT_ANALYSIS, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3

# errors caused by what the user supplied rather than by the analysis
INPUT_ERRORS = (InvalidState, NotPhysical, NotPositive, BadDecomposition, Incompatible, LengthMismatch)


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class ClassificationReport:
    entangled: bool
    obese: bool
    dimension: int
    shape: str
    complete_steering: bool
    zero_discord_A: bool
    zero_discord_B: bool
    volume_A: float
    volume_B: float
    center: np.ndarray
    semiaxes: np.ndarray
    product_count: int | None

    def to_json(self) -> dict:
        return {
            "entangled": self.entangled,
            "obese": self.obese,
            "dimension": self.dimension,
            "shape": self.shape,
            "complete_steering": self.complete_steering,
            "zero_discord_A": self.zero_discord_A,
            "zero_discord_B": self.zero_discord_B,
            "volume_A": self.volume_A,
            "volume_B": self.volume_B,
            "center": [float(x) for x in self.center],
            "semiaxes": [float(x) for x in self.semiaxes],
            "product_count": self.product_count,
        }


def classify(rho, tol: float | None = None) -> ClassificationReport:
    th = to_theta(rho)
    dec = classify_entanglement(rho, BOUNDARY_BAND if tol is None else tol)
    eA, eB = ellipsoid_A(th), ellipsoid_B(th)
    if np.linalg.norm(th.b) >= PRODUCT_CUTOFF:
        # the kernel condition still applies when Bob's marginal is pure
        complete = _kernel_residual(th)[0] < (tol or CONDITION_TOL)
    else:
        complete = complete_steering_check(th, tol or CONDITION_TOL).complete
    zkw = {} if tol is None else {"tol": tol}
    return ClassificationReport(
        entangled=dec.entangled,
        obese=is_obese(eA),
        dimension=eA.dimension,
        shape=eA.shape,
        complete_steering=bool(complete),
        zero_discord_A=zero_discord_A(th, **zkw),
        zero_discord_B=zero_discord_B_check(th, **zkw).value,
        volume_A=eA.volume,
        volume_B=eB.volume,
        center=eA.center,
        semiaxes=eA.semiaxes,
        product_count=None if dec.entangled else minimal_product_count(rho),
    )


# ---------------------------------------------------------------- I/O helpers


def _load_json(path: str):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}", EXIT_INPUT) from None
    except json.JSONDecodeError as exc:
        raise CliError(f"format: {path} is not valid JSON ({exc})", EXIT_INPUT) from None


def _load_state(path: str):
    return parse_state(_load_json(path))


def _emit(obj, out: str | None) -> None:
    text = jsonio.dumps(obj)
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------- commands


def cmd_classify(args) -> int:
    _emit(classify(_load_state(args.input), args.tol).to_json(), args.out)
    return EXIT_OK


def cmd_ellipsoid(args) -> int:
    th = to_theta(_load_state(args.input))
    exports = {}
    if args.party in ("A", "both"):
        exports["A"] = ellipsoid_to_theta_bob_frame(ellipsoid_A(th), th)
    if args.party in ("B", "both"):
        out = ellipsoid_B(th).to_json()
        out["alice_bloch"] = [float(x) for x in th.a]
        exports["B"] = out
    _emit(exports if args.party == "both" else exports[args.party], args.out)
    return EXIT_OK


def cmd_verify(args) -> int:
    if args.input is None and not args.random:
        raise CliError("verify needs --input or --random N", EXIT_INPUT)
    states = [_load_state(args.input)] if args.input else []
    tol = Tolerances() if args.tol is None else Tolerances.uniform(args.tol)
    checks = verify_suite(states, args.random, args.seed, args.rank, tol, args.hull_samples)
    report = {name: c.to_json() for name, c in checks.items()}
    report["all_passed"] = all(c.passed for c in checks.values())
    _emit(report, args.out)
    failed = [name for name, c in checks.items() if not c.passed]
    if failed:
        raise CliError("failed checks: " + ", ".join(sorted(failed)), EXIT_ANALYSIS)
    return EXIT_OK


def cmd_decompose(args) -> int:
    rho = _load_state(args.input)
    cfg = SearchConfig(args.max_iter, args.restarts, args.seed)
    try:
        dec = decompose_separable(rho, config=cfg)
    except NotSeparable as exc:
        raise CliError(f"NotSeparable: {exc}", EXIT_ANALYSIS) from None
    except SimplexNotFound as exc:
        raise CliError(f"SimplexNotFound: {exc}", EXIT_BUDGET) from None
    out = dec.to_json()
    out["residual"] = dec.residual(rho)
    out["rank_theta"] = minimal_product_count(rho)
    _emit(out, args.out)
    limit = 1e-7 if args.tol is None else args.tol
    if out["residual"] > limit:
        raise CliError(f"decomposition residual {out['residual']:.3e} exceeds {limit:.1e}", EXIT_ANALYSIS)
    return EXIT_OK


def cmd_reconstruct(args) -> int:
    obj = _load_json(args.input)
    g = GeometricData.from_json(obj) if "Q" in obj else extract_geometry(to_theta(parse_state(obj)))
    rho = reconstruct_state(g)
    g1 = extract_geometry(to_theta(rho))
    res = max(np.abs(g.Q - g1.Q).max(), np.abs(g.c - g1.c).max(), np.abs(g.a - g1.a).max(), np.abs(g.b - g1.b).max())
    out = state_to_json(rho)
    out["geometry_residual"] = float(res)
    _emit(out, args.out)
    limit = 1e-8 if args.tol is None else args.tol
    if res > limit:
        raise CliError(f"reconstructed geometry differs by {res:.3e}", EXIT_ANALYSIS)
    return EXIT_OK


def cmd_scan_theta(args) -> int:
    if args.steps < 2:
        raise CliError("--steps must be at least 2", EXIT_INPUT)
    rows = scan_theta(args.steps, args.party)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["theta", "concurrence", "discord", "volume"])
        for row in rows:
            w.writerow([format(x, ".17g") for x in row])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def cmd_steer(args) -> int:
    th = as_theta(to_theta(_load_state(args.input)))
    if args.element and args.target:
        raise CliError("use either --element or --target, not both", EXIT_INPUT)
    if args.target:
        targets = [(w, np.array(y)) for w, *y in args.target]
        povm = steer_to_decomposition(th, targets)
        elements = list(povm.elements)
    elif args.element:
        elements = [np.array(x) for x in args.element]
        if args.povm:
            Povm(elements)
    else:
        raise CliError("steer needs at least one --element or --target", EXIT_INPUT)
    outcomes = []
    for x in elements:
        o = steer(th, x)
        outcomes.append({"element": [float(v) for v in x], "p": o.p,
                         "y": None if o.y is None else [float(v) for v in o.y]})
    _emit({"outcomes": outcomes}, args.out)
    return EXIT_OK


# ---------------------------------------------------------------- parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="JSON state (or geometry, for reconstruct)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output here instead of standard output")
    common.add_argument("--tol", type=float, help="override the default tolerances uniformly")

    p = argparse.ArgumentParser(prog="qsteer", description="Two-qubit steering ellipsoid toolkit.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("classify", parents=[common], help="entanglement, shape, steering and discord report")
    s.set_defaults(func=cmd_classify, needs_input=True)

    s = sub.add_parser("ellipsoid", parents=[common], help="export steering ellipsoid geometry")
    s.add_argument("--party", choices=("A", "B", "both"), default="A")
    s.set_defaults(func=cmd_ellipsoid, needs_input=True)

    s = sub.add_parser("verify", parents=[common], help="run the oracle cross-checks")
    s.add_argument("--random", type=int, default=0, metavar="N")
    s.add_argument("--rank", type=int, choices=(1, 2, 3, 4), default=4)
    s.add_argument("--hull-samples", type=int, default=2000)
    s.set_defaults(func=cmd_verify, needs_input=False)

    s = sub.add_parser("decompose", parents=[common], help="separable decomposition into rank(Theta) products")
    s.add_argument("--max-iter", type=int, default=500)
    s.add_argument("--restarts", type=int, default=8)
    s.set_defaults(func=cmd_decompose, needs_input=True)

    s = sub.add_parser("reconstruct", parents=[common], help="rebuild a state from geometric data")
    s.set_defaults(func=cmd_reconstruct, needs_input=True)

    s = sub.add_parser("scan-theta", parents=[common], help="concurrence/discord/volume along the skew family")
    s.add_argument("--steps", type=int, default=32)
    s.add_argument("--party", choices=("A", "B"), default="B", help="measured party for discord")
    s.set_defaults(func=cmd_scan_theta, needs_input=False)

    s = sub.add_parser("steer", parents=[common], help="steer with POVM elements or find a POVM for an ensemble")
    s.add_argument("--element", nargs=4, type=float, action="append", metavar=("X0", "X1", "X2", "X3"))
    s.add_argument("--povm", action="store_true", help="require the elements to form a POVM")
    s.add_argument("--target", nargs=4, type=float, action="append", metavar=("W", "Y1", "Y2", "Y3"))
    s.set_defaults(func=cmd_steer, needs_input=True)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.needs_input and not args.input:
            raise CliError(f"{args.command} needs --input PATH", EXIT_INPUT)
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except INPUT_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SimplexNotFound as exc:
        print(f"error: SimplexNotFound: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except SteeringError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ANALYSIS


if __name__ == "__main__":
    sys.exit(main())
