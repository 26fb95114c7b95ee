"""Command line entry point: ``tatelattice <command> ...``.

Exit codes: 0 success, 1 invalid input or failed verification, 2 the
solver could not decide (Unknown).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from pathlib import Path
from typing import List, Optional

import jsonschema

from . import schema
from .engine import InvalidInstanceError, SolveUnknown, solve, verify_certificate
from .orders import InvalidOrderError, classify, make_order
from .padic import BadPrimeError, PreconditionError
from .quaternion import INF, demo_counterexample, hilbert_symbol, ramified_places

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_UNKNOWN = 2


def _emit(text: str, output: Optional[str]) -> None:
    if output:
        Path(output).write_text(text)
    else:
        sys.stdout.write(text)


def _truncate(inst, precision: Optional[int]):
    """Work at a lower precision than the instance carries."""
    if precision is None or precision == inst.precision:
        return inst
    if precision > inst.precision:
        raise InvalidInstanceError(
            f"--precision {precision} exceeds the instance precision {inst.precision}")
    data = schema.instance_to_dict(inst)
    data["precision"] = precision
    for key, rows in data["locals"].items():
        m = int(key) ** precision
        data["locals"][key] = [[x % m for x in row] for row in rows]
    return schema.instance_from_dict(data)


def cmd_solve(args) -> int:
    try:
        inst = _truncate(schema.load_instance(args.instance), args.precision)
        cert = solve(inst, seed=args.seed)
    except (InvalidInstanceError, PreconditionError, ValueError) as exc:
        print(f"invalid instance: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SolveUnknown as exc:
        print(f"unknown at {exc.ell}: {exc.reason}", file=sys.stderr)
        return EXIT_UNKNOWN
    _emit(schema.dumps(schema.certificate_to_dict(cert)), args.output)
    print("verified", file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    try:
        inst = schema.load_instance(args.instance)
        cert = schema.load_certificate(args.certificate)
    except (InvalidInstanceError, jsonschema.ValidationError, ValueError) as exc:
        msg = exc.message if isinstance(exc, jsonschema.ValidationError) else exc
        print(f"rejected: malformed input: {msg}", file=sys.stderr)
        return EXIT_INVALID
    verdict = verify_certificate(inst, cert)
    if verdict.ok:
        print("accepted")
        return EXIT_OK
    print(f"rejected: {verdict.reason}")
    return EXIT_INVALID


def _parse_poly(text: str) -> List[int]:
    path = Path(text)
    if path.is_file():
        data = json.loads(path.read_text())
        if isinstance(data, dict):
            if "f" in data:
                return data["f"]
            if "blocks" in data and len(data["blocks"]) == 1:
                return data["blocks"][0]["f"]
            raise ValueError("JSON file needs an 'f' key or a single block")
        return data
    return [int(c) for c in text.replace(" ", "").split(",")]


def cmd_classify(args) -> int:
    try:
        order = make_order(_parse_poly(args.f))
    except (InvalidOrderError, ValueError) as exc:
        print(f"invalid polynomial: {exc}", file=sys.stderr)
        return EXIT_INVALID
    primes = [int(x) for x in args.primes.split(",")] if args.primes else None
    info = classify(order, primes=primes, max_prime=args.max_prime)
    info["primes"] = {str(k): v for k, v in info["primes"].items()}
    _emit(schema.dumps(info), args.output)
    return EXIT_OK


def _rational(text: str) -> Fraction:
    try:
        q = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text}") from exc
    if q == 0:
        raise argparse.ArgumentTypeError("Hilbert symbol arguments must be nonzero")
    return q


def cmd_hilbert(args) -> int:
    a, b = args.a, args.b
    if args.place is not None:
        v = INF if args.place == INF else int(args.place)
        print(hilbert_symbol(a, b, v))
        return EXIT_OK
    ram = ramified_places(a, b)
    out = {"a": str(a), "b": str(b), "ramified": [str(v) for v in ram],
           "division": bool(ram)}
    _emit(schema.dumps(out), args.output)
    return EXIT_OK


def cmd_demo(args) -> int:
    try:
        report = demo_counterexample(seed=args.seed, trials=args.trials,
                                     B=(args.a, args.b), N=args.precision or 24)
    except (BadPrimeError, ValueError) as exc:
        print(f"invalid parameters: {exc}", file=sys.stderr)
        return EXIT_INVALID
    report["dim_W_counts"] = {str(k): v for k, v in report["dim_W_counts"].items()}
    _emit(schema.dumps(report), args.output)
    print(report["summary"], file=sys.stderr)
    return EXIT_OK if report["stable"] == 0 else EXIT_INVALID


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tatelattice",
        description="Global lattices from local data, with certificates.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", "-o", help="write JSON here instead of stdout")
    common.add_argument("--precision", type=int, help="p-adic precision N")
    common.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("solve", parents=[common], help="build a global lattice and certificate")
    p.add_argument("instance")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", help="check a certificate against an instance")
    p.add_argument("instance")
    p.add_argument("certificate")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("classify", parents=[common],
                       help="discriminant and splitting types of Z[x]/(f)")
    p.add_argument("f", help="JSON file or comma-separated coefficients, constant term first")
    p.add_argument("--primes", help="comma-separated primes")
    p.add_argument("--max-prime", type=int, default=13)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("hilbert", parents=[common], help="Hilbert symbols of (a, b)")
    p.add_argument("a", type=_rational)
    p.add_argument("b", type=_rational)
    p.add_argument("--place", help="a prime or 'inf'; default lists ramified places")
    p.set_defaults(func=cmd_hilbert)

    p = sub.add_parser("demo-counterexample", parents=[common],
                       help="refute R-stability of random candidate lattices")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--a", type=_rational, default=Fraction(-1))
    p.add_argument("--b", type=_rational, default=Fraction(-1))
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
