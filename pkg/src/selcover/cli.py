"""Command-line entry point.

Exit codes: 0 on success, 1 on a computational failure, 2 on invalid input
(bad flags, unreadable or malformed files, violated invariants).
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from selcover import bounds, jointlab, sharpness, simlab
from selcover.errors import ValidationError
from selcover.probkit import SymmetricMatrix

EXIT_OK = 0
EXIT_COMPUTE = 1
EXIT_INPUT = 2


class InputError(Exception):
    """Unreadable or malformed input file."""


def _fmt(x) -> str:
    if isinstance(x, float):
        return f"{x:.6g}"
    return str(x)


def _emit(payload, fmt: str) -> None:
    if fmt == "json":
        print(json.dumps(payload, indent=2, allow_nan=False))
        return
    for key, value in _flatten(payload):
        print(f"{key}: {_fmt(value)}")


def _flatten(payload, prefix=""):
    if isinstance(payload, dict):
        for k, v in payload.items():
            yield from _flatten(v, f"{prefix}{k}." if isinstance(v, dict) else f"{prefix}{k}")
    else:
        yield prefix.rstrip("."), payload


def _load_json(path: str):
    try:
        text = sys.stdin.read() if path == "-" else Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        lines = text.splitlines()
        context = lines[exc.lineno - 1] if 0 < exc.lineno <= len(lines) else ""
        raise InputError(
            f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}\n    {context}"
        ) from None


def cmd_audit(args) -> int:
    payload = _load_json(args.model)
    if isinstance(payload, dict) and "model" in payload:
        payload = payload["model"]
    if not isinstance(payload, dict):
        raise ValidationError("joint model file must hold a JSON object")
    model = jointlab.JointModel.from_dict(payload)
    fixed = jointlab.fixed_target_alpha(model)
    report = jointlab.theorem1_bound(model, args.alpha)
    selected = jointlab.selected_noncoverage(model)
    holds = all(selected <= b.value + 1e-12 for b in report)
    _emit({
        "fixed_target_alpha": fixed,
        "alpha": report.tv.inputs["alpha"],
        "tv_leakage": jointlab.tv_leakage(model),
        "mutual_information": jointlab.mutual_information(model),
        "pinsker_bound": jointlab.pinsker_bound(model),
        "selected_noncoverage": selected,
        "tv_bound": report.tv.to_dict(),
        "pinsker_total_bound": report.pinsker.to_dict(),
        "bound_holds": holds,
    }, args.format)
    return EXIT_OK if holds else EXIT_COMPUTE


def cmd_bound_gaussian(args) -> int:
    if args.sigma is not None:
        payload = _load_json(args.sigma)
        if not isinstance(payload, dict):
            raise ValidationError("sigma file must hold a JSON object with 'dim' and 'entries'")
        spec = bounds.FullCovariance(SymmetricMatrix.from_dict(payload))
    else:
        if args.trace is None:
            raise ValidationError("--q requires --trace")
        spec = bounds.TraceBound(args.q, args.trace)
    _emit(bounds.gaussian_noncoverage_bound(args.alpha, spec, args.tau).to_dict(), args.format)
    return EXIT_OK


def cmd_bound_finite_message(args) -> int:
    if args.entropy is not None:
        report = bounds.finite_message_bound(args.alpha, args.entropy)
    else:
        report = bounds.finite_message_alphabet_bound(args.alpha, args.alphabet)
    _emit(report.to_dict(), args.format)
    return EXIT_OK


def cmd_bound_transfer(args) -> int:
    _emit(bounds.asymptotic_transfer(args.alpha, args.r, args.eta).to_dict(), args.format)
    return EXIT_OK


def cmd_calibrate(args) -> int:
    if args.sigma is not None:
        payload = _load_json(args.sigma)
        if not isinstance(payload, dict):
            raise ValidationError("sigma file must hold a JSON object with 'dim' and 'entries'")
        sigma = SymmetricMatrix.from_dict(payload)
        tau = bounds.calibrate_tau_full(sigma, args.epsilon)
        spec = bounds.FullCovariance(sigma)
        inputs = {"sigma": sigma.to_dict(), "epsilon": args.epsilon}
    else:
        if args.q is None or args.trace is None:
            raise ValidationError("calibrate needs either --sigma or both --q and --trace")
        tau = bounds.calibrate_tau(args.q, args.trace, args.epsilon)
        spec = bounds.TraceBound(args.q, args.trace)
        inputs = {"q": args.q, "v": args.trace, "epsilon": args.epsilon}
    if args.format == "json":
        _emit({"tau": tau, "leakage_term": bounds.gaussian_leakage(spec, tau), "inputs": inputs}, "json")
    else:
        print(_fmt(tau))
    return EXIT_OK


def cmd_sharpness(args) -> int:
    instance = sharpness.build_sharpness_instance(args.alpha, args.delta)
    cert = sharpness.certify_sharpness(instance)
    _emit({"model": instance.model.to_dict(), "certification": cert.to_dict()}, args.format)
    return EXIT_OK if cert.passed else EXIT_COMPUTE


def _markdown_table(reports) -> str:
    lines = [
        "| Screening design | Empirical coverage | Monte Carlo s.e. |",
        "|---|---|---|",
    ]
    for r in reports:
        lines.append(f"| {r.design.label} | {_fmt(r.coverage)} | {_fmt(r.mc_se)} |")
    return "\n".join(lines)


def cmd_simulate(args) -> int:
    if args.target == "table1":
        reports = simlab.table1(seed=args.seed, reps=args.reps, workers=args.workers, draw=args.draw)
    else:
        if args.design is None:
            raise ValidationError("simulate needs --design or the 'table1' target")
        design = simlab.design_from_name(args.design, tau=args.tau, j=args.j)
        config = simlab.SimulationConfig(
            design, n=args.n, p=args.p, alpha=args.alpha, reps=args.reps,
            seed=args.seed, draw=args.draw,
        )
        reports = [simlab.run_simulation(config, workers=args.workers)]
    if args.format == "json":
        payload = [r.to_dict() for r in reports]
        _emit(payload if args.target == "table1" else payload[0], "json")
    else:
        print(_markdown_table(reports))
    return EXIT_OK


def cmd_exact_coverage(args) -> int:
    value = simlab.exact_same_sample_coverage(args.p, args.alpha)
    if args.format == "json":
        _emit({"p": args.p, "alpha": args.alpha, "exact_coverage": value}, "json")
    else:
        print(_fmt(value))
    return EXIT_OK


def _probability(text: str) -> float:
    x = float(text)
    if not (0.0 <= x <= 1.0):
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return x


def _nonneg(text: str) -> float:
    x = float(text)
    if not (x >= 0.0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"{text} is not a finite nonnegative number")
    return x


def _positive(text: str) -> float:
    x = float(text)
    if not (x > 0.0 and math.isfinite(x)):
        raise argparse.ArgumentTypeError(f"{text} is not a finite positive number")
    return x


def _pos_int(text: str) -> int:
    x = int(text)
    if x < 1:
        raise argparse.ArgumentTypeError(f"{text} is not a positive integer")
    return x


def _seed(text: str) -> int:
    x = int(text, 0)
    if not (0 <= x < 2**64):
        raise argparse.ArgumentTypeError(f"{text} is not an unsigned 64-bit integer")
    return x


def _add_format(p, default="json", choices=("json", "text")):
    p.add_argument("--format", choices=choices, default=default,
                   help=f"output format (default: {default})")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="selcover",
        description="Coverage bounds for confidence intervals reported for a data-selected target.",
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", required=True)

    p = sub.add_parser("audit", help="exact leakage audit of a finite joint model")
    p.add_argument("model", help="JointModel JSON file ('-' for stdin)")
    p.add_argument("--alpha", type=_probability, default=None,
                   help="fixed-target level; defaults to the model's own")
    _add_format(p)
    p.set_defaults(func=cmd_audit)

    p = sub.add_parser("bound", help="closed-form noncoverage bounds")
    bsub = p.add_subparsers(dest="kind", metavar="KIND", required=True)

    g = bsub.add_parser("gaussian", help="Gaussian noisy screening")
    g.add_argument("--alpha", type=_probability, required=True)
    g.add_argument("--tau", type=_positive, required=True)
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--sigma", help="covariance JSON file {\"dim\": q, \"entries\": [[...]]}")
    src.add_argument("--q", type=_pos_int, help="summary dimension (with --trace)")
    g.add_argument("--trace", type=_nonneg, help="cap on the covariance trace (with --q)")
    _add_format(g)
    g.set_defaults(func=cmd_bound_gaussian)

    f = bsub.add_parser("finite-message", help="finite-message screening")
    f.add_argument("--alpha", type=_probability, required=True)
    src = f.add_mutually_exclusive_group(required=True)
    src.add_argument("--entropy", type=_nonneg, help="message entropy in nats")
    src.add_argument("--alphabet", type=_pos_int, help="message alphabet size")
    _add_format(f)
    f.set_defaults(func=cmd_bound_finite_message)

    t = bsub.add_parser("transfer", help="asymptotic transfer of fixed-target validity")
    t.add_argument("--alpha", type=_probability, required=True)
    t.add_argument("--r", type=_nonneg, required=True, help="fixed-target slack r_m")
    t.add_argument("--eta", type=_nonneg, required=True, help="mutual-information cap eta_m")
    _add_format(t)
    t.set_defaults(func=cmd_bound_transfer)

    p = sub.add_parser("calibrate", help="noise scale achieving a target leakage term")
    p.add_argument("--q", type=_pos_int)
    p.add_argument("--trace", type=_positive)
    p.add_argument("--sigma", help="covariance JSON file; calibrates against the full matrix")
    p.add_argument("--epsilon", type=_positive, required=True)
    _add_format(p, default="text")
    p.set_defaults(func=cmd_calibrate)

    p = sub.add_parser("sharpness", help="build and certify the equality instance")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    _add_format(p)
    p.set_defaults(func=cmd_sharpness)

    p = sub.add_parser("simulate", help="Monte Carlo coverage of the selected coordinate mean")
    p.add_argument("target", nargs="?", choices=["table1"],
                   help="run all six designs at n=400, p=50, alpha=0.05")
    p.add_argument("--design", choices=["fixed", "same", "split", "noisy"])
    p.add_argument("--tau", type=_positive, help="noise scale for --design noisy")
    p.add_argument("--j", type=_pos_int, default=1, help="coordinate for --design fixed")
    p.add_argument("--n", type=_pos_int, default=400)
    p.add_argument("--p", type=_pos_int, default=50)
    p.add_argument("--alpha", type=_probability, default=0.05)
    p.add_argument("--reps", type=_pos_int, default=10_000)
    p.add_argument("--seed", type=_seed, default=simlab.DEFAULT_SEED)
    p.add_argument("--draw", choices=["summary", "matrix"], default="summary")
    p.add_argument("--workers", type=_pos_int, default=1)
    _add_format(p, default="markdown", choices=("markdown", "json"))
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("exact-coverage", help="closed-form same-sample coverage")
    p.add_argument("--p", type=_pos_int, required=True)
    p.add_argument("--alpha", type=_probability, required=True)
    _add_format(p, default="text")
    p.set_defaults(func=cmd_exact_coverage)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else EXIT_OK
    try:
        return args.func(args)
    except (InputError, ValidationError) as exc:
        print(f"selcover {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        print(f"selcover {args.command}: computation failed: {exc}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
