"""Command-line front end: ``ris-secrecy <describe|point|sweep|figure|validate>``."""

from __future__ import annotations

import argparse
import logging
import sys
import warnings

from .analytic import ConvergenceError, ip_asymptotic
from .config import FIELD_NAMES, ConfigError, Setup, SystemConfig, derive, load_config_file, read_config_values
from .experiments import (
    FIGURES,
    SweepSpec,
    parse_methods,
    run_figure,
    run_point,
    run_sweep,
    run_validation,
)

EXIT_OK, EXIT_CONFIG, EXIT_VALIDATION, EXIT_CONVERGENCE = 0, 1, 2, 3
TINY_IP = 1e-14

_OVERRIDES = (
    ("--M", "m_elems"),
    ("--N", "n_elems"),
    ("--nb1", "nb1"),
    ("--nb2", "nb2"),
    ("--snr-sr-db", "snr_sr_db"),
    ("--snr-rd-db", "snr_rd_db"),
    ("--snr-re-db", "snr_re_db"),
    ("--snr-je-db", "snr_je_db"),
    ("--setup", "setup"),
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_CONFIG, f"{self.prog}: error: {message}\n")


def _config_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value file; flags override its values")
    for flag, dest in _OVERRIDES:
        p.add_argument(flag, dest=dest, default=None, metavar=dest.upper())


def _run_args(p: argparse.ArgumentParser, samples: int, methods: str | None) -> None:
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=samples)
    p.add_argument("--methods", default=methods, help="comma list of mc, quad, asym")
    p.add_argument("--workers", type=int, default=1)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ris-secrecy", description="Intercept probability of a dual-RIS jammed relay link.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("describe", help="print the configuration and derived parameters")
    _config_args(p)

    p = sub.add_parser("point", help="evaluate the intercept probability at one configuration")
    _config_args(p)
    _run_args(p, 100_000, "quad")

    p = sub.add_parser("sweep", help="evaluate a 1-D or 2-D grid and write CSV")
    _config_args(p)
    _run_args(p, 100_000, "quad")
    p.add_argument("--axis1", required=True, help="name=v1,v2,... or name=start:stop:step")
    p.add_argument("--axis2", help="optional second axis, same syntax")
    p.add_argument("--out", default="-", help="CSV path ('-' for stdout)")

    p = sub.add_parser("figure", help="run a figure preset and write CSV")
    p.add_argument("name", choices=FIGURES)
    _config_args(p)
    _run_args(p, 3_000_000, None)
    p.add_argument("--out", default="-")

    p = sub.add_parser("validate", help="run the property and statistical checks")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--samples", type=int, default=200_000, help="Monte Carlo samples per check")
    p.add_argument("--out", default="-", help="JSON report path ('-' for stdout)")
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    return {dest: getattr(args, dest) for _, dest in _OVERRIDES if getattr(args, dest, None) is not None}


def config_from_args(args: argparse.Namespace) -> SystemConfig:
    base = load_config_file(args.config) if getattr(args, "config", None) else SystemConfig()
    return base.with_values(**_overrides(args))


def parse_axis(text: str) -> tuple[str, tuple]:
    """``name=v1,v2`` or ``name=start:stop:step`` (stop inclusive)."""
    if "=" not in text:
        raise ConfigError(f"axis {text!r}: expected name=values")
    name, spec = (part.strip() for part in text.split("=", 1))
    if not spec:
        raise ConfigError(f"axis {name!r}: value list is empty")
    if ":" in spec:
        try:
            start, stop, step = (float(v) for v in spec.split(":"))
        except ValueError:
            raise ConfigError(f"axis {name!r}: range must be start:stop:step") from None
        if step <= 0 or stop < start:
            raise ConfigError(f"axis {name!r}: need step > 0 and stop >= start")
        count = int((stop - start) / step + 1e-9) + 1
        values = [start + i * step for i in range(count)]
        if all(float(v).is_integer() for v in (start, step)) and name.lower() in ("m", "n", "mn", "nb", "m_elems", "n_elems", "nb1", "nb2"):
            values = [int(v) for v in values]
        return name, tuple(values)
    return name, tuple(v.strip() for v in spec.split(",") if v.strip())


def _emit(text: str, out: str) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)


def _describe(cfg: SystemConfig) -> str:
    lines = ["configuration:"]
    for name in FIELD_NAMES:
        value = getattr(cfg, name)
        lines.append(f"  {name} = {value.value if isinstance(value, Setup) else value}")
    lines.append("derived:")
    lines += [f"  {k} = {v:.10g}" for k, v in derive(cfg).as_dict().items()]
    if cfg.setup is Setup.DUAL and cfg.jamming:
        asym = ip_asymptotic(cfg)
        lines.append("asymptote:")
        lines.append(f"  diversity_order = {asym.diversity_order:.10g}")
        lines.append(f"  coding_gain = {asym.coding_gain:.10g}")
        lines.append(f"  branch = {asym.branch}")
    return "\n".join(lines) + "\n"


def _format_estimate(est) -> str:
    if est.method == "quadrature" and est.value < TINY_IP:
        text = f"<= {TINY_IP:g}"
    else:
        text = f"{est.value:.6e}"
    extra = []
    if est.std_error is not None:
        extra.append(f"std_error={est.std_error:.3e}")
        extra.append(f"n={est.n_samples}")
        extra.append(f"seed={est.seed}")
    if est.error_estimate is not None:
        extra.append(f"error_estimate={est.error_estimate:.1e}")
    if est.heuristic:
        extra.append("heuristic")
    return f"{est.method:<11s} {text}" + (f"  ({', '.join(extra)})" if extra else "")


def _main(args: argparse.Namespace) -> int:
    if args.command == "validate":
        report = run_validation(args.seed, n_samples=args.samples)
        _emit(report.to_json() + "\n", args.out)
        for check in report.checks:
            print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}", file=sys.stderr)
        return EXIT_OK if report.passed else EXIT_VALIDATION

    cfg = config_from_args(args)
    if args.command == "describe":
        sys.stdout.write(_describe(cfg))
        return EXIT_OK
    if args.command == "point":
        for est in run_point(cfg, parse_methods(args.methods), args.samples, args.seed, workers=args.workers):
            print(_format_estimate(est))
        return EXIT_OK
    if args.command == "sweep":
        spec = SweepSpec(
            axis1=parse_axis(args.axis1),
            axis2=parse_axis(args.axis2) if args.axis2 else None,
            methods=parse_methods(args.methods),
            n_samples=args.samples,
            seed=args.seed,
            base=cfg,
        )
        _emit(run_sweep(spec, workers=args.workers), args.out)
        return EXIT_OK
    if args.command == "figure":
        # only keys the user actually set replace the preset's base values
        overrides = {**(read_config_values(args.config) if args.config else {}), **_overrides(args)}
        text = run_figure(
            args.name,
            n_samples=args.samples,
            seed=args.seed,
            methods=parse_methods(args.methods) if args.methods else None,
            overrides=overrides or None,
            workers=args.workers,
        )
        _emit(text, args.out)
        return EXIT_OK
    raise AssertionError(args.command)


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    with warnings.catch_warnings():
        warnings.simplefilter("default")
        warnings.showwarning = lambda msg, cat, *a, **k: print(f"warning: {msg}", file=sys.stderr)
        try:
            return _main(args)
        except ConfigError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        except ConvergenceError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONVERGENCE
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
