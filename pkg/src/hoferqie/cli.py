"""Command-line front end.

Verbs::

    hoferqie shells   [--N 2] [--out shells.svg]
    hoferqie certify  [--config FILE] [--a 3,-5] [--seed S] [--out report.json]
    hoferqie scan     [--config FILE] [--out scan.csv]
    hoferqie selftest

Exit codes: 0 all certified, 1 witness failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from .capacity import EmbeddingFailure, ball_embedding, sample_open_ball, shell_alpha
from .certify import CertifyOptions, GrowthCheckError, certify, growth_scan
from .config import ConfigError, RunConfig, load_config, parse_assignment
from .dynamics import LatticeElement
from .lifts import WitnessFailure, displacement_setup
from .report import (
    certificate_to_dict,
    dumps,
    failure_to_dict,
    point_cloud_csv,
    render_shells,
    scan_csv,
)
from .selftest import INJECTIONS, run_selftest

EXIT_OK, EXIT_WITNESS, EXIT_CONFIG = 0, 1, 2


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = dict(parse_assignment(item) for item in getattr(args, "set", None) or [])
    if getattr(args, "seed", None) is not None:
        overrides["seed"] = args.seed
    if getattr(args, "a", None):
        try:
            a = tuple(int(x) for x in args.a.split(","))
        except ValueError as exc:
            raise ConfigError(f"bad lattice element {args.a!r}") from exc
        overrides["a"] = a
        overrides.setdefault("N", len(a))
    if getattr(args, "N", None) is not None:
        overrides["N"] = args.N
        if "a" not in overrides and len(cfg.a) != args.N:
            overrides["a"] = (1,) + (0,) * (args.N - 1)
    return cfg.with_overrides(**overrides).validate()


def options_from(cfg: RunConfig) -> CertifyOptions:
    return CertifyOptions(
        q0=tuple(cfg.q0) or None,
        displacement_samples=cfg.displacement_samples,
        deck_samples=cfg.deck_samples,
        embedding_samples=cfg.embedding_samples,
        symplectic_points=cfg.symplectic_samples,
        fd_step=cfg.fd_step,
        symplectic_tol=cfg.symplectic_tol,
        deck_radius=cfg.deck_radius_value,
        seed=cfg.seed,
    )


def write_point_cloud(cfg: RunConfig, path: str) -> None:
    a = LatticeElement(cfg.a)
    q0 = np.asarray(cfg.q0, dtype=float) if cfg.q0 else np.zeros(cfg.n)
    _, R, shell = displacement_setup(a, q0)
    emb, _ = ball_embedding(cfg.N, shell.i, R, q0)
    r = (R * float(shell_alpha(cfg.N))) ** 0.5
    rng = np.random.default_rng(cfg.seed)
    ball = sample_open_ball(rng, 2 * cfg.n, r * (1 - 1e-9), cfg.point_cloud_count)
    Path(path).write_text(point_cloud_csv(ball, emb(ball)))


def cmd_shells(args) -> int:
    cfg = resolve_config(args)
    out = args.out or "shells.svg"
    try:
        render_shells(cfg.N, out)
    except OSError as exc:
        print(f"error: cannot write {out}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    return EXIT_OK


def cmd_certify(args) -> int:
    cfg = resolve_config(args)
    a = LatticeElement(cfg.a)
    try:
        cert = certify(a, cfg.n, options_from(cfg))
    except (WitnessFailure, EmbeddingFailure) as exc:
        _emit(dumps(failure_to_dict(exc, cfg)) + "\n", args.out)
        return EXIT_WITNESS
    _emit(dumps(certificate_to_dict(cert, cfg)) + "\n", args.out)
    if cfg.point_cloud_csv and not a.is_zero:
        write_point_cloud(cfg, cfg.point_cloud_csv)
    return EXIT_OK if cert.consistent else EXIT_WITNESS


def cmd_scan(args) -> int:
    cfg = resolve_config(args)
    try:
        rows = growth_scan(range(cfg.scan_N_min, cfg.scan_N_max + 1))
    except GrowthCheckError as exc:
        print(f"scan failed: {exc}", file=sys.stderr)
        return EXIT_WITNESS
    _emit(scan_csv(rows), args.out)
    return EXIT_OK


def cmd_selftest(args) -> int:
    return EXIT_OK if run_selftest(args.inject) else EXIT_WITNESS


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="flat key = value configuration file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override one configuration key (repeatable)")
    common.add_argument("--seed", type=int)
    common.add_argument("--out", help="output file (stdout when omitted)")
    common.add_argument("--N", type=int, help="lattice rank")
    common.add_argument("--a", help="lattice element, comma separated")
    common.add_argument("--print-config", dest="print_resolved", action="store_true",
                        help="print the resolved configuration and exit")

    parser = argparse.ArgumentParser(prog="hoferqie", description=__doc__.split("\n")[0])
    parser.add_argument("--print-config", action="store_true",
                        help="print the default configuration and exit")
    sub = parser.add_subparsers(dest="verb")
    for name, fn, help_ in [
        ("shells", cmd_shells, "draw the momentum shells as SVG"),
        ("certify", cmd_certify, "certify Hofer-norm bounds for a lattice element (JSON)"),
        ("scan", cmd_scan, "growth of the constants over a range of N (CSV)"),
        ("selftest", cmd_selftest, "run the invariant suite at reduced size"),
    ]:
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        if name == "selftest":
            p.add_argument("--inject", choices=INJECTIONS, help=argparse.SUPPRESS)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_config:
        sys.stdout.write(RunConfig().to_text())
        return EXIT_OK
    if args.verb is None:
        parser.print_help()
        return EXIT_CONFIG
    try:
        if getattr(args, "print_resolved", False):
            sys.stdout.write(resolve_config(args).to_text())
            return EXIT_OK
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
