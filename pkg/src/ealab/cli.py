"""Command-line entry point: ``ealab <experiment> [flags]`` and ``ealab plot --out DIR``.

Exit status: 0 on success (including inconclusive physics estimates),
1 when a mathematical invariant is violated, 2 on invalid configuration.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Optional, Sequence

from .config import KINDS, ConfigError, ExperimentConfig

_FLAG_KEYS = {
    "seed": int, "out": str, "workers": int, "d": int, "L": str, "topology": str, "n_real": int,
    "bc": str, "ensemble": str, "method": str, "t": float, "eps": float, "deltas": str,
    "window": str, "edge": int, "t_min": float, "t_max": float, "n_t": int, "n_s": int,
    "n_real_droplet": int, "theta2": float, "theta2_se": float,
}


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML file with experiment keys")
    for key, typ in _FLAG_KEYS.items():
        flag = "--" + key.replace("_", "-")
        p.add_argument(flag, dest=key, type=typ, default=None, help=f"override config key '{key}'")
    p.add_argument("--ferromagnet", action="store_true", default=None,
                   help="diagnostic mode with every coupling equal to 1")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ealab",
        description="Zero-temperature Edwards-Anderson spin-glass experiments. "
        "Perturbation strength Delta J and interpolation time t are related exactly by "
        "t = ln(1 + Delta J^2) / 2.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for kind in KINDS:
        _add_common(sub.add_parser(kind, help=f"run the '{kind}' experiment"))
    p = sub.add_parser("plot", help="emit SVG plots for a finished run")
    p.add_argument("--out", required=True, help="output directory of the run")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    overrides = {k: getattr(args, k) for k in list(_FLAG_KEYS) + ["ferromagnet"] if getattr(args, k) is not None}
    overrides["kind"] = args.command
    if args.config:
        return ExperimentConfig.load(args.config, overrides)
    return ExperimentConfig.from_dict(overrides)


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "plot":
        from .experiments import RunManifest
        from .plots import MissingArtifacts, emit_plots

        try:
            files = emit_plots(RunManifest.load(args.out))
        except (MissingArtifacts, FileNotFoundError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
        print("\n".join(files))
        return 0

    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        cfg = config_from_args(args)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    from .experiments import run

    try:
        manifest = run(cfg)
    except ConfigError as exc:
        print(f"invalid config: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {len(manifest.files)} files to {cfg.out} (config {manifest.config_hash})")
    for v in manifest.violations:
        print(f"VIOLATION: {v}", file=sys.stderr)
    return 0 if manifest.ok else 1


if __name__ == "__main__":
    sys.exit(main())
