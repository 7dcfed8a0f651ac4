"""Command-line entry point: ``pherocom run | sweep | compare | gen-maps``."""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from importlib import resources
from pathlib import Path
from typing import Sequence

from . import report
from .config import ConfigError, SimConfig, load_config, parse_config
from .engine import RunResult, batch, run
from .grid import MapError
from .maps import SHAPES, write_assets

DEFAULT_OUT = "pherocom-out"


def _override(text: str) -> tuple[str, str]:
    key, sep, value = text.partition("=")
    if not sep or not key.strip():
        raise argparse.ArgumentTypeError(f"expected key=value, got {text!r}")
    return key.strip(), value


def parse_radii(text: str) -> list[float]:
    """``0..20`` (inclusive), ``0..20:2`` (with step) or ``1,4,9``."""
    try:
        if ".." in text:
            span, _, step = text.partition(":")
            lo, hi = (float(x) for x in span.split(".."))
            inc = float(step) if step else 1.0
            if inc <= 0 or hi < lo:
                raise ValueError
            count = int(round((hi - lo) / inc)) + 1
            return [lo + i * inc for i in range(count) if lo + i * inc <= hi + 1e-9]
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad radius list {text!r}") from None


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pherocom",
        description="Virtual-pheromone swarm surveillance simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", required=True,
                       help="config file, or a bundled setup name such as e1 or e4.cfg")
        p.add_argument("--override", action="append", type=_override, default=[],
                       metavar="KEY=VALUE", help="replace one config key (repeatable)")
        p.add_argument("--out", default=None,
                       help=f"output directory (default: $PHEROCOM_OUT or {DEFAULT_OUT})")

    p_run = sub.add_parser("run", help="execute one replica and write its outputs")
    common(p_run)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--snapshot-every", type=_positive, default=None,
                       help="also write heatmaps every N local steps")
    p_run.add_argument("--comm-log", action="store_true",
                       help="write every broadcast to comm_log.csv")

    p_sweep = sub.add_parser("sweep", help="mean task-points per transmission radius")
    common(p_sweep)
    p_sweep.add_argument("--rt", type=parse_radii, default=parse_radii("0..20"))
    p_sweep.add_argument("--seeds", type=_positive, default=100)
    p_sweep.add_argument("--workers", type=_positive, default=1)

    p_cmp = sub.add_parser("compare", help="decentralized against centralized on matched seeds")
    common(p_cmp)
    p_cmp.add_argument("--seeds", type=_positive, default=10)
    p_cmp.add_argument("--workers", type=_positive, default=1)

    p_gen = sub.add_parser("gen-maps", help="write the bundled maps and setups")
    p_gen.add_argument("--out", default=None)
    return parser


def resolve_config(ref: str) -> SimConfig:
    path = Path(ref)
    if path.is_file():
        return load_config(path)
    name = path.stem.lower() if path.suffix == ".cfg" else ref.lower()
    if name in SHAPES and path.parent == Path("."):
        asset = resources.files("pherocom") / "assets" / f"{name}.cfg"
        base = Path(str(asset)).parent
        return parse_config(asset.read_text(encoding="utf-8"),
                            base if base.is_dir() else None)
    raise ConfigError(f"no config file or bundled setup named {ref!r}")


def _out_dir(arg: str | None) -> Path:
    return Path(arg or os.environ.get("PHEROCOM_OUT") or DEFAULT_OUT)


def _run_all(configs: Sequence[SimConfig], workers: int) -> list[RunResult]:
    if workers <= 1:
        return [run(c) for c in configs]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(run, configs))


def _cmd_run(args, config: SimConfig) -> dict[str, str]:
    if args.seed is not None:
        config = config.replace(seed=args.seed)
    result = run(config, snapshot_every=args.snapshot_every, comm_log=args.comm_log)
    print(f"task-points {result.taskpoints}  transmissions {result.comm.transmissions}  "
          f"bytes {result.comm.bytes_disseminated}")
    return report.run_files(result)


def _cmd_sweep(args, config: SimConfig) -> dict[str, str]:
    seeds = [config.seed + i for i in range(args.seeds)]
    rows = batch(config, args.rt, seeds, workers=args.workers)
    for r in rows:
        print(f"r_t {r.r_t:g}  mean {r.mean_tp:.2f}  sd {r.sd_tp:.2f}")
    return report.sweep_files(rows, seeds)


def _cmd_compare(args, config: SimConfig) -> dict[str, str]:
    seeds = [config.seed + i for i in range(args.seeds)]
    dec = _run_all([config.replace(mode="decentralized", seed=s) for s in seeds], args.workers)
    cen = _run_all([config.replace(mode="centralized", seed=s) for s in seeds], args.workers)
    hist = report.mean_cellsteps_histogram(dec, cen)
    for metric, d, c, ratio in report.ratio_rows(dec, cen):
        print(f"{metric:14s} decentralized {d:.6g}  centralized {c:.6g}  ratio {ratio:.4f}")
    print(f"share of cells differing by less than 3 cellsteps: {hist.share_within(0, 3):.3f}")
    return report.compare_files(seeds, dec, cen, hist)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "gen-maps":
            out = _out_dir(args.out)
            for path in write_assets(out):
                print(path)
            return 0
        config = resolve_config(args.config).with_overrides(dict(args.override))
        handler = {"run": _cmd_run, "sweep": _cmd_sweep, "compare": _cmd_compare}
        files = handler[args.command](args, config)
        report.write_files(_out_dir(args.out), files)
    except (ConfigError, MapError, FileNotFoundError, OSError, ValueError) as exc:
        print(f"pherocom: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
