"""Command line entry point: ``divpath <subcommand> --config run.ini``."""
from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import load_config, write_config
from .errors import DivpathError, IntegrityError
from .pipeline import STAGES, run_pipeline, run_stage


def _run_options(p):
    p.add_argument("--config", required=True, help="INI run configuration")
    p.add_argument("--out", help="output directory (overrides config and DIVPATH_OUT)")
    p.add_argument("--threads", type=int, help="worker threads across years (overrides DIVPATH_THREADS)")
    p.add_argument("--seed", type=int, help="seed recorded with the run")
    p.add_argument("--delta", type=int, help="interval length in years")
    p.add_argument("--rca-threshold", type=float, help="RCA cut for significant exports")
    p.add_argument("--backward-window", type=int, help="years of clean history before a new product")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="divpath", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in STAGES:
        _run_options(sub.add_parser(name, help=f"run the {name} stage"))
    _run_options(sub.add_parser("pipeline", help="run every stage in order"))
    rp = sub.add_parser("report", help="render a text report from an artifact directory")
    rp.add_argument("--out", required=True, help="artifact directory")
    rp.add_argument("--write", action="store_true", help="also save report.txt in the directory")
    sp = sub.add_parser("synth", help="write a seeded synthetic trade/covariate fixture and config")
    sp.add_argument("--out", required=True)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--countries", type=int, default=30)
    sp.add_argument("--products", type=int, default=60)
    return parser


def _config(args):
    overrides = {
        "output_dir": args.out,
        "threads": args.threads,
        "seed": args.seed,
        "delta": args.delta,
        "rca_threshold": args.rca_threshold,
        "backward_window": args.backward_window,
    }
    return load_config(args.config, overrides)


def write_synthetic_fixture(out, seed=0, countries=30, products=60) -> Path:
    """Synthetic inputs plus a config tuned to their year span."""
    from .synthetic import write_synthetic

    out = Path(out)
    write_synthetic(out, n_countries=countries, n_products=products, seed=seed)
    return write_config(
        out / "synthetic.ini", "trade.csv", "covariates.csv", "out",
        filters={"reference_year": 2008, "min_total_trade": 1e9},
        jumps={"delta": 2, "start_year": 1990},
        analysis={"table1_years": (1990, 2010), "table2_years": (1990, 2008),
                  "delta_sweep": (1, 2, 3, 4), "histogram_bins": 20},
        run={"seed": seed},
    )


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "synth":
            path = write_synthetic_fixture(args.out, args.seed, args.countries, args.products)
            print(path)
            return 0
        if args.command == "report":
            from .report import render_report

            text = render_report(args.out)
            if args.write:
                (Path(args.out) / "report.txt").write_text(text)
            sys.stdout.write(text)
            return 0
        cfg = _config(args)
        if args.command == "pipeline":
            run_pipeline(cfg)
            print(Path(cfg.output_dir) / "manifest.json")
        else:
            run_stage(args.command, cfg)
        return 0
    except IntegrityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (DivpathError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
