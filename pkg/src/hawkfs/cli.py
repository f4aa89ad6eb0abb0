"""hawkfs command line: prepare, run, report.

Exit codes: 0 success, 1 runtime failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .config import PROFILES, ConfigError, load, resolve
from .dataset import DatasetError
from .experiment import (comparison_csv, comparison_text, compare_reports, prepare,
                         run_experiment, atomic_write)

log = logging.getLogger("hawkfs")

USAGE_ERROR = 2
RUNTIME_ERROR = 1


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", metavar="PATH", help="JSON run configuration")
    p.add_argument("--profile", choices=sorted(PROFILES), help="preset: paper or desk")
    p.add_argument("--seed", type=int, help="master seed")
    p.add_argument("--out", metavar="DIR", help="output directory")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hawkfs", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="integrate, split and normalize a dataset")
    _common(p)

    p = sub.add_parser("run", help="run the wrapper search (centralized or distributed)")
    _common(p)
    p.add_argument("--scheme", choices=["centralized", "distributed"])
    p.add_argument("--clients", type=int, dest="n_clients")
    p.add_argument("--runs", type=int, dest="n_runs")
    p.add_argument("--data", metavar="DIR", help="prepared data directory (default OUT/prepared)")

    p = sub.add_parser("report", help="compare two report.json files")
    p.add_argument("reports", nargs=2, metavar="REPORT")
    p.add_argument("--out", metavar="DIR", default=".", help="where comparison.csv goes")
    return parser


def _config(args):
    doc = load(args.config) if args.config else {}
    overrides = {k: getattr(args, k, None) for k in ("seed", "out", "scheme", "n_clients", "n_runs")}
    cfg = resolve(doc, args.profile, **overrides)
    problems = cfg.validate()
    if problems:
        raise UsageError("invalid configuration:\n  " + "\n  ".join(problems))
    return cfg


def cmd_prepare(args) -> int:
    cfg = _config(args)
    out = Path(cfg.out) / "prepared"
    meta = prepare(cfg, out)
    print(f"prepared {meta['name']} into {out}: " +
          ", ".join(f"{k}={v}" for k, v in meta["sizes"].items()))
    return 0


def cmd_run(args) -> int:
    cfg = _config(args)
    data_dir = Path(args.data) if args.data else Path(cfg.out) / "prepared"
    if not (data_dir / "dataset.json").is_file():
        raise UsageError(f"no prepared data in {data_dir}; run 'hawkfs prepare' first")
    report = run_experiment(cfg, data_dir, cfg.out)
    agg = report["aggregate"]
    print(f"{cfg.scheme} {cfg.classifier.name}: accuracy={agg['accuracy']:.4f} "
          f"precision={agg['precision']:.4f} recall={agg['recall']:.4f} "
          f"f_measure={agg['f_measure']:.4f} -> {Path(cfg.out) / 'report.json'}")
    return 0


def cmd_report(args) -> int:
    docs = []
    for path in args.reports:
        try:
            docs.append(json.loads(Path(path).read_text(encoding="utf-8")))
        except FileNotFoundError:
            raise UsageError(f"report not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise UsageError(f"malformed report {path}: {exc}") from None
    try:
        table = compare_reports(*docs)
    except KeyError as exc:
        raise UsageError(f"malformed report: missing {exc}") from None
    labels = tuple(d.get("scheme", f"report{i + 1}") for i, d in enumerate(docs))
    if labels[0] == labels[1]:
        labels = ("first", "second")
    print(comparison_text(table, labels))
    atomic_write(Path(args.out) / "comparison.csv", comparison_csv(table, labels))
    return 0


COMMANDS = {"prepare": cmd_prepare, "run": cmd_run, "report": cmd_report}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (UsageError, ConfigError) as exc:
        print(f"hawkfs: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except (DatasetError, FileNotFoundError) as exc:
        # input/schema problems are reported as configuration errors
        print(f"hawkfs: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except Exception as exc:  # noqa: BLE001
        log.debug("failure", exc_info=True)
        print(f"hawkfs: {type(exc).__name__}: {exc}", file=sys.stderr)
        return RUNTIME_ERROR


if __name__ == "__main__":
    sys.exit(main())
