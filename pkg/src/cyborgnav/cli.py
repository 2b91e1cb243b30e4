"""Command-line interface.

Subcommands::

    simulate  --config C [--seed N] [--out trial.jsonl]
    sweep     --config C [--seed N] --out DIR
    analyze   --logs DIR [--config C] [--out summary.csv]
    report    --logs DIR [--config C] --out DIR
    ingest    --logs markers.csv [--config C] [--out trial.jsonl]

Exit status is 0 on success, 1 for invalid input (bad config, flags or log
content) and 2 for file-system errors. ``CYBORGNAV_SEED`` overrides the seed
of the config file; ``--seed`` overrides both.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from .config import RunConfig, load_config, resolve_seed
from .errors import CyborgNavError
from .logs import read_sweep_logs, record_to_jsonl, summary_csv, write_sweep_logs
from .markers import read_marker_csv, track_to_record
from .metrics import summarize_sweep
from .plots import histogram_svg, trajectory_svg
from .trial import run_sweep, run_trial

__all__ = ["main", "main_exit", "build_parser"]

log = logging.getLogger("cyborgnav")

EXIT_OK, EXIT_INVALID, EXIT_IO = 0, 1, 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """ArgumentParser that reports usage errors with exit status 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise _UsageError(message)


def _seed(text: str) -> int:
    value = int(text)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cyborgnav", description="Closed-loop cyborg beetle navigation simulator.",
                     allow_abbrev=False)
    sub = parser.add_subparsers(dest="command", metavar="{simulate,sweep,analyze,report,ingest}",
                                parser_class=_Parser)

    p = sub.add_parser("simulate", help="run one trial and write its JSONL log", allow_abbrev=False)
    p.add_argument("--config", help="JSON config file (defaults when omitted)")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out", default="-", help="output JSONL file ('-' for stdout)")

    p = sub.add_parser("sweep", help="run the gain/update-interval sweep", allow_abbrev=False)
    p.add_argument("--config")
    p.add_argument("--seed", type=_seed)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("analyze", help="summarize a directory of trial logs", allow_abbrev=False)
    p.add_argument("--logs", required=True, help="directory of sweep JSONL logs")
    p.add_argument("--config")
    p.add_argument("--out", default="-", help="output CSV file ('-' for stdout)")

    p = sub.add_parser("report", help="write summary CSV and SVG plots", allow_abbrev=False)
    p.add_argument("--logs", required=True)
    p.add_argument("--config")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("ingest", help="convert a marker CSV to a JSONL trial log", allow_abbrev=False)
    p.add_argument("--logs", required=True, help="marker CSV file")
    p.add_argument("--config")
    p.add_argument("--out", default="-")
    return parser


def _write_text(target: str, text: str) -> None:
    if target == "-":
        sys.stdout.write(text)
    else:
        Path(target).write_text(text, encoding="utf-8")


def _config(args) -> RunConfig:
    return resolve_seed(load_config(args.config), getattr(args, "seed", None))


def _cmd_simulate(args) -> None:
    cfg = _config(args)
    record = run_trial(cfg.trial)
    _write_text(args.out, record_to_jsonl(record))
    log.info("trial finished: %s after %.2f s", record.outcome, record.t[-1])


def _cmd_sweep(args) -> None:
    cfg = _config(args)
    sw = cfg.sweep
    entries = run_sweep(cfg.trial, n_beetles=sw.n_beetles, kps=sw.k_p, t_updates=sw.t_update,
                        n_trials=sw.n_trials, workers=sw.workers)
    out = Path(args.out)
    write_sweep_logs(entries, out)
    rows, _ = summarize_sweep(entries, cfg.trial.path)
    (out / "summary.csv").write_text(summary_csv(rows), encoding="utf-8")
    log.info("wrote %d trial logs to %s", len(entries), out)


def _cmd_analyze(args) -> None:
    cfg = load_config(args.config)
    entries = read_sweep_logs(args.logs)
    rows, _ = summarize_sweep(entries, cfg.trial.path)
    _write_text(args.out, summary_csv(rows))


def _cmd_report(args) -> None:
    cfg = load_config(args.config)
    entries = read_sweep_logs(args.logs)
    path, arena = cfg.trial.path, cfg.trial.arena
    rows, hists = summarize_sweep(entries, path)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "summary.csv").write_text(summary_csv(rows), encoding="utf-8")
    (out / "frequency_histograms.svg").write_text(histogram_svg(hists), encoding="utf-8")
    combos: dict[tuple[float, float], list] = {}
    for e in entries:
        if not e.record.excluded:
            combos.setdefault((e.t_update, e.k_p), []).append(e.record)
    for (tu, kp), records in sorted(combos.items()):
        svg = trajectory_svg(records, path, arena, title=f"t_update {tu:.1f} s, Kp {kp:.2f}")
        (out / f"trajectories_tu{tu:.2f}_kp{kp:.2f}.svg").write_text(svg, encoding="utf-8")


def _cmd_ingest(args) -> None:
    cfg = load_config(args.config)
    track = read_marker_csv(args.logs, cfg.markers.front)
    record = track_to_record(track, cfg.trial.path, cfg.trial.arena)
    _write_text(args.out, record_to_jsonl(record))


_COMMANDS = {
    "simulate": _cmd_simulate,
    "sweep": _cmd_sweep,
    "analyze": _cmd_analyze,
    "report": _cmd_report,
    "ingest": _cmd_ingest,
}


def main(argv: list[str] | None = None) -> int:
    """Run the CLI and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError:
        return EXIT_INVALID
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
    try:
        _COMMANDS[args.command](args)
    except (CyborgNavError, ValueError) as exc:
        sys.stderr.write(f"cyborgnav {args.command}: {exc}\n")
        return EXIT_INVALID
    except OSError as exc:
        sys.stderr.write(f"cyborgnav {args.command}: {exc}\n")
        return EXIT_IO
    return EXIT_OK


def main_exit() -> None:
    """Console-script entry point."""
    sys.exit(main())


if __name__ == "__main__":  # pragma: no cover
    main_exit()
