"""Command-line interface.

Exit codes: 0 success, 1 evaluation failure (``batch --strict``, empty
association), 2 usage or I/O error.
"""
from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Optional

from . import __version__, _accel
from .grid import PgmConvention, PgmError, read_pgm
from .metrics import MetricParams, evaluate_map
from .report import RunRecord, parse_summary, render, summarize
from .trajectory import (
    FORMATS,
    AssociationError,
    TrajectoryParseError,
    associate,
    read_trajectory,
    rmse,
)

log = logging.getLogger("mapeval")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2

MAP_FILE = "map.pgm"
TRAJECTORY_FILE = "trajectory.txt"
GROUND_TRUTH_DIR = "ground_truth"

# flag -> (group, field, type)
PARAM_FLAGS = {
    "--log-sigma": ("corner", "log_sigma", float),
    "--min-blob-size": ("corner", "min_blob_size", int),
    "--harris-k": ("corner", "harris_k", float),
    "--harris-window-sigma": ("corner", "harris_window_sigma", float),
    "--rel-threshold": ("corner", "rel_threshold", float),
    "--nms-radius": ("corner", "nms_radius", int),
    "--u-steps": ("enclosed", "u_steps", int),
    "--min-hole-area": ("enclosed", "min_hole_area", int),
}


class CliError(Exception):
    def __init__(self, message: str, code: int = EXIT_USAGE):
        super().__init__(message)
        self.code = code


def _dump_json(data) -> str:
    return json.dumps(data, indent=2, ensure_ascii=False) + "\n"


def _write_output(text: str, path: Optional[str]):
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot write {path}: {exc}") from None


def _add_param_flags(p: argparse.ArgumentParser):
    g = p.add_argument_group("metric parameters")
    g.add_argument("--params", metavar="FILE", help="JSON file with metric parameters")
    defaults = MetricParams()
    for flag, (group, name, typ) in PARAM_FLAGS.items():
        default = getattr(getattr(defaults, group), name)
        g.add_argument(flag, type=typ, default=None, help=f"default {default}")
    g.add_argument(
        "--occupied-at-threshold",
        action="store_true",
        default=None,
        help="count cells exactly at the mean threshold as occupied",
    )
    g.add_argument("--unknown-gray", type=int, default=205, help="PGM gray value of unknown cells")


def _params_from_args(args) -> MetricParams:
    params = MetricParams()
    if args.params:
        try:
            data = json.loads(Path(args.params).read_text(encoding="utf-8"))
        except OSError as exc:
            raise CliError(f"cannot read params file {args.params}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise CliError(f"invalid JSON in params file {args.params}: {exc}") from None
        try:
            params = MetricParams.from_dict(data)
        except (TypeError, ValueError) as exc:
            raise CliError(f"invalid params file {args.params}: {exc}") from None
    overrides = {"corner": {}, "enclosed": {}, "proportion": {}}
    for flag, (group, name, _) in PARAM_FLAGS.items():
        value = getattr(args, flag.lstrip("-").replace("-", "_"))
        if value is not None:
            overrides[group][name] = value
    if args.occupied_at_threshold:
        overrides["proportion"]["occupied_at_threshold"] = True
    try:
        return params.with_overrides(**overrides)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _convention(args) -> PgmConvention:
    try:
        return PgmConvention(unknown_gray=args.unknown_gray)
    except ValueError as exc:
        raise CliError(str(exc)) from None


# --------------------------------------------------------------------------
# eval-map


def cmd_eval_map(args) -> int:
    params = _params_from_args(args)
    path = Path(args.map)
    if not path.is_file():
        raise CliError(f"map file not found: {path}")
    try:
        grid = read_pgm(path, _convention(args))
    except PgmError as exc:
        raise CliError(f"cannot parse {path}: {exc}") from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc}") from None
    report = evaluate_map(grid, params)
    for msg in report.diagnostics:
        log.warning("%s: %s", path, msg)
    _write_output(_dump_json(report.to_dict()), args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# eval-trajectory


def _load_trajectory(path, fmt):
    path = Path(path)
    if not path.is_file():
        raise CliError(f"trajectory file not found: {path}")
    try:
        return read_trajectory(path, fmt)
    except (TrajectoryParseError, ValueError) as exc:
        raise CliError(f"cannot parse {path}: {exc}") from None


def cmd_eval_trajectory(args) -> int:
    est = _load_trajectory(args.estimate, args.format)
    gt = _load_trajectory(args.ground_truth, args.gt_format or args.format)
    try:
        pairs = associate(est, gt, args.max_dt)
    except AssociationError as exc:
        log.error("%s", exc)
        return EXIT_FAILURE
    result = {"rmse": rmse(pairs), "pairs": len(pairs), "max_dt": args.max_dt}
    _write_output(_dump_json(result), args.output)
    return EXIT_OK


# --------------------------------------------------------------------------
# batch


def _subdirs(path: Path) -> list[Path]:
    return sorted((p for p in path.iterdir() if p.is_dir()), key=lambda p: p.name)


def discover_runs(root: Path) -> list[tuple[str, str, str, Path]]:
    """``(algorithm, sequence, run_id, run_dir)`` for every run directory, sorted."""
    runs = []
    for alg_dir in _subdirs(root):
        if alg_dir.name == GROUND_TRUTH_DIR:
            continue
        for seq_dir in _subdirs(alg_dir):
            for run_dir in _subdirs(seq_dir):
                runs.append((alg_dir.name, seq_dir.name, run_dir.name, run_dir))
    return sorted(runs, key=lambda r: r[:3])


def evaluate_run(job) -> RunRecord:
    """Evaluate one run directory; failures are captured in the record, never raised."""
    alg, seq, run_id, run_dir, gt_path, params_dict, unknown_gray, traj_fmt, max_dt = job
    params = MetricParams.from_dict(params_dict)
    map_path = Path(run_dir) / MAP_FILE
    try:
        grid = read_pgm(map_path, PgmConvention(unknown_gray=unknown_gray))
    except FileNotFoundError:
        return RunRecord(alg, seq, run_id, error=f"missing {MAP_FILE}")
    except (PgmError, OSError) as exc:
        return RunRecord(alg, seq, run_id, error=f"{MAP_FILE}: {exc}")
    report = evaluate_map(grid, params)
    traj_path = Path(run_dir) / TRAJECTORY_FILE
    if gt_path is None or not traj_path.is_file():
        return RunRecord(alg, seq, run_id, report)
    try:
        est = read_trajectory(traj_path, traj_fmt)
        gt = read_trajectory(gt_path, traj_fmt)
        value = rmse(associate(est, gt, max_dt))
    except (ValueError, OSError) as exc:
        return RunRecord(alg, seq, run_id, report, error=f"{TRAJECTORY_FILE}: {exc}")
    return RunRecord(alg, seq, run_id, report, value)


def _default_jobs() -> int:
    raw = os.environ.get("MAPEVAL_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        log.warning("ignoring non-integer MAPEVAL_JOBS=%r", raw)
        return 1


def cmd_batch(args) -> int:
    params = _params_from_args(args)
    root = Path(args.root)
    if not root.is_dir():
        raise CliError(f"batch root is not a directory: {root}")
    out_dir = Path(args.output_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create output directory {out_dir}: {exc}") from None
    _convention(args)

    gt_dir = root / GROUND_TRUTH_DIR
    runs = discover_runs(root)
    if not runs:
        log.warning("no run directories found under %s", root)
    jobs = []
    for alg, seq, run_id, run_dir in runs:
        gt = gt_dir / f"{seq}.txt"
        jobs.append(
            (
                alg, seq, run_id, str(run_dir), str(gt) if gt.is_file() else None,
                params.to_dict(), args.unknown_gray, args.traj_format, args.max_dt,
            )
        )
    n_workers = args.jobs if args.jobs is not None else _default_jobs()
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            records = list(pool.map(evaluate_run, jobs))
    else:
        records = [evaluate_run(j) for j in jobs]

    failed = [r for r in records if r.error]
    for r in failed:
        log.warning("%s/%s/%s: %s", r.algorithm, r.sequence, r.run_id, r.error)

    summary = summarize(records)
    for fmt, name in (("json", "summary.json"), ("csv", "summary.csv"), ("html", "summary.html")):
        try:
            (out_dir / name).write_text(render(summary, fmt), encoding="utf-8")
        except OSError as exc:
            raise CliError(f"cannot write {out_dir / name}: {exc}") from None
    log.info("evaluated %d run(s), %d failed; wrote %s", len(records), len(failed), out_dir)
    if failed and args.strict:
        return EXIT_FAILURE
    return EXIT_OK


# --------------------------------------------------------------------------
# render


def cmd_render(args) -> int:
    try:
        text = Path(args.summary).read_text(encoding="utf-8")
    except OSError as exc:
        raise CliError(f"cannot read {args.summary}: {exc}") from None
    try:
        summary = parse_summary(text)
    except (ValueError, KeyError, TypeError) as exc:
        raise CliError(f"invalid summary {args.summary}: {exc}") from None
    _write_output(render(summary, args.format), args.output)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mapeval", description="Ground-truth-free quality metrics for 2D occupancy-grid maps."
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("eval-map", help="compute the three map metrics for one PGM map")
    p.add_argument("map")
    p.add_argument("-o", "--output", help="output JSON path (default stdout)")
    _add_param_flags(p)
    p.set_defaults(func=cmd_eval_map)

    p = sub.add_parser("eval-trajectory", help="RMSE of an estimated trajectory against ground truth")
    p.add_argument("estimate")
    p.add_argument("ground_truth")
    p.add_argument("--format", choices=FORMATS, default="tum2d")
    p.add_argument("--gt-format", choices=FORMATS, default=None, help="defaults to --format")
    p.add_argument("--max-dt", type=float, default=0.02, help="association window in seconds")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_eval_trajectory)

    p = sub.add_parser("batch", help="evaluate <root>/<algorithm>/<sequence>/<run>/ trees")
    p.add_argument("root")
    p.add_argument("-o", "--output-dir", required=True)
    p.add_argument("--jobs", type=int, default=None, help="worker processes (default $MAPEVAL_JOBS or 1)")
    p.add_argument("--strict", action="store_true", help="exit 1 if any run failed")
    p.add_argument("--traj-format", choices=FORMATS, default="tum2d")
    p.add_argument("--max-dt", type=float, default=0.02)
    _add_param_flags(p)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("render", help="re-render a summary.json as json, csv or html")
    p.add_argument("summary")
    p.add_argument("--format", choices=("json", "csv", "html"), default="html")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_render)
    return parser


def _setup_logging(verbose: bool):
    for h in list(log.handlers):
        log.removeHandler(h)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("mapeval: %(levelname)s: %(message)s"))
    log.addHandler(handler)
    log.setLevel(logging.DEBUG if verbose else logging.WARNING)
    log.propagate = False


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    _setup_logging(args.verbose)
    log.debug("kernel backend: %s", _accel.backend())
    if getattr(args, "max_dt", 1.0) is not None and not getattr(args, "max_dt", 1.0) > 0:
        parser.error("--max-dt must be positive")
    if getattr(args, "jobs", None) is not None and args.jobs < 1:
        parser.error("--jobs must be >= 1")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"mapeval: error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
