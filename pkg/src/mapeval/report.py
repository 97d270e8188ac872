"""Cross-run and cross-algorithm aggregation, per-metric rankings and rendering."""
from __future__ import annotations

import csv
import html
import io
import json
from dataclasses import dataclass
from typing import Iterable, Optional

from .metrics import MetricReport
from .trajectory import RunStatistics, aggregate_runs, mean_stddev

__all__ = [
    "METRICS",
    "RMSE",
    "IntegrityError",
    "RunRecord",
    "MetricStat",
    "SummaryEntry",
    "EvaluationSummary",
    "Ranking",
    "RankedItem",
    "summarize",
    "rank",
    "render",
    "parse_summary",
]

METRICS = ("occupied_proportion", "corner_count", "enclosed_area_count")
RMSE = "rmse"

TITLES = {
    RMSE: "Trajectory RMSE (m)",
    "occupied_proportion": "Proportion of occupied cells",
    "corner_count": "Number of corners",
    "enclosed_area_count": "Number of enclosed areas",
}


class IntegrityError(ValueError):
    pass


@dataclass(frozen=True)
class RunRecord:
    """One evaluated run; ``report`` is None when evaluation failed (see ``error``)."""

    algorithm: str
    sequence: str
    run_id: str
    report: Optional[MetricReport] = None
    rmse: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.report is not None

    def to_dict(self) -> dict:
        return {
            "run_id": self.run_id,
            "report": None if self.report is None else self.report.to_dict(),
            "rmse": self.rmse,
            "error": self.error,
        }


@dataclass(frozen=True)
class MetricStat:
    mean: float
    stddev: float


@dataclass(frozen=True)
class SummaryEntry:
    algorithm: str
    sequence: str
    runs: tuple
    metrics: dict
    rmse: Optional[RunStatistics] = None

    @property
    def failed_runs(self) -> list:
        return [r for r in self.runs if r.error]

    def to_dict(self) -> dict:
        out = {
            "algorithm": self.algorithm,
            "sequence": self.sequence,
            "runs": [r.to_dict() for r in self.runs],
            "metrics": {k: {"mean": v.mean, "stddev": v.stddev} for k, v in self.metrics.items()},
        }
        if self.rmse is not None:
            out["rmse"] = self.rmse.to_dict()
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "SummaryEntry":
        alg, seq = data["algorithm"], data["sequence"]
        runs = tuple(
            RunRecord(
                alg,
                seq,
                r["run_id"],
                None if r.get("report") is None else MetricReport.from_dict(r["report"]),
                r.get("rmse"),
                r.get("error"),
            )
            for r in data["runs"]
        )
        metrics = {k: MetricStat(v["mean"], v["stddev"]) for k, v in data.get("metrics", {}).items()}
        rmse = RunStatistics.from_dict(data["rmse"]) if data.get("rmse") is not None else None
        return cls(alg, seq, runs, metrics, rmse)


@dataclass(frozen=True)
class EvaluationSummary:
    entries: tuple = ()

    @property
    def algorithms(self) -> list[str]:
        return sorted({e.algorithm for e in self.entries})

    @property
    def sequences(self) -> list[str]:
        return sorted({e.sequence for e in self.entries})

    @property
    def has_rmse(self) -> bool:
        return any(e.rmse is not None for e in self.entries)

    def entry(self, algorithm: str, sequence: str) -> SummaryEntry:
        for e in self.entries:
            if e.algorithm == algorithm and e.sequence == sequence:
                return e
        raise KeyError((algorithm, sequence))

    def to_dict(self) -> dict:
        return {"entries": [e.to_dict() for e in self.entries]}

    @classmethod
    def from_dict(cls, data: dict) -> "EvaluationSummary":
        return cls(tuple(SummaryEntry.from_dict(e) for e in data.get("entries", [])))


def summarize(records: Iterable[RunRecord]) -> EvaluationSummary:
    """Group runs by (algorithm, sequence) and compute mean and sample stddev per metric.

    Failed runs are kept in the entry but excluded from the statistics. RMSE
    statistics appear only when at least one run of the entry has an RMSE.
    The result does not depend on the order of ``records``.
    """
    groups: dict = {}
    seen = set()
    for rec in records:
        key = (rec.algorithm, rec.sequence, rec.run_id)
        if key in seen:
            raise IntegrityError(f"duplicate run {key}")
        seen.add(key)
        groups.setdefault((rec.algorithm, rec.sequence), []).append(rec)

    entries = []
    for alg, seq in sorted(groups):
        runs = tuple(sorted(groups[(alg, seq)], key=lambda r: r.run_id))
        good = [r.report for r in runs if r.ok]
        metrics = {}
        if good:
            for name in METRICS:
                mean, sd = mean_stddev([getattr(rep, name) for rep in good])
                metrics[name] = MetricStat(mean, sd)
        rmses = [r.rmse for r in runs if r.rmse is not None]
        entries.append(SummaryEntry(alg, seq, runs, metrics, aggregate_runs(rmses) if rmses else None))
    return EvaluationSummary(tuple(entries))


# --------------------------------------------------------------------------
# ranking


@dataclass(frozen=True)
class RankedItem:
    rank: int
    algorithm: str
    mean: float


@dataclass(frozen=True)
class Ranking:
    """Per-metric orderings for one sequence; lower mean ranks first for every metric."""

    sequence: str
    by_metric: dict

    def order(self, metric: str) -> list[str]:
        return [item.algorithm for item in self.by_metric[metric]]


def _competition_rank(values: list[tuple[str, float]]) -> tuple:
    ordered = sorted(values, key=lambda av: (av[1], av[0]))
    out = []
    for pos, (alg, mean) in enumerate(ordered):
        if out and out[-1].mean == mean:
            rank = out[-1].rank
        else:
            rank = pos + 1
        out.append(RankedItem(rank, alg, mean))
    return tuple(out)


def rank(summary: EvaluationSummary, sequence: str) -> Ranking:
    entries = [e for e in summary.entries if e.sequence == sequence]
    if not entries:
        raise KeyError(f"sequence {sequence!r} not in summary")
    by_metric = {}
    for name in METRICS:
        vals = [(e.algorithm, e.metrics[name].mean) for e in entries if name in e.metrics]
        if vals:
            by_metric[name] = _competition_rank(vals)
    vals = [(e.algorithm, e.rmse.mean) for e in entries if e.rmse is not None]
    if vals:
        by_metric[RMSE] = _competition_rank(vals)
    return Ranking(sequence, by_metric)


# --------------------------------------------------------------------------
# rendering


def _stat_rows(summary: EvaluationSummary):
    for e in summary.entries:
        for name in METRICS:
            if name in e.metrics:
                yield e.algorithm, e.sequence, name, e.metrics[name].mean, e.metrics[name].stddev
        if e.rmse is not None:
            yield e.algorithm, e.sequence, RMSE, e.rmse.mean, e.rmse.stddev


def _render_csv(summary: EvaluationSummary) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["algorithm", "sequence", "metric", "mean", "stddev"])
    for alg, seq, name, mean, sd in _stat_rows(summary):
        writer.writerow([alg, seq, name, repr(float(mean)), repr(float(sd))])
    return buf.getvalue()


def format_cell(mean: float, stddev: float, precision: int = 3) -> str:
    return f"{mean:.{precision}f} ± {stddev:.{precision}f}"


def _render_html(summary: EvaluationSummary, precision: int = 3) -> str:
    esc = html.escape
    algs = summary.algorithms
    seqs = summary.sequences
    parts = [
        "<!DOCTYPE html>",
        '<html lang="en">',
        "<head>",
        '<meta charset="utf-8">',
        "<title>Map evaluation summary</title>",
        "<style>table{border-collapse:collapse;margin-bottom:1.5em}"
        "td,th{border:1px solid #999;padding:2px 8px;text-align:right}"
        "th:first-child,td:first-child{text-align:left}</style>",
        "</head>",
        "<body>",
        "<h1>Map evaluation summary</h1>",
    ]
    if not summary.entries:
        parts.append("<p>No runs evaluated.</p>")
    names = ([RMSE] if summary.has_rmse else []) + list(METRICS)
    for name in names:
        cells = {}
        for e in summary.entries:
            if name == RMSE and e.rmse is not None:
                cells[(e.algorithm, e.sequence)] = format_cell(e.rmse.mean, e.rmse.stddev, precision)
            elif name in e.metrics:
                st = e.metrics[name]
                cells[(e.algorithm, e.sequence)] = format_cell(st.mean, st.stddev, precision)
        if not cells:
            continue
        parts.append(f'<h2 id="{name}">{esc(TITLES[name])}</h2>')
        parts.append(f'<table class="metric" data-metric="{name}">')
        parts.append("<tr><th>Sequence</th>" + "".join(f"<th>{esc(a)}</th>" for a in algs) + "</tr>")
        for seq in seqs:
            row = "".join(f"<td>{esc(cells.get((a, seq), 'n/a'))}</td>" for a in algs)
            parts.append(f"<tr><td>{esc(seq)}</td>{row}</tr>")
        parts.append("</table>")
    failed = [(e, r) for e in summary.entries for r in e.failed_runs]
    if failed:
        parts.append('<h2 id="failures">Failed runs</h2>')
        parts.append("<table><tr><th>Algorithm</th><th>Sequence</th><th>Run</th><th>Error</th></tr>")
        for e, r in failed:
            parts.append(
                f"<tr><td>{esc(e.algorithm)}</td><td>{esc(e.sequence)}</td>"
                f"<td>{esc(r.run_id)}</td><td>{esc(r.error or '')}</td></tr>"
            )
        parts.append("</table>")
    parts += ["</body>", "</html>", ""]
    return "\n".join(parts)


def render(summary: EvaluationSummary, fmt: str = "json", precision: int = 3) -> str:
    """Render as ``json`` (lossless), ``csv`` (one row per statistic) or static ``html``."""
    fmt = fmt.lower()
    if fmt == "json":
        return json.dumps(summary.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if fmt == "csv":
        return _render_csv(summary)
    if fmt == "html":
        return _render_html(summary, precision)
    raise ValueError(f"unknown format {fmt!r}; expected json, csv or html")


def parse_summary(text: str) -> EvaluationSummary:
    return EvaluationSummary.from_dict(json.loads(text))
