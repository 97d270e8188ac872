"""Pose logs, timestamp association and positional RMSE."""
from __future__ import annotations

import bisect
import math
import statistics
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Pose",
    "Trajectory",
    "RunStatistics",
    "TrajectoryParseError",
    "AssociationError",
    "parse_trajectory",
    "read_trajectory",
    "associate",
    "rmse",
    "aggregate_runs",
    "FORMATS",
]

FORMATS = ("tum2d", "xytheta")


class TrajectoryParseError(ValueError):
    def __init__(self, message: str, line: Optional[int] = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class AssociationError(ValueError):
    pass


def normalize_angle(theta: float) -> float:
    """Wrap to (-pi, pi]."""
    wrapped = math.atan2(math.sin(theta), math.cos(theta))
    return math.pi if wrapped == -math.pi else wrapped


def yaw_from_quaternion(qx: float, qy: float, qz: float, qw: float) -> float:
    return normalize_angle(math.atan2(2.0 * (qw * qz + qx * qy), 1.0 - 2.0 * (qy * qy + qz * qz)))


@dataclass(frozen=True)
class Pose:
    t: float
    x: float
    y: float
    theta: Optional[float] = None


@dataclass(frozen=True)
class Trajectory:
    poses: tuple

    def __post_init__(self):
        poses = tuple(self.poses)
        if not poses:
            raise ValueError("a trajectory needs at least one pose")
        for prev, cur in zip(poses, poses[1:]):
            if not cur.t > prev.t:
                raise ValueError(f"timestamps must increase strictly ({prev.t} -> {cur.t})")
        object.__setattr__(self, "poses", poses)

    @classmethod
    def from_arrays(cls, t, x, y, theta=None) -> "Trajectory":
        th = [None] * len(t) if theta is None else list(theta)
        return cls(tuple(Pose(float(a), float(b), float(c), d) for a, b, c, d in zip(t, x, y, th)))

    def __len__(self):
        return len(self.poses)

    @property
    def times(self) -> np.ndarray:
        return np.array([p.t for p in self.poses])

    @property
    def xy(self) -> np.ndarray:
        return np.array([(p.x, p.y) for p in self.poses]).reshape(-1, 2)


def parse_trajectory(text, fmt: str = "tum2d") -> Trajectory:
    """Parse a pose log.

    ``tum2d`` lines are ``t x y z qx qy qz qw`` (z ignored, yaw taken from the
    quaternion); ``xytheta`` lines are ``t x y theta``. Blank lines and lines
    starting with ``#`` are skipped. Poses are sorted by time; duplicate
    timestamps are an error.
    """
    if isinstance(text, (bytes, bytearray)):
        text = text.decode("utf-8")
    if fmt not in FORMATS:
        raise ValueError(f"unknown trajectory format {fmt!r}; expected one of {FORMATS}")
    ncols = 8 if fmt == "tum2d" else 4
    poses = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        fields = stripped.replace(",", " ").split()
        if len(fields) < ncols:
            raise TrajectoryParseError(f"expected {ncols} fields, got {len(fields)}", lineno)
        try:
            vals = [float(v) for v in fields[:ncols]]
        except ValueError:
            raise TrajectoryParseError(f"non-numeric field in {stripped!r}", lineno) from None
        if not all(math.isfinite(v) for v in vals):
            raise TrajectoryParseError("non-finite value", lineno)
        if fmt == "tum2d":
            t, x, y, _z, qx, qy, qz, qw = vals
            theta = yaw_from_quaternion(qx, qy, qz, qw)
        else:
            t, x, y, theta = vals
            theta = normalize_angle(theta)
        poses.append((t, lineno, Pose(t, x, y, theta)))
    if not poses:
        raise TrajectoryParseError("no poses found")
    poses.sort(key=lambda item: (item[0], item[1]))
    for (t0, l0, _), (t1, l1, _) in zip(poses, poses[1:]):
        if t1 == t0:
            raise TrajectoryParseError(f"duplicate timestamp {t1} (also on line {l0})", l1)
    return Trajectory(tuple(p for _, _, p in poses))


def read_trajectory(path, fmt: str = "tum2d") -> Trajectory:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_trajectory(fh.read(), fmt)


def associate(est: Trajectory, gt: Trajectory, max_dt: float = 0.02) -> list[tuple[Pose, Pose]]:
    """Greedy nearest-timestamp matching of estimated to ground-truth poses.

    Candidate pairs within ``max_dt`` are taken in order of increasing
    ``|dt|`` (ties: earlier estimate, then earlier ground truth). A candidate
    is accepted when neither pose is matched yet and it keeps the matching
    monotone in time, so pairs never cross. Returns pairs sorted by
    estimated timestamp.
    """
    if not max_dt > 0:
        raise ValueError(f"max_dt must be positive, got {max_dt}")
    te = est.times
    tg = gt.times
    lo = np.searchsorted(tg, te - max_dt, side="left")
    hi = np.searchsorted(tg, te + max_dt, side="right")
    counts = hi - lo
    ei = np.repeat(np.arange(te.size), counts)
    gi = np.concatenate([np.arange(a, b) for a, b in zip(lo, hi)]) if counts.sum() else np.zeros(0, int)
    gi = gi.astype(np.int64)
    dt = np.abs(te[ei] - tg[gi])
    keep = dt <= max_dt
    ei, gi, dt = ei[keep], gi[keep], dt[keep]
    order = np.lexsort((gi, ei, dt))

    matched_e: list[int] = []  # sorted estimate indices already matched
    match_of: dict[int, int] = {}
    used_g = set()
    for k in order:
        e, g = int(ei[k]), int(gi[k])
        if e in match_of or g in used_g:
            continue
        pos = bisect.bisect_left(matched_e, e)
        if pos > 0 and match_of[matched_e[pos - 1]] > g:
            continue
        if pos < len(matched_e) and match_of[matched_e[pos]] < g:
            continue
        matched_e.insert(pos, e)
        match_of[e] = g
        used_g.add(g)
    if not matched_e:
        raise AssociationError(
            f"no pose pairs within max_dt={max_dt} s; try a larger max_dt"
        )
    return [(est.poses[e], gt.poses[match_of[e]]) for e in matched_e]


def rmse(pairs: Sequence[tuple[Pose, Pose]]) -> float:
    """Root mean squared 2D position error over matched pairs (no alignment)."""
    if len(pairs) == 0:
        raise ValueError("rmse needs at least one pose pair")
    d = np.array([(a.x - b.x, a.y - b.y) for a, b in pairs], dtype=np.float64)
    return float(np.sqrt(np.mean(np.sum(d * d, axis=1))))


@dataclass(frozen=True)
class RunStatistics:
    per_run_rmse: tuple
    mean: float
    stddev: float

    def to_dict(self) -> dict:
        return {"mean": self.mean, "stddev": self.stddev, "per_run_rmse": list(self.per_run_rmse)}

    @classmethod
    def from_dict(cls, data: dict) -> "RunStatistics":
        return cls(tuple(data.get("per_run_rmse", ())), data["mean"], data["stddev"])


def mean_stddev(values: Sequence[float]) -> tuple[float, float]:
    """Arithmetic mean and sample (n - 1) standard deviation; 0 for a single value."""
    vals = [float(v) for v in values]
    if not vals:
        raise ValueError("need at least one value")
    mean = statistics.fmean(vals)
    return mean, (statistics.stdev(vals) if len(vals) >= 2 else 0.0)


def aggregate_runs(values: Sequence[float]) -> RunStatistics:
    if len(values) == 0:
        raise ValueError("aggregate_runs needs at least one run")
    mean, sd = mean_stddev(values)
    return RunStatistics(tuple(float(v) for v in values), mean, sd)
