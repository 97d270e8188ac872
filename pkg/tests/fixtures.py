"""Builders for on-disk batch trees used by the CLI and acceptance tests."""
from pathlib import Path

from mapeval.grid import save_pgm
from mapeval.synthetic import single_room, two_rooms


def write_traj(path: Path, points, t0=0.0, dt=0.1):
    lines = [f"{t0 + i * dt:.3f} {x!r} {y!r} 0 0 0 0 1" for i, (x, y) in enumerate(points)]
    path.write_text("\n".join(lines) + "\n")


def gt_points(n=20):
    return [(0.5 * i, 0.1 * i * i) for i in range(n)]


def build_tree(root: Path, algorithms=("alg_a", "alg_b"), sequences=("seq1", "seq2"), runs=3, gt=True):
    """Create ``root/<alg>/<seq>/<run>/{map.pgm,trajectory.txt}`` plus ground truth."""
    root.mkdir(parents=True, exist_ok=True)
    if gt:
        (root / "ground_truth").mkdir(exist_ok=True)
        for seq in sequences:
            write_traj(root / "ground_truth" / f"{seq}.txt", gt_points())
    for ai, alg in enumerate(algorithms):
        for si, seq in enumerate(sequences):
            for r in range(runs):
                d = root / alg / seq / f"run{r}"
                d.mkdir(parents=True, exist_ok=True)
                dots = [(10 + r, 10 + 2 * ai)] if r else []
                grid = two_rooms(dots=dots)[0] if (ai + si) % 2 else single_room(dots=dots)[0]
                save_pgm(d / "map.pgm", grid)
                off = 0.01 * (r + 1) * (ai + 1)
                write_traj(d / "trajectory.txt", [(x + off, y - off) for x, y in gt_points()])
    return root
