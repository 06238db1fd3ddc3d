"""CSV readers and writers for trajectories and analysis reports.

Floats are written with 17 significant digits so values round-trip exactly.
"""

import csv
import io
from pathlib import Path

import numpy as np

from .simulator import Trajectory

FLOAT = "%.17g"


def trajectory_header(n):
    return (["t"] + [f"x{i}" for i in range(1, n + 1)] + [f"d{i}" for i in range(1, n + 1)]
            + ["r", "l", "r0"])


def _write_table(path, header, columns, fmts):
    data = np.column_stack(columns)
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    if len(data):
        np.savetxt(buf, data, fmt=fmts, delimiter=",")
    Path(path).write_text(buf.getvalue())


def write_trajectory(traj, path):
    n = traj.positions.shape[1]
    cols = [traj.t, traj.positions, traj.destinations, traj.r, traj.l, traj.r0]
    _write_table(path, trajectory_header(n), cols, ["%d"] + [FLOAT] * (2 * n + 3))


def read_trajectory(path):
    """Parse a trajectory CSV.

    Raises ``ValueError`` naming the 1-based file line of the first bad row,
    or ``"no records"`` for a file without data rows.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise ValueError(f"{path}: no records")
        header = [h.strip() for h in header]
        if len(header) < 6 or (len(header) - 4) % 2 or header[0] != "t":
            raise ValueError(f"{path}: unrecognised header {','.join(header)}")
        n = (len(header) - 4) // 2
        if header != trajectory_header(n):
            raise ValueError(f"{path}: unrecognised header {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ValueError(f"{path}: malformed row at line {lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                rows.append([float(v) for v in row])
            except ValueError:
                raise ValueError(f"{path}: malformed row at line {lineno}: non-numeric field") from None
    if not rows:
        raise ValueError(f"{path}: no records")
    a = np.array(rows)
    return Trajectory(
        t=a[:, 0].astype(np.int64),
        positions=a[:, 1:1 + n],
        destinations=a[:, 1 + n:1 + 2 * n],
        r=a[:, 1 + 2 * n],
        l=a[:, 2 + 2 * n],
        r0=a[:, 3 + 2 * n],
    )


def write_rank_plot(rp, path):
    _write_table(path, ["l", "rank"], [rp.lengths, rp.ranks], [FLOAT, "%d"])


def write_fit(fits, path):
    """One row per fit; ``fits`` is a TailFit or a list of them."""
    if not isinstance(fits, (list, tuple)):
        fits = [fits]
    lines = ["slope,mu_mle,l_lo,l_hi,n,r2"]
    for f in fits:
        vals = [f.slope, f.mu_mle, f.window[0], f.window[1]]
        lines.append(",".join([FLOAT % v for v in vals] + [str(f.n_points), FLOAT % f.r_squared]))
    Path(path).write_text("\n".join(lines) + "\n")


def write_radial(hist, path):
    _write_table(path, ["r0", "probability"], [hist.r0, hist.probabilities], [FLOAT, FLOAT])


def write_grid(grid, path, scale=1.0):
    """Non-empty cells only, as cell centres; ``scale`` divides counts (replica means)."""
    c = grid.centers()
    i, j = np.nonzero(grid.counts)
    counts = grid.counts[i, j] / scale
    fmt = "%d" if scale == 1.0 else FLOAT
    _write_table(path, ["x1", "x2", "count"], [c[i], c[j], counts], [FLOAT, FLOAT, fmt])


def write_rows(path, header, rows):
    """Small mixed-type tables; floats use the round-trip format."""
    def fmt(v):
        if isinstance(v, (float, np.floating)):
            return FLOAT % v
        return str(v)

    lines = [",".join(header)] + [",".join(fmt(v) for v in row) for row in rows]
    Path(path).write_text("\n".join(lines) + "\n")
