"""Plain-text serialisation of surpluses, interpolants and traces."""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .basis.families import BasisSpec
from .grid import SparseGrid, load_grid, save_grid


def save_surpluses(grid: SparseGrid, surpluses, path: str | Path) -> None:
    """CSV with header ``l1..ld,i1..id,alpha[,alpha2..]``."""
    s = np.asarray(surpluses, dtype=float)
    s2 = s.reshape(len(grid), -1)
    d = grid.dim
    header = [f"l{t + 1}" for t in range(d)] + [f"i{t + 1}" for t in range(d)]
    header += ["alpha"] + [f"alpha{k + 1}" for k in range(1, s2.shape[1])]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for p, row in zip(grid, s2):
            w.writerow(list(p.level) + list(p.index) + [repr(float(v)) for v in row])


def load_surpluses(path: str | Path) -> tuple[SparseGrid, np.ndarray]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    d = sum(1 for h in header if h.startswith("l"))
    grid = SparseGrid(d)
    vals = []
    for r in body:
        grid.add((tuple(int(v) for v in r[:d]), tuple(int(v) for v in r[d:2 * d])), canonical=True)
        vals.append([float(v) for v in r[2 * d:]])
    arr = np.array(vals)
    return grid, arr[:, 0] if arr.shape[1] == 1 else arr


def save_spec(spec: Sequence[BasisSpec], path: str | Path) -> None:
    """One ``family degree`` line per dimension."""
    Path(path).write_text("".join(f"{s.family} {s.degree}\n" for s in spec))


def load_spec(path: str | Path) -> tuple[BasisSpec, ...]:
    out = []
    for line in Path(path).read_text().splitlines():
        if line.strip():
            family, degree = line.split()
            out.append(BasisSpec(family, int(degree), allow_high_degree=True))
    return tuple(out)


def save_interpolant(f, prefix: str | Path) -> None:
    """Write ``<prefix>.grid``, ``<prefix>.surplus.csv`` and ``<prefix>.spec``."""
    prefix = str(prefix)
    save_grid(f.grid, prefix + ".grid")
    save_surpluses(f.grid, f.surpluses, prefix + ".surplus.csv")
    save_spec(f.spec, prefix + ".spec")


def load_interpolant(prefix: str | Path):
    from .surrogate import Interpolant

    prefix = str(prefix)
    grid = load_grid(prefix + ".grid")
    sgrid, alpha = load_surpluses(prefix + ".surplus.csv")
    order = np.array([sgrid.position(p) for p in grid])
    return Interpolant(grid, load_spec(prefix + ".spec"), alpha[order])


def write_csv(path: str | Path | None, header: Sequence[str], rows: Iterable[Sequence], stream=None) -> None:
    """Write rows with a header to ``path`` (or ``stream`` when path is None)."""
    def _fmt(v):
        if isinstance(v, (float, np.floating)):
            return f"{float(v):.12g}"
        return v

    if path is None:
        w = csv.writer(stream)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
        return
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for r in rows:
            w.writerow([_fmt(v) for v in r])
