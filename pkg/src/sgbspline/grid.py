"""Level-index arithmetic and sparse grid construction.

A grid point is addressed by a level-index pair ``(l, i)`` with coordinate
``x = i * 2**-l`` per dimension. Hierarchical (canonical) indices are odd for
``l > 0`` and ``0`` or ``1`` for ``l = 0``.
"""

from __future__ import annotations

import itertools
from math import comb
from pathlib import Path
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from .exceptions import DomainError


class LevelIndex(NamedTuple):
    """A d-dimensional level-index pair."""

    level: tuple[int, ...]
    index: tuple[int, ...]

    @property
    def dim(self) -> int:
        return len(self.level)


def _as_tuple(v) -> tuple[int, ...]:
    if isinstance(v, (int, np.integer)):
        return (int(v),)
    return tuple(int(a) for a in v)


def _check_bounds(level: tuple[int, ...], index: tuple[int, ...]) -> None:
    if len(level) != len(index):
        raise DomainError("level and index must have the same dimension")
    for l, i in zip(level, index):
        if l < 0 or i < 0 or i > (1 << l):
            raise DomainError(f"invalid level-index pair ({l}, {i})")


def point_coordinate(p: LevelIndex | tuple) -> np.ndarray:
    """Return the coordinate ``i * 2**-l`` of a level-index pair."""
    level, index = _as_tuple(p[0]), _as_tuple(p[1])
    _check_bounds(level, index)
    return np.array([i / (1 << l) for l, i in zip(level, index)], dtype=float)


def canonicalize_1d(level: int, index: int) -> tuple[int, int]:
    """Coarsest univariate level-index pair sharing the coordinate of ``(level, index)``."""
    if level < 0 or index < 0 or index > (1 << level):
        raise DomainError(f"index {index} out of range for level {level}")
    if index == 0:
        return 0, 0
    if index == 1 << level:
        return 0, 1
    # trailing zeros of i via the lowest set bit
    tz = (index & -index).bit_length() - 1
    return level - tz, index >> tz


def canonicalize(level, index) -> LevelIndex:
    """Canonical (hierarchical) form of a possibly nodal level-index pair."""
    level, index = _as_tuple(level), _as_tuple(index)
    if len(level) != len(index):
        raise DomainError("level and index must have the same dimension")
    pairs = [canonicalize_1d(l, i) for l, i in zip(level, index)]
    return LevelIndex(tuple(p[0] for p in pairs), tuple(p[1] for p in pairs))


def hierarchical_indices(level: int) -> range:
    """The index set I_l (odd indices, or {0, 1} at level zero)."""
    if level == 0:
        return range(0, 2)
    return range(1, 1 << level, 2)


class SparseGrid:
    """Ordered, duplicate-free set of canonical level-index pairs.

    Points keep their insertion order. Each point carries a refinement degree
    (the number of times it has been refined), initialised to zero.
    """

    def __init__(self, dim: int, points: Iterable = ()):
        if dim < 1:
            raise DomainError("grid dimension must be positive")
        self.dim = int(dim)
        self._levels: list[tuple[int, ...]] = []
        self._indices: list[tuple[int, ...]] = []
        self._lookup: dict[tuple[tuple[int, ...], tuple[int, ...]], int] = {}
        self._degrees: list[int] = []
        self._arrays: tuple[np.ndarray, np.ndarray] | None = None
        for p in points:
            self.add(p)

    # -- container protocol -------------------------------------------------
    def __len__(self) -> int:
        return len(self._levels)

    def __iter__(self) -> Iterator[LevelIndex]:
        for l, i in zip(self._levels, self._indices):
            yield LevelIndex(l, i)

    def __getitem__(self, k: int) -> LevelIndex:
        return LevelIndex(self._levels[k], self._indices[k])

    def __contains__(self, p) -> bool:
        return (_as_tuple(p[0]), _as_tuple(p[1])) in self._lookup

    def __repr__(self) -> str:
        return f"SparseGrid(dim={self.dim}, size={len(self)})"

    def position(self, p) -> int:
        """Position of ``p`` in the grid order (KeyError if absent)."""
        return self._lookup[(_as_tuple(p[0]), _as_tuple(p[1]))]

    def add(self, p, canonical: bool = False) -> int:
        """Insert a level-index pair (canonicalised first); return its position."""
        level, index = _as_tuple(p[0]), _as_tuple(p[1])
        if len(level) != self.dim:
            raise DomainError(f"point dimension {len(level)} does not match grid dimension {self.dim}")
        if not canonical:
            level, index = canonicalize(level, index)
        key = (level, index)
        pos = self._lookup.get(key)
        if pos is not None:
            return pos
        pos = len(self._levels)
        self._lookup[key] = pos
        self._levels.append(level)
        self._indices.append(index)
        self._degrees.append(0)
        self._arrays = None
        return pos

    def copy(self) -> "SparseGrid":
        g = SparseGrid(self.dim)
        g._levels = list(self._levels)
        g._indices = list(self._indices)
        g._lookup = dict(self._lookup)
        g._degrees = list(self._degrees)
        return g

    # -- array views ----------------------------------------------------------
    def _ensure_arrays(self) -> tuple[np.ndarray, np.ndarray]:
        if self._arrays is None:
            shape = (len(self), self.dim)
            lv = np.array(self._levels, dtype=np.int64).reshape(shape)
            ix = np.array(self._indices, dtype=np.int64).reshape(shape)
            self._arrays = (lv, ix)
        return self._arrays

    @property
    def levels(self) -> np.ndarray:
        """Integer array of shape (N, d) with the levels of all points."""
        return self._ensure_arrays()[0]

    @property
    def indices(self) -> np.ndarray:
        """Integer array of shape (N, d) with the indices of all points."""
        return self._ensure_arrays()[1]

    def coordinates(self) -> np.ndarray:
        """Uniform coordinates ``i * 2**-l`` of all points, shape (N, d)."""
        lv, ix = self._ensure_arrays()
        return ix * np.ldexp(1.0, -lv)

    # -- refinement degrees -------------------------------------------------
    def degree(self, p) -> int:
        return self._degrees[self.position(p)]

    @property
    def degrees(self) -> np.ndarray:
        return np.array(self._degrees, dtype=np.int64)

    def increment_degree(self, p) -> None:
        self._degrees[self.position(p)] += 1

    def level_set(self) -> set[tuple[int, ...]]:
        return set(self._levels)

    def has_boundary(self) -> bool:
        return any(0 in l for l in self._levels)


# -- level enumeration ----------------------------------------------------------

def _compositions(total: int, d: int, minimum: int) -> Iterator[tuple[int, ...]]:
    """All d-tuples with entries >= minimum summing to ``total``, in lexicographic order."""
    if d == 1:
        if total >= minimum:
            yield (total,)
        return
    for first in range(minimum, total - minimum * (d - 1) + 1):
        for rest in _compositions(total - first, d - 1, minimum):
            yield (first,) + rest


def _points_of_level(level: tuple[int, ...]) -> Iterator[LevelIndex]:
    for index in itertools.product(*(hierarchical_indices(l) for l in level)):
        yield LevelIndex(level, tuple(index))


def grid_from_levels(levels: Iterable[Sequence[int]], dim: int | None = None) -> SparseGrid:
    """Grid containing every hierarchical point of the given levels.

    Levels are enumerated by increasing level sum and lexicographically within
    one level sum, which fixes a deterministic point order.
    """
    lv = sorted({tuple(int(a) for a in l) for l in levels}, key=lambda l: (sum(l), l))
    if dim is None:
        if not lv:
            raise DomainError("cannot infer the dimension of an empty level set")
        dim = len(lv[0])
    grid = SparseGrid(dim)
    for level in lv:
        for p in _points_of_level(level):
            grid.add(p, canonical=True)
    return grid


def regular_levels(n: int, d: int, boundary: bool = True) -> list[tuple[int, ...]]:
    """Levels with level sum at most ``n`` (and all entries >= 1 without boundary)."""
    minimum = 0 if boundary else 1
    out: list[tuple[int, ...]] = []
    for s in range(minimum * d, n + 1):
        out.extend(_compositions(s, d, minimum))
    return out


def regular_grid(n: int, d: int, boundary: bool = True) -> SparseGrid:
    """Regular sparse grid of level ``n``: all (l, i) with |l|_1 <= n.

    With ``boundary=False`` only interior levels (all l_t >= 1) are used, which
    is the grid for modified bases.
    """
    if n < 0 or d < 1:
        raise DomainError("regular grid needs n >= 0 and d >= 1")
    return grid_from_levels(regular_levels(n, d, boundary), dim=d)


def coarse_boundary_levels(n: int, d: int, b: int) -> list[tuple[int, ...]]:
    """Level set of the regular sparse grid with coarse boundary parameter ``b``."""
    if b == 0:
        return regular_levels(n, d)
    out = []
    for level in itertools.product(range(n + 1), repeat=d):
        if all(l >= 1 for l in level):
            keep = sum(level) <= n
        elif any(level):
            keep = sum(max(l, 1) for l in level) <= n - b + 1
        else:
            keep = True
        if keep:
            out.append(level)
    return out


def regular_grid_coarse_boundary(n: int, d: int, b: int) -> SparseGrid:
    """Regular sparse grid whose boundary levels are coarsened by ``b``."""
    if d < 1 or n < d:
        raise DomainError("coarse boundary grid needs n >= d >= 1")
    if b < 0:
        raise DomainError("boundary parameter must be non-negative")
    return grid_from_levels(coarse_boundary_levels(n, d, b), dim=d)


def full_grid_levels(level: Sequence[int], minimum: int = 0) -> list[tuple[int, ...]]:
    """All levels l' with minimum <= l' <= level componentwise."""
    return [tuple(l) for l in itertools.product(*(range(minimum, int(m) + 1) for m in level))]


def full_grid(level: Sequence[int], boundary: bool = True) -> SparseGrid:
    """Hierarchical decomposition of the full grid of the given level."""
    return grid_from_levels(full_grid_levels(level, 0 if boundary else 1), dim=len(level))


# -- counting -------------------------------------------------------------------

def interior_point_count(n: int, d: int) -> int:
    """Number of interior points of the regular sparse grid of level ``n``.

    The zero-dimensional count is one by convention; ``n < d`` gives zero.
    """
    if d == 0:
        return 1
    if n < d:
        return 0
    return sum((1 << q) * comb(d - 1 + q, d - 1) for q in range(n - d + 1))


def regular_point_count(n: int, d: int) -> int:
    """Number of points of the regular sparse grid with boundary."""
    # interior counts of the (d - q)-dimensional faces; the d-face only holds corners
    total = 0
    for q in range(d + 1):
        sub = d - q
        total += (1 << q) * comb(d, q) * (1 if sub == 0 else interior_point_count(n, sub))
    return total


def coarse_boundary_count(n: int, d: int, b: int) -> int:
    """Number of points of the regular sparse grid with coarse boundary ``b >= 1``."""
    total = interior_point_count(n, d)
    for q in range(1, d + 1):
        sub = d - q
        face = 1 if sub == 0 else interior_point_count(n - q - b + 1, sub)
        total += (1 << q) * comb(d, q) * face
    return total


# -- refinement relations ---------------------------------------------------------

def _children_1d(level: int, index: int, m: int = 1) -> list[tuple[int, int]]:
    if level == 0:
        return [(m, 1)] if index == 0 else [(m, (1 << m) - 1)]
    return [(level + m, (index << m) - 1), (level + m, (index << m) + 1)]


def direct_children(p: LevelIndex | tuple, dim: int | None = None) -> list[LevelIndex]:
    """Direct children of ``p`` in one dimension (``dim``) or in all dimensions.

    Level-zero points have the single child ``(1, 1)``, as both boundary points
    are direct ancestors of the level-one midpoint.
    """
    level, index = _as_tuple(p[0]), _as_tuple(p[1])
    dims = range(len(level)) if dim is None else [dim]
    out = []
    for t in dims:
        for lt, it in _children_1d(level[t], index[t], 1) if level[t] > 0 else [(1, 1)]:
            out.append(LevelIndex(level[:t] + (lt,) + level[t + 1:], index[:t] + (it,) + index[t + 1:]))
    return out


def mth_order_children(p: LevelIndex | tuple, t: int, m: int) -> list[LevelIndex]:
    """The m-th order children of ``p`` in dimension ``t``."""
    if m < 1:
        raise DomainError("child order must be at least one")
    level, index = _as_tuple(p[0]), _as_tuple(p[1])
    out = []
    for lt, it in _children_1d(level[t], index[t], m):
        out.append(LevelIndex(level[:t] + (lt,) + level[t + 1:], index[:t] + (it,) + index[t + 1:]))
    return out


def direct_ancestors(p: LevelIndex | tuple, t: int) -> list[LevelIndex]:
    """Points whose direct children in dimension ``t`` include ``p``."""
    level, index = _as_tuple(p[0]), _as_tuple(p[1])
    lt, it = level[t], index[t]
    if lt == 0:
        return []
    if lt == 1:
        pairs = [(0, 0), (0, 1)]
    else:
        parent = (it + 1) // 2 if ((it + 1) // 2) % 2 == 1 else (it - 1) // 2
        pairs = [(lt - 1, parent)]
    return [LevelIndex(level[:t] + (a,) + level[t + 1:], index[:t] + (b,) + index[t + 1:]) for a, b in pairs]


# -- level sets -----------------------------------------------------------------

class LevelSet:
    """Downward closed set of levels describing a dimensionally adaptive grid."""

    def __init__(self, levels: Iterable[Sequence[int]]):
        self.levels = {tuple(int(a) for a in l) for l in levels}
        if not self.levels:
            raise DomainError("level set must not be empty")
        dims = {len(l) for l in self.levels}
        if len(dims) != 1:
            raise DomainError("levels of mixed dimension")
        self.dim = dims.pop()
        self.base = tuple(min(l[t] for l in self.levels) for t in range(self.dim))

    def __contains__(self, level) -> bool:
        return tuple(level) in self.levels

    def __len__(self) -> int:
        return len(self.levels)

    def is_downward_closed(self) -> bool:
        for l in self.levels:
            for t in range(self.dim):
                if l[t] > self.base[t]:
                    lower = l[:t] + (l[t] - 1,) + l[t + 1:]
                    if lower not in self.levels:
                        return False
        return True

    def maximal_levels(self) -> list[tuple[int, ...]]:
        """Levels not dominated by any other level of the set."""
        out = []
        for l in self.levels:
            dominated = any(
                o != l and all(a <= b for a, b in zip(l, o)) for o in self.levels
            )
            if not dominated:
                out.append(l)
        return sorted(out, key=lambda l: (-sum(l), l))

    def grid(self) -> SparseGrid:
        return grid_from_levels(self.levels, dim=self.dim)

    @classmethod
    def from_grid(cls, grid: SparseGrid) -> "LevelSet":
        return cls(grid.level_set())


def is_dimensionally_adaptive(grid: SparseGrid) -> bool:
    """True if the grid holds complete levels forming a downward closed set."""
    ls = LevelSet.from_grid(grid)
    if not ls.is_downward_closed():
        return False
    expected = sum(int(np.prod([len(hierarchical_indices(a)) for a in l])) for l in ls.levels)
    return expected == len(grid)


# -- serialisation --------------------------------------------------------------

def save_grid(grid: SparseGrid, path: str | Path) -> None:
    """Write ``d=<d> n=<count>`` followed by one ``l1 .. ld i1 .. id`` line per point."""
    lines = [f"d={grid.dim} n={len(grid)}"]
    for p in grid:
        lines.append(" ".join(str(a) for a in p.level + p.index))
    Path(path).write_text("\n".join(lines) + "\n")


def load_grid(path: str | Path) -> SparseGrid:
    text = Path(path).read_text().split("\n")
    header = dict(tok.split("=") for tok in text[0].split())
    d, n = int(header["d"]), int(header["n"])
    grid = SparseGrid(d)
    for line in text[1:]:
        if not line.strip():
            continue
        vals = [int(a) for a in line.split()]
        grid.add((tuple(vals[:d]), tuple(vals[d:])), canonical=True)
    if len(grid) != n:
        raise DomainError(f"grid file announces {n} points but holds {len(grid)}")
    return grid
