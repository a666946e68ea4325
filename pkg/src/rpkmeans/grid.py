"""Nested hypercube grids over the data's bounding box.

Level ``i`` splits every axis of the bounding box into ``2**i`` equal slabs,
so each level-``i`` cell is the union of at most ``2**d`` level-``i+1``
cells. Only nonempty cells are stored. The finest level is built from the
raw points in a single pass; coarser levels are obtained by merging
children (cell coordinates halved), never by touching the points again.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Representative, as_points


@dataclass(frozen=True)
class BoundingBox:
    min: np.ndarray
    max: np.ndarray

    def __post_init__(self):
        if np.any(self.min > self.max):
            raise ValueError("bounding box has min > max on some axis")

    @property
    def extent(self):
        return self.max - self.min

    def contains(self, X) -> np.ndarray:
        X = np.atleast_2d(X)
        return np.all((X >= self.min) & (X <= self.max), axis=1)


def bounding_box(X) -> BoundingBox:
    X = as_points(X, "dataset")
    return BoundingBox(X.min(axis=0), X.max(axis=0))


def cell_coords(X, box: BoundingBox, level: int) -> np.ndarray:
    """Integer grid coordinates of each row of ``X`` at ``level``.

    Points on the upper face of the box land in the last cell; an axis with
    zero extent collapses to a single slab.
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if not np.all(box.contains(X)):
        raise ValueError("point(s) outside the bounding box")
    side = 1 << level
    extent = box.extent
    flat = extent == 0
    width = np.where(flat, 1.0, extent) / side
    coords = np.floor((X - box.min) / width).astype(np.int64)
    np.clip(coords, 0, side - 1, out=coords)
    coords[:, flat] = 0
    return coords


def cell_index(point, box: BoundingBox, level: int) -> tuple:
    """Grid coordinates of a single point as a tuple of ints."""
    return tuple(int(c) for c in cell_coords(np.atleast_2d(point), box, level)[0])


@dataclass
class PartitionLevel:
    """Representatives of all nonempty cells at one grid depth.

    Cells are kept in lexicographic order of their coordinates. ``sums``
    holds per-cell coordinate sums so that means are always ``sums /
    weights``, which makes merging children exact.

    ``fine_map[f]`` is the index (in this level) of the cell containing
    cell ``f`` of the finest level in the sequence this level belongs to.
    """

    level: int
    coords: np.ndarray
    weights: np.ndarray
    sums: np.ndarray
    fine_map: np.ndarray = field(repr=False)

    def __len__(self):
        return len(self.weights)

    @property
    def means(self) -> np.ndarray:
        return self.sums / self.weights[:, None]

    @property
    def total_weight(self) -> int:
        return int(self.weights.sum())

    @property
    def cells(self) -> dict:
        means = self.means
        return {
            tuple(int(c) for c in self.coords[k]): Representative(int(self.weights[k]), means[k])
            for k in range(len(self))
        }


@dataclass
class PartitionSequence:
    """Levels ``1..m`` plus the point-to-finest-cell map."""

    box: BoundingBox
    levels: list
    point_cell: np.ndarray = field(repr=False)

    @property
    def m(self):
        return len(self.levels)

    def __getitem__(self, level: int) -> PartitionLevel:
        """Level by its 1-based depth."""
        if not 1 <= level <= len(self.levels):
            raise IndexError(f"level {level} not in 1..{len(self.levels)}")
        return self.levels[level - 1]

    def point_labels(self, level: int) -> np.ndarray:
        """Index of the level-``level`` cell holding each point."""
        return self[level].fine_map[self.point_cell]

    @property
    def sizes(self) -> list:
        return [len(lv) for lv in self.levels]


def _group(coords, weights, sums):
    keys, inverse = np.unique(coords, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    p = len(keys)
    w = np.bincount(inverse, weights=weights, minlength=p)
    s = np.stack(
        [np.bincount(inverse, weights=sums[:, j], minlength=p) for j in range(sums.shape[1])],
        axis=1,
    )
    return keys, w, s, inverse


def build_finest(X, box: BoundingBox, m: int) -> tuple:
    """Aggregate raw points into their level-``m`` cells.

    Returns the level and the map from point index to cell index.
    """
    X = as_points(X, "dataset")
    coords = cell_coords(X, box, m)
    keys, w, s, inverse = _group(coords, np.ones(len(X)), X)
    level = PartitionLevel(m, keys, w.astype(np.int64), s, np.arange(len(keys)))
    return level, inverse


def coarsen(child: PartitionLevel) -> PartitionLevel:
    """Merge a level's cells into their parents one level up."""
    if child.level < 2:
        raise ValueError("cannot coarsen below level 1")
    keys, w, s, inverse = _group(child.coords // 2, child.weights.astype(np.float64), child.sums)
    return PartitionLevel(
        child.level - 1, keys, np.rint(w).astype(np.int64), s, inverse[child.fine_map]
    )


def build_sequence(X, m: int) -> PartitionSequence:
    """Build levels ``1..m``: the finest from the data, the rest backward."""
    if m < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    X = as_points(X, "dataset")
    box = bounding_box(X)
    finest, point_cell = build_finest(X, box, m)
    levels = [finest]
    while levels[-1].level > 1:
        levels.append(coarsen(levels[-1]))
    levels.reverse()
    return PartitionSequence(box, levels, point_cell)
