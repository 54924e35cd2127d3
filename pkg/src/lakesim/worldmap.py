"""Occupancy grid of the lake: map loading, navigability, segment clipping.

Positions are continuous (row, col) coordinates in cell units. The cell
containing a position is the floor of each coordinate, so a position lying
exactly on the outer boundary edge of the last row or column is out of
bounds. Cell centers sit at (i + 0.5, j + 0.5). One cell spans 100 m of
water by default.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

# step used when walking a movement segment looking for land
CLIP_STEP_CELLS = 0.1


@dataclass
class GridMap:
    """Binary lake grid, 1 = navigable water, 0 = land."""

    grid: np.ndarray
    cell_size_m: float = 100.0
    water_mask: np.ndarray = field(init=False, repr=False)
    water_cells: np.ndarray = field(init=False, repr=False)
    water_centers: np.ndarray = field(init=False, repr=False)
    water_index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self) -> None:
        grid = np.asarray(self.grid)
        if grid.ndim != 2 or grid.size == 0:
            raise ValueError("map grid must be a non-empty 2-D array")
        if not np.isin(grid, (0, 1)).all():
            raise ValueError("map grid may only contain 0 (land) and 1 (water)")
        self.grid = grid.astype(np.int8)
        self.water_mask = self.grid == 1
        if not self.water_mask.any():
            raise ValueError("map contains no water cells")
        self.water_cells = np.argwhere(self.water_mask)
        self.water_centers = self.water_cells + 0.5
        # dense lookup from cell index to row of water_cells, -1 on land
        self.water_index = np.full(self.grid.shape, -1, dtype=np.int64)
        self.water_index[self.water_mask] = np.arange(len(self.water_cells))

    @property
    def rows(self) -> int:
        return self.grid.shape[0]

    @property
    def cols(self) -> int:
        return self.grid.shape[1]

    @property
    def n_water(self) -> int:
        return len(self.water_cells)


def load_map(path: str | Path, cell_size_m: float = 100.0) -> GridMap:
    """Read a text map.

    Format: line 1 is "<rows> <cols>", then one line per row of
    space-separated 0/1 symbols. Parse errors name the offending line.
    """
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].strip():
        raise ValueError(f"{path}: line 1: missing '<rows> <cols>' header")
    head = lines[0].split()
    if len(head) != 2 or not all(tok.isdigit() for tok in head):
        raise ValueError(f"{path}: line 1: malformed header {lines[0]!r}")
    n_rows, n_cols = int(head[0]), int(head[1])
    if len(lines) < 1 + n_rows:
        raise ValueError(f"{path}: line {len(lines)}: expected {n_rows} map rows")
    rows = []
    for i in range(n_rows):
        lineno = i + 2
        toks = lines[1 + i].split()
        if len(toks) != n_cols:
            raise ValueError(
                f"{path}: line {lineno}: expected {n_cols} symbols, got {len(toks)}"
            )
        bad = set(toks) - {"0", "1"}
        if bad:
            raise ValueError(f"{path}: line {lineno}: invalid symbol {bad.pop()!r}")
        rows.append([int(t) for t in toks])
    grid = np.array(rows, dtype=np.int8)
    if not (grid == 1).any():
        raise ValueError(f"{path}: line 2: map has no water cells")
    return GridMap(grid, cell_size_m=cell_size_m)


def save_map(path: str | Path, grid: np.ndarray) -> None:
    grid = np.asarray(grid)
    lines = [f"{grid.shape[0]} {grid.shape[1]}"]
    lines += [" ".join("1" if v else "0" for v in row) for row in grid]
    Path(path).write_text("\n".join(lines) + "\n")


def load_bundled_map() -> GridMap:
    """Load the lake map shipped with the package."""
    ref = resources.files("lakesim").joinpath("data/ypacarai.map")
    with resources.as_file(ref) as p:
        return load_map(p)


def cell_of(pos: np.ndarray) -> tuple[int, int]:
    """Grid cell containing a continuous position."""
    r, c = np.floor(np.asarray(pos, dtype=float))
    return int(r), int(c)


def is_navigable(gmap: GridMap, pos: np.ndarray) -> bool:
    r, c = cell_of(pos)
    if r < 0 or c < 0 or r >= gmap.rows or c >= gmap.cols:
        return False
    return bool(gmap.grid[r, c])


def clip_move(gmap: GridMap, frm: np.ndarray, to: np.ndarray) -> np.ndarray:
    """Clip a straight move at the first land (or out-of-grid) crossing.

    Walks the segment in CLIP_STEP_CELLS increments and returns the last
    sampled point before the first non-navigable one, so a move can never
    tunnel across a land strip. Returns ``to`` itself when the whole
    segment is clear and ``frm`` when even the first increment is blocked.
    """
    frm = np.asarray(frm, dtype=float)
    to = np.asarray(to, dtype=float)
    if not is_navigable(gmap, frm):
        raise ValueError(f"clip_move start position {frm} is not navigable")
    delta = to - frm
    length = float(np.hypot(*delta))
    if length == 0.0:
        return frm.copy()
    unit = delta / length
    n_steps = int(length / CLIP_STEP_CELLS)
    best = frm.copy()
    for k in range(1, n_steps + 1):
        p = frm + unit * (k * CLIP_STEP_CELLS)
        if not is_navigable(gmap, p):
            return best
        best = p
    if is_navigable(gmap, to):
        return to.copy()
    return best


def water_extent(gmap: GridMap) -> tuple[int, int]:
    """Bounding-box extent of the water region, in cells, per axis."""
    rs = gmap.water_cells[:, 0]
    cs = gmap.water_cells[:, 1]
    return int(rs.max() - rs.min() + 1), int(cs.max() - cs.min() + 1)


def shortest_extent_m(gmap: GridMap) -> float:
    """Shortest side of the water bounding box, in meters."""
    return min(water_extent(gmap)) * gmap.cell_size_m


def default_spawns(gmap: GridMap, n: int) -> np.ndarray:
    """Deterministic near-shore start positions, spread around the lake.

    Shore cells (water with a land or boundary 4-neighbour) are ordered by
    angle around the water centroid and n are picked at evenly spaced
    angular ranks. Every planner sharing a map gets the same spawns.
    """
    if n < 1:
        raise ValueError("need at least one spawn")
    shore = []
    for r, c in gmap.water_cells:
        for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
            rr, cc = r + dr, c + dc
            if rr < 0 or cc < 0 or rr >= gmap.rows or cc >= gmap.cols or not gmap.grid[rr, cc]:
                shore.append((r, c))
                break
    if n > len(shore):
        raise ValueError(f"map has only {len(shore)} shore cells, need {n}")
    shore = np.array(shore, dtype=float) + 0.5
    centroid = gmap.water_centers.mean(axis=0)
    ang = np.arctan2(shore[:, 0] - centroid[0], shore[:, 1] - centroid[1])
    order = np.argsort(ang, kind="stable")
    picks = [order[(k * len(order)) // n] for k in range(n)]
    return shore[picks]
