"""Evaluation quantities and report files.

Three errors are computed against the ground truth: MSE over all water
cells, MSE restricted to the true action zones, and the absolute error at
each true peak. Zones used for scoring always come from the truth field,
never from a mission's own estimate, so planners are judged on the regions
that actually matter. Batch runs aggregate per-seed reports into a mean
with a normal-approximation 95% interval.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .fedserver import zone_cell_rows
from .worldmap import GridMap, cell_of, shortest_extent_m
from .zones import ActionZone, compute_zone_radius, extract_action_zones


@dataclass(frozen=True)
class MetricsReport:
    mse_map: float
    mse_zones: float
    peak_errors: tuple[float, ...]

    @property
    def mean_peak_error(self) -> float:
        return float(np.mean(self.peak_errors))


def truth_action_zones(field: np.ndarray, gmap: GridMap, n_vehicles: int) -> list[ActionZone]:
    """Action zones of the real field, the scoring regions for a mission."""
    _, radius_cells = compute_zone_radius(
        shortest_extent_m(gmap), n_vehicles, gmap.cell_size_m
    )
    return extract_action_zones(field, gmap, n_vehicles, radius_cells)


def mse_map(truth: np.ndarray, estimate: np.ndarray, gmap: GridMap) -> float:
    """Mean squared difference over every water cell."""
    if truth.shape != estimate.shape or truth.shape != gmap.grid.shape:
        raise ValueError("grid shapes do not match")
    w = gmap.water_mask
    diff = truth[w] - estimate[w]
    return float(np.mean(diff * diff))


def mse_action_zones(
    truth: np.ndarray,
    estimate: np.ndarray,
    gmap: GridMap,
    truth_zones: list[ActionZone],
) -> float:
    """Mean squared difference over water cells inside the true zone disks."""
    if truth.shape != estimate.shape or truth.shape != gmap.grid.shape:
        raise ValueError("grid shapes do not match")
    if not truth_zones:
        raise ValueError("no truth zones to score against")
    member = np.zeros(len(gmap.water_cells), dtype=bool)
    for z in truth_zones:
        member[zone_cell_rows(gmap, z)] = True
    cells = gmap.water_cells[member]
    diff = truth[cells[:, 0], cells[:, 1]] - estimate[cells[:, 0], cells[:, 1]]
    return float(np.mean(diff * diff))


def peak_error(
    truth: np.ndarray,
    estimate: np.ndarray,
    truth_zones: list[ActionZone],
) -> tuple[float, ...]:
    """Per true zone, |truth - estimate| at the zone's peak cell."""
    out = []
    for z in truth_zones:
        r, c = cell_of(z.center)
        out.append(abs(float(truth[r, c]) - float(estimate[r, c])))
    return tuple(out)


def evaluate(truth: np.ndarray, estimate: np.ndarray, gmap: GridMap, n_vehicles: int) -> MetricsReport:
    zones = truth_action_zones(truth, gmap, n_vehicles)
    return MetricsReport(
        mse_map=mse_map(truth, estimate, gmap),
        mse_zones=mse_action_zones(truth, estimate, gmap, zones),
        peak_errors=peak_error(truth, estimate, zones),
    )


def aggregate(values: list[float]) -> tuple[float, float, float]:
    """(mean, 95% CI half-width, sample std) of per-seed values.

    Half-width is 1.96 * std / sqrt(n) with the n-1 sample std; the paper
    reports plus-minus values without naming the formula, so both the
    half-width and the raw std are kept.
    """
    if len(values) < 2:
        raise ValueError("aggregation needs at least two reports")
    arr = np.asarray(values, dtype=float)
    std = float(np.std(arr, ddof=1))
    half = 1.96 * std / math.sqrt(len(arr))
    return float(np.mean(arr)), half, std


# --- report files ---------------------------------------------------------

METRICS_COLUMNS = (
    "seed,planner,n_vehicles,explore_km,exploit_km,learning_mode,"
    "mse_map,mse_zones,mean_peak_error,samples_taken,wall_ms"
)


def metrics_csv_row(result, report: MetricsReport) -> str:
    cfg = result.config
    return ",".join(
        [
            str(cfg.seed),
            cfg.planner,
            str(cfg.n_vehicles),
            f"{cfg.explore_km:g}",
            f"{cfg.exploit_km:g}",
            cfg.learning_mode,
            f"{report.mse_map:.6g}",
            f"{report.mse_zones:.6g}",
            f"{report.mean_peak_error:.6g}",
            str(result.samples_taken),
            f"{result.wall_ms:.3f}",
        ]
    )


def write_metrics_csv(path, result, report: MetricsReport) -> None:
    with open(path, "w") as fh:
        fh.write(METRICS_COLUMNS + "\n")
        fh.write(metrics_csv_row(result, report) + "\n")


def write_grid_csv(path, grid: np.ndarray) -> None:
    """One row per grid row, %.6g values; land carries the -1 sentinel."""
    with open(path, "w") as fh:
        for row in grid:
            fh.write(",".join(f"{v:.6g}" for v in row) + "\n")


def write_traj_csv(path, traj) -> None:
    with open(path, "w") as fh:
        fh.write("step,vehicle,row,col,vel_row,vel_col,sampled\n")
        for step, vid, r, c, vr, vc, sampled in traj:
            fh.write(f"{step},{vid},{r:.6g},{c:.6g},{vr:.6g},{vc:.6g},{sampled}\n")


def write_zones_csv(path, zones: list[ActionZone]) -> None:
    with open(path, "w") as fh:
        fh.write("zone,row,col,radius_cells,priority,vehicles\n")
        for i, z in enumerate(zones):
            vehicles = ";".join(str(v) for v in z.vehicles)
            prt = "" if z.priority is None else str(z.priority)
            fh.write(
                f"{i},{z.center[0]:.6g},{z.center[1]:.6g},"
                f"{z.radius_cells:.6g},{prt},{vehicles}\n"
            )


def render_heatmap(path, grid: np.ndarray, gmap: GridMap) -> None:
    """Plain-text PGM (P2): v in [0,1] -> round-half-up to 0..255, land -> 0."""
    if not np.all(np.isfinite(grid[gmap.water_mask])):
        raise ValueError("grid has non-finite water values")
    rows, cols = grid.shape
    pix = np.zeros((rows, cols), dtype=int)
    w = gmap.water_mask
    pix[w] = np.clip(np.floor(grid[w] * 255.0 + 0.5), 0, 255).astype(int)
    with open(path, "w") as fh:
        fh.write(f"P2\n{cols} {rows}\n255\n")
        for row in pix:
            fh.write(" ".join(str(v) for v in row) + "\n")
