"""Action zones: high-value disks that focus the exploitation phase.

Zones are extracted from an estimated (or true) field by recursively taking
the highest water cell outside all previously claimed disks, until the value
drops below a fraction of the field maximum or the fleet-size cap is hit.
Zone radius shrinks with fleet size so more vehicles split the lake into
more, smaller zones.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .worldmap import GridMap

THRESHOLD_RATIO = 0.33


@dataclass
class ActionZone:
    center: np.ndarray  # cell center, (row, col) in cells
    radius_cells: float
    radius_m: float
    peak_value: float
    priority: int | None = None
    vehicles: list[int] = field(default_factory=list)


def compute_zone_radius(
    length_m: float, n_vehicles: int, cell_size_m: float = 100.0
) -> tuple[float, float]:
    """Zone radius = shortest lake extent / fleet size, in meters and cells."""
    if n_vehicles < 1:
        raise ValueError("need at least one vehicle")
    radius_m = length_m / n_vehicles
    return radius_m, radius_m / cell_size_m


def max_priority(n_vehicles: int) -> int:
    return 10 * n_vehicles + 10


def extract_action_zones(
    value_grid: np.ndarray,
    gmap: GridMap,
    n_vehicles: int,
    radius_cells: float,
    threshold_ratio: float = THRESHOLD_RATIO,
) -> list[ActionZone]:
    """Find up to n_vehicles disjoint zone disks around the field's maxima.

    Each round takes the argmax over water cells not strictly inside an
    existing disk (ties to the lowest row-major index), so zone centers end
    up at least one radius apart. Rounds stop when the best remaining value
    falls below threshold_ratio * field max.
    """
    vals = value_grid[gmap.water_mask]
    centers = gmap.water_centers
    threshold = threshold_ratio * float(vals.max())
    open_cells = np.ones(len(vals), dtype=bool)
    zones: list[ActionZone] = []
    for _ in range(n_vehicles):
        if not open_cells.any():
            break
        masked = np.where(open_cells, vals, -np.inf)
        best = int(np.argmax(masked))
        value = float(vals[best])
        if value < threshold:
            break
        center = centers[best].copy()
        zones.append(
            ActionZone(
                center=center,
                radius_cells=radius_cells,
                radius_m=radius_cells * gmap.cell_size_m,
                peak_value=value,
            )
        )
        dist = np.linalg.norm(centers - center, axis=1)
        open_cells &= dist >= radius_cells
    return zones


def assign_priorities(zones: list[ActionZone], n_vehicles: int) -> list[ActionZone]:
    """Priority ladder: highest peak gets 10 * fleet + 10, then steps of 10.

    Extraction already yields zones in non-increasing peak order, so the
    ladder follows discovery order.
    """
    prt = max_priority(n_vehicles)
    for i, z in enumerate(zones):
        z.priority = prt - 10 * i
    return zones


def allocate_vehicles(
    zones: list[ActionZone], positions: dict[int, np.ndarray]
) -> dict[int, int]:
    """Assign every vehicle to a zone, nearest-first by working priority.

    Proceeds in rounds. Each round walks the zones in descending working
    priority (ties by extraction order) and hands each one its nearest
    still-free vehicle; a zone's working priority drops by 10 per vehicle
    received. Repeats until no vehicles remain. Returns vehicle -> zone
    index and fills each zone's vehicle list.
    """
    if not zones:
        raise ValueError("cannot allocate vehicles without zones")
    for z in zones:
        if z.priority is None:
            raise ValueError("zones must have priorities before allocation")
        z.vehicles = []
    working = {i: z.priority for i, z in enumerate(zones)}
    free = dict(positions)
    out: dict[int, int] = {}
    while free:
        order = sorted(working, key=lambda i: (-working[i], i))
        for zi in order:
            if not free:
                break
            center = zones[zi].center
            vid = min(
                free, key=lambda v: (float(np.linalg.norm(free[v] - center)), v)
            )
            del free[vid]
            out[vid] = zi
            zones[zi].vehicles.append(vid)
            working[zi] -= 10
    return out
