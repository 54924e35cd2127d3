"""Federated per-zone model nodes and the grid merge step.

In federated mode each action zone owns a model node. Nodes start from the
complete exploration sample set, then accumulate only the exploitation
samples taken by their assigned vehicles, so each learns extra local detail
without sharing raw in-zone data fleet-wide. The merged map is the
exploration-phase estimate with every zone disk overwritten by its node's
posterior; higher-priority zones win where disks overlap.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .surrogate import GPModel, Sample, fit, predict
from .worldmap import GridMap
from .zones import ActionZone


@dataclass
class ZoneNode:
    zone: ActionZone
    zone_index: int
    cell_rows: np.ndarray  # indices into gmap.water_cells inside the disk
    samples: list[Sample] = field(default_factory=list)
    model: GPModel | None = None


def zone_cell_rows(gmap: GridMap, zone: ActionZone) -> np.ndarray:
    """Water-cell indices strictly inside the zone disk, row-major order."""
    dist = np.linalg.norm(gmap.water_centers - zone.center, axis=1)
    return np.flatnonzero(dist < zone.radius_cells)


def create_nodes(
    zones: list[ActionZone], gmap: GridMap, exploration_samples
) -> list[ZoneNode]:
    """One node per zone, every node seeded with the full exploration set."""
    seeds = list(exploration_samples)
    return [
        ZoneNode(
            zone=z,
            zone_index=i,
            cell_rows=zone_cell_rows(gmap, z),
            samples=list(seeds),
        )
        for i, z in enumerate(zones)
    ]


def fit_node(node: ZoneNode, **fit_kw) -> GPModel:
    """Refit a node, warm-starting the length scale from its previous model."""
    if node.model is not None:
        fit_kw = {**fit_kw, "length_scale": node.model.length_scale}
    node.model = fit(node.samples, **fit_kw)
    return node.model


def merge_models(
    nodes: list[ZoneNode],
    base_mean: np.ndarray,
    base_std: np.ndarray,
    gmap: GridMap,
) -> tuple[np.ndarray, np.ndarray]:
    """Overwrite zone disks onto the exploration grids.

    Both mean and std are replaced inside each disk by the node posterior.
    Nodes are applied in ascending priority so the highest-priority zone has
    the last word on overlapping cells. Cells outside every disk keep the
    base values bit for bit. Merging is idempotent for fixed inputs.
    """
    for node in nodes:
        if node.model is None:
            raise ValueError(f"zone node {node.zone_index} has no fitted model")
        if node.zone.priority is None:
            raise ValueError(f"zone node {node.zone_index} has no priority")
    mean = base_mean.copy()
    std = base_std.copy()
    for node in sorted(nodes, key=lambda nd: (nd.zone.priority, -nd.zone_index)):
        if len(node.cell_rows) == 0:
            continue
        centers = gmap.water_centers[node.cell_rows]
        mu, sd = predict(node.model, centers)
        rows, cols = gmap.water_cells[node.cell_rows].T
        mean[rows, cols] = mu
        std[rows, cols] = sd
    return mean, std
