"""Synthetic contamination fields used as ground truth.

Each field is a sum of Shekel-style peaks dropped on the water region and
normalized to [0, 1] over water. Peak count scales with the fleet so larger
fleets face more multimodal scenarios. One Shekel distance unit spans
``unit_cells`` grid cells (default 25 cells = 2.5 km), which stretches the
Shekel box over the lake and gives plumes a realistic 1-3 km footprint with
smooth saddles between maxima rather than isolated needles.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .worldmap import GridMap

C_LOW = 0.05
C_HIGH = 0.25
UNIT_CELLS = 25.0


@dataclass(frozen=True)
class GroundTruth:
    """Normalized truth field plus the peaks that generated it."""

    field: np.ndarray  # (rows, cols), [0,1] on water, -1 on land
    peaks_A: np.ndarray  # (M, 2) peak positions, cell coordinates
    weights_C: np.ndarray  # (M,) inverse peak amplitudes
    seed: int


def shekel_eval(peaks_A: np.ndarray, weights_C: np.ndarray, x) -> float:
    """Shekel value at one point: sum_i 1 / (c_i + |x - a_i|^2)."""
    peaks_A = np.asarray(peaks_A, dtype=float)
    weights_C = np.asarray(weights_C, dtype=float)
    d2 = ((peaks_A - np.asarray(x, dtype=float)) ** 2).sum(axis=1)
    return float((1.0 / (weights_C + d2)).sum())


def generate_ground_truth(
    gmap: GridMap,
    n_vehicles: int,
    seed: int,
    *,
    c_low: float = C_LOW,
    c_high: float = C_HIGH,
    unit_cells: float = UNIT_CELLS,
) -> GroundTruth:
    """Draw a random multimodal field for one mission.

    Peak count M is uniform on {2, ..., n_vehicles}, peak positions are
    uniform over water cell centers, weights c_i uniform on [c_low, c_high]
    (amplitudes 1/c_i between 4 and 20 before normalization, so fields mix
    dominant and minor maxima). Fully determined by (map, n_vehicles, seed).
    """
    if n_vehicles < 2:
        raise ValueError("need at least 2 vehicles")
    if not (0 < c_low <= c_high):
        raise ValueError("bad c range")
    rng = np.random.default_rng(seed)
    m = int(rng.integers(2, n_vehicles + 1))
    idx = rng.integers(0, gmap.n_water, size=m)
    peaks = gmap.water_centers[idx]
    weights = rng.uniform(c_low, c_high, size=m)

    d2 = ((gmap.water_centers[:, None, :] - peaks[None, :, :]) / unit_cells) ** 2
    raw = (1.0 / (weights[None, :] + d2.sum(axis=2))).sum(axis=1)
    lo, hi = raw.min(), raw.max()
    if hi == lo:
        raise ValueError("degenerate field, all water cells equal")
    field = np.full(gmap.grid.shape, -1.0)
    field[gmap.water_mask] = (raw - lo) / (hi - lo)
    return GroundTruth(field=field, peaks_A=peaks, weights_C=weights, seed=seed)
