"""Regenerate the bundled lake map.

Draws a wavy oval lake on a 154 x 108 grid and rescales it until the water
bounding box is exactly 146 x 100 cells, so the shortest water extent is
100 cells = 10 km at the default 100 m cell size. Asserts the water region
is a single 4-connected component before writing.
"""

from pathlib import Path

import numpy as np
from scipy import ndimage

from lakesim.worldmap import GridMap, save_map, water_extent

ROWS, COLS = 154, 108
TARGET = (146, 100)
OUT = Path(__file__).resolve().parent.parent / "src" / "lakesim" / "data" / "ypacarai.map"

# fixed shoreline wobble, gives bays and headlands without pinching the lake
HARMONICS = ((2, 0.060, 0.9), (3, 0.050, 2.1), (5, 0.035, 4.2), (7, 0.020, 1.3))


def lake_mask(semi_r: float, semi_c: float) -> np.ndarray:
    rr, cc = np.meshgrid(np.arange(ROWS) + 0.5, np.arange(COLS) + 0.5, indexing="ij")
    dr = (rr - ROWS / 2) / semi_r
    dc = (cc - COLS / 2) / semi_c
    theta = np.arctan2(dc, dr)
    wobble = np.ones_like(theta)
    for k, amp, phase in HARMONICS:
        wobble += amp * np.cos(k * theta + phase)
    mask = dr * dr + dc * dc <= wobble * wobble
    # keep the largest 4-connected blob, drop any pinched-off ponds
    labels, count = ndimage.label(mask, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    if count > 1:
        sizes = ndimage.sum_labels(mask, labels, index=np.arange(1, count + 1))
        mask = labels == (1 + int(np.argmax(sizes)))
    return mask


def main() -> None:
    semi = np.array([69.0, 47.0])
    mask = lake_mask(*semi)
    for _ in range(60):
        ext = water_extent(GridMap(mask.astype(np.int8)))
        if ext == TARGET:
            break
        semi *= np.array(TARGET) / np.array(ext)
        mask = lake_mask(*semi)
    ext = water_extent(GridMap(mask.astype(np.int8)))
    assert ext == TARGET, f"extent {ext} != {TARGET} after rescaling"

    labels, count = ndimage.label(mask, structure=[[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    assert count == 1, f"water is {count} components, expected 1"
    assert not mask[0].any() and not mask[-1].any(), "water touches grid border"
    assert not mask[:, 0].any() and not mask[:, -1].any(), "water touches grid border"

    OUT.parent.mkdir(parents=True, exist_ok=True)
    save_map(OUT, mask.astype(np.int8))
    print(f"wrote {OUT}: {mask.sum()} water cells, extent {ext}")


if __name__ == "__main__":
    main()
