"""Gaussian-process estimate of the contamination field.

Zero-mean GP with a unit-variance RBF kernel over (row, col) positions in
cell units. The length scale is refit on every model update by maximizing
the log marginal likelihood: a golden-section search around the scale's
current value, clipped to a fixed bracket. Starting from the 10-cell
default keeps the scale put on flat likelihoods (few spread-out samples)
instead of drifting to the bracket edge and starving the sampling gate. A
small nugget keeps the Cholesky factorization stable and models sensor
noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_solve, cholesky, solve_triangular

DEFAULT_LENGTH_SCALE = 10.0
LENGTH_SCALE_BOUNDS = (0.1, 100.0)
NUGGET = 1e-6

_INVPHI = (math.sqrt(5.0) - 1.0) / 2.0


class GPFitError(RuntimeError):
    """Raised when a model cannot be fit; carries the usable sample count."""

    def __init__(self, message: str, n_samples: int):
        super().__init__(f"{message} (n_samples={n_samples})")
        self.n_samples = n_samples


@dataclass(frozen=True)
class Sample:
    """One sensor measurement at a continuous position."""

    position: tuple[float, float]
    value: float
    vehicle: int
    step: int


@dataclass
class GPModel:
    samples: tuple[Sample, ...]
    X: np.ndarray  # (n, 2) deduplicated positions, first-seen order
    y: np.ndarray  # (n,) latest value per position
    length_scale: float
    nugget: float
    L: np.ndarray = field(repr=False)  # lower Cholesky of K
    alpha: np.ndarray = field(repr=False)  # K^-1 y
    mean_grid: np.ndarray | None = None
    std_grid: np.ndarray | None = None
    max_un_coord: np.ndarray | None = None  # argmax of std_grid, cell center
    max_con_coord: np.ndarray | None = None  # argmax of mean_grid, cell center

    @property
    def n(self) -> int:
        return len(self.y)


def _dedup(samples) -> tuple[np.ndarray, np.ndarray]:
    """Unique positions in first-seen order, latest value wins."""
    seen: dict[tuple[float, float], int] = {}
    xs: list[tuple[float, float]] = []
    ys: list[float] = []
    for s in samples:
        pos = (float(s.position[0]), float(s.position[1]))
        if pos in seen:
            ys[seen[pos]] = float(s.value)
        else:
            seen[pos] = len(xs)
            xs.append(pos)
            ys.append(float(s.value))
    return np.array(xs, dtype=float), np.array(ys, dtype=float)


def _kernel_from_d2(d2: np.ndarray, ell: float) -> np.ndarray:
    return np.exp(d2 / (-2.0 * ell * ell))


def _train_d2(X: np.ndarray) -> np.ndarray:
    diff = X[:, None, :] - X[None, :, :]
    return (diff * diff).sum(axis=2)


def _lml(d2: np.ndarray, y: np.ndarray, ell: float, nugget: float) -> float:
    n = len(y)
    K = _kernel_from_d2(d2, ell) + nugget * np.eye(n)
    try:
        L = cholesky(K, lower=True, check_finite=False)
    except np.linalg.LinAlgError:
        return -np.inf
    a = solve_triangular(L, y, lower=True, check_finite=False)
    return float(-0.5 * a @ a - np.log(np.diag(L)).sum() - 0.5 * n * math.log(2.0 * math.pi))


def _golden_max(f, lo: float, hi: float, tol: float = 1e-3) -> float:
    """Deterministic golden-section maximization on [lo, hi]."""
    a, b = lo, hi
    c = b - _INVPHI * (b - a)
    d = a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    while b - a > tol:
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return 0.5 * (a + b)


_PHI = 1.0 / _INVPHI


def _local_max(f, start: float, lo: float, hi: float) -> float:
    """Golden-section around the maximum nearest ``start``.

    Expands a bracket geometrically from the starting value until the
    middle point dominates both ends (or a clip boundary is hit), then
    refines inside it. Keeps the scale near its current value on flat
    likelihoods instead of drifting across the whole bracket.
    """
    mid = min(max(start, lo), hi)
    a, b = max(lo, mid / _PHI), min(hi, mid * _PHI)
    fa, fm, fb = f(a), f(mid), f(b)
    while fa > fm and a > lo:
        b, fb = mid, fm
        mid, fm = a, fa
        a = max(lo, a / _PHI)
        fa = f(a)
    while fb > fm and b < hi:
        a, fa = mid, fm
        mid, fm = b, fb
        b = min(hi, b * _PHI)
        fb = f(b)
    return _golden_max(f, a, b, tol=max(1e-3, 5e-3 * mid))


def fit(
    samples,
    *,
    length_scale: float | None = None,
    fit_length_scale: bool = True,
    nugget: float = NUGGET,
    bounds: tuple[float, float] = LENGTH_SCALE_BOUNDS,
) -> GPModel:
    """Fit the GP to a sample list.

    Duplicate positions collapse to the latest reading. The length scale is
    optimized by a local golden-section LML search started at
    ``length_scale`` and clipped to ``bounds`` when ``fit_length_scale``
    and at least two distinct positions exist, otherwise it stays at
    ``length_scale`` (default 10 cells). Pass the previous model's scale to
    warm-start refits.
    """
    samples = tuple(samples)
    X, y = _dedup(samples)
    n = len(y)
    if n == 0:
        raise GPFitError("cannot fit GP without samples", 0)
    if not (np.isfinite(X).all() and np.isfinite(y).all()):
        raise GPFitError("non-finite sample data", n)

    ell = DEFAULT_LENGTH_SCALE if length_scale is None else float(length_scale)
    if not bounds[0] <= ell <= bounds[1]:
        raise GPFitError(f"length scale {ell} outside {bounds}", n)
    d2 = _train_d2(X)
    if fit_length_scale and n >= 2:
        ell = _local_max(lambda s: _lml(d2, y, s, nugget), ell, bounds[0], bounds[1])

    K = _kernel_from_d2(d2, ell) + nugget * np.eye(n)
    try:
        L = cholesky(K, lower=True, check_finite=False)
    except np.linalg.LinAlgError as exc:
        raise GPFitError(f"kernel matrix not positive definite: {exc}", n) from exc
    alpha = cho_solve((L, True), y, check_finite=False)
    return GPModel(
        samples=samples,
        X=X,
        y=y,
        length_scale=float(ell),
        nugget=nugget,
        L=L,
        alpha=alpha,
    )


def predict(model: GPModel, Xq: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Posterior mean and standard deviation at query positions (m, 2)."""
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    diff = model.X[:, None, :] - Xq[None, :, :]
    Ks = _kernel_from_d2((diff * diff).sum(axis=2), model.length_scale)
    mean = Ks.T @ model.alpha
    v = solve_triangular(model.L, Ks, lower=True, check_finite=False)
    var = np.clip(1.0 - (v * v).sum(axis=0), 0.0, None)
    return mean, np.sqrt(var)


def predict_mean(model: GPModel, Xq: np.ndarray) -> np.ndarray:
    Xq = np.atleast_2d(np.asarray(Xq, dtype=float))
    diff = model.X[:, None, :] - Xq[None, :, :]
    Ks = _kernel_from_d2((diff * diff).sum(axis=2), model.length_scale)
    return Ks.T @ model.alpha


class GridKernelCache:
    """Incremental train-to-grid squared distances for repeated refits.

    Missions refit the GP hundreds of times while positions are only ever
    appended (deduplication keeps first-seen order), so rows of the distance
    matrix are reused across refits. Falls back to a full rebuild whenever
    the cached prefix stops matching.
    """

    def __init__(self, centers: np.ndarray):
        self.centers = np.asarray(centers, dtype=float)
        self._X = np.empty((0, 2))
        self._d2 = np.empty((0, len(self.centers)))

    def d2_for(self, X: np.ndarray) -> np.ndarray:
        n_cached = len(self._X)
        n = len(X)
        if n < n_cached or not np.array_equal(X[:n_cached], self._X):
            self._X = np.empty((0, 2))
            self._d2 = np.empty((0, len(self.centers)))
            n_cached = 0
        if n > n_cached:
            new = X[n_cached:]
            diff = new[:, None, :] - self.centers[None, :, :]
            rows = (diff * diff).sum(axis=2)
            self._X = np.vstack([self._X, new])
            self._d2 = np.vstack([self._d2, rows])
        return self._d2[:n]


def predict_grid(
    model: GPModel,
    gmap,
    *,
    cache: GridKernelCache | None = None,
    want_std: bool = True,
):
    """Evaluate the posterior at every water cell center.

    Returns (mean_grid, std_grid, max_un_coord, max_con_coord) and stores
    them on the model. Grids cover the full map with -1 on land. Argmax
    coordinates are cell centers; exact ties go to the lowest row-major
    cell index. ``want_std=False`` skips the uncertainty grid (callers that
    never read it), leaving std_grid and max_un_coord as None.
    """
    centers = gmap.water_centers
    if cache is not None:
        d2 = cache.d2_for(model.X)
    else:
        diff = model.X[:, None, :] - centers[None, :, :]
        d2 = (diff * diff).sum(axis=2)
    Ks = _kernel_from_d2(d2, model.length_scale)
    mean = Ks.T @ model.alpha

    mean_grid = np.full(gmap.grid.shape, -1.0)
    mean_grid[gmap.water_mask] = mean
    con_cell = gmap.water_cells[int(np.argmax(mean))]
    max_con = con_cell + 0.5

    std_grid = None
    max_un = None
    if want_std:
        v = solve_triangular(model.L, Ks, lower=True, check_finite=False)
        var = np.clip(1.0 - (v * v).sum(axis=0), 0.0, None)
        std = np.sqrt(var)
        std_grid = np.full(gmap.grid.shape, -1.0)
        std_grid[gmap.water_mask] = std
        un_cell = gmap.water_cells[int(np.argmax(std))]
        max_un = un_cell + 0.5

    model.mean_grid = mean_grid
    model.std_grid = std_grid
    model.max_un_coord = max_un
    model.max_con_coord = max_con
    return mean_grid, std_grid, max_un, max_con


@dataclass
class SamplingPolicy:
    """Distance-triggered sampling: measure after travelling lambda * ell.

    The trigger distance scales with the current model length scale, so a
    smoother model is sampled more sparsely. A vehicle with no previous
    sample always samples.
    """

    lambda_ratio: float = 0.3
    last_positions: dict[int, np.ndarray] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not 0.1 <= self.lambda_ratio <= 0.5:
            raise ValueError("lambda_ratio must lie in [0.1, 0.5]")

    def record(self, vehicle_id: int, pos: np.ndarray) -> None:
        self.last_positions[vehicle_id] = np.asarray(pos, dtype=float).copy()


def should_sample(
    policy: SamplingPolicy, model: GPModel | None, pos: np.ndarray, vehicle_id: int
) -> bool:
    """True when the vehicle moved at least lambda * length_scale since its last sample."""
    last = policy.last_positions.get(vehicle_id)
    if last is None:
        return True
    ell = DEFAULT_LENGTH_SCALE if model is None else model.length_scale
    moved = float(np.hypot(*(np.asarray(pos, dtype=float) - last)))
    return moved >= policy.lambda_ratio * ell
