"""Mission engine: one monitoring run for any planner on one truth field.

A control iteration follows the on-board loop: every vehicle reads its cell,
bests are refreshed, distance-gated samples are folded into the model(s),
then vehicles move one clipped step. The two-phase planner explores until
the whole fleet has spent its exploration budget, extracts action zones,
allocates vehicles, and exploits per zone with either a single central
model or federated per-zone nodes.

Randomness: the truth field uses its own generator seeded by the mission
seed; vehicle dynamics use a second stream. Draw order is fixed (initial
velocities per vehicle at setup, then per iteration one epsilon draw when
that schedule is active, then per moving vehicle the rule's draws in id
order), so a (config, seed) pair always reproduces the same mission.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .benchmark import C_HIGH, C_LOW, UNIT_CELLS, GroundTruth, generate_ground_truth
from .fedserver import ZoneNode, create_nodes, fit_node, merge_models, zone_cell_rows
from .surrogate import (
    DEFAULT_LENGTH_SCALE,
    GPModel,
    GridKernelCache,
    Sample,
    SamplingPolicy,
    fit,
    predict,
    predict_grid,
    predict_mean,
    should_sample,
)
from .swarm import (
    CLASSIC_COEFFS,
    EPSILON_EXPLOIT_COEFFS,
    EXPLOIT_COEFFS,
    EXPLORE_COEFFS,
    EpsilonSchedule,
    GroupBest,
    SwarmConfig,
    VehicleState,
    clamp_velocity,
    classic_step,
    enhanced_step,
    epsilon_coefficients,
    update_bests,
)
from .worldmap import (
    GridMap,
    cell_of,
    clip_move,
    default_spawns,
    is_navigable,
    shortest_extent_m,
)
from .zones import (
    ActionZone,
    allocate_vehicles,
    assign_priorities,
    compute_zone_radius,
    extract_action_zones,
)

PLANNERS = (
    "lawnmower",
    "classic_pso",
    "enhanced_explore",
    "enhanced_exploit",
    "epsilon_greedy",
    "aquafel",
)
LEARNING_MODES = ("federated", "centralized")
MAX_AUTONOMY_M = 30_000.0
# below this many training samples the length scale stays at its initial value
LML_MIN_SAMPLES = 50


def _clamp01(mean_grid: np.ndarray) -> np.ndarray:
    """Clamp a posterior mean to the field's physical range.

    Contamination is normalized to [0, 1], so excursions outside that range
    are extrapolation artifacts, not information; reported maps honour the
    known range.
    """
    return np.clip(mean_grid, 0.0, 1.0)

# waypoint bookkeeping for the coverage baseline
_WAYPOINT_REACHED_CELLS = 0.75
_STUCK_EPS_CELLS = 1e-6


@dataclass(frozen=True)
class MissionConfig:
    planner: str = "aquafel"
    n_vehicles: int = 4
    seed: int = 0
    max_distance_m: float = 20_000.0
    exploration_distance_m: float = 10_000.0
    exploitation_distance_m: float = 10_000.0
    learning_mode: str = "federated"
    max_iterations: int = 3000
    spawns: tuple | None = None
    inertia: float = 0.7
    # one control decision every 5 simulated minutes at the 2 m/s top speed;
    # the sensor keeps sampling along the path in between (see _Fleet.move)
    max_step_cells: float = 6.0
    # exploitation runs the controller faster: tight orbits need shorter legs
    exploit_step_cells: float | None = None
    explore_coeffs: tuple = EXPLORE_COEFFS
    exploit_coeffs: tuple = EXPLOIT_COEFFS
    classic_coeffs: tuple = CLASSIC_COEFFS
    epsilon_exploit_coeffs: tuple = EPSILON_EXPLOIT_COEFFS
    lambda_ratio: float = 0.3
    sigma_tie_tol: float = 0.05
    fit_length_scale: bool = True
    initial_length_scale: float = DEFAULT_LENGTH_SCALE
    threshold_ratio: float = 0.33
    swath_cells: float = 10.0
    c_low: float = C_LOW
    c_high: float = C_HIGH
    unit_cells: float = UNIT_CELLS

    def __post_init__(self) -> None:
        if self.planner not in PLANNERS:
            raise ValueError(f"unknown planner {self.planner!r}, expected one of {PLANNERS}")
        if self.learning_mode not in LEARNING_MODES:
            raise ValueError(f"unknown learning mode {self.learning_mode!r}")
        if self.n_vehicles < 2:
            raise ValueError("need at least 2 vehicles")
        if self.max_distance_m <= 0 or self.max_distance_m > MAX_AUTONOMY_M:
            raise ValueError(f"max_distance_m must lie in (0, {MAX_AUTONOMY_M}]")
        if self.exploration_distance_m <= 0 or self.exploitation_distance_m <= 0:
            raise ValueError("phase budgets must be positive")
        if self.exploration_distance_m + self.exploitation_distance_m > MAX_AUTONOMY_M:
            raise ValueError("phase budgets exceed vehicle autonomy")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")

    @property
    def explore_km(self) -> float:
        if self.planner == "aquafel":
            return self.exploration_distance_m / 1000.0
        return self.max_distance_m / 1000.0

    @property
    def exploit_km(self) -> float:
        if self.planner == "aquafel":
            return self.exploitation_distance_m / 1000.0
        return 0.0


@dataclass
class MissionResult:
    config: MissionConfig
    truth: GroundTruth
    spawns: np.ndarray
    mean_grid: np.ndarray
    std_grid: np.ndarray
    exploration_mean: np.ndarray | None
    exploration_std: np.ndarray | None
    zones: list[ActionZone]
    samples: list[Sample]
    traj: list[tuple]
    distances_m: dict[int, float]
    iterations: int
    wall_ms: float

    @property
    def samples_taken(self) -> int:
        return len(self.samples)


def _water_runs(cells: np.ndarray) -> list[tuple[int, int]]:
    """Contiguous stretches of water in a row or column slice, as (first, last) offsets."""
    runs = []
    start = None
    for i, v in enumerate(cells):
        if v == 1 and start is None:
            start = i
        elif v != 1 and start is not None:
            runs.append((start, i - 1))
            start = None
    if start is not None:
        runs.append((start, len(cells) - 1))
    return runs


def _lawnmower_waypoints(
    gmap: GridMap, n: int, swath: float, starts: np.ndarray | None = None
) -> list[list[np.ndarray]]:
    """Boustrophedon sweep plans, one horizontal band of the water bbox per vehicle.

    Lanes run across the band, one swath apart. Each lane is clipped to the
    longest stretch of open water in its column and dry columns are dropped,
    so the sweep follows the real lake surface instead of grinding against the
    shore. When spawn points are given, bands go to vehicles in row order and
    each vehicle enters its band from the nearer end rather than wasting
    budget ferrying to a fixed origin. A vehicle that runs out of distance
    mid-band leaves the rest of its band unseen.
    """
    r0, c0 = gmap.water_cells.min(axis=0)
    r1, c1 = gmap.water_cells.max(axis=0)
    h = (r1 - r0 + 1) / n
    plans: list[list[np.ndarray]] = []
    for k in range(n):
        lo = r0 + int(np.ceil(k * h))
        hi = r0 + int(np.ceil((k + 1) * h)) - 1
        wp: list[np.ndarray] = []
        for c in range(c0 + int(swath) // 2, c1 + 1, int(swath)):
            runs = _water_runs(gmap.grid[lo : hi + 1, c])
            if not runs:
                continue
            rs, re = max(runs, key=lambda ab: ab[1] - ab[0])
            a, b = (rs, re) if (len(wp) // 2) % 2 == 0 else (re, rs)
            wp.append(np.array([lo + a + 0.5, c + 0.5]))
            wp.append(np.array([lo + b + 0.5, c + 0.5]))
        plans.append(wp)
    if starts is not None:
        band_of = np.argsort(np.argsort(starts[:, 0]))
        plans = [plans[band_of[v]] for v in range(n)]
        for v, wp in enumerate(plans):
            if len(wp) > 1 and np.hypot(*(starts[v] - wp[-1])) < np.hypot(*(starts[v] - wp[0])):
                plans[v] = wp[::-1]
    return plans


class _Fleet:
    """Mutable mission state shared by all planner flavours."""

    def __init__(self, cfg: MissionConfig, gmap: GridMap, truth: GroundTruth):
        self.cfg = cfg
        self.gmap = gmap
        self.truth = truth
        self.rng = np.random.default_rng([cfg.seed, 1])
        if cfg.spawns is not None:
            self.spawns = np.array(cfg.spawns, dtype=float)
            if self.spawns.shape != (cfg.n_vehicles, 2):
                raise ValueError("spawn count must match fleet size")
            for p in self.spawns:
                if not is_navigable(gmap, p):
                    raise ValueError(f"spawn {p} is not navigable")
        else:
            self.spawns = default_spawns(gmap, cfg.n_vehicles)
        self.states: list[VehicleState] = []
        uses_swarm = cfg.planner != "lawnmower"
        for vid in range(cfg.n_vehicles):
            vel = self.rng.uniform(-1.0, 1.0, 2) if uses_swarm else np.zeros(2)
            self.states.append(
                VehicleState(
                    vid=vid,
                    position=self.spawns[vid].copy(),
                    velocity=vel,
                    pbest_pos=self.spawns[vid].copy(),
                    pbest_val=-np.inf,
                )
            )
        self.bests: dict[int | str, GroupBest] = {}
        self.policy = SamplingPolicy(lambda_ratio=cfg.lambda_ratio)
        self.samples: list[Sample] = []
        self.pending: list[Sample] = []
        self.model: GPModel | None = None
        self.cache = GridKernelCache(gmap.water_centers)
        self.traj: list[tuple] = []
        self.fit_kw = dict(
            length_scale=cfg.initial_length_scale,
            fit_length_scale=cfg.fit_length_scale,
        )

    def read_sensor(self, state: VehicleState) -> float:
        r, c = cell_of(state.position)
        return float(self.truth.field[r, c])

    def fit_args(self, n_training: int) -> dict:
        """Fit options for a training set of the given size.

        The marginal likelihood is uninformative on small sets (its argmax
        sits at the upper length-scale bound, which in turn opens the
        sampling gate to tens of cells), so the length scale is held at its
        initial value until enough samples exist to adapt it.
        """
        kw = dict(self.fit_kw)
        if n_training < LML_MIN_SAMPLES:
            kw["fit_length_scale"] = False
        return kw

    def refit_central(self, want_std: bool, want_grid: bool = True) -> None:
        self.model = fit(self.samples, **self.fit_args(len(self.samples)))
        self.fit_kw["length_scale"] = self.model.length_scale
        if want_grid:
            predict_grid(self.model, self.gmap, cache=self.cache, want_std=want_std)

    def final_grids(self) -> tuple[np.ndarray, np.ndarray]:
        """Full posterior for reporting, reusing what is already current."""
        if self.model is None:
            self.model = fit(self.samples, **self.fit_args(len(self.samples)))
        if self.model.mean_grid is None or self.model.std_grid is None:
            predict_grid(self.model, self.gmap, cache=self.cache, want_std=True)
        return _clamp01(self.model.mean_grid), self.model.std_grid

    def move(
        self,
        state: VehicleState,
        velocity: np.ndarray,
        proposed: np.ndarray,
        step: int,
        model: GPModel | None = None,
    ) -> float:
        """Apply one clipped step; returns executed length in cells.

        The sensor runs continuously while the vehicle travels, so the
        distance-triggered sampling policy is honoured along the executed
        segment, not just at control ticks. Measurements land in ``pending``
        and are folded into the training set at the next tick.
        """
        new_pos = clip_move(self.gmap, state.position, proposed)
        seg = new_pos - state.position
        step_len = float(np.hypot(*seg))
        gate = model if model is not None else self.model
        if step_len > 0.0:
            n_sub = max(1, int(np.ceil(step_len / 0.5)))
            for k in range(1, n_sub + 1):
                p = state.position + seg * (k / n_sub)
                if not should_sample(self.policy, gate, p, state.vid):
                    continue
                r, c = cell_of(p)
                if self.gmap.grid[r, c] != 1:
                    continue  # grazed a land cell corner, nothing to measure
                center = (r + 0.5, c + 0.5)
                value = float(self.truth.field[r, c])
                self.pending.append(
                    Sample(position=center, value=value, vehicle=state.vid, step=step)
                )
                self.policy.record(state.vid, np.array(center))
                # en-route readings count toward the vehicle's memory too
                if value > state.pbest_val:
                    state.pbest_val = value
                    state.pbest_pos = np.array(center)
        state.velocity = velocity
        state.position = new_pos
        state.distance_m += step_len * self.gmap.cell_size_m
        return step_len


def run_mission(cfg: MissionConfig, gmap: GridMap, truth: GroundTruth | None = None) -> MissionResult:
    """Run one mission and return grids, zones, samples and the trajectory."""
    t_start = time.perf_counter()
    if truth is None:
        truth = generate_ground_truth(
            gmap, cfg.n_vehicles, cfg.seed,
            c_low=cfg.c_low, c_high=cfg.c_high, unit_cells=cfg.unit_cells,
        )
    fleet = _Fleet(cfg, gmap, truth)
    if cfg.planner == "aquafel":
        result = _run_two_phase(fleet)
    else:
        result = _run_single_phase(fleet)
    result.wall_ms = (time.perf_counter() - t_start) * 1000.0
    return result


def _take_samples(fleet: _Fleet, step: int, readings: dict[int, float], gate_models) -> list[Sample]:
    """Distance-gated measurements, recorded at the measured cell's center.

    The sensor integrates the cell the vehicle is in, so the reading is
    attributed to that cell's center. This also dedups repeat visits to a
    cell exactly and keeps the training set consistent with one smooth
    field sampled on the lattice.
    """
    taken = []
    for s in fleet.states:
        if should_sample(fleet.policy, gate_models(s.vid), s.position, s.vid):
            r, c = cell_of(s.position)
            center = (r + 0.5, c + 0.5)
            taken.append(
                Sample(position=center, value=readings[s.vid], vehicle=s.vid, step=step)
            )
            fleet.policy.record(s.vid, np.array(center))
    return taken


def _log_traj(fleet: _Fleet, step: int, sampled: set[int]) -> None:
    for s in fleet.states:
        fleet.traj.append(
            (
                step,
                s.vid,
                float(s.position[0]),
                float(s.position[1]),
                float(s.velocity[0]),
                float(s.velocity[1]),
                int(s.vid in sampled),
            )
        )


def _run_single_phase(fleet: _Fleet) -> MissionResult:
    cfg = fleet.cfg
    budget = cfg.max_distance_m
    planner = cfg.planner
    if planner == "classic_pso":
        swarm_cfg = SwarmConfig.from_coeffs(
            cfg.classic_coeffs, inertia=cfg.inertia, max_step_cells=cfg.max_step_cells
        )
    elif planner == "enhanced_explore":
        swarm_cfg = SwarmConfig.from_coeffs(
            cfg.explore_coeffs, inertia=cfg.inertia, max_step_cells=cfg.max_step_cells
        )
    elif planner == "enhanced_exploit":
        swarm_cfg = SwarmConfig.from_coeffs(
            cfg.exploit_coeffs, inertia=cfg.inertia, max_step_cells=cfg.max_step_cells
        )
    else:
        swarm_cfg = None  # lawnmower or epsilon_greedy

    sched = None
    if planner == "epsilon_greedy":
        sched = EpsilonSchedule(
            explore_coeffs=cfg.explore_coeffs,
            exploit_coeffs=cfg.epsilon_exploit_coeffs,
        )

    plans = None
    waypoint_idx = None
    if planner == "lawnmower":
        plans = _lawnmower_waypoints(
            fleet.gmap,
            cfg.n_vehicles,
            cfg.swath_cells,
            np.array([s.position for s in fleet.states]),
        )
        waypoint_idx = [0] * cfg.n_vehicles

    # guidance grids are only refreshed mid-run for model-guided planners
    needs_guidance = planner in ("enhanced_explore", "enhanced_exploit", "epsilon_greedy")
    needs_std = planner in ("enhanced_explore", "epsilon_greedy") or (
        planner == "enhanced_exploit" and cfg.exploit_coeffs[2] != 0.0
    )

    step = 0
    while step < cfg.max_iterations:
        readings = {s.vid: fleet.read_sensor(s) for s in fleet.states}
        update_bests(fleet.states, readings, fleet.bests)
        new_samples = fleet.pending + _take_samples(fleet, step, readings, lambda vid: fleet.model)
        fleet.pending = []
        if new_samples:
            fleet.samples.extend(new_samples)
            fleet.refit_central(want_std=needs_std, want_grid=needs_guidance)
        _log_traj(fleet, step, {s.vehicle for s in new_samples})

        if all(s.distance_m >= budget for s in fleet.states):
            break

        coeffs_cfg = swarm_cfg
        if sched is not None:
            fleet_min = min(s.distance_m for s in fleet.states)
            coeffs = epsilon_coefficients(sched, fleet_min, fleet.rng)
            coeffs_cfg = SwarmConfig.from_coeffs(
                coeffs, inertia=cfg.inertia, max_step_cells=cfg.max_step_cells
            )

        for s in fleet.states:
            if s.distance_m >= budget:
                continue  # parked, budget spent
            if planner == "lawnmower":
                wp = plans[s.vid]
                if waypoint_idx[s.vid] >= len(wp):
                    continue
                target = wp[waypoint_idx[s.vid]]
                vel = clamp_velocity(target - s.position, cfg.max_step_cells)
                moved = fleet.move(s, vel, s.position + vel, step)
                if (
                    moved < _STUCK_EPS_CELLS
                    or np.hypot(*(s.position - target)) <= _WAYPOINT_REACHED_CELLS
                ):
                    waypoint_idx[s.vid] += 1
            elif planner == "classic_pso":
                vel, proposed = classic_step(
                    s, fleet.bests[s.group].position, coeffs_cfg, fleet.rng
                )
                fleet.move(s, vel, proposed, step)
            else:
                model = fleet.model
                max_con = model.max_con_coord if model is not None else s.position
                max_un = model.max_un_coord if model is not None else None
                if max_un is None:
                    max_un = max_con  # unused unless c3 != 0 and std was computed
                vel, proposed = enhanced_step(
                    s, fleet.bests[s.group].position, max_un, max_con, coeffs_cfg, fleet.rng
                )
                fleet.move(s, vel, proposed, step)
        step += 1
        if planner == "lawnmower" and all(
            s.distance_m >= budget or waypoint_idx[s.vid] >= len(plans[s.vid])
            for s in fleet.states
        ):
            break

    mean_grid, std_grid = fleet.final_grids()
    return MissionResult(
        config=cfg,
        truth=fleet.truth,
        spawns=fleet.spawns,
        mean_grid=mean_grid,
        std_grid=std_grid,
        exploration_mean=None,
        exploration_std=None,
        zones=[],
        samples=fleet.samples,
        traj=fleet.traj,
        distances_m={s.vid: s.distance_m for s in fleet.states},
        iterations=step,
        wall_ms=0.0,
    )


def _zone_guidance(model: GPModel, gmap: GridMap, cell_rows: np.ndarray, want_std: bool):
    """Posterior over one zone disk, kept for per-vehicle attractor picks."""
    centers = gmap.water_centers[cell_rows]
    if want_std:
        mu, sd = predict(model, centers)
    else:
        mu = predict_mean(model, centers)
        sd = None
    return centers, mu, sd


def _zone_attractors(
    guidance: tuple, position: np.ndarray, tie_tol: float
) -> tuple[np.ndarray, np.ndarray]:
    """(max_un, max_con) for the vehicle at ``position`` within its zone.

    Among cells within ``tie_tol`` of the zone maximum, head for the nearest
    one, so the attractor does not hop to a new near-tie after every refit
    while the posterior inside the disk is still nearly flat.
    """
    centers, mu, sd = guidance

    def nearest_top(values: np.ndarray) -> np.ndarray:
        lo, hi = values.min(), values.max()
        band = values >= hi - tie_tol * (hi - lo) if hi > lo else slice(None)
        cand = centers[band]
        return cand[int(np.argmin(((cand - position) ** 2).sum(axis=1)))]

    max_con = nearest_top(mu)
    max_un = nearest_top(sd) if sd is not None else max_con
    return max_un, max_con


def _run_two_phase(fleet: _Fleet) -> MissionResult:
    cfg = fleet.cfg
    explore_cfg = SwarmConfig.from_coeffs(
        cfg.explore_coeffs, inertia=cfg.inertia, max_step_cells=cfg.max_step_cells
    )
    exploit_cfg = SwarmConfig.from_coeffs(
        cfg.exploit_coeffs,
        inertia=cfg.inertia,
        max_step_cells=cfg.exploit_step_cells or cfg.max_step_cells,
    )
    exploit_std = cfg.exploit_coeffs[2] != 0.0
    federated = cfg.learning_mode == "federated"

    phase = "explore"
    exploration_mean = exploration_std = None
    zones: list[ActionZone] = []
    nodes: list[ZoneNode] = []
    zone_rows: list[np.ndarray] = []
    guidance: dict[int, tuple] = {}
    assignment: dict[int, int] = {}
    phase_start: dict[int, float] = {}

    def gate_model(vid: int) -> GPModel | None:
        if phase == "exploit" and federated and vid in assignment:
            return nodes[assignment[vid]].model
        return fleet.model

    def budget_left(s: VehicleState) -> bool:
        if phase == "explore":
            return s.distance_m < cfg.exploration_distance_m
        return s.distance_m - phase_start[s.vid] < cfg.exploitation_distance_m

    step = 0
    while step < cfg.max_iterations:
        readings = {s.vid: fleet.read_sensor(s) for s in fleet.states}
        update_bests(fleet.states, readings, fleet.bests)
        new_samples = fleet.pending + _take_samples(fleet, step, readings, gate_model)
        fleet.pending = []
        if new_samples:
            fleet.samples.extend(new_samples)
            if phase == "explore" or not federated:
                fleet.refit_central(want_std=True, want_grid=(phase == "explore"))
                if phase == "exploit":
                    for zi in range(len(zones)):
                        guidance[zi] = _zone_guidance(
                            fleet.model, fleet.gmap, zone_rows[zi], exploit_std
                        )
            else:
                touched = set()
                for smp in new_samples:
                    zi = assignment[smp.vehicle]
                    z = zones[zi]
                    # data stays within the node's zone; en-route readings
                    # outside the disk are logged but train no node
                    if np.hypot(*(np.asarray(smp.position) - z.center)) < z.radius_cells:
                        nodes[zi].samples.append(smp)
                        touched.add(zi)
                for zi in touched:
                    fit_node(nodes[zi], **fleet.fit_args(len(nodes[zi].samples)))
                    guidance[zi] = _zone_guidance(
                        nodes[zi].model, fleet.gmap, nodes[zi].cell_rows, exploit_std
                    )
        _log_traj(fleet, step, {s.vehicle for s in new_samples})

        if all(not budget_left(s) for s in fleet.states):
            if phase == "exploit":
                break
            # switch: freeze the exploration map, carve zones, assign fleet
            if fleet.model.mean_grid is None or fleet.model.std_grid is None:
                predict_grid(fleet.model, fleet.gmap, cache=fleet.cache, want_std=True)
            exploration_mean = _clamp01(fleet.model.mean_grid)
            exploration_std = fleet.model.std_grid.copy()
            _, radius_cells = compute_zone_radius(
                shortest_extent_m(fleet.gmap), cfg.n_vehicles, fleet.gmap.cell_size_m
            )
            zones = extract_action_zones(
                exploration_mean, fleet.gmap, cfg.n_vehicles, radius_cells,
                threshold_ratio=cfg.threshold_ratio,
            )
            assign_priorities(zones, cfg.n_vehicles)
            assignment = allocate_vehicles(
                zones, {s.vid: s.position for s in fleet.states}
            )
            zone_rows = [zone_cell_rows(fleet.gmap, z) for z in zones]
            for s in fleet.states:
                s.group = assignment[s.vid]
                phase_start[s.vid] = s.distance_m
            fleet.bests = {}
            update_bests(fleet.states, {}, fleet.bests)
            if federated:
                nodes = create_nodes(zones, fleet.gmap, fleet.samples)
                for zi, node in enumerate(nodes):
                    fit_node(node, **fleet.fit_args(len(node.samples)))
                    guidance[zi] = _zone_guidance(
                        node.model, fleet.gmap, node.cell_rows, exploit_std
                    )
            else:
                for zi in range(len(zones)):
                    guidance[zi] = _zone_guidance(
                        fleet.model, fleet.gmap, zone_rows[zi], exploit_std
                    )
            phase = "exploit"

        for s in fleet.states:
            if not budget_left(s):
                continue
            if phase == "explore":
                model = fleet.model
                max_con = model.max_con_coord if model is not None else s.position
                max_un = model.max_un_coord if model is not None else None
                if max_un is None:
                    max_un = max_con
                vel, proposed = enhanced_step(
                    s, fleet.bests[s.group].position, max_un, max_con, explore_cfg, fleet.rng
                )
                fleet.move(s, vel, proposed, step)
            else:
                zone = zones[assignment[s.vid]]
                if np.hypot(*(s.position - zone.center)) >= zone.radius_cells:
                    # straight run toward the assigned zone
                    vel = clamp_velocity(zone.center - s.position, cfg.max_step_cells)
                    fleet.move(s, vel, s.position + vel, step, gate_model(s.vid))
                else:
                    max_un, max_con = _zone_attractors(
                        guidance[assignment[s.vid]], s.position, cfg.sigma_tie_tol
                    )
                    vel, proposed = enhanced_step(
                        s, fleet.bests[s.group].position, max_un, max_con, exploit_cfg, fleet.rng
                    )
                    fleet.move(s, vel, proposed, step, gate_model(s.vid))
        step += 1

    if phase == "explore":
        # iteration cap hit before the switch: report the exploration model
        mean_grid, std_grid = fleet.final_grids()
    elif federated:
        mean_grid, std_grid = merge_models(nodes, exploration_mean, exploration_std, fleet.gmap)
        mean_grid = _clamp01(mean_grid)
    else:
        mean_grid, std_grid = fleet.final_grids()

    return MissionResult(
        config=cfg,
        truth=fleet.truth,
        spawns=fleet.spawns,
        mean_grid=mean_grid,
        std_grid=std_grid,
        exploration_mean=exploration_mean,
        exploration_std=exploration_std,
        zones=zones,
        samples=fleet.samples,
        traj=fleet.traj,
        distances_m={s.vid: s.distance_m for s in fleet.states},
        iterations=step,
        wall_ms=0.0,
    )
