"""Swarm velocity rules for the vehicle fleet.

Vehicles move like PSO particles over the lake surface. The classic rule
steers with personal and group bests; the enhanced rule adds attraction to
the model's most uncertain point (weight c3) and to its predicted maximum
(weight c4). Both phases of the two-phase planner and all swarm baselines
reuse these rules with different coefficient quadruples.

Every step consumes a fixed number of uniform draws per vehicle (2 classic,
4 enhanced) regardless of zero coefficients, so trajectories stay
reproducible when coefficients change mid-mission.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# coefficient quadruples (c1, c2, c3, c4)
EXPLORE_COEFFS = (2.0187, 0.0, 3.2697, 0.0)
EXPLOIT_COEFFS = (3.6845, 1.5614, 0.0, 3.6703)
EPSILON_EXPLOIT_COEFFS = (3.6845, 1.5614, 0.0, 3.1262)
CLASSIC_COEFFS = (2.0, 2.0, 0.0, 0.0)


@dataclass
class VehicleState:
    vid: int
    position: np.ndarray
    velocity: np.ndarray
    pbest_pos: np.ndarray
    pbest_val: float
    distance_m: float = 0.0
    group: int | str = "all"


@dataclass(frozen=True)
class SwarmConfig:
    c1: float
    c2: float
    c3: float
    c4: float
    inertia: float = 0.7
    max_step_cells: float = 2.0

    @classmethod
    def from_coeffs(cls, coeffs, **kw) -> "SwarmConfig":
        return cls(*coeffs, **kw)


@dataclass
class GroupBest:
    value: float
    position: np.ndarray
    holder: int


def clamp_velocity(v: np.ndarray, max_step: float) -> np.ndarray:
    speed = float(np.hypot(*v))
    if speed > max_step:
        return v * (max_step / speed)
    return v


def classic_step(
    state: VehicleState, gbest_pos: np.ndarray, cfg: SwarmConfig, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Classic PSO velocity update; returns (new_velocity, proposed_position).

    Random factors are drawn per dimension, the standard treatment: a single
    scalar per term degenerates the update into a line search along fixed
    difference vectors.
    """
    r1, r2 = rng.random((2, 2))
    v = (
        cfg.inertia * state.velocity
        + cfg.c1 * r1 * (state.pbest_pos - state.position)
        + cfg.c2 * r2 * (gbest_pos - state.position)
    )
    v = clamp_velocity(v, cfg.max_step_cells)
    return v, state.position + v


def enhanced_step(
    state: VehicleState,
    gbest_pos: np.ndarray,
    max_un_coord: np.ndarray,
    max_con_coord: np.ndarray,
    cfg: SwarmConfig,
    rng: np.random.Generator,
) -> tuple[np.ndarray, np.ndarray]:
    """Model-guided velocity update with uncertainty and maximum attractors.

    As in :func:`classic_step`, random factors are per dimension.
    """
    r1, r2, r3, r4 = rng.random((4, 2))
    v = (
        cfg.inertia * state.velocity
        + cfg.c1 * r1 * (state.pbest_pos - state.position)
        + cfg.c2 * r2 * (gbest_pos - state.position)
        + cfg.c3 * r3 * (np.asarray(max_un_coord) - state.position)
        + cfg.c4 * r4 * (np.asarray(max_con_coord) - state.position)
    )
    v = clamp_velocity(v, cfg.max_step_cells)
    return v, state.position + v


def update_bests(
    states: list[VehicleState],
    readings: dict[int, float],
    bests: dict[int | str, GroupBest],
) -> dict[int | str, GroupBest]:
    """Refresh personal and per-group bests from new sensor readings.

    Personal bests require strict improvement. A group's best is replaced
    only when a member's pbest strictly exceeds it, so exact ties keep the
    earlier holder.
    """
    for s in states:
        if s.vid not in readings:
            continue
        val = float(readings[s.vid])
        if val > s.pbest_val:
            s.pbest_val = val
            s.pbest_pos = s.position.copy()
    for s in states:
        cur = bests.get(s.group)
        if cur is None or s.pbest_val > cur.value:
            bests[s.group] = GroupBest(
                value=s.pbest_val, position=s.pbest_pos.copy(), holder=s.vid
            )
    return bests


@dataclass
class EpsilonSchedule:
    """Distance-keyed epsilon-greedy switch between coefficient sets.

    Epsilon starts high (explore), decays once the fleet minimum distance
    passes d0 and floors at eps_end from df on. One draw per control
    iteration decides which coefficient quadruple the whole fleet uses.
    """

    eps_start: float = 0.95
    eps_end: float = 0.05
    d0_m: float = 6500.0
    df_m: float = 13500.0
    delta: float = 0.13
    explore_coeffs: tuple = EXPLORE_COEFFS
    exploit_coeffs: tuple = EPSILON_EXPLOIT_COEFFS
    epsilon: float = field(init=False)

    def __post_init__(self) -> None:
        self.epsilon = self.eps_start


def epsilon_coefficients(
    sched: EpsilonSchedule, fleet_min_distance_m: float, rng: np.random.Generator
) -> tuple[float, float, float, float]:
    """Advance the schedule one control iteration and pick coefficients."""
    if fleet_min_distance_m <= sched.d0_m:
        sched.epsilon = sched.eps_start
    elif fleet_min_distance_m >= sched.df_m:
        sched.epsilon = sched.eps_end
    else:
        sched.epsilon = max(sched.epsilon - sched.delta, sched.eps_end)
    val = float(rng.random())
    return sched.explore_coeffs if sched.epsilon >= val else sched.exploit_coeffs
