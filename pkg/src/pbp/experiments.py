"""Headless experiment drivers: arbitration sweep, scalability bench, batches.

The arbitration sweep replays a pinned S-curve demonstration as an open-loop
policy through the reference tracker while a scripted avoidance operator
pushes away from a displaced static obstacle, once per arbitration weight.
The same scenario is then run with both implicit blending variants, where
the demonstration is regressed into a primitive instead of replayed.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .blending import BlendKind, BlendMode, GoalBank, OperatorCommand, explicit_blend, multi_goal_step
from .dmp import DmpParams, dmp_step, fit_from_demonstration
from .metrics import TrialMetrics, summarize, write_metrics_csv
from .operators import VirtualOperatorParams, avoidance_command, make_operator
from .rng import SplitMix64
from .world import (
    DT,
    Obstacle,
    RobotState,
    TaskKind,
    TrialLog,
    generate_scene,
    run_trial,
    track_step,
)

# Pinned toy geometry: an S-curve demonstration from (0,0) to (2,0) that
# clears the obstacle at its original placement; each scenario displaces the
# obstacle into the path by a different amount.
DEMO_DURATION = 8.0
DEMO_AMPLITUDE = 0.3
OBSTACLE_HOME = (0.5, 0.85)
SCENARIO_DISPLACEMENTS = {1: 0.25, 2: 0.55}
TOY_EXTRA_TICKS = 150


@dataclass
class SweepConfig:
    alphas: tuple = tuple(round(0.1 * i, 1) for i in range(11))
    scenario: int = 1
    trials_per_alpha: int = 1

    def __post_init__(self):
        if not self.alphas:
            raise ValueError("alphas must be non-empty")
        if any(not (0.0 <= a <= 1.0) for a in self.alphas):
            raise ValueError("alphas must lie in [0,1]")
        if self.scenario not in SCENARIO_DISPLACEMENTS:
            raise ValueError(f"scenario must be one of {sorted(SCENARIO_DISPLACEMENTS)}")


class ConfigInvalid(ValueError):
    pass


def s_curve_demo(duration: float = DEMO_DURATION, dt: float = DT):
    """Time-indexed demonstration samples (t, y) tracing the pinned S-curve."""
    n = int(round(duration / dt)) + 1
    ts = np.arange(n) * dt
    # Smooth progression with zero end velocities.
    s = 0.5 - 0.5 * np.cos(np.pi * ts / duration)
    xs = 2.0 * s
    ys = DEMO_AMPLITUDE * np.sin(np.pi * xs)
    return [(float(t), np.array([x, y])) for t, x, y in zip(ts, xs, ys)]


def scenario_obstacle(scenario: int) -> Obstacle:
    dy = SCENARIO_DISPLACEMENTS[scenario]
    pos = np.array([OBSTACLE_HOME[0], OBSTACLE_HOME[1] - dy])
    return Obstacle(pos, speed=0.0, activated=False, activation_progress=2.0)


def _toy_robot(y0) -> RobotState:
    return RobotState(np.asarray(y0, dtype=float).copy(), np.zeros(2), 0.0)


def _collision_fraction(positions, obstacle: Obstacle, robot_radius: float) -> float:
    hits = sum(
        1 for y in positions
        if np.hypot(y[0] - obstacle.pos[0], y[1] - obstacle.pos[1])
        < robot_radius + obstacle.radius
    )
    return hits / len(positions)


def run_explicit_replay(alpha: float, scenario: int,
                        op_params: VirtualOperatorParams | None = None,
                        dt: float = DT) -> float:
    """One explicit-arbitration replay; returns the collision ratio."""
    demo = s_curve_demo(dt=dt)
    obstacle = scenario_obstacle(scenario)
    robot = _toy_robot(demo[0][1])
    positions = []
    total = len(demo) + TOY_EXTRA_TICKS
    for tick in range(total):
        p_ref = demo[min(tick, len(demo) - 1)][1]
        cmd = avoidance_command(robot, [obstacle], op_params)
        u_ref = robot.y + cmd.u_vec()
        reference = explicit_blend(u_ref, p_ref, alpha)
        robot = track_step(robot, reference, 0.0, dt)
        positions.append(robot.y)
    return _collision_fraction(positions, obstacle, robot.radius)


def run_pbp_replay(mode: BlendMode, scenario: int,
                   op_params: VirtualOperatorParams | None = None,
                   dt: float = DT, n_basis: int = 30) -> float:
    """Regress the demonstration into a primitive and run implicit blending."""
    if mode.kind not in (BlendKind.PBP_CONT, BlendKind.PBP_ALT, BlendKind.PBP_NOUSER):
        raise ConfigInvalid(f"PBP replay needs an implicit mode, got {mode.kind}")
    demo = s_curve_demo(dt=dt)
    # Stiff attractor: the primitive is re-anchored to the measured (lagging)
    # tracker state every tick, which throttles progress unless kp/tau is
    # large enough to pull the reference ahead of the robot.
    params = DmpParams(tau=1.5, kp=360.0, n_basis=n_basis, dt=dt)
    dmp = fit_from_demonstration(demo, params)
    obstacle = scenario_obstacle(scenario)
    robot = _toy_robot(demo[0][1])
    positions = []
    total = len(demo) + TOY_EXTRA_TICKS
    for _ in range(total):
        cmd = avoidance_command(robot, [obstacle], op_params)
        if mode.kind is BlendKind.PBP_NOUSER:
            cmd = OperatorCommand.zero()
        if mode.kind is BlendKind.PBP_ALT and cmd.active:
            reference = robot.y + cmd.u_vec()
        else:
            reference = dmp_step(dmp, robot.y, dt)
            if mode.kind is BlendKind.PBP_CONT:
                reference = reference + cmd.u_vec()
        robot = track_step(robot, reference, 0.0, dt)
        positions.append(robot.y)
    return _collision_fraction(positions, obstacle, robot.radius)


def arbitration_sweep(config: SweepConfig) -> list:
    """Rows of {scenario, mode, alpha, collision_ratio} for one scenario."""
    rows = []
    for alpha in config.alphas:
        ratio = run_explicit_replay(alpha, config.scenario)
        rows.append({
            "scenario": config.scenario, "mode": "explicit",
            "alpha": alpha, "collision_ratio": ratio,
        })
    for mode in (BlendMode.continuous(), BlendMode.alternated()):
        ratio = run_pbp_replay(mode, config.scenario)
        rows.append({
            "scenario": config.scenario, "mode": mode.kind.value,
            "alpha": None, "collision_ratio": ratio,
        })
    return rows


def scalability_bench(goal_counts, ticks: int = 1000, seed: int = 7,
                      dt: float = DT) -> list:
    """Wall-clock per blend+step tick for growing goal banks.

    Timing covers only the multi-goal blending computation; the measured
    state is fed back from the previous reference (perfect tracking).
    """
    if not goal_counts:
        raise ValueError("goal_counts must be non-empty")
    rows = []
    for k in goal_counts:
        rng = SplitMix64(seed + k)
        goals = [
            np.array([rng.uniform(1.25, 2.5), rng.uniform(-1.05, 1.05)])
            for _ in range(k)
        ]
        bank = GoalBank.from_goals(np.zeros(2), goals, DmpParams(dt=dt))
        robot_y = np.zeros(2)
        mode = BlendMode.no_user()
        durations = np.empty(ticks)
        for i in range(ticks):
            t0 = time.perf_counter()
            reference, _ = multi_goal_step(bank, robot_y, 0.0, OperatorCommand.zero(), dt, mode)
            durations[i] = time.perf_counter() - t0
            robot_y = reference
        rows.append({
            "goals": k,
            "ticks": ticks,
            "mean_tick_s": float(durations.mean()),
            "p99_tick_s": float(np.quantile(durations, 0.99)),
        })
    return rows


def batch_trials(task, mode: BlendMode, seeds, operator_name: str,
                 out_dir=None, max_ticks: int = 3600):
    """Run one trial per seed; returns (rows, logs) and optionally writes CSV + logs."""
    from pathlib import Path

    task = TaskKind(task)
    rows = []
    logs = []
    errors = []
    out = Path(out_dir) if out_dir is not None else None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
    for seed in seeds:
        try:
            scene = generate_scene(seed, task)
            operator = make_operator(operator_name)
            log = run_trial(scene, mode, operator, max_ticks=max_ticks)
            m = TrialMetrics.from_log(log)
            rows.append((seed, mode.code(), task.value, m))
            logs.append(log)
            if out is not None:
                (out / f"trial_{seed}.jsonl").write_text(log.to_jsonl())
        except Exception as exc:  # keep the batch going, report per row
            errors.append((seed, repr(exc)))
    if out is not None and rows:
        write_metrics_csv(rows, out / "metrics.csv")
    return rows, logs, errors
