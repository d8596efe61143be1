"""Scripted operator policies for automated trials.

The avoidance policy emits a fixed-magnitude per-axis command directly away
from the nearest obstacle whenever the clearance drops below the trigger
distance, and nothing otherwise. The goal-seek policy only rotates: it turns
the robot's heading toward the desired goal until the goal estimator selects
it, then goes idle.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .blending import GoalBank, OperatorCommand, estimate_goal, wrap_angle
from .world import RobotState, TrialRunner


@dataclass(frozen=True)
class VirtualOperatorParams:
    trigger_distance: float = 0.2   # m of clearance below which the policy acts
    magnitude: float = 1.0          # unit command
    command_gain: float = 0.02      # m of reference displacement per tick per unit
    rot_gain: float = 4.0           # 1/s, heading correction for goal seeking
    rot_max: float = 2.0            # rad/s

    def __post_init__(self):
        if self.trigger_distance <= 0 or self.magnitude <= 0:
            raise ValueError("trigger_distance and magnitude must be positive")


def avoidance_command(robot: RobotState, obstacles,
                      params: VirtualOperatorParams | None = None) -> OperatorCommand:
    """Unit command away from the nearest obstacle when clearance < trigger."""
    if params is None:
        params = VirtualOperatorParams()
    nearest = None
    best = math.inf
    for ob in obstacles:
        d = math.hypot(robot.y[0] - ob.pos[0], robot.y[1] - ob.pos[1])
        clearance = d - robot.radius - ob.radius
        if clearance < best:
            best = clearance
            nearest = ob
    if nearest is None or best >= params.trigger_distance:
        return OperatorCommand.zero()
    step = params.magnitude * params.command_gain
    ux = math.copysign(step, robot.y[0] - nearest.pos[0]) if robot.y[0] != nearest.pos[0] else step
    uy = math.copysign(step, robot.y[1] - nearest.pos[1]) if robot.y[1] != nearest.pos[1] else step
    return OperatorCommand((ux, uy), 0.0)


def goal_seek_command(robot: RobotState, desired_goal, current_estimate: int,
                      bank: GoalBank,
                      params: VirtualOperatorParams | None = None) -> OperatorCommand:
    """Rotation-only intent signal: steer the heading until the estimator agrees."""
    if params is None:
        params = VirtualOperatorParams()
    desired_goal = np.asarray(desired_goal, dtype=float)
    desired_index = next(
        i for i, g in enumerate(bank.goals)
        if g[0] == desired_goal[0] and g[1] == desired_goal[1]
    )
    if current_estimate == desired_index:
        return OperatorCommand.zero()
    bearing = math.atan2(desired_goal[1] - robot.y[1], desired_goal[0] - robot.y[0])
    err = wrap_angle(bearing - robot.heading)
    rot = max(-params.rot_max, min(params.rot_max, params.rot_gain * err))
    return OperatorCommand((0.0, 0.0), rot)


def make_operator(name: str, params: VirtualOperatorParams | None = None):
    """Named trial operators for batch runs: avoidance, goal-seek, none."""
    if name == "none":
        return lambda runner: OperatorCommand.zero()
    if name == "avoidance":
        def avoid(runner: TrialRunner) -> OperatorCommand:
            return avoidance_command(runner.robot, runner.scene.obstacles, params)
        return avoid
    if name == "goal-seek":
        def seek(runner: TrialRunner) -> OperatorCommand:
            return goal_seek_command(
                runner.robot, runner.target_goal, runner.bank.active_index,
                runner.bank, params)
        return seek
    raise ValueError(f"unknown operator {name!r}")
