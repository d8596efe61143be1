"""Deterministic seeded planar world and the fixed-step trial loop.

The robot is a critically damped second-order reference tracker. Scenes are
a pure function of their seed via the pinned splitmix64 generator, so
identical (seed, mode, scripted operator) triples yield bit-identical trial
logs. Collisions are detected and counted, never resolved.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .blending import (
    BlendKind,
    BlendMode,
    GoalBank,
    OperatorCommand,
    explicit_blend,
    multi_goal_step,
    wrap_angle,
)
from .dmp import DmpParams
from .rng import SplitMix64, substream_seed

DT = 1.0 / 30.0
V_MAX = 0.8            # m/s, robot and primitive speed bound
OMEGA_N = 8.0          # rad/s, tracker natural frequency
U_MAX = 0.05           # m per tick, interface clamp on translation commands
ROBOT_RADIUS = 0.25
OBSTACLE_RADIUS = 0.15
OBSTACLE_SPEED = 0.35
SAFETY_BOX = 10.0      # m, trial aborts outside this half-extent
DEFAULT_MAX_TICKS = 3600
LOG_VERSION = "1"

GOAL_X_RANGE = (1.25, 2.5)
GOAL_Y_RANGE = (-1.05, 1.05)
SWITCH_SCHEDULE = (0.0, 0.30, 0.60)
SUCCESS_RADIUS = 0.05
ACTIVATION_CHOICES = (0.2, 0.4, 0.6)
OBSTACLE_X_RANGE = (0.35, 2.2)


class SceneGenerationFailure(RuntimeError):
    pass


class DegenerateSegment(ValueError):
    pass


class TaskKind(str, Enum):
    REACH = "reach"
    OBSTACLE = "obstacle"


class Outcome(str, Enum):
    SUCCESS = "success"
    TIMEOUT = "timeout"
    ABORTED = "aborted"


@dataclass
class RobotState:
    y: np.ndarray
    dy: np.ndarray
    heading: float = 0.0
    radius: float = ROBOT_RADIUS

    def copy(self) -> "RobotState":
        return RobotState(self.y.copy(), self.dy.copy(), self.heading, self.radius)


@dataclass
class Obstacle:
    pos: np.ndarray
    radius: float = OBSTACLE_RADIUS
    speed: float = OBSTACLE_SPEED
    activated: bool = False
    activation_progress: float = 0.0

    def copy(self) -> "Obstacle":
        return Obstacle(self.pos.copy(), self.radius, self.speed,
                        self.activated, self.activation_progress)


@dataclass
class Scene:
    seed: int
    task: TaskKind
    goals: list
    target_index: int
    switch_schedule: tuple
    obstacles: list
    start: RobotState
    success_radius: float = SUCCESS_RADIUS

    def copy(self) -> "Scene":
        return Scene(
            seed=self.seed,
            task=self.task,
            goals=[g.copy() for g in self.goals],
            target_index=self.target_index,
            switch_schedule=tuple(self.switch_schedule),
            obstacles=[ob.copy() for ob in self.obstacles],
            start=self.start.copy(),
            success_radius=self.success_radius,
        )

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "task": self.task.value,
            "goals": [[float(g[0]), float(g[1])] for g in self.goals],
            "target_index": self.target_index,
            "switch_schedule": list(self.switch_schedule),
            "obstacles": [
                {
                    "pos": [float(ob.pos[0]), float(ob.pos[1])],
                    "radius": ob.radius,
                    "speed": ob.speed,
                    "activated": ob.activated,
                    "activation_progress": ob.activation_progress,
                }
                for ob in self.obstacles
            ],
            "start": {
                "y": [float(self.start.y[0]), float(self.start.y[1])],
                "heading": self.start.heading,
                "radius": self.start.radius,
            },
            "success_radius": self.success_radius,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Scene":
        return cls(
            seed=d["seed"],
            task=TaskKind(d["task"]),
            goals=[np.asarray(g, dtype=float) for g in d["goals"]],
            target_index=d["target_index"],
            switch_schedule=tuple(d["switch_schedule"]),
            obstacles=[
                Obstacle(
                    pos=np.asarray(o["pos"], dtype=float),
                    radius=o["radius"],
                    speed=o["speed"],
                    activated=o["activated"],
                    activation_progress=o["activation_progress"],
                )
                for o in d["obstacles"]
            ],
            start=RobotState(
                y=np.asarray(d["start"]["y"], dtype=float),
                dy=np.zeros(2),
                heading=d["start"]["heading"],
                radius=d["start"]["radius"],
            ),
            success_radius=d["success_radius"],
        )


def track_step(robot: RobotState, reference, rot_cmd: float, dt: float) -> RobotState:
    """Critically damped second-order tracking of the blended reference."""
    reference = np.asarray(reference, dtype=float)
    ddy = OMEGA_N * OMEGA_N * (reference - robot.y) - 2.0 * OMEGA_N * robot.dy
    dy = robot.dy + dt * ddy
    speed = math.hypot(dy[0], dy[1])
    if speed > V_MAX:
        dy = dy * (V_MAX / speed)
    y = robot.y + dt * dy
    heading = wrap_angle(robot.heading + dt * rot_cmd)
    return RobotState(y, dy, heading, robot.radius)


def obstacle_step(ob: Obstacle, robot: RobotState, goal, progress_frac: float,
                  dt: float) -> Obstacle:
    """Activate on the progress threshold, then chase the robot-goal midpoint."""
    out = ob.copy()
    if not out.activated and progress_frac >= out.activation_progress:
        out.activated = True
    if not out.activated:
        return out
    midpoint = (robot.y + np.asarray(goal, dtype=float)) / 2.0
    delta = midpoint - out.pos
    dist = math.hypot(delta[0], delta[1])
    step = out.speed * dt
    if dist <= step:
        out.pos = midpoint
    elif dist > 0.0:
        out.pos = out.pos + delta * (step / dist)
    return out


def check_collision(robot: RobotState, obstacles) -> bool:
    for ob in obstacles:
        d = math.hypot(robot.y[0] - ob.pos[0], robot.y[1] - ob.pos[1])
        if d < robot.radius + ob.radius:
            return True
    return False


def progress(robot: RobotState, start, goal) -> float:
    """Fraction of the start->goal segment covered by the projected robot position."""
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    seg = goal - start
    seg_sq = float(seg @ seg)
    if seg_sq == 0.0:
        raise DegenerateSegment("start and goal coincide")
    return min(max(float((robot.y - start) @ seg) / seg_sq, 0.0), 1.0)


def generate_scene(seed: int, task: TaskKind | str) -> Scene:
    """Deterministic scene from the seed's layout substream."""
    task = TaskKind(task)
    rng = SplitMix64(substream_seed(seed, "scene-layout"))
    start = RobotState(np.zeros(2), np.zeros(2), 0.0, ROBOT_RADIUS)

    def draw_goal():
        return np.array([
            rng.uniform(*GOAL_X_RANGE),
            rng.uniform(*GOAL_Y_RANGE),
        ])

    if task is TaskKind.REACH:
        n_goals = 2 + rng.randrange(3)
        goals = [draw_goal() for _ in range(n_goals)]
        return Scene(seed, task, goals, 0, SWITCH_SCHEDULE, [], start)

    goal = draw_goal()
    obstacles = []
    for _ in range(3):
        for attempt in range(1000):
            pos = np.array([
                rng.uniform(*OBSTACLE_X_RANGE),
                rng.uniform(*GOAL_Y_RANGE),
            ])
            clear_start = math.hypot(*(pos - start.y)) >= OBSTACLE_RADIUS + ROBOT_RADIUS + 0.05
            clear_goal = math.hypot(*(pos - goal)) >= OBSTACLE_RADIUS + ROBOT_RADIUS + SUCCESS_RADIUS + 0.05
            clear_others = all(
                math.hypot(*(pos - ob.pos)) >= 2 * OBSTACLE_RADIUS for ob in obstacles
            )
            if clear_start and clear_goal and clear_others:
                break
        else:
            raise SceneGenerationFailure(f"could not place obstacle for seed {seed}")
        activation = rng.choice(ACTIVATION_CHOICES)
        obstacles.append(Obstacle(pos, OBSTACLE_RADIUS, OBSTACLE_SPEED, False, activation))
    return Scene(seed, task, [goal], 0, (), obstacles, start)


@dataclass
class TickRecord:
    tick: int
    robot: RobotState
    cmd: OperatorCommand
    reference: np.ndarray
    active_goal: int
    target_index: int
    phase: float
    colliding: bool

    def to_dict(self) -> dict:
        return {
            "tick": self.tick,
            "robot": {
                "y": [float(self.robot.y[0]), float(self.robot.y[1])],
                "dy": [float(self.robot.dy[0]), float(self.robot.dy[1])],
                "heading": self.robot.heading,
                "radius": self.robot.radius,
            },
            "cmd": {"u": [self.cmd.u[0], self.cmd.u[1]], "rot": self.cmd.rot},
            "reference": [float(self.reference[0]), float(self.reference[1])],
            "active_goal": self.active_goal,
            "target_index": self.target_index,
            "phase": self.phase,
            "colliding": self.colliding,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TickRecord":
        return cls(
            tick=d["tick"],
            robot=RobotState(
                y=np.asarray(d["robot"]["y"], dtype=float),
                dy=np.asarray(d["robot"]["dy"], dtype=float),
                heading=d["robot"]["heading"],
                radius=d["robot"]["radius"],
            ),
            cmd=OperatorCommand((d["cmd"]["u"][0], d["cmd"]["u"][1]), d["cmd"]["rot"]),
            reference=np.asarray(d["reference"], dtype=float),
            active_goal=d["active_goal"],
            target_index=d["target_index"],
            phase=d["phase"],
            colliding=d["colliding"],
        )


class EmptyLog(ValueError):
    pass


@dataclass
class TrialLog:
    header: dict
    records: list

    @property
    def outcome(self) -> Outcome:
        return Outcome(self.header["outcome"])

    def to_jsonl(self) -> str:
        lines = [json.dumps(self.header, sort_keys=True, separators=(",", ":"))]
        lines.extend(
            json.dumps(r.to_dict(), sort_keys=True, separators=(",", ":"))
            for r in self.records
        )
        return "\n".join(lines) + "\n"

    @classmethod
    def from_jsonl(cls, text: str) -> "TrialLog":
        lines = [ln for ln in text.splitlines() if ln.strip()]
        if not lines:
            raise EmptyLog("empty log text")
        header = json.loads(lines[0])
        records = [TickRecord.from_dict(json.loads(ln)) for ln in lines[1:]]
        return cls(header, records)


Operator = Callable[["TrialRunner"], OperatorCommand]


class TrialRunner:
    """One fixed-step trial; also drives live sessions one tick at a time."""

    def __init__(self, scene: Scene, mode: BlendMode, params: DmpParams | None = None,
                 dt: float = DT, max_ticks: int = DEFAULT_MAX_TICKS):
        self.scene = scene.copy()
        self._initial_scene_dict = scene.to_dict()
        self.mode = mode
        self.dt = dt
        self.max_ticks = max_ticks
        self.params = params if params is not None else DmpParams(dt=dt)
        self.robot = self.scene.start.copy()
        self.bank = GoalBank.from_goals(self.robot.y, self.scene.goals, self.params)
        self._target_rng = SplitMix64(substream_seed(self.scene.seed, "target-switch"))
        self._schedule_ptr = 0
        self.tick = 0
        self.records: list[TickRecord] = []
        self.outcome: Outcome | None = None

    @property
    def done(self) -> bool:
        return self.outcome is not None

    @property
    def target_goal(self) -> np.ndarray:
        return self.scene.goals[self.scene.target_index]

    def _switch_target(self):
        goals = self.scene.goals
        if self._schedule_ptr == 0:
            # First scheduled assignment: no prior commanded target to exclude.
            self.scene.target_index = self._target_rng.randrange(len(goals))
        else:
            others = [i for i in range(len(goals)) if i != self.scene.target_index]
            self.scene.target_index = others[self._target_rng.randrange(len(others))]

    def step(self, cmd: OperatorCommand) -> TickRecord:
        if self.done:
            raise RuntimeError("trial already finished")
        cmd = cmd.clamped(U_MAX)
        scene = self.scene
        mode = self.mode

        if mode.kind is BlendKind.TELEOP:
            reference = self.robot.y + cmd.u_vec()
            active = -1
        elif mode.kind is BlendKind.EXPLICIT:
            p_ref, active = multi_goal_step(
                self.bank, self.robot.y, self.robot.heading,
                OperatorCommand.zero(), self.dt, BlendMode.no_user())
            reference = explicit_blend(self.robot.y + cmd.u_vec(), p_ref, mode.alpha)
        else:
            reference, active = multi_goal_step(
                self.bank, self.robot.y, self.robot.heading, cmd, self.dt, mode)

        self.robot = track_step(self.robot, reference, cmd.rot, self.dt)

        prog = progress(self.robot, scene.start.y, self.target_goal)
        scene.obstacles = [
            obstacle_step(ob, self.robot, self.target_goal, prog, self.dt)
            for ob in scene.obstacles
        ]
        colliding = check_collision(self.robot, scene.obstacles)

        if self._schedule_ptr < len(scene.switch_schedule):
            if prog >= scene.switch_schedule[self._schedule_ptr]:
                self._switch_target()
                self._schedule_ptr += 1

        rec = TickRecord(
            tick=self.tick,
            robot=self.robot.copy(),
            cmd=cmd,
            reference=np.asarray(reference, dtype=float),
            active_goal=active,
            target_index=scene.target_index,
            phase=self.bank.dmps[self.bank.active_index].state.phase,
            colliding=colliding,
        )
        self.records.append(rec)
        self.tick += 1

        if math.hypot(*(self.robot.y - self.target_goal)) < scene.success_radius:
            self.outcome = Outcome.SUCCESS
        elif max(abs(self.robot.y[0]), abs(self.robot.y[1])) > SAFETY_BOX:
            self.outcome = Outcome.ABORTED
        elif self.tick >= self.max_ticks:
            self.outcome = Outcome.TIMEOUT
        return rec

    def log(self) -> TrialLog:
        header = {
            "version": LOG_VERSION,
            "seed": self.scene.seed,
            "task": self.scene.task.value,
            "mode": self.mode.code(),
            "dt": self.dt,
            "max_ticks": self.max_ticks,
            "scene": self._initial_scene_dict,
            "config": {
                "v_max": V_MAX,
                "omega_n": OMEGA_N,
                "u_max": U_MAX,
                "robot_radius": ROBOT_RADIUS,
                "kp": self.params.kp,
                "kd": self.params.kd,
                "tau": self.params.tau,
                "phase_decay": self.params.phase_decay,
            },
            "outcome": (self.outcome or Outcome.TIMEOUT).value,
        }
        return TrialLog(header, list(self.records))


def run_trial(scene: Scene, mode: BlendMode, operator: Operator,
              max_ticks: int = DEFAULT_MAX_TICKS, params: DmpParams | None = None,
              dt: float = DT) -> TrialLog:
    """Execute one full trial with a synchronous per-tick operator policy."""
    runner = TrialRunner(scene, mode, params=params, dt=dt, max_ticks=max_ticks)
    while not runner.done:
        runner.step(operator(runner))
    return runner.log()


def replay_operator(log: TrialLog) -> Operator:
    """Operator that feeds a recorded log's commands back tick by tick."""
    records = log.records

    def op(runner: TrialRunner) -> OperatorCommand:
        if runner.tick < len(records):
            return records[runner.tick].cmd
        return OperatorCommand.zero()

    return op


def scene_from_log(log: TrialLog) -> Scene:
    return Scene.from_dict(log.header["scene"])
