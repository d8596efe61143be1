"""Policy blending: explicit arbitration baseline and the implicit variants.

Continuous blending adds the user displacement to the primitive reference
every tick. Alternated blending hands full control to the user while input
is active and freezes the primitive's phase, resuming from the disturbed
state on release. A goal bank runs one primitive per candidate goal, all
integrated from the same measured robot state, so the active intent can
switch without reference discontinuities.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .dmp import Dmp, DmpParams, dmp_step, straight_line_primitive

DEADZONE = 1e-3
DEFAULT_HYSTERESIS = math.radians(5.0)
NEAR_GOAL_RADIUS = 0.05


class AlphaOutOfRange(ValueError):
    pass


class EmptyBank(ValueError):
    pass


class BlendKind(str, Enum):
    TELEOP = "teleop"
    EXPLICIT = "explicit"
    PBP_CONT = "cont"
    PBP_ALT = "alt"
    PBP_NOUSER = "nouser"


@dataclass(frozen=True)
class BlendMode:
    kind: BlendKind
    alpha: float | None = None

    def __post_init__(self):
        if self.kind is BlendKind.EXPLICIT:
            if self.alpha is None or not (0.0 <= self.alpha <= 1.0):
                raise AlphaOutOfRange(f"alpha must be in [0,1], got {self.alpha}")

    @classmethod
    def teleop(cls):
        return cls(BlendKind.TELEOP)

    @classmethod
    def explicit(cls, alpha: float):
        return cls(BlendKind.EXPLICIT, alpha)

    @classmethod
    def continuous(cls):
        return cls(BlendKind.PBP_CONT)

    @classmethod
    def alternated(cls):
        return cls(BlendKind.PBP_ALT)

    @classmethod
    def no_user(cls):
        return cls(BlendKind.PBP_NOUSER)

    def code(self) -> str:
        if self.kind is BlendKind.EXPLICIT:
            return f"explicit:{self.alpha}"
        return self.kind.value

    @classmethod
    def parse(cls, text: str) -> "BlendMode":
        if text.startswith("explicit:"):
            return cls.explicit(float(text.split(":", 1)[1]))
        if text == "explicit":
            raise AlphaOutOfRange("explicit mode requires an alpha, e.g. explicit:0.5")
        try:
            return cls(BlendKind(text))
        except ValueError:
            raise ValueError(f"unknown blend mode {text!r}") from None


@dataclass(frozen=True)
class OperatorCommand:
    """Planar user input: translation displacement per tick plus rotation rate."""

    u: tuple[float, float] = (0.0, 0.0)
    rot: float = 0.0

    @property
    def active(self) -> bool:
        return max(abs(self.u[0]), abs(self.u[1]), abs(self.rot)) > DEADZONE

    def u_vec(self) -> np.ndarray:
        return np.array(self.u, dtype=float)

    def clamped(self, u_max: float) -> "OperatorCommand":
        # Tolerance keeps the clamp idempotent, so re-clamping a logged
        # command during replay returns bit-identical values.
        mag = math.hypot(*self.u)
        if mag <= u_max * (1.0 + 1e-9):
            return self
        scale = u_max / mag
        return OperatorCommand((self.u[0] * scale, self.u[1] * scale), self.rot)

    @classmethod
    def zero(cls) -> "OperatorCommand":
        return cls()


def explicit_blend(u, p, alpha: float) -> np.ndarray:
    """(1-alpha)*u + alpha*p componentwise; alpha=0 is full user authority."""
    if not (0.0 <= alpha <= 1.0):
        raise AlphaOutOfRange(f"alpha must be in [0,1], got {alpha}")
    u = np.asarray(u, dtype=float)
    p = np.asarray(p, dtype=float)
    return (1.0 - alpha) * u + alpha * p


def continuous_step(dmp: Dmp, robot_y, cmd: OperatorCommand, dt: float) -> np.ndarray:
    """User displacement rides on top of the primitive reference; phase always advances."""
    y = dmp_step(dmp, robot_y, dt)
    return y + cmd.u_vec()


def alternated_step(dmp: Dmp, robot_y, cmd: OperatorCommand, dt: float) -> np.ndarray:
    """Full teleoperation with a locked phase while input is active; primitive resumes on release."""
    if cmd.active:
        return np.asarray(robot_y, dtype=float) + cmd.u_vec()
    return dmp_step(dmp, robot_y, dt)


def wrap_angle(a: float) -> float:
    """Wrap to (-pi, pi]."""
    a = math.fmod(a + math.pi, 2.0 * math.pi)
    if a <= 0.0:
        a += 2.0 * math.pi
    return a - math.pi


@dataclass
class GoalBank:
    """One primitive per candidate goal, sharing params and the measured state."""

    dmps: list
    goals: list
    active_index: int = 0
    hysteresis_margin: float = DEFAULT_HYSTERESIS

    def __post_init__(self):
        if len(self.dmps) != len(self.goals):
            raise ValueError("dmps and goals must pair up")
        if self.dmps and not (0 <= self.active_index < len(self.dmps)):
            raise ValueError("active_index out of range")

    def __len__(self) -> int:
        return len(self.dmps)

    @classmethod
    def from_goals(cls, robot_y, goals, params: DmpParams | None = None,
                   hysteresis_margin: float = DEFAULT_HYSTERESIS) -> "GoalBank":
        goals = [np.asarray(g, dtype=float) for g in goals]
        dmps = [straight_line_primitive(robot_y, g, params) for g in goals]
        return cls(dmps, goals, 0, hysteresis_margin)


def estimate_goal(robot_y, heading: float, bank: GoalBank) -> int:
    """Index of the goal best aligned with the robot's pointing direction.

    The current choice is sticky: a challenger wins only when its alignment
    angle beats the active one by more than the hysteresis margin. Ties go to
    the lowest index.
    """
    if not bank.dmps:
        raise EmptyBank("goal bank has no goals")
    ry = np.asarray(robot_y, dtype=float)
    angles = []
    for g in bank.goals:
        dx, dy = g[0] - ry[0], g[1] - ry[1]
        if math.hypot(dx, dy) < NEAR_GOAL_RADIUS:
            # Bearing to a goal the robot is sitting on is meaningless; treat
            # it as maximally misaligned so it cannot pin the hysteresis.
            angles.append(math.pi)
        else:
            angles.append(abs(wrap_angle(math.atan2(dy, dx) - heading)))
    best = min(range(len(angles)), key=lambda i: (angles[i], i))
    if angles[best] < angles[bank.active_index] - bank.hysteresis_margin:
        return best
    return bank.active_index


def multi_goal_step(bank: GoalBank, robot_y, heading: float, cmd: OperatorCommand,
                    dt: float, mode: BlendMode) -> tuple[np.ndarray, int]:
    """Step the whole bank from the shared measured state and blend the active goal's reference."""
    if not bank.dmps:
        raise EmptyBank("goal bank has no goals")
    if mode.kind not in (BlendKind.PBP_CONT, BlendKind.PBP_ALT, BlendKind.PBP_NOUSER):
        raise ValueError(f"multi_goal_step does not handle mode {mode.kind}")
    if mode.kind is BlendKind.PBP_NOUSER:
        cmd = OperatorCommand.zero()

    robot_y = np.asarray(robot_y, dtype=float)
    frozen = mode.kind is BlendKind.PBP_ALT and cmd.active
    if not frozen:
        for d in bank.dmps:
            dmp_step(d, robot_y, dt)
    bank.active_index = estimate_goal(robot_y, heading, bank)

    if frozen:
        reference = robot_y + cmd.u_vec()
    else:
        reference = bank.dmps[bank.active_index].state.y.copy()
        if mode.kind is BlendKind.PBP_CONT:
            reference = reference + cmd.u_vec()
    return reference, bank.active_index
