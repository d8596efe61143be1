"""Shared-control engine: implicit policy blending with movement primitives."""

from .blending import (
    BlendKind,
    BlendMode,
    GoalBank,
    OperatorCommand,
    alternated_step,
    continuous_step,
    estimate_goal,
    explicit_blend,
    multi_goal_step,
)
from .dmp import (
    Dmp,
    DmpParams,
    DmpState,
    ForcingFunction,
    canonical_step,
    dmp_step,
    fit_from_demonstration,
    forcing_value,
    rollout,
    set_goal,
    straight_line_primitive,
)
from .world import (
    Obstacle,
    Outcome,
    RobotState,
    Scene,
    TaskKind,
    TickRecord,
    TrialLog,
    TrialRunner,
    check_collision,
    generate_scene,
    obstacle_step,
    progress,
    replay_operator,
    run_trial,
    track_step,
)

__version__ = "0.1.0"
