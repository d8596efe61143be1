"""End-to-end acceptance gate.

Each test exercises one headline requirement at its stated tolerance and
prints a single PASS/FAIL line so a full run reads as a checklist.
"""
import math
import time

import numpy as np
import pytest

from pbp.blending import (
    BlendMode,
    OperatorCommand,
    alternated_step,
    continuous_step,
)
from pbp.dmp import DmpParams, canonical_step, forcing_value, rollout, straight_line_primitive
from pbp.experiments import SweepConfig, arbitration_sweep, batch_trials, scalability_bench
from pbp.rng import SplitMix64
from pbp.world import DT, V_MAX, generate_scene, replay_operator, run_trial, scene_from_log


def report(name: str, ok: bool) -> bool:
    print(f"ACCEPTANCE {'PASS' if ok else 'FAIL'}: {name}", flush=True)
    return ok


def largest_collision_free_alpha(rows):
    best = None
    for r in rows:
        if r["mode"] == "explicit" and r["collision_ratio"] == 0.0:
            if best is None or r["alpha"] > best:
                best = r["alpha"]
    return best


def test_arbitration_sweep():
    t0 = time.time()
    alphas = tuple(round(0.1 * i, 1) for i in range(11))
    per_scenario = {}
    ok = True
    for scenario in (1, 2):
        rows = arbitration_sweep(SweepConfig(alphas=alphas, scenario=scenario))
        exp = sorted((r for r in rows if r["mode"] == "explicit"),
                     key=lambda r: r["alpha"])
        ratios = [r["collision_ratio"] for r in exp]
        ok &= ratios[0] == 0.0
        ok &= ratios[-1] > 0.0
        ok &= all(a <= b + 1e-12 for a, b in zip(ratios, ratios[1:]))
        ok &= all(r["collision_ratio"] == 0.0
                  for r in rows if r["mode"] in ("cont", "alt"))
        per_scenario[scenario] = largest_collision_free_alpha(rows)
    ok &= per_scenario[1] != per_scenario[2]
    elapsed = time.time() - t0
    ok &= elapsed < 30.0
    assert report(f"arbitration sweep (alpha* {per_scenario[1]} vs "
                  f"{per_scenario[2]}, {elapsed:.1f}s)", ok)


def test_scalability_100_goals():
    t0 = time.time()
    rows = scalability_bench([100], ticks=1000)
    p99 = rows[0]["p99_tick_s"]
    elapsed = time.time() - t0
    ok = p99 < 1.0 / 30.0 and elapsed < 120.0
    assert report(f"100-goal bank p99 {p99 * 1e3:.3f} ms/tick "
                  f"(budget 33.3 ms, {elapsed:.1f}s)", ok)


def test_dmp_property_suite():
    t0 = time.time()
    ok = True

    # Convergence on 100 random straight-line primitives.
    rng = SplitMix64(2024)
    params = DmpParams(dt=DT)
    for _ in range(100):
        y0 = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2)])
        g = np.array([rng.uniform(-2, 2), rng.uniform(-2, 2)])
        d = straight_line_primitive(y0, g, params)
        path = rollout(d, max_steps=3000, stop_tol=1e-4)
        ok &= float(np.linalg.norm(path[-1] - g)) < 1e-3

    # Steady state: with the phase at its floor the forcing is negligible and
    # the attractor residual kp*(g - y) - kd*dy vanishes at the endpoint.
    d = straight_line_primitive((0.0, 0.0), (1.5, -0.5), params)
    for _ in range(3000):
        if np.linalg.norm(d.state.y - d.g) < 1e-6 and np.linalg.norm(d.state.dy) < 1e-6:
            break
        from pbp.dmp import dmp_step
        dmp_step(d, d.state.y, DT)
    residual = d.params.kp * (d.g - d.state.y) - d.params.kd * d.state.dy \
        + forcing_value(d.forcing, d.state.phase)
    ok &= float(np.linalg.norm(residual)) < 1e-3

    # Phase decays strictly monotonically down to its floor.
    phase, phases = 1.0, []
    for _ in range(5000):
        phase = canonical_step(phase, params)
        phases.append(phase)
    ok &= all(b <= a for a, b in zip(phases, phases[1:]))
    ok &= phases[-1] >= 1e-6

    # Fit round trip: refitting a rollout reproduces it within 1% of extent.
    from pbp.dmp import fit_from_demonstration
    fit_params = DmpParams(tau=1.5, kp=25.0, n_basis=25, v_max=10.0, dt=DT)
    demo = [(t, np.array([2 * t / 6, 0.4 * math.sin(math.pi * t / 3)]))
            for t in np.arange(0, 6.0 + DT / 2, DT)]
    base = fit_from_demonstration(demo, fit_params)
    traj = rollout(base, max_steps=400)
    refit = fit_from_demonstration([(i * DT, y) for i, y in enumerate(traj)],
                                   fit_params)
    traj2 = rollout(refit, max_steps=len(traj) - 1)
    n = min(len(traj), len(traj2))
    rmse = float(np.sqrt(np.mean(np.sum((traj[:n] - traj2[:n]) ** 2, axis=1))))
    extent = float(np.max(np.linalg.norm(traj - traj[0], axis=1)))
    ok &= rmse < 0.01 * extent

    # Alternated vs continuous under identical input: the paths must differ
    # yet both settle on the goal.
    g = np.array([2.0, 0.0])

    def run(stepper, n=900):
        d = straight_line_primitive((0.0, 0.0), g, params)
        y = np.zeros(2)
        path = []
        for k in range(n):
            cmd = (OperatorCommand((0.0, 0.03), 0.0) if 30 <= k < 75
                   else OperatorCommand.zero())
            y = np.asarray(stepper(d, y, cmd, DT), dtype=float)
            path.append(y.copy())
        return np.array(path)

    cont = run(continuous_step)
    alt = run(alternated_step)
    divergence = float(np.max(np.linalg.norm(cont - alt, axis=1)))
    ok &= divergence > 0.05
    ok &= float(np.linalg.norm(cont[-1] - g)) < 1e-3
    ok &= float(np.linalg.norm(alt[-1] - g)) < 1e-3

    elapsed = time.time() - t0
    ok &= elapsed < 60.0
    assert report(f"dmp property suite (round-trip rmse {rmse:.4f}, "
                  f"replay divergence {divergence:.2f}, {elapsed:.1f}s)", ok)


def test_shared_control_benefit():
    t0 = time.time()
    seeds = range(50)
    assisted, _, e1 = batch_trials("obstacle", BlendMode.alternated(), seeds,
                                   "avoidance")
    unassisted, _, e2 = batch_trials("obstacle", BlendMode.no_user(), seeds,
                                     "none")
    ok = e1 == [] and e2 == [] and len(assisted) == len(unassisted) == 50
    pairs = {s: m.collision_ratio for s, *_, m in assisted}
    diffs = [pairs[s] - m.collision_ratio for s, *_, m in unassisted]
    mean_assisted = sum(pairs.values()) / len(pairs)
    mean_unassisted = mean_assisted - sum(diffs) / len(diffs)
    ok &= mean_assisted < mean_unassisted
    zero_frac = sum(1 for v in pairs.values() if v == 0.0) / len(pairs)
    ok &= zero_frac > 0.5

    reach, _, e3 = batch_trials("reach", BlendMode.alternated(), seeds,
                                "goal-seek")
    ok &= e3 == []
    successes = sum(1 for *_, m in reach if m.outcome.value == "success")
    interventions = [m.intervention_ratio for *_, m in reach]
    ok &= successes == 50
    ok &= max(interventions) < 0.4

    elapsed = time.time() - t0
    ok &= elapsed < 300.0
    assert report(
        f"shared-control benefit (collision {mean_assisted:.4f} vs "
        f"{mean_unassisted:.4f}, {zero_frac:.0%} clean, reach success "
        f"{successes}/50, max intervention {max(interventions):.2f}, "
        f"{elapsed:.1f}s)", ok)


def test_determinism_and_replay():
    t0 = time.time()
    from pbp.operators import make_operator

    ok = True
    for task, mode, op_name in (
        ("obstacle", BlendMode.alternated(), "avoidance"),
        ("reach", BlendMode.continuous(), "goal-seek"),
        ("reach", BlendMode.teleop(), "none"),
    ):
        first = run_trial(generate_scene(17, task), mode,
                          make_operator(op_name), max_ticks=600)
        second = run_trial(generate_scene(17, task), mode,
                           make_operator(op_name), max_ticks=600)
        ok &= first.to_jsonl() == second.to_jsonl()
        replayed = run_trial(scene_from_log(first), mode,
                             replay_operator(first), max_ticks=600)
        ok &= replayed.to_jsonl() == first.to_jsonl()
    elapsed = time.time() - t0
    ok &= elapsed < 60.0
    assert report(f"determinism and bit-exact replay ({elapsed:.1f}s)", ok)


def test_goal_switch_continuity():
    bound = V_MAX * DT
    worst, switches = 0.0, 0
    _, logs, errors = batch_trials("reach", BlendMode.no_user(), range(25),
                                   "none", max_ticks=1200)
    assert errors == []
    for log in logs:
        for prev, cur in zip(log.records, log.records[1:]):
            if cur.active_goal != prev.active_goal and not cur.cmd.active:
                switches += 1
                jump = float(np.hypot(*(cur.reference - prev.robot.y)))
                worst = max(worst, jump)
    ok = switches > 0 and worst <= bound + 1e-9
    assert report(f"goal-switch continuity ({switches} switches, max jump "
                  f"{worst:.5f} <= {bound:.5f})", ok)
