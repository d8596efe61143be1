"""Command-line experiment runner.

Subcommands: sweep (arbitration study), bench (goal-bank scalability),
batch (seeded trials to logs + metrics CSV), replay (verify a recorded log
reproduces itself), serve (live shared-control server).

Exit codes: 0 success, 2 configuration error, 3 acceptance-threshold failure
when --assert is passed.
"""
from __future__ import annotations

import argparse
import csv
import sys

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ASSERT = 3

TICK_BUDGET_S = 1.0 / 30.0


def _parse_alphas(text: str):
    if ":" in text:
        lo, hi, step = (float(x) for x in text.split(":"))
        n = int(round((hi - lo) / step))
        return tuple(round(lo + i * step, 10) for i in range(n + 1))
    return tuple(float(x) for x in text.split(","))


def cmd_sweep(args) -> int:
    from .experiments import SweepConfig, arbitration_sweep

    try:
        config = SweepConfig(alphas=_parse_alphas(args.alphas), scenario=args.scenario)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    rows = arbitration_sweep(config)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scenario", "mode", "alpha", "collision_ratio"])
        for r in rows:
            writer.writerow([r["scenario"], r["mode"],
                             "" if r["alpha"] is None else r["alpha"],
                             repr(r["collision_ratio"])])
    print(f"wrote {args.out} ({len(rows)} rows)")
    if args.assert_thresholds:
        exp = [r for r in rows if r["mode"] == "explicit"]
        exp.sort(key=lambda r: r["alpha"])
        ok = (
            exp[0]["collision_ratio"] == 0.0
            and exp[-1]["collision_ratio"] > 0.0
            and all(a["collision_ratio"] <= b["collision_ratio"] + 1e-12
                    for a, b in zip(exp, exp[1:]))
            and all(r["collision_ratio"] == 0.0 for r in rows if r["mode"] in ("cont", "alt"))
        )
        if not ok:
            print("sweep acceptance thresholds failed", file=sys.stderr)
            return EXIT_ASSERT
    return EXIT_OK


def cmd_bench(args) -> int:
    from .experiments import scalability_bench

    goal_counts = [int(x) for x in args.goals.split(",")]
    if not goal_counts or any(k < 1 for k in goal_counts):
        print("config error: goal counts must be positive", file=sys.stderr)
        return EXIT_CONFIG
    rows = scalability_bench(goal_counts, ticks=args.ticks)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["goals", "ticks", "mean_tick_s", "p99_tick_s"])
        for r in rows:
            writer.writerow([r["goals"], r["ticks"],
                             repr(r["mean_tick_s"]), repr(r["p99_tick_s"])])
    for r in rows:
        print(f"K={r['goals']:>4}  mean {r['mean_tick_s']*1e3:.3f} ms  "
              f"p99 {r['p99_tick_s']*1e3:.3f} ms")
    if args.assert_thresholds and any(r["p99_tick_s"] >= TICK_BUDGET_S for r in rows):
        print("bench acceptance threshold failed (p99 >= 33.3 ms)", file=sys.stderr)
        return EXIT_ASSERT
    return EXIT_OK


def cmd_batch(args) -> int:
    from .blending import BlendMode
    from .experiments import batch_trials

    try:
        mode = BlendMode.parse(args.mode)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.operator.startswith("replay:"):
        print("config error: replay operators are handled by the replay subcommand",
              file=sys.stderr)
        return EXIT_CONFIG
    try:
        rows, logs, errors = batch_trials(
            args.task, mode, range(args.seeds), args.operator, out_dir=args.out)
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(f"{len(rows)} trials written to {args.out}")
    for seed, err in errors:
        print(f"seed {seed} failed: {err}", file=sys.stderr)
    return EXIT_OK


def cmd_replay(args) -> int:
    from .world import TrialLog, replay_operator, run_trial, scene_from_log
    from .blending import BlendMode

    with open(args.log) as fh:
        log = TrialLog.from_jsonl(fh.read())
    scene = scene_from_log(log)
    mode = BlendMode.parse(log.header["mode"])
    from .dmp import DmpParams

    cfg = log.header["config"]
    params = DmpParams(tau=cfg["tau"], kp=cfg["kp"], kd=cfg["kd"],
                       phase_decay=cfg["phase_decay"], dt=log.header["dt"],
                       v_max=cfg["v_max"])
    redone = run_trial(scene, mode, replay_operator(log),
                       max_ticks=log.header["max_ticks"], params=params,
                       dt=log.header["dt"])
    match = redone.to_jsonl() == log.to_jsonl()
    print(f"outcome={redone.outcome.value} ticks={len(redone.records)} "
          f"reproduces={'yes' if match else 'NO'}")
    if args.assert_thresholds and not match:
        return EXIT_ASSERT
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(hz=args.hz, log_dir=args.log_dir)
    uvicorn.run(app, host=args.host, port=args.port)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pbp", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sweep", help="arbitration sweep on the pinned toy scenario")
    p.add_argument("--alphas", default="0:1:0.1", help="lo:hi:step or comma list")
    p.add_argument("--scenario", type=int, choices=(1, 2), default=1)
    p.add_argument("--out", default="sweep.csv")
    p.add_argument("--assert", dest="assert_thresholds", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("bench", help="goal-bank scalability benchmark")
    p.add_argument("--goals", default="1,10,50,100")
    p.add_argument("--ticks", type=int, default=1000)
    p.add_argument("--out", default="bench.csv")
    p.add_argument("--assert", dest="assert_thresholds", action="store_true")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("batch", help="seeded batch trials")
    p.add_argument("--task", choices=("reach", "obstacle"), required=True)
    p.add_argument("--mode", required=True,
                   help="teleop | alt | cont | nouser | explicit:<alpha>")
    p.add_argument("--operator", default="none",
                   help="avoidance | goal-seek | none")
    p.add_argument("--seeds", type=int, default=15)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("replay", help="re-run a log's commands and verify reproduction")
    p.add_argument("--log", required=True)
    p.add_argument("--assert", dest="assert_thresholds", action="store_true")
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="live shared-control websocket server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--hz", type=float, default=30.0)
    p.add_argument("--log-dir", default="logs")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
