"""Trial-log analytics: intervention ratio, task time, collision measures."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .world import EmptyLog, Outcome, TrialLog


class EmptyBatch(ValueError):
    pass


@dataclass(frozen=True)
class TrialMetrics:
    intervention_ratio: float
    task_time: float
    collision_ratio: float
    outcome: Outcome

    @classmethod
    def from_log(cls, log: TrialLog) -> "TrialMetrics":
        return cls(
            intervention_ratio=intervention_ratio(log),
            task_time=len(log.records) * log.header["dt"],
            collision_ratio=collision_ratio(log),
            outcome=log.outcome,
        )


def intervention_ratio(log: TrialLog) -> float:
    """Fraction of ticks with active user input (translation or rotation)."""
    if not log.records:
        raise EmptyLog("log has no tick records")
    return sum(1 for r in log.records if r.cmd.active) / len(log.records)


def collision_ratio(log: TrialLog) -> float:
    """Fraction of ticks spent with the robot disk overlapping any obstacle."""
    if not log.records:
        raise EmptyLog("log has no tick records")
    return sum(1 for r in log.records if r.colliding) / len(log.records)


def collision_histogram(metrics, bin_width: float) -> list:
    """Trial counts per collision-ratio bin; bins are left-closed, last bin closed."""
    if not (0.0 < bin_width <= 1.0):
        raise ValueError("bin_width must be in (0, 1]")
    n_bins = math.ceil(1.0 / bin_width)
    counts = [0] * n_bins
    for m in metrics:
        r = m.collision_ratio if isinstance(m, TrialMetrics) else float(m)
        counts[min(int(r / bin_width), n_bins - 1)] += 1
    return counts


def summarize(batch) -> dict:
    """Population mean and sigma per metric field, plus outcome counts."""
    batch = list(batch)
    if not batch:
        raise EmptyBatch("no trials to summarize")
    out = {}
    for name in ("intervention_ratio", "task_time", "collision_ratio"):
        vals = [getattr(m, name) for m in batch]
        mean = sum(vals) / len(vals)
        var = sum((v - mean) ** 2 for v in vals) / len(vals)
        out[name] = {"mean": mean, "sigma": math.sqrt(var)}
    outcomes = {}
    for m in batch:
        outcomes[m.outcome.value] = outcomes.get(m.outcome.value, 0) + 1
    out["outcomes"] = outcomes
    out["n"] = len(batch)
    return out


CSV_FIELDS = ("seed", "mode", "task", "intervention_ratio", "task_time",
              "collision_ratio", "outcome")


def write_metrics_csv(rows, path):
    """One row per trial plus a '# summary' trailer with mean/sigma columns.

    Each row is (seed, mode, task, TrialMetrics).
    """
    import csv

    rows = list(rows)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_FIELDS)
        for seed, mode, task, m in rows:
            writer.writerow([
                seed, mode, task,
                repr(m.intervention_ratio), repr(m.task_time),
                repr(m.collision_ratio), m.outcome.value,
            ])
        if rows:
            summary = summarize([m for *_, m in rows])
            writer.writerow([
                "# summary", "", "",
                repr(summary["intervention_ratio"]["mean"]),
                repr(summary["task_time"]["mean"]),
                repr(summary["collision_ratio"]["mean"]),
                ";".join(f"{k}={v}" for k, v in sorted(summary["outcomes"].items())),
            ])
