"""Dynamical movement primitives for planar motion.

A primitive is a second-order goal attractor with a phase-gated nonlinear
forcing term. The canonical phase decays from 1 toward 0 and gates the
forcing term, so near steady state only the linear goal attraction remains.
Primitives are stepped from the *measured* robot state each tick, which is
what lets user-induced disturbances be absorbed back into the motion.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

PHASE_FLOOR = 1e-6
_DENOM_GUARD = 1e-10
_AMPLITUDE_FLOOR = 1e-3


class DegenerateDemo(ValueError):
    """Demonstration too short or spanning zero duration."""


class FitFailure(RuntimeError):
    """Weight regression failed beyond what regularization can absorb."""


@dataclass
class DmpParams:
    """Gains and timing for one primitive.

    kd defaults to critical damping (2*sqrt(kp)). v_max bounds both the
    finite-difference velocity estimate and the integrated velocity, which
    keeps single-tick reference displacements within v_max*dt.
    """

    tau: float = 1.5
    kp: float = 60.0
    kd: float | None = None
    n_basis: int = 0
    phase_decay: float = 4.0
    dt: float = 1.0 / 30.0
    v_max: float = 0.8

    def __post_init__(self):
        if self.kd is None:
            self.kd = 2.0 * math.sqrt(self.kp)
        if not (self.tau > 0 and self.kp > 0 and self.kd > 0):
            raise ValueError("tau, kp, kd must be positive")
        if self.n_basis < 0:
            raise ValueError("n_basis must be >= 0")
        if not (self.phase_decay > 0 and self.dt > 0 and self.v_max > 0):
            raise ValueError("phase_decay, dt, v_max must be positive")


@dataclass
class ForcingFunction:
    """Normalized Gaussian bases in phase, gated by the phase itself."""

    centers: np.ndarray       # (n,), strictly decreasing in (0, 1]
    widths: np.ndarray        # (n,), > 0
    weights: np.ndarray       # (2, n)
    amplitude_scale: np.ndarray  # (2,)

    @classmethod
    def zero(cls, amplitude_scale=None) -> "ForcingFunction":
        amp = np.ones(2) if amplitude_scale is None else np.asarray(amplitude_scale, float)
        return cls(np.empty(0), np.empty(0), np.empty((2, 0)), amp)

    @classmethod
    def with_layout(cls, n_basis: int, phase_decay: float, amplitude_scale) -> "ForcingFunction":
        """Zero-weight forcing with centers exponentially spaced to match the phase decay."""
        amp = np.asarray(amplitude_scale, float)
        if n_basis == 0:
            return cls.zero(amp)
        centers = np.exp(-phase_decay * np.linspace(0.0, 1.0, n_basis))
        if n_basis > 1:
            gaps = -np.diff(centers)
            widths = 1.0 / (2.0 * np.square(np.append(gaps, gaps[-1])))
        else:
            widths = np.array([1.0])
        return cls(centers, widths, np.zeros((2, n_basis)), amp)


@dataclass
class DmpState:
    y: np.ndarray          # (2,) position, m
    dy: np.ndarray         # (2,) velocity, m/s
    phase: float = 1.0


@dataclass
class Dmp:
    params: DmpParams
    forcing: ForcingFunction
    y0: np.ndarray
    g: np.ndarray
    state: DmpState

    def copy(self) -> "Dmp":
        return Dmp(
            params=self.params,
            forcing=self.forcing,
            y0=self.y0.copy(),
            g=self.g.copy(),
            state=DmpState(self.state.y.copy(), self.state.dy.copy(), self.state.phase),
        )

    def step(self, measured_y, dt: float | None = None) -> np.ndarray:
        return dmp_step(self, measured_y, self.params.dt if dt is None else dt)

    def reset(self, y0=None):
        y0 = self.y0 if y0 is None else np.asarray(y0, float)
        self.y0 = y0.copy()
        self.state = DmpState(y0.copy(), np.zeros(2), 1.0)


def canonical_step(phase: float, params: DmpParams, dt: float | None = None) -> float:
    """One explicit Euler step of the exponential phase decay, floored at PHASE_FLOOR."""
    if dt is None:
        dt = params.dt
    return max(phase - dt * params.phase_decay * phase / params.tau, PHASE_FLOOR)


def forcing_value(forcing: ForcingFunction, phase: float) -> np.ndarray:
    """Evaluate the forcing term at the given phase. Zero for an empty basis."""
    if forcing.centers.size == 0:
        return np.zeros(2)
    psi = np.exp(-forcing.widths * np.square(phase - forcing.centers))
    mix = forcing.weights @ psi / (psi.sum() + _DENOM_GUARD)
    return phase * forcing.amplitude_scale * mix


def _clamp_speed(dy: np.ndarray, v_max: float) -> np.ndarray:
    speed = math.hypot(dy[0], dy[1])
    if speed > v_max:
        return dy * (v_max / speed)
    return dy


def dmp_step(dmp: Dmp, measured_y, dt: float) -> np.ndarray:
    """Integrate one tick from the measured robot state, returning the new reference.

    The internal position is always overwritten with the measurement. The
    internal velocity is preserved when the measurement matches the previous
    reference (undisturbed tracking) and re-estimated by clamped finite
    difference when the state was pushed elsewhere.
    """
    measured = np.asarray(measured_y, dtype=float)
    st = dmp.state
    p = dmp.params
    if not np.array_equal(measured, st.y):
        st.dy = _clamp_speed((measured - st.y) / dt, p.v_max)
        st.y = measured.copy()
    f = forcing_value(dmp.forcing, st.phase)
    ddy = (p.kp * (dmp.g - st.y) - p.kd * st.dy + f) / p.tau
    st.dy = _clamp_speed(st.dy + dt * ddy, p.v_max)
    st.y = st.y + dt * st.dy
    st.phase = canonical_step(st.phase, p, dt)
    return st.y.copy()


def set_goal(dmp: Dmp, g) -> Dmp:
    """Replace the goal in place; state and phase are untouched."""
    g = np.asarray(g, dtype=float)
    if not np.all(np.isfinite(g)):
        raise ValueError("goal must be finite")
    dmp.g = g.copy()
    return dmp


def _amplitude(y0: np.ndarray, g: np.ndarray) -> np.ndarray:
    span = g - y0
    signs = np.where(span >= 0.0, 1.0, -1.0)
    return signs * np.maximum(np.abs(span), _AMPLITUDE_FLOOR)


def straight_line_primitive(y0, g, params: DmpParams | None = None) -> Dmp:
    """Primitive with no forcing term: the rollout traces the segment y0 -> g."""
    if params is None:
        params = DmpParams()
    y0 = np.asarray(y0, dtype=float)
    g = np.asarray(g, dtype=float)
    if not (np.all(np.isfinite(y0)) and np.all(np.isfinite(g))):
        raise ValueError("y0 and g must be finite")
    if params.n_basis != 0:
        params = replace(params, kd=params.kd, n_basis=0)
    forcing = ForcingFunction.zero(_amplitude(y0, g))
    return Dmp(params, forcing, y0.copy(), g.copy(), DmpState(y0.copy(), np.zeros(2), 1.0))


def _phase_at(t: np.ndarray, params: DmpParams) -> np.ndarray:
    # Geometric interpolation of the discrete decay so fitted phases match
    # the phases a rollout at params.dt actually visits.
    ratio = 1.0 - params.dt * params.phase_decay / params.tau
    if ratio <= 0.0:
        raise ValueError("dt too large for the configured phase decay")
    return np.maximum(np.power(ratio, t / params.dt), PHASE_FLOOR)


def fit_from_demonstration(demo, params: DmpParams) -> Dmp:
    """Fit forcing weights from (t, y) samples by ridge regression.

    The demonstration is differentiated numerically, the forcing target is
    isolated from the attractor dynamics per sample, and the weights are
    solved per dimension against the normalized phase-indexed basis matrix.
    The primitive's time constant is taken from the demonstration duration
    so the phase traversal spans the whole demonstration.
    """
    pairs = list(demo)
    if len(pairs) < 3:
        raise DegenerateDemo("need at least 3 samples")
    ts = np.asarray([float(t) for t, _ in pairs])
    ys = np.asarray([np.asarray(y, dtype=float) for _, y in pairs])
    if ts[-1] - ts[0] <= 0.0:
        raise DegenerateDemo("demonstration spans zero duration")
    params = replace(params, tau=float(ts[-1] - ts[0]))
    if not np.all(np.isfinite(ys)):
        raise DegenerateDemo("non-finite positions in demonstration")

    # Differences chosen to invert the semi-implicit integration scheme:
    # velocity is the backward difference (with the at-rest start the
    # integrator uses), acceleration the forward difference of velocity.
    steps = np.diff(ts)[:, None]
    dy = np.zeros_like(ys)
    dy[1:] = np.diff(ys, axis=0) / steps
    ddy = np.zeros_like(ys)
    ddy[:-1] = np.diff(dy, axis=0) / steps
    y0 = ys[0]
    g = ys[-1]
    amp = _amplitude(y0, g)
    forcing = ForcingFunction.with_layout(params.n_basis, params.phase_decay, amp)

    if params.n_basis > 0:
        s = _phase_at(ts - ts[0], params)
        f_target = params.tau * ddy - params.kp * (g - ys) + params.kd * dy
        psi = np.exp(-forcing.widths * np.square(s[:, None] - forcing.centers[None, :]))
        design = s[:, None] * psi / (psi.sum(axis=1, keepdims=True) + _DENOM_GUARD)
        gram = design.T @ design
        lam = 1e-8 * max(np.trace(gram) / params.n_basis, 1.0)
        gram += lam * np.eye(params.n_basis)
        try:
            weights = np.linalg.solve(gram, design.T @ (f_target / amp[None, :]))
        except np.linalg.LinAlgError as exc:
            raise FitFailure("singular regression system") from exc
        if not np.all(np.isfinite(weights)):
            raise FitFailure("non-finite weights")
        forcing.weights = weights.T.copy()

    return Dmp(params, forcing, y0.copy(), g.copy(), DmpState(y0.copy(), np.zeros(2), 1.0))


def rollout(dmp: Dmp, max_steps: int = 2000, dt: float | None = None,
            stop_tol: float | None = None) -> np.ndarray:
    """Autonomous rollout on a copy, feeding each reference back as the measurement.

    Runs until the phase floor is reached (plus convergence when stop_tol is
    given) or max_steps. Returns the visited positions including the start.
    """
    sim = dmp.copy()
    dt = sim.params.dt if dt is None else dt
    points = [sim.state.y.copy()]
    for _ in range(max_steps):
        y = dmp_step(sim, sim.state.y, dt)
        points.append(y)
        if sim.state.phase <= PHASE_FLOOR:
            if stop_tol is None or np.linalg.norm(y - sim.g) < stop_tol:
                break
    return np.asarray(points)
