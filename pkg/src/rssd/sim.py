"""Linear closed-loop time simulation.

Simulates the compensated plant under the static output-feedback gain with
the loop convention u = K (y + d - r), so the steady-state tracking error
is governed by the output sensitivity (I - P K)^(-1).  Integration is
fixed-step 4th-order Runge-Kutta over the full augmented state (plant plus
compensator plus optional uncertainty-weight states).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, DivergentTrace, IllPosedLoop
from .lti import (
    CompensatorBank,
    FirstOrderSection,
    FrequencyGrid,
    StateSpacePlant,
    augment_plant,
    cascade,
    eval_response,
    realize_bank,
)

DIVERGENCE_LIMIT = 1e9


@dataclass(frozen=True)
class SignalSpec:
    """Per-channel scalar signal: zero, step, or doublet pulse pair."""

    kind: str = "zero"
    magnitude: float = 0.0
    start: float = 0.0
    width: float = 0.0  # doublet pulse width (each half)

    def __post_init__(self):
        if self.kind not in ("zero", "step", "doublet"):
            raise DimensionMismatch(f"unknown signal kind {self.kind!r}")
        if self.kind == "doublet" and self.width <= 0.0:
            raise DimensionMismatch("doublet needs a positive pulse width")

    def sample(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        if self.kind == "zero":
            return np.zeros_like(t)
        if self.kind == "step":
            return np.where(t >= self.start, self.magnitude, 0.0)
        up = (t >= self.start) & (t < self.start + self.width)
        down = (t >= self.start + self.width) & (t < self.start + 2 * self.width)
        return self.magnitude * up.astype(float) - self.magnitude * down.astype(float)


@dataclass(frozen=True)
class UncertaintyInjection:
    """Output-multiplicative perturbation (I + delta * G(s) on one channel)."""

    weight: FirstOrderSection
    channel: int
    delta: float = 1.0  # unit all-pass sample; run both +1 and -1


@dataclass(frozen=True)
class Scenario:
    reference: tuple
    disturbance: tuple = ()
    uncertainty: UncertaintyInjection | None = None
    dt: float = 1e-3
    duration: float = 10.0

    def __post_init__(self):
        if self.dt <= 0.0:
            raise DimensionMismatch("dt must be positive")
        if self.duration < 10.0 * self.dt:
            raise DimensionMismatch("duration must cover at least 10 steps")
        ref = tuple(s if isinstance(s, SignalSpec) else SignalSpec(**s)
                    for s in self.reference)
        dist = tuple(s if isinstance(s, SignalSpec) else SignalSpec(**s)
                     for s in self.disturbance)
        for s in ref + dist:
            if s.kind == "doublet" and s.width <= self.dt:
                raise DimensionMismatch("doublet pulse width must exceed dt")
        object.__setattr__(self, "reference", ref)
        object.__setattr__(self, "disturbance", dist)


@dataclass(frozen=True)
class TraceSet:
    time: np.ndarray
    outputs: np.ndarray      # (len(time), r)
    inputs: np.ndarray       # (len(time), m)
    reference: np.ndarray    # (len(time), r)
    errors: np.ndarray       # outputs - reference
    diverged: bool = False
    divergence_time: float | None = None


def _uncertainty_plant(inj: UncertaintyInjection, channels: int) -> StateSpacePlant:
    """State-space form of I + delta * G(s) acting on one output channel."""
    g = realize_bank(CompensatorBank((inj.weight,), side="out"))
    e = np.zeros((channels, 1))
    e[inj.channel, 0] = 1.0
    A = g.A
    B = g.B @ e.T
    C = inj.delta * (e @ g.C)
    D = np.eye(channels) + inj.delta * float(g.D[0, 0]) * (e @ e.T)
    return StateSpacePlant(A, B, C, D, label="uncertainty")


def simulate(plant: StateSpacePlant, gain, w_in: CompensatorBank,
             w_out: CompensatorBank, scenario: Scenario) -> TraceSet:
    """Fixed-step RK4 trace of the augmented loop under a scenario.

    The controller sees y + d - r; with zero reference and disturbance from
    a zero initial state every trace is identically zero.
    """
    aug = augment_plant(w_out, plant, w_in)
    if scenario.uncertainty is not None:
        aug = cascade(aug, _uncertainty_plant(scenario.uncertainty, aug.r))
    K = np.atleast_2d(np.asarray(gain, dtype=float))
    if K.shape != (aug.m, aug.r):
        raise IllPosedLoop(
            f"gain shape {K.shape} does not match loop (m={aug.m}, r={aug.r})"
        )
    if len(scenario.reference) != aug.r:
        raise DimensionMismatch("one reference spec per output channel required")
    if scenario.disturbance and len(scenario.disturbance) != aug.r:
        raise DimensionMismatch("one disturbance spec per output channel required")

    ikd = np.eye(aug.m) - K @ aug.D
    if abs(np.linalg.det(ikd)) < 1e-12:
        raise IllPosedLoop("(I - K D) is singular")
    MK = np.linalg.solve(ikd, K)
    a_cl = aug.A + aug.B @ MK @ aug.C
    b_ext = aug.B @ MK  # forcing by (d - r)

    dt = scenario.dt
    n_steps = int(round(scenario.duration / dt))
    time = dt * np.arange(n_steps + 1)

    ref = np.column_stack([s.sample(time) for s in scenario.reference])
    if scenario.disturbance:
        dist = np.column_stack([s.sample(time) for s in scenario.disturbance])
    else:
        dist = np.zeros_like(ref)
    half_t = time[:-1] + 0.5 * dt
    ref_h = np.column_stack([s.sample(half_t) for s in scenario.reference])
    if scenario.disturbance:
        dist_h = np.column_stack([s.sample(half_t) for s in scenario.disturbance])
    else:
        dist_h = np.zeros_like(ref_h)

    w = dist - ref
    w_h = dist_h - ref_h

    n = aug.n
    x = np.zeros(n)
    outputs = np.full((n_steps + 1, aug.r), np.nan)
    inputs = np.full((n_steps + 1, aug.m), np.nan)
    diverged = False
    div_time = None

    def out_in(xk, wk):
        u = MK @ (aug.C @ xk + wk)
        y = aug.C @ xk + aug.D @ u
        return y, u

    outputs[0], inputs[0] = out_in(x, w[0])
    for k in range(n_steps):
        f = lambda xv, wv: a_cl @ xv + b_ext @ wv
        k1 = f(x, w[k])
        k2 = f(x + 0.5 * dt * k1, w_h[k])
        k3 = f(x + 0.5 * dt * k2, w_h[k])
        k4 = f(x + dt * k3, w[k + 1])
        x = x + (dt / 6.0) * (k1 + 2 * k2 + 2 * k3 + k4)
        if not np.all(np.isfinite(x)) or np.any(np.abs(x) > DIVERGENCE_LIMIT):
            diverged = True
            div_time = float(time[k + 1])
            break
        outputs[k + 1], inputs[k + 1] = out_in(x, w[k + 1])

    errors = outputs - ref
    return TraceSet(time, outputs, inputs, ref, errors, diverged, div_time)


@dataclass(frozen=True)
class TrackingReport:
    passed: bool
    channels: tuple  # per-channel dicts


def tracking_metrics(traces: TraceSet, error_band: float, rms_ceiling: float,
                     steady_after: float = 0.0) -> TrackingReport:
    """Per-channel max steady error and RMS deviation against ceilings.

    steady_after masks the initial transient out of the max-error check;
    RMS is taken over the whole trace.
    """
    if traces.diverged:
        raise DivergentTrace(traces.divergence_time)
    if not np.all(np.isfinite(traces.errors)):
        raise DivergentTrace(None)
    steady = traces.time >= steady_after
    channels = []
    passed = True
    for ch in range(traces.errors.shape[1]):
        err = traces.errors[:, ch]
        max_err = float(np.max(np.abs(err[steady]))) if steady.any() else 0.0
        rms = float(np.sqrt(np.mean(err ** 2)))
        band_ok = max_err <= error_band
        rms_ok = rms <= rms_ceiling
        passed = passed and band_ok and rms_ok
        channels.append({
            "max_steady_error": max_err,
            "rms": rms,
            "band_ok": band_ok,
            "rms_ok": rms_ok,
        })
    return TrackingReport(passed, tuple(channels))


def weight_gain_curve(weight: FirstOrderSection,
                      grid: FrequencyGrid) -> tuple[np.ndarray, np.ndarray]:
    """(omega, |G(j omega)|) over the grid for an uncertainty weight."""
    g = realize_bank(CompensatorBank((weight,), side="out"))
    resp = eval_response(g, 1j * grid.points)
    return grid.points, np.abs(resp[:, 0, 0])
