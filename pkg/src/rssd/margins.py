"""Closed-loop analysis: L-infinity norms, generalized stability margin,
sensitivity curves, uncertainty tolerance bounds, and multiloop disk margins.

The positive-feedback convention u = K y is used throughout, so the output
sensitivity is S_o = (I - P K)^(-1) and closed-loop stability is decided by
the eigenvalues of A + B (I - K D)^(-1) K C.  The disk-margin loop is
L = -K P so classical negative-feedback margin formulas apply.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import IllPosedLoop, UnstableLoop
from .lti import FrequencyGrid, StateSpacePlant, eval_response, spectrum
from .sweep import grid_peak


@dataclass(frozen=True)
class ClosedLoop:
    """Plant + static gain with the 4-block [P;I](I-KP)^(-1)[-I K] operator."""

    plant: StateSpacePlant
    gain: np.ndarray
    realization: StateSpacePlant
    stable: bool


@dataclass(frozen=True)
class MarginReport:
    gsm: float
    disk_alpha: float
    mdgm_db: float
    mdpm_deg: float
    worst_omega: dict
    degenerate: bool = False


@dataclass(frozen=True)
class SensitivityCurves:
    omega: np.ndarray
    so_max: np.ndarray
    so_min: np.ndarray
    si_max: np.ndarray
    si_min: np.ndarray
    kso_max: np.ndarray
    kso_min: np.ndarray


@dataclass(frozen=True)
class UncertaintyBounds:
    omega: np.ndarray
    output_mult: np.ndarray
    inverse_input: np.ndarray
    output_mult_min: tuple
    inverse_input_min: tuple


def linf_norm(sys: StateSpacePlant, grid: FrequencyGrid) -> tuple[float, float]:
    """(peak of sigma_max(sys(jw)), frequency) including the w->inf limit.

    Imaginary-axis poles make the norm infinite; the offending pole
    frequency is reported.
    """
    if sys.n:
        eig = np.linalg.eigvals(sys.A)
        on_axis = np.abs(eig.real) <= 1e-9 * np.maximum(1.0, np.abs(eig))
        if np.any(on_axis):
            return np.inf, float(np.abs(eig[on_axis][0].imag))

    def fun(omegas):
        resp = eval_response(sys, 1j * np.asarray(omegas, float))
        return np.linalg.norm(resp, ord=2, axis=(1, 2))

    value, omega = grid_peak(fun, grid)
    dc_gain = float(fun(np.array([0.0]))[0])
    if dc_gain > value:
        value, omega = dc_gain, 0.0
    d_gain = np.linalg.norm(sys.D, ord=2) if sys.D.size else 0.0
    if d_gain > value:
        return float(d_gain), np.inf
    return value, omega


def closed_loop(plant: StateSpacePlant, gain) -> ClosedLoop:
    """Well-posed positive-feedback loop and its 4-block realization."""
    K = np.atleast_2d(np.asarray(gain, dtype=float))
    if K.shape != (plant.m, plant.r):
        raise IllPosedLoop(
            f"gain shape {K.shape} does not match plant (m={plant.m}, r={plant.r})"
        )
    ikd = np.eye(plant.m) - K @ plant.D
    if abs(np.linalg.det(ikd)) < 1e-12:
        raise IllPosedLoop("(I - K D) is singular")
    M = np.linalg.inv(ikd)

    A, B, C, D = plant.A, plant.B, plant.C, plant.D
    a_cl = A + B @ M @ K @ C if plant.n else np.zeros((0, 0))
    stable = bool(plant.n == 0 or np.all(np.linalg.eigvals(a_cl).real < 0))

    # inputs (w1, w2) of sizes (m, r); outputs (y, u)
    E = M @ np.hstack([-np.eye(plant.m), K])
    b_cl = B @ E
    c_cl = np.vstack([C + D @ M @ K @ C, M @ K @ C])
    d_cl = np.vstack([D @ E, E])
    real = StateSpacePlant(a_cl, b_cl, c_cl, d_cl, plant.label + "_cl")
    return ClosedLoop(plant, K, real, stable)


def closed_loop_matrix(plant: StateSpacePlant, gain) -> np.ndarray:
    """Closed-loop state matrix A + B (I-KD)^(-1) K C."""
    K = np.atleast_2d(np.asarray(gain, dtype=float))
    M = np.linalg.inv(np.eye(plant.m) - K @ plant.D)
    return plant.A + plant.B @ M @ K @ plant.C


def gsm(plant: StateSpacePlant, gain, grid: FrequencyGrid) -> float:
    """Generalized stability margin b in [0, 1]; 0 when not internally stable."""
    cl = closed_loop(plant, gain)
    if not cl.stable:
        return 0.0
    norm, _ = linf_norm(cl.realization, grid)
    if not np.isfinite(norm) or norm <= 0:
        return 0.0
    return float(1.0 / norm)


def _loop_responses(plant, K, omegas):
    resp = eval_response(plant, 1j * np.asarray(omegas, float))
    eye_r = np.eye(plant.r)
    eye_m = np.eye(plant.m)
    so = np.linalg.inv(eye_r - resp @ K)
    si = np.linalg.inv(eye_m - K @ resp)
    return resp, so, si


def sensitivity_curves(plant: StateSpacePlant, gain,
                       grid: FrequencyGrid) -> SensitivityCurves:
    """Per-frequency extreme singular values of S_o, S_I and K S_o."""
    cl = closed_loop(plant, gain)
    if not cl.stable:
        raise UnstableLoop("sensitivity curves require a stable loop")
    K = cl.gain
    _, so, si = _loop_responses(plant, K, grid.points)
    kso = K @ so

    def ext(mats):
        sv = np.linalg.svd(mats, compute_uv=False)
        return sv[:, 0], sv[:, -1]

    so_hi, so_lo = ext(so)
    si_hi, si_lo = ext(si)
    kso_hi, kso_lo = ext(kso)
    return SensitivityCurves(grid.points, so_hi, so_lo, si_hi, si_lo,
                             kso_hi, kso_lo)


def uncertainty_bounds(plant: StateSpacePlant, gain,
                       grid: FrequencyGrid) -> UncertaintyBounds:
    """Output-multiplicative and inverse-input-multiplicative tolerance curves.

    output bound  = 1 / sigma_max(P K (I - P K)^(-1))
    inverse bound = 1 / sigma_max((I - K P)^(-1))
    """
    cl = closed_loop(plant, gain)
    if not cl.stable:
        raise UnstableLoop("uncertainty bounds require a stable loop")
    K = cl.gain
    resp, so, si = _loop_responses(plant, K, grid.points)
    to = resp @ K @ so
    sig_to = np.linalg.norm(to, ord=2, axis=(1, 2))
    sig_si = np.linalg.norm(si, ord=2, axis=(1, 2))
    with np.errstate(divide="ignore"):
        out_bound = np.where(sig_to > 0, 1.0 / sig_to, np.inf)
        inv_bound = np.where(sig_si > 0, 1.0 / sig_si, np.inf)
    i_out = int(np.argmin(out_bound))
    i_inv = int(np.argmin(inv_bound))
    return UncertaintyBounds(
        grid.points, out_bound, inv_bound,
        (float(out_bound[i_out]), float(grid.points[i_out])),
        (float(inv_bound[i_inv]), float(grid.points[i_inv])),
    )


def _balanced_half_difference(loop: StateSpacePlant) -> StateSpacePlant:
    """(S - T)/2 for S = (I + L)^(-1), T = I - S, as a state-space system."""
    F = np.linalg.inv(np.eye(loop.m) + loop.D)
    a = loop.A - loop.B @ F @ loop.C if loop.n else np.zeros((0, 0))
    b = loop.B @ F
    c = -F @ loop.C
    d = F - 0.5 * np.eye(loop.m)  # (2S - I)/2 evaluated through S's feedthrough
    return StateSpacePlant(a, b, c, d)


def disk_margin(plant: StateSpacePlant, gain,
                grid: FrequencyGrid) -> MarginReport:
    """Balanced (skew 0) disk margin at plant input and output, worst of both.

    alpha = 1 / ||(S - T)/2||_inf with L = -K P (input) or L = -P K (output);
    MDGM = +/-20 log10((2+alpha)/(2-alpha)) dB, MDPM = +/-2 atan(alpha/2).
    """
    cl = closed_loop(plant, gain)
    if not cl.stable:
        raise UnstableLoop("disk margin requires a stable loop")
    K = cl.gain
    loops = {
        "input": StateSpacePlant(plant.A, plant.B, -K @ plant.C, -K @ plant.D),
        "output": StateSpacePlant(plant.A, plant.B @ K, -plant.C, -plant.D @ K),
    }
    alpha = np.inf
    worst = {}
    for where, loop in loops.items():
        norm, omega = linf_norm(_balanced_half_difference(loop), grid)
        a = 1.0 / norm if norm > 0 else np.inf
        worst[where] = {"alpha": float(a), "omega": float(omega)}
        if a < alpha:
            alpha = float(a)
            worst["worst"] = where
    degenerate = bool(np.allclose(K, 0.0))
    if alpha >= 2.0 - 1e-9:
        alpha = max(alpha, 2.0)
    if alpha < 2.0:
        mdgm = 20.0 * np.log10((2.0 + alpha) / (2.0 - alpha))
    else:
        mdgm = np.inf
    mdpm = np.degrees(2.0 * np.arctan(alpha / 2.0))
    return MarginReport(
        gsm=gsm(plant, K, grid),
        disk_alpha=float(alpha),
        mdgm_db=float(mdgm),
        mdpm_deg=float(mdpm),
        worst_omega=worst,
        degenerate=degenerate,
    )
