"""State-space LTI substrate: plants, frequency response, spectra, cascading.

All systems are continuous-time real state-space quadruples (A, B, C, D).
Types are immutable after construction and every operation is a pure
function, so frequency sweeps can be evaluated point-parallel.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import (
    ComputationFailed,
    DimensionMismatch,
    ImproperSection,
    SingularAtFrequency,
    UnstableSection,
)

# Eigenvalues with |Re| below this (relative) threshold are treated as
# imaginary-axis.
IMAG_AXIS_RTOL = 1e-9


def _as_matrix(value, rows, cols, name):
    arr = np.atleast_2d(np.asarray(value, dtype=float))
    if arr.size == 0:
        arr = arr.reshape(rows, cols)
    if arr.shape != (rows, cols):
        raise DimensionMismatch(
            f"{name}: expected shape {(rows, cols)}, got {arr.shape}"
        )
    if not np.all(np.isfinite(arr)):
        raise DimensionMismatch(f"{name}: non-finite entries")
    return arr


@dataclass(frozen=True)
class StateSpacePlant:
    """Real state-space system  dx = A x + B u,  y = C x + D u."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    label: str = ""

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        n = A.shape[0]
        if A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {A.shape}")
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(n, -1) if n else B.reshape(0, B.size)
        m = B.shape[1]
        C = np.asarray(self.C, dtype=float)
        if C.ndim == 1:
            C = C.reshape(-1, n) if n else C.reshape(C.size, 0)
        r = C.shape[0]
        object.__setattr__(self, "A", _as_matrix(A, n, n, "A"))
        object.__setattr__(self, "B", _as_matrix(B, n, m, "B"))
        object.__setattr__(self, "C", _as_matrix(C, r, n, "C"))
        object.__setattr__(self, "D", _as_matrix(self.D, r, m, "D"))
        for mat in ("A", "B", "C", "D"):
            getattr(self, mat).setflags(write=False)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def r(self) -> int:
        return self.C.shape[0]

    @staticmethod
    def from_gain(D, label: str = "") -> "StateSpacePlant":
        """Static system with no states (pure gain matrix)."""
        D = np.atleast_2d(np.asarray(D, dtype=float))
        r, m = D.shape
        return StateSpacePlant(
            np.zeros((0, 0)), np.zeros((0, m)), np.zeros((r, 0)), D, label
        )

    @staticmethod
    def siso(num_pole: float, gain: float = 1.0, label: str = "") -> "StateSpacePlant":
        """Scalar first-order system gain/(s - num_pole)."""
        return StateSpacePlant([[num_pole]], [[1.0]], [[gain]], [[0.0]], label)


@dataclass(frozen=True)
class PlantSet:
    """Ordered finite collection of plants sharing input/output dimensions."""

    plants: tuple

    def __post_init__(self):
        plants = tuple(self.plants)
        if not plants:
            raise DimensionMismatch("plant set must be nonempty")
        m, r = plants[0].m, plants[0].r
        for p in plants:
            if (p.m, p.r) != (m, r):
                raise DimensionMismatch(
                    f"plant {p.label!r}: dims ({p.m},{p.r}) != shared ({m},{r})"
                )
        object.__setattr__(self, "plants", plants)

    def __len__(self):
        return len(self.plants)

    def __getitem__(self, i):
        return self.plants[i]

    def __iter__(self):
        return iter(self.plants)

    @property
    def m(self) -> int:
        return self.plants[0].m

    @property
    def r(self) -> int:
        return self.plants[0].r


@dataclass(frozen=True)
class FrequencyGrid:
    """Strictly increasing evaluation frequencies with refinement config."""

    points: np.ndarray
    max_refine_depth: int = 40
    rel_tol: float = 1e-4

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float).ravel()
        if pts.size < 2:
            raise DimensionMismatch("grid needs at least 2 points")
        if not np.all(np.isfinite(pts)) or np.any(pts < 0):
            raise DimensionMismatch("grid points must be finite and >= 0")
        if np.any(np.diff(pts) <= 0):
            raise DimensionMismatch("grid points must be strictly increasing")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @staticmethod
    def default(lo: float = 1e-3, hi: float = 1e5, num: int = 400) -> "FrequencyGrid":
        return FrequencyGrid(np.logspace(np.log10(lo), np.log10(hi), num))

    def with_points(self, extra) -> "FrequencyGrid":
        """Grid with additional frequencies merged in (duplicates dropped)."""
        merged = np.unique(np.concatenate([self.points, np.asarray(extra, float)]))
        merged = merged[(merged >= 0) & np.isfinite(merged)]
        return FrequencyGrid(merged, self.max_refine_depth, self.rel_tol)


@dataclass(frozen=True)
class EigenInfo:
    """Eigenvalue with its damping ratio and natural frequency."""

    value: complex
    damping: float
    natural_frequency: float
    marginal: bool = False


def eigen_info(lam: complex) -> EigenInfo:
    """Damping/natural frequency of a single eigenvalue.

    lam == 0 reports zeta=1, wn=0 and is flagged marginal (by convention,
    to avoid 0/0; origin poles are handled by the imaginary-axis logic in
    the nu-gap code, not by damping checks).
    """
    wn = abs(lam)
    if wn == 0.0:
        return EigenInfo(0j, 1.0, 0.0, marginal=True)
    return EigenInfo(complex(lam), -lam.real / wn, wn)


def spectrum(plant: StateSpacePlant) -> list[EigenInfo]:
    """All eigenvalues of A with damping info, conjugate pairs adjacent."""
    if plant.n == 0:
        return []
    try:
        eig = np.linalg.eigvals(plant.A)
    except np.linalg.LinAlgError as exc:  # pragma: no cover
        raise ComputationFailed(f"eigen-solver failed: {exc}") from exc
    order = np.lexsort((np.sign(eig.imag), np.abs(eig.imag), eig.real))
    return [eigen_info(lam) for lam in eig[order]]


def is_imag_axis(lam: complex) -> bool:
    return abs(lam.real) <= IMAG_AXIS_RTOL * max(1.0, abs(lam))


def eval_response(plant: StateSpacePlant, s_values) -> np.ndarray:
    """P(s) evaluated at an array of complex points; shape (k, r, m).

    No singularity guard: entries blow up smoothly near poles, which is the
    behaviour the sweep/refinement engines want.
    """
    s = np.asarray(s_values, dtype=complex).ravel()
    if plant.n == 0:
        return np.broadcast_to(plant.D, (s.size, plant.r, plant.m)).astype(complex)
    eye = np.eye(plant.n)
    lhs = s[:, None, None] * eye - plant.A
    try:
        x = np.linalg.solve(lhs, np.broadcast_to(plant.B, (s.size,) + plant.B.shape))
    except np.linalg.LinAlgError:
        # fall back to least squares pointwise when some point is singular
        x = np.empty((s.size, plant.n, plant.m), dtype=complex)
        for k in range(s.size):
            try:
                x[k] = np.linalg.solve(lhs[k], plant.B)
            except np.linalg.LinAlgError:
                x[k] = np.linalg.lstsq(lhs[k], plant.B, rcond=None)[0]
    return plant.C @ x + plant.D


def freq_response(plant: StateSpacePlant, omega: float) -> np.ndarray:
    """C(jw I - A)^{-1} B + D at a single frequency omega >= 0."""
    if not np.isfinite(omega) or omega < 0:
        raise DimensionMismatch(f"omega must be finite and >= 0, got {omega}")
    if plant.n:
        eig = np.linalg.eigvals(plant.A)
        dist = np.abs(1j * omega - eig)
        if np.any(dist <= 1e-9 * np.maximum(1.0, np.abs(eig))):
            raise SingularAtFrequency(omega)
    return eval_response(plant, [omega * 1j])[0]


def cascade(first: StateSpacePlant, second: StateSpacePlant,
            label: str = "") -> StateSpacePlant:
    """Series connection u -> first -> second; transfer P2(s) P1(s)."""
    if second.m != first.r:
        raise DimensionMismatch(
            f"cascade: second.m={second.m} != first.r={first.r}"
        )
    n1, n2 = first.n, second.n
    A = np.block([
        [first.A, np.zeros((n1, n2))],
        [second.B @ first.C, second.A],
    ]) if n1 + n2 else np.zeros((0, 0))
    B = np.vstack([first.B, second.B @ first.D])
    C = np.hstack([second.D @ first.C, second.C])
    D = second.D @ first.D
    return StateSpacePlant(A, B, C, D, label)


def augment_plant(w_out: "CompensatorBank", plant: StateSpacePlant,
                  w_in: "CompensatorBank") -> StateSpacePlant:
    """Series augmentation W_out(s) P(s) W_in(s) as one state-space plant."""
    win_ss = realize_bank(w_in)
    wout_ss = realize_bank(w_out)
    if win_ss.r != plant.m:
        raise DimensionMismatch(
            f"w_in has {win_ss.r} channels, plant expects {plant.m} inputs"
        )
    if wout_ss.m != plant.r:
        raise DimensionMismatch(
            f"w_out has {wout_ss.m} channels, plant has {plant.r} outputs"
        )
    return cascade(cascade(win_ss, plant), wout_ss, label=plant.label)


@dataclass(frozen=True)
class FirstOrderSection:
    """Proper first-order rational section (a s + b) / (c s + d)."""

    a: float
    b: float
    c: float
    d: float

    def __post_init__(self):
        for coef in (self.a, self.b, self.c, self.d):
            if not np.isfinite(coef):
                raise ImproperSection("section coefficients must be finite")
        if self.c == 0.0 and self.a != 0.0:
            raise ImproperSection(
                f"section ({self.a}s+{self.b})/({self.c}s+{self.d}) is improper"
            )
        if self.d == 0.0 and self.c == 0.0:
            raise ImproperSection("degenerate denominator (c=d=0)")

    @property
    def is_static(self) -> bool:
        return self.c == 0.0

    @property
    def pole(self) -> float:
        if self.is_static:
            raise ImproperSection("static section has no pole")
        return -self.d / self.c

    @property
    def zero(self):
        """Finite zero -b/a, or None for a constant numerator."""
        return None if self.a == 0.0 else -self.b / self.a

    @property
    def dc_gain(self) -> float:
        if self.d == 0.0:
            raise ImproperSection("section has a pole at the origin")
        return self.b / self.d

    @property
    def hf_gain(self) -> float:
        return self.b / self.d if self.is_static else self.a / self.c

    def require_stable(self):
        if not self.is_static and self.pole >= 0.0:
            raise UnstableSection(f"section pole {self.pole:.6g} not in C-")


@dataclass(frozen=True)
class CompensatorBank:
    """Diagonal bank of first-order sections, one per channel."""

    sections: tuple
    side: str = "in"  # "in" (pre) or "out" (post)

    def __post_init__(self):
        secs = tuple(
            s if isinstance(s, FirstOrderSection) else FirstOrderSection(*s)
            for s in self.sections
        )
        if not secs:
            raise DimensionMismatch("compensator bank must be nonempty")
        object.__setattr__(self, "sections", secs)

    def __len__(self):
        return len(self.sections)

    @staticmethod
    def identity(channels: int, side: str = "in") -> "CompensatorBank":
        return CompensatorBank(
            tuple(FirstOrderSection(0.0, 1.0, 0.0, 1.0) for _ in range(channels)),
            side,
        )


def realize_bank(bank: CompensatorBank) -> StateSpacePlant:
    """Diagonal state-space realization of a compensator bank.

    One state per dynamic section; static sections (c=0) contribute only a
    feedthrough entry. D entries are the high-frequency gains a/c.
    """
    k = len(bank)
    n = sum(0 if s.is_static else 1 for s in bank.sections)
    A = np.zeros((n, n))
    B = np.zeros((n, k))
    C = np.zeros((k, n))
    D = np.zeros((k, k))
    i = 0
    for ch, s in enumerate(bank.sections):
        if s.is_static:
            D[ch, ch] = s.b / s.d
            continue
        # (a s + b)/(c s + d) = a/c + (b/c - a d/c^2) / (s + d/c)
        A[i, i] = -s.d / s.c
        B[i, ch] = 1.0
        C[ch, i] = s.b / s.c - s.a * s.d / s.c**2
        D[ch, ch] = s.a / s.c
        i += 1
    return StateSpacePlant(A, B, C, D, f"bank_{bank.side}")


def block_diag_plants(*plants: StateSpacePlant) -> StateSpacePlant:
    """Block-diagonal (decoupled parallel) concatenation of plants."""
    from scipy.linalg import block_diag

    A = block_diag(*[p.A for p in plants])
    B = block_diag(*[p.B for p in plants])
    C = block_diag(*[p.C for p in plants])
    D = block_diag(*[p.D for p in plants])
    return StateSpacePlant(A, B, C, D)
