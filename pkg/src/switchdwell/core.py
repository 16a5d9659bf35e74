"""Domain types for switched systems: subsystems, certificates, switching signals.

Conventions
-----------
A switching signal is a literal piecewise-constant mode: ``initial_mode`` on
``[t0, t_1)`` and the mode attached to switch time ``t_i`` on ``[t_i, t_{i+1})``
(right-continuous).  All types are immutable after construction.
"""

from __future__ import annotations

import math
from bisect import bisect_right
from dataclasses import dataclass, field as dc_field
from typing import Callable, Hashable, Optional, Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyTransitions,
    NonpositiveDwell,
    NotContracting,
    SingularMatrix,
    UnknownLabel,
)

Label = Hashable
VectorField = Callable[[np.ndarray], np.ndarray]

_EQUILIBRIUM_TOL = 1e-9


@dataclass(frozen=True)
class ClassKFn:
    """Power-law class-K function ``s -> c * s**p`` on s >= 0, with closed-form inverse."""

    c: float
    p: float

    def __post_init__(self):
        if not (self.c > 0 and self.p > 0):
            raise ValueError(f"ClassKFn needs c > 0 and p > 0, got c={self.c}, p={self.p}")

    def eval(self, s: float) -> float:
        if s < 0:
            raise ValueError("class-K functions are defined on s >= 0")
        return self.c * s ** self.p

    def inverse(self, y: float) -> float:
        if y < 0:
            raise ValueError("class-K inverse is defined on y >= 0")
        return (y / self.c) ** (1.0 / self.p)


def _frozen_vector(x, name: str) -> np.ndarray:
    v = np.array(x, dtype=float)
    if v.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector")
    v.setflags(write=False)
    return v


@dataclass(frozen=True, eq=False)
class Subsystem:
    """One mode of the switched system with its Lyapunov certificate.

    ``lyapunov`` is V_u, sandwiched between ``alpha(||x - x_u||)`` and
    ``beta(||x - x_u||)`` and decaying at rate ``decay_rate`` along ``field``.
    ``affine`` carries (A, b) when the mode is x' = Ax + b (enables the fast
    RK4 kernels); ``quadratic`` marks V_u(x) = ||x - x_u||^2.
    """

    label: Label
    field: VectorField
    equilibrium: np.ndarray
    decay_rate: float
    alpha: ClassKFn
    beta: ClassKFn
    lyapunov: Callable[[np.ndarray], float]
    affine: Optional[tuple[np.ndarray, np.ndarray]] = None
    quadratic: bool = False

    def __post_init__(self):
        object.__setattr__(self, "equilibrium", _frozen_vector(self.equilibrium, "equilibrium"))
        if self.decay_rate <= 0:
            raise ValueError("decay_rate must be positive")
        residual = np.linalg.norm(np.asarray(self.field(self.equilibrium), dtype=float))
        if residual > _EQUILIBRIUM_TOL:
            raise ValueError(
                f"equilibrium of mode {self.label!r} is not a zero of the field "
                f"(|f(x_u)| = {residual:.3e})"
            )
        v0 = float(self.lyapunov(self.equilibrium))
        if abs(v0) > 1e-12:
            raise ValueError(f"V({self.label!r}) must vanish at the equilibrium, got {v0!r}")
        for s in np.logspace(-6, 3, 19):
            if self.alpha.eval(s) > self.beta.eval(s) * (1 + 1e-12):
                raise ValueError(f"alpha > beta at s={s} for mode {self.label!r}")

    @property
    def dimension(self) -> int:
        return self.equilibrium.shape[0]

    def check_dimension(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != self.equilibrium.shape:
            raise DimensionMismatch(
                f"state of shape {x.shape} for mode {self.label!r} of dimension {self.dimension}"
            )
        return x


@dataclass(frozen=True, eq=False)
class SwitchedSystem:
    """Collection of subsystems sharing the state dimension, keyed by label."""

    subsystems: tuple[Subsystem, ...]
    _by_label: dict = dc_field(init=False, repr=False)

    def __post_init__(self):
        subs = tuple(self.subsystems)
        object.__setattr__(self, "subsystems", subs)
        if not subs:
            raise ValueError("a switched system needs at least one subsystem")
        by_label = {}
        for sub in subs:
            if sub.label in by_label:
                raise ValueError(f"duplicate mode label {sub.label!r}")
            if sub.dimension != subs[0].dimension:
                raise DimensionMismatch("all subsystems must share the state dimension")
            by_label[sub.label] = sub
        object.__setattr__(self, "_by_label", by_label)

    @property
    def dimension(self) -> int:
        return self.subsystems[0].dimension

    @property
    def labels(self) -> tuple[Label, ...]:
        return tuple(s.label for s in self.subsystems)

    def __getitem__(self, label: Label) -> Subsystem:
        try:
            return self._by_label[label]
        except KeyError:
            raise UnknownLabel(f"unknown mode label {label!r}") from None

    def __contains__(self, label: Label) -> bool:
        return label in self._by_label


@dataclass(frozen=True, eq=False)
class SwitchingSignal:
    """Piecewise-constant mode signal with optional periodic extension.

    ``segments`` are (switch_time, mode) pairs with strictly increasing times
    > t0; ``mode_at`` is right-continuous (``mode_at(t_i)`` is the mode entered
    at t_i).  With ``period`` set, the pattern on [t0, t0 + period) repeats.
    """

    t0: float
    initial_mode: Label
    segments: tuple[tuple[float, Label], ...] = ()
    period: Optional[float] = None

    def __post_init__(self):
        segs = tuple((float(t), m) for t, m in self.segments)
        object.__setattr__(self, "segments", segs)
        prev = self.t0
        for t, _ in segs:
            if not t > prev:
                raise ValueError("switch times must be strictly increasing and > t0")
            prev = t
        if self.period is not None:
            if self.period <= 0:
                raise ValueError("period must be positive")
            if segs and segs[-1][0] >= self.t0 + self.period:
                raise ValueError("switch times must lie inside one period")

    @property
    def switch_times(self) -> tuple[float, ...]:
        return tuple(t for t, _ in self.segments)

    def _pattern_mode(self, tau: float) -> Label:
        # tau in [t0, t0 + period) for periodic signals
        times = [t for t, _ in self.segments]
        idx = bisect_right(times, tau) - 1
        if idx < 0:
            return self.initial_mode
        return self.segments[idx][1]

    def mode_at(self, t: float) -> Label:
        if t < self.t0:
            raise ValueError(f"t={t} is before the signal start t0={self.t0}")
        if self.period is not None:
            t = self.t0 + math.fmod(t - self.t0, self.period)
        return self._pattern_mode(t)

    def switches_until(self, t_end: float) -> list[tuple[float, Label, Label]]:
        """All (t_i, mode_before, mode_after) with t0 < t_i <= t_end.

        Periodic signals are unrolled; the wrap back to ``initial_mode`` at
        multiples of the period counts as a switch when the mode changes.
        """
        out = []
        if self.period is None:
            prev = self.initial_mode
            for t, mode in self.segments:
                if t > t_end:
                    break
                out.append((t, prev, mode))
                prev = mode
            return out
        last_mode = self.segments[-1][1] if self.segments else self.initial_mode
        k = 0
        while True:
            base = self.t0 + k * self.period
            if k > 0 and last_mode != self.initial_mode:
                if base > t_end:
                    break
                out.append((base, last_mode, self.initial_mode))
            elif base > t_end:
                break
            prev = self.initial_mode
            for t, mode in self.segments:
                ti = base + (t - self.t0)
                if ti > t_end:
                    return out
                out.append((ti, prev, mode))
                prev = mode
            k += 1
        return out


@dataclass(frozen=True)
class DwellViolation:
    """One consecutive switch pair whose gap is below the required dwell."""

    index: int
    from_mode: Label
    to_mode: Label
    gap: float
    required: float


def make_affine_subsystem(A, b, label: Label) -> Subsystem:
    """Subsystem for x' = Ax + b with the identity-weighted quadratic certificate.

    The equilibrium is -A^{-1} b, V(x) = ||x - x_u||^2 with alpha = beta = s^2,
    and the decay rate is -lambda_max(A + A^T), the tightest constant for this V.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    if b.shape != (A.shape[0],):
        raise DimensionMismatch(f"b of shape {b.shape} for A of shape {A.shape}")
    sym_eigs = np.linalg.eigvalsh(0.5 * (A + A.T))
    if sym_eigs[-1] >= 0:
        raise NotContracting(
            f"symmetric part of A has a nonnegative eigenvalue ({sym_eigs[-1]:.6g})"
        )
    try:
        equilibrium = np.linalg.solve(A, -b)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrix("A is not invertible") from exc
    A.setflags(write=False)
    b.setflags(write=False)
    x_u = equilibrium.copy()

    def field(x: np.ndarray) -> np.ndarray:
        return A @ x + b

    def lyapunov(x: np.ndarray) -> float:
        d = np.asarray(x, dtype=float) - x_u
        return float(d @ d)

    return Subsystem(
        label=label,
        field=field,
        equilibrium=equilibrium,
        decay_rate=float(-2.0 * sym_eigs[-1]),
        alpha=ClassKFn(1.0, 2.0),
        beta=ClassKFn(1.0, 2.0),
        lyapunov=lyapunov,
        affine=(A, b),
        quadratic=True,
    )


def signal_from_dwell(
    initial_mode: Label,
    transitions: Sequence[Label],
    dwell: float | Sequence[float] | None = None,
    t0: float = 0.0,
    periodic: bool = False,
) -> SwitchingSignal:
    """Signal holding each mode for a dwell time: switch i lands at t0 + sum(dwell[:i+1]).

    A scalar dwell repeats; a list must have one entry per transition, plus a
    trailing hold time for the final mode when ``periodic`` (the period is the
    total duration of the pattern).
    """
    transitions = list(transitions)
    if not transitions:
        if periodic:
            raise EmptyTransitions("a periodic signal needs at least one transition")
        return SwitchingSignal(t0=t0, initial_mode=initial_mode)
    n = len(transitions)
    if dwell is None:
        raise NonpositiveDwell("dwell is required when there are transitions")
    if np.isscalar(dwell):
        dwells = [float(dwell)] * (n + 1 if periodic else n)
    else:
        dwells = [float(d) for d in dwell]
        expected = n + 1 if periodic else n
        if len(dwells) != expected:
            raise ValueError(
                f"need {expected} dwell values for {n} transitions"
                f"{' (periodic)' if periodic else ''}, got {len(dwells)}"
            )
    if any(d <= 0 for d in dwells):
        raise NonpositiveDwell(f"dwell values must be positive, got {dwells}")
    times = t0 + np.cumsum(dwells[:n])
    segments = tuple((float(t), m) for t, m in zip(times, transitions))
    period = float(sum(dwells)) if periodic else None
    return SwitchingSignal(t0=t0, initial_mode=initial_mode, segments=segments, period=period)


def validate_dwell(
    signal: SwitchingSignal,
    required: Callable[[Label, Label], float],
) -> list[DwellViolation]:
    """Consecutive switch pairs violating ``gap >= required(from_mode, to_mode)``.

    The gap from t0 to the first switch counts, with the initial mode as
    ``from_mode``.  Periodic signals are checked over one period plus the wrap
    pair; an empty list means the signal is dwell-compliant.
    """
    violations = []
    prev_t, prev_mode = signal.t0, signal.initial_mode
    for i, (t, mode) in enumerate(signal.segments):
        gap = t - prev_t
        req = float(required(prev_mode, mode))
        if gap < req:
            violations.append(DwellViolation(i, prev_mode, mode, gap, req))
        prev_t, prev_mode = t, mode
    if signal.period is not None and signal.segments:
        gap = signal.t0 + signal.period - prev_t
        req = float(required(prev_mode, signal.initial_mode))
        if gap < req:
            violations.append(
                DwellViolation(len(signal.segments), prev_mode, signal.initial_mode, gap, req)
            )
    return violations
