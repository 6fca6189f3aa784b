"""Degree-based mean-field dynamics of two competing SIS strains.

For every degree class ``k``::

    dI1_k/dt = -(gamma1 + u1) I1_k + zeta1 k (1 - I1_k - I2_k) Theta1
    dI2_k/dt = -(gamma2 + u2) I2_k + zeta2 k (1 - I1_k - I2_k) Theta2

with ``Theta_i = sum_k k P(k) I_i,k / <k>``.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, NonFinite, StepTooLarge, ValidationError, ZeroDenominator
from .network import DegreeDistribution

__all__ = [
    "EpidemicParams",
    "ControlEffort",
    "MeanFieldState",
    "Observables",
    "IntegrationResult",
    "effective_spreading_rate",
    "observables",
    "derivative",
    "normalized_derivative",
    "integrate",
    "default_initial_state",
    "trajectory_csv",
]

CLAMP_TOL = 1e-12
VIOLATION_TOL = 1e-6


@dataclass(frozen=True)
class EpidemicParams:
    """Spreading rates ``zeta`` and recovery rates ``gamma`` of both strains."""

    zeta1: float
    zeta2: float
    gamma1: float
    gamma2: float

    def __post_init__(self):
        for name in ("zeta1", "zeta2", "gamma1", "gamma2"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValidationError(f"{name} must be finite")
        if self.zeta1 <= 0:
            raise ValidationError("zeta1 > 0")
        if self.zeta2 <= 0:
            raise ValidationError("zeta2 > 0")
        if self.gamma1 < 0:
            raise ValidationError("gamma1 >= 0")
        if self.gamma2 < 0:
            raise ValidationError("gamma2 >= 0")

    @property
    def zeta(self) -> np.ndarray:
        return np.array([self.zeta1, self.zeta2])

    @property
    def gamma(self) -> np.ndarray:
        return np.array([self.gamma1, self.gamma2])

    def to_dict(self) -> dict:
        return {"zeta1": self.zeta1, "zeta2": self.zeta2, "gamma1": self.gamma1, "gamma2": self.gamma2}


@dataclass(frozen=True)
class ControlEffort:
    """Curing rates ``(u1, u2)``."""

    u1: float = 0.0
    u2: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "u1", float(self.u1))
        object.__setattr__(self, "u2", float(self.u2))
        if not (math.isfinite(self.u1) and math.isfinite(self.u2)):
            raise ValidationError("control must be finite")
        if self.u1 < 0:
            raise ValidationError("u1 >= 0")
        if self.u2 < 0:
            raise ValidationError("u2 >= 0")

    @classmethod
    def symmetric(cls, u: float) -> "ControlEffort":
        return cls(u, u)

    def as_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2])

    def to_dict(self) -> dict:
        return {"u1": self.u1, "u2": self.u2}


@dataclass(frozen=True)
class MeanFieldState:
    """Per-degree infected densities ``i1[k]``, ``i2[k]``."""

    i1: np.ndarray
    i2: np.ndarray

    def __post_init__(self):
        i1 = np.asarray(self.i1, dtype=float)
        i2 = np.asarray(self.i2, dtype=float)
        if i1.shape != i2.shape or i1.ndim != 1:
            raise DimensionMismatch("i1 and i2 must be 1-d arrays of equal length")
        object.__setattr__(self, "i1", i1)
        object.__setattr__(self, "i2", i2)

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "MeanFieldState":
        return cls(arr[0].copy(), arr[1].copy())

    def as_array(self) -> np.ndarray:
        return np.vstack([self.i1, self.i2])

    def is_valid(self, tol: float = 0.0) -> bool:
        arr = self.as_array()
        return bool(
            np.all(arr >= -tol) and np.all(arr <= 1 + tol) and np.all(arr.sum(axis=0) <= 1 + tol)
        )

    @classmethod
    def zeros(cls, dist: DegreeDistribution) -> "MeanFieldState":
        return cls(np.zeros(dist.k_max + 1), np.zeros(dist.k_max + 1))


@dataclass(frozen=True)
class Observables:
    theta1: float
    theta2: float
    ibar1: float
    ibar2: float


@dataclass
class IntegrationResult:
    final: MeanFieldState
    observables: Observables
    settled: bool
    t: float
    steps: int
    max_clamp: float
    trajectory: list[tuple[float, Observables]] | None = None


def effective_spreading_rate(params: EpidemicParams, control: ControlEffort) -> tuple[float, float]:
    """ESR ``psi_i = zeta_i / (gamma_i + u_i)`` for both strains."""
    d1 = params.gamma1 + control.u1
    d2 = params.gamma2 + control.u2
    if d1 == 0:
        raise ZeroDenominator("gamma1 + u1 = 0: ESR of strain 1 is unbounded")
    if d2 == 0:
        raise ZeroDenominator("gamma2 + u2 = 0: ESR of strain 2 is unbounded")
    return params.zeta1 / d1, params.zeta2 / d2


def _check_shape(dist: DegreeDistribution, arr: np.ndarray) -> None:
    if arr.shape[-1] != dist.k_max + 1:
        raise DimensionMismatch(
            f"state has {arr.shape[-1]} degree classes, distribution has {dist.k_max + 1}"
        )


def observables(dist: DegreeDistribution, state: MeanFieldState) -> Observables:
    """Link infection probabilities ``Theta_i`` and severities ``Ibar_i``."""
    arr = state.as_array()
    _check_shape(dist, arr)
    theta = arr @ (dist.degrees * dist.pmf) / dist.mean_degree
    ibar = arr @ dist.pmf
    return Observables(float(theta[0]), float(theta[1]), float(ibar[0]), float(ibar[1]))


def _rates(dist: DegreeDistribution, params: EpidemicParams, control: ControlEffort):
    loss = (params.gamma + control.as_array())[:, None]
    gain = params.zeta[:, None] * dist.degrees[None, :]
    link = dist.degrees * dist.pmf / dist.mean_degree
    return loss, gain, link


def _rhs(arr, loss, gain, link):
    theta = arr @ link
    susceptible = 1.0 - arr[0] - arr[1]
    return gain * (susceptible * theta[:, None]) - loss * arr


def derivative(
    dist: DegreeDistribution,
    params: EpidemicParams,
    control: ControlEffort,
    state: MeanFieldState,
) -> np.ndarray:
    """Right-hand side of the mean-field ODE, shape ``(2, K + 1)``."""
    arr = state.as_array()
    _check_shape(dist, arr)
    return _rhs(arr, *_rates(dist, params, control))


def normalized_derivative(
    dist: DegreeDistribution, psi1: float, psi2: float, state: MeanFieldState
) -> np.ndarray:
    """Time-rescaled system with unit recovery and spreading rates ``psi_i``.

    Only meaningful when both strains share the same ``gamma_i + u_i``;
    otherwise it has the same fixed points but different transients.
    """
    arr = state.as_array()
    _check_shape(dist, arr)
    loss = np.ones((2, 1))
    gain = np.array([psi1, psi2])[:, None] * dist.degrees[None, :]
    link = dist.degrees * dist.pmf / dist.mean_degree
    return _rhs(arr, loss, gain, link)


def default_initial_state(dist: DegreeDistribution, level: float = 0.01) -> MeanFieldState:
    """Both strains at ``level`` in every class with ``k >= 1``; degree 0 is healthy."""
    i = np.full(dist.k_max + 1, level)
    i[0] = 0.0
    return MeanFieldState(i, i.copy())


def _clamp(arr: np.ndarray) -> float:
    """Project ``arr`` back into the simplex in place and return the largest correction."""
    worst = 0.0
    low = arr.min()
    if low < 0:
        worst = -low
        if low < -VIOLATION_TOL:
            raise StepTooLarge(f"density fell to {low:.3e}; reduce dt")
        np.maximum(arr, 0.0, out=arr)
    total = arr[0] + arr[1]
    over = total.max() - 1.0
    if over > 0:
        worst = max(worst, over)
        if over > VIOLATION_TOL:
            raise StepTooLarge(f"I1 + I2 exceeded 1 by {over:.3e}; reduce dt")
        mask = total > 1.0
        arr[:, mask] /= total[mask]
    return float(worst)


def integrate(
    dist: DegreeDistribution,
    params: EpidemicParams,
    control: ControlEffort,
    state0: MeanFieldState | None = None,
    dt: float = 0.01,
    t_end: float = 5000.0,
    settle_tol: float = 1e-9,
    sample_every: float | None = None,
    rhs=None,
) -> IntegrationResult:
    """Fixed-step RK4 integration until ``t_end`` or until the state settles.

    Parameters
    ----------
    state0 : MeanFieldState, optional
        Defaults to :func:`default_initial_state`.
    settle_tol : float
        Stop early once ``max |dI/dt|`` drops below this.
    sample_every : float, optional
        When given, record observables every ``sample_every`` time units.
    rhs : callable, optional
        ``rhs(arr) -> rate`` replacing the mean-field vector field; used to
        integrate the rescaled system.

    Raises
    ------
    NonFinite
        A state entry overflowed or became NaN.
    StepTooLarge
        A step left the simplex by more than ``1e-6`` before clamping.
    """
    if dt <= 0:
        raise ValidationError("dt > 0")
    if state0 is None:
        state0 = default_initial_state(dist)
    arr = state0.as_array().copy()
    _check_shape(dist, arr)
    if not state0.is_valid(CLAMP_TOL):
        raise ValidationError("initial state must lie in the simplex")
    if rhs is None:
        loss, gain, link = _rates(dist, params, control)

        def rhs(a):
            return _rhs(a, loss, gain, link)

    trajectory = [] if sample_every else None
    next_sample = 0.0
    t = 0.0
    steps = 0
    max_clamp = 0.0
    n_steps = int(math.ceil(t_end / dt - 1e-9))
    half = 0.5 * dt
    settled = False
    k1 = rhs(arr)
    while True:
        if trajectory is not None and t >= next_sample - 1e-9:
            trajectory.append((t, observables(dist, MeanFieldState.from_array(arr))))
            next_sample += sample_every
        if np.abs(k1).max() < settle_tol:
            settled = True
            break
        if steps >= n_steps:
            break
        k2 = rhs(arr + half * k1)
        k3 = rhs(arr + half * k2)
        k4 = rhs(arr + dt * k3)
        arr += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(arr)):
            raise NonFinite(f"state became non-finite at t={t + dt:g}")
        max_clamp = max(max_clamp, _clamp(arr))
        steps += 1
        t = steps * dt
        k1 = rhs(arr)
    final = MeanFieldState.from_array(arr)
    return IntegrationResult(
        final, observables(dist, final), settled, t, steps, max_clamp, trajectory
    )


def trajectory_csv(trajectory: list[tuple[float, Observables]]) -> str:
    """Render sampled observables as ``t,theta1,theta2,ibar1,ibar2`` CSV."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "theta1", "theta2", "ibar1", "ibar2"])
    for t, obs in trajectory:
        writer.writerow([_fmt(v) for v in (t, obs.theta1, obs.theta2, obs.ibar1, obs.ibar2)])
    return buf.getvalue()


def _fmt(value: float) -> str:
    return format(value, ".12g")
