"""Steady states of the competing-strain model and their classification.

Substituting the steady-state densities back into ``Theta_i`` gives a scalar
self-consistency equation per strain,

    Theta = Q(Theta) = (psi / <k>) * sum_k k^2 P(k) Theta / (1 + psi k Theta),

whose nontrivial root exists iff ``T = psi <k^2>/<k> > 1``. At most one strain
survives when the ESRs differ, so a steady state is fully described by which
strain (if any) wins and the root of that strain's equation.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import ControlEffort, EpidemicParams, MeanFieldState, effective_spreading_rate
from .errors import BelowThreshold, ConditioningWarning, DegenerateCase, NoProgress, ValidationError
from .network import DegreeDistribution

__all__ = [
    "Regime",
    "EquilibriumClass",
    "EquilibriumState",
    "reproduction_numbers",
    "classify",
    "q_map",
    "g_ratio",
    "fixed_point_iterates",
    "solve_theta_star",
    "exclusive_densities",
    "exclusive_severity",
    "steady_state",
    "TOL_MARGINAL",
    "TOL_DEGENERATE",
]

TOL_MARGINAL = 1e-9
TOL_DEGENERATE = 1e-12
EPS1 = 1e-12
MAX_ITER = 10**6
CONDITIONING_BAND = 1e-6
# auto mode hands over to Newton when the map predicts more steps than this
AUTO_HANDOVER = 256


class Regime(str, enum.Enum):
    DISEASE_FREE = "DiseaseFree"
    EXCLUSIVE_1 = "ExclusiveStrain1"
    EXCLUSIVE_2 = "ExclusiveStrain2"
    DEGENERATE = "Degenerate"
    MARGINAL = "Marginal"

    def __str__(self):
        return self.value

    @property
    def label(self) -> str:
        """Equilibrium name used in the literature: E1 disease-free, E2/E3 exclusive."""
        return {
            Regime.DISEASE_FREE: "E1",
            Regime.EXCLUSIVE_1: "E2",
            Regime.EXCLUSIVE_2: "E3",
        }.get(self, self.value)


@dataclass(frozen=True)
class EquilibriumClass:
    tag: Regime
    t1: float
    t2: float
    margin_flag: bool = False


@dataclass(frozen=True)
class EquilibriumState:
    """Steady state reached from any interior initial condition."""

    cls: EquilibriumClass
    theta_star: float
    densities: MeanFieldState
    sbar: float
    ibar1: float
    ibar2: float
    theta1: float = 0.0
    theta2: float = 0.0

    @property
    def tag(self) -> Regime:
        return self.cls.tag

    @property
    def regime(self) -> Regime:
        """Which strain survives, read off the severities rather than the class tag."""
        if self.ibar1 > 0:
            return Regime.EXCLUSIVE_1
        if self.ibar2 > 0:
            return Regime.EXCLUSIVE_2
        return Regime.DISEASE_FREE

    def to_dict(self, densities: bool = False) -> dict:
        out = {
            "class": str(self.cls.tag),
            "theta_star": self.theta_star,
            "ibar1": self.ibar1,
            "ibar2": self.ibar2,
            "sbar": self.sbar,
            "t1": self.cls.t1,
            "t2": self.cls.t2,
            "margin_flag": self.cls.margin_flag,
        }
        if densities:
            out["densities"] = {"i1": self.densities.i1.tolist(), "i2": self.densities.i2.tolist()}
        return out

    def to_json(self, densities: bool = False) -> str:
        return json.dumps(self.to_dict(densities))


def reproduction_numbers(
    dist: DegreeDistribution, params: EpidemicParams, control: ControlEffort
) -> tuple[float, float]:
    """Threshold quantities ``T_i = psi_i <k^2>/<k>``."""
    psi1, psi2 = effective_spreading_rate(params, control)
    r = dist.branching_ratio
    return psi1 * r, psi2 * r


def classify(
    dist: DegreeDistribution,
    params: EpidemicParams,
    control: ControlEffort,
    tol_marginal: float = TOL_MARGINAL,
    tol_degenerate: float = TOL_DEGENERATE,
) -> EquilibriumClass:
    """Decide which equilibrium is globally stable under ``control``.

    Comparisons that land within ``tol_marginal`` of equality yield
    ``Marginal``: the stability results only cover strict inequalities.
    ``margin_flag`` is also raised on a ``Degenerate`` result whose common
    threshold quantity sits at 1.
    """
    psi1, psi2 = effective_spreading_rate(params, control)
    t1, t2 = reproduction_numbers(dist, params, control)
    top = max(t1, t2)
    near_one = abs(top - 1.0) <= tol_marginal
    if abs(psi1 - psi2) < tol_degenerate:
        return EquilibriumClass(Regime.DEGENERATE, t1, t2, near_one)
    if near_one:
        return EquilibriumClass(Regime.MARGINAL, t1, t2, True)
    if top < 1.0:
        return EquilibriumClass(Regime.DISEASE_FREE, t1, t2, False)
    if abs(t1 - t2) <= tol_marginal:
        return EquilibriumClass(Regime.MARGINAL, t1, t2, True)
    tag = Regime.EXCLUSIVE_1 if t1 > t2 else Regime.EXCLUSIVE_2
    return EquilibriumClass(tag, t1, t2, False)


def q_map(dist: DegreeDistribution, psi: float, theta: float) -> float:
    """Right-hand side ``Q(Theta)`` of the single-strain self-consistency equation."""
    k = dist.degrees
    return float(np.sum(k * k * dist.pmf * psi * theta / (1.0 + psi * k * theta)) / dist.mean_degree)


def g_ratio(dist: DegreeDistribution, psi: float, theta: float) -> float:
    """``Q(Theta)/Theta``, continuous at 0 where it equals ``T``. Strictly decreasing."""
    k = dist.degrees
    return float(psi * np.sum(k * k * dist.pmf / (1.0 + psi * k * theta)) / dist.mean_degree)


def fixed_point_iterates(dist: DegreeDistribution, psi: float, theta0: float, n: int) -> np.ndarray:
    """First ``n + 1`` terms of ``Theta <- Q(Theta)`` starting at ``theta0``."""
    out = np.empty(n + 1)
    out[0] = theta = theta0
    for i in range(1, n + 1):
        theta = q_map(dist, psi, theta)
        out[i] = theta
    return out


def _newton_from_below(dist: DegreeDistribution, psi: float, tol: float) -> tuple[float, int]:
    # g is convex and decreasing, so Newton on g - 1 started at 0 climbs monotonically to the root
    k = dist.degrees
    w = k * k * dist.pmf / dist.mean_degree
    theta = 0.0
    for it in range(1, 200):
        denom = 1.0 + psi * k * theta
        h = psi * np.sum(w / denom) - 1.0
        dh = -psi * psi * np.sum(w * k / (denom * denom))
        step = -h / dh
        if step <= 0.0:
            return float(theta), it
        theta += step
        if step <= tol * max(theta, 1e-300) or step <= 1e-300:
            return float(theta), it
    raise NoProgress("Newton iteration on the self-consistency equation did not settle")


def _polish(dist: DegreeDistribution, psi: float, theta: float) -> float:
    # a few Newton steps on g - 1 = 0 take the fixed-point answer to machine precision
    k = dist.degrees
    w = k * k * dist.pmf / dist.mean_degree
    for _ in range(50):
        denom = 1.0 + psi * k * theta
        h = psi * np.sum(w / denom) - 1.0
        dh = -psi * psi * np.sum(w * k / (denom * denom))
        step = -h / dh
        if theta + step <= 0.0:
            return _newton_from_below(dist, psi, 1e-15)[0]
        theta += step
        if abs(step) <= 1e-15 * theta:
            break
    return float(theta)


def solve_theta_star(
    dist: DegreeDistribution,
    psi: float,
    eps1: float = EPS1,
    theta0: float = 0.5,
    *,
    tol_marginal: float = TOL_MARGINAL,
    max_iter: int = MAX_ITER,
    method: str = "fixed_point",
) -> tuple[float, int]:
    """Nontrivial root of ``Theta = Q(Theta)``.

    Parameters
    ----------
    eps1 : float
        Stop once ``|Q(Theta) - Theta| <= eps1``.
    theta0 : float
        Starting point in ``(0, 1]``; 0 is the trivial fixed point.
    method : {"fixed_point", "newton", "auto"}
        ``fixed_point`` runs ``Theta <- Q(Theta)``; the iterates are monotone
        and converge for any interior start. ``newton`` solves ``Q(Theta)/Theta = 1``
        by Newton's method from 0 (monotone, quadratically convergent).
        ``auto`` iterates the map but hands over to Newton as soon as the local
        contraction factor predicts more than ``AUTO_HANDOVER`` further steps,
        which happens when ``T`` approaches 1, and finishes with Newton
        polishing so the root is accurate to rounding rather than to
        ``eps1 / (1 - Q'(Theta*))``.

    Returns
    -------
    theta_star : float
    iterations : int

    Raises
    ------
    BelowThreshold
        ``T <= 1 + tol_marginal``: only the trivial solution exists.
    NoProgress
        The iteration cap was reached.
    """
    if not 0.0 < theta0 <= 1.0:
        raise ValidationError("theta0 in (0, 1]")
    t = psi * dist.branching_ratio
    if t <= 1.0 + tol_marginal:
        raise BelowThreshold(f"T = {t:.12g} <= 1: strain cannot persist")
    if t < 1.0 + CONDITIONING_BAND:
        warnings.warn(
            f"T = {t:.12g} is within {CONDITIONING_BAND:g} of 1; Theta* is poorly conditioned",
            ConditioningWarning,
            stacklevel=2,
        )
    if method == "newton":
        return _newton_from_below(dist, psi, 1e-15)
    if method not in ("fixed_point", "auto"):
        raise ValueError(f"unknown method {method!r}")

    k = dist.degrees
    w = k * k * dist.pmf / dist.mean_degree
    theta = float(theta0)
    q = float(psi * theta * np.sum(w / (1.0 + psi * k * theta)))
    n = 0
    while abs(q - theta) > eps1:
        if n >= max_iter:
            raise NoProgress(f"fixed-point iteration hit the cap of {max_iter} steps")
        prev_gap = abs(q - theta)
        theta = q
        q = float(psi * theta * np.sum(w / (1.0 + psi * k * theta)))
        n += 1
        if method == "auto" and n % 64 == 0:
            # Q'(theta) = psi * sum(w / (1 + psi k theta)^2) is the local contraction factor
            rate = float(psi * np.sum(w / (1.0 + psi * k * theta) ** 2))
            if rate >= 1.0 or math.log(eps1 / prev_gap) / math.log(rate) > AUTO_HANDOVER:
                root, extra = _newton_from_below(dist, psi, 1e-15)
                return root, n + extra
    if method == "auto":
        theta = _polish(dist, psi, theta)
    return theta, n


def exclusive_densities(dist: DegreeDistribution, psi: float, theta: float) -> np.ndarray:
    """``I_k = psi k Theta / (1 + psi k Theta)`` for the surviving strain."""
    x = psi * dist.degrees * theta
    return x / (1.0 + x)


def exclusive_severity(
    dist: DegreeDistribution, psi: float, *, tol_marginal: float = TOL_MARGINAL, method: str = "auto"
) -> float:
    """Steady-state ``Ibar`` of a strain spreading alone with ESR ``psi``; 0 below threshold."""
    if psi * dist.branching_ratio <= 1.0 + tol_marginal:
        return 0.0
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", ConditioningWarning)
        theta, _ = solve_theta_star(dist, psi, tol_marginal=tol_marginal, method=method)
    return float(exclusive_densities(dist, psi, theta) @ dist.pmf)


def steady_state(
    dist: DegreeDistribution,
    params: EpidemicParams,
    control: ControlEffort,
    *,
    tol_marginal: float = TOL_MARGINAL,
    tol_degenerate: float = TOL_DEGENERATE,
    eps1: float = EPS1,
    method: str = "auto",
) -> EquilibriumState:
    """Globally stable steady state under ``control``.

    When no strain can persist (largest ``T`` at most ``1 + tol_marginal``)
    the disease-free state is returned whatever the class tag; equal ESRs
    above threshold have no unique equilibrium and raise ``DegenerateCase``.
    """
    cls = classify(dist, params, control, tol_marginal, tol_degenerate)
    zeros = MeanFieldState.zeros(dist)
    top = max(cls.t1, cls.t2)
    if top <= 1.0 + tol_marginal:
        return EquilibriumState(cls, 0.0, zeros, 1.0, 0.0, 0.0)
    if cls.tag is Regime.DEGENERATE:
        raise DegenerateCase(
            f"psi1 == psi2 with T = {top:.6g} > 1: equilibrium is not unique"
        )
    psi = effective_spreading_rate(params, control)
    strain = 0 if cls.t1 > cls.t2 else 1
    theta, _ = solve_theta_star(
        dist, psi[strain], eps1, tol_marginal=tol_marginal, method=method
    )
    dens = np.zeros((2, dist.k_max + 1))
    dens[strain] = exclusive_densities(dist, psi[strain], theta)
    ibar = dens @ dist.pmf
    thetas = [0.0, 0.0]
    thetas[strain] = theta
    return EquilibriumState(
        cls,
        theta,
        MeanFieldState.from_array(dens),
        float(1.0 - ibar.sum()),
        float(ibar[0]),
        float(ibar[1]),
        thetas[0],
        thetas[1],
    )
