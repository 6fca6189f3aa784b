"""Optimal curing rates for the competing-strain network.

The long-run cost of a constant control ``u`` is ``c1(u) + c2(w1 Ibar1* + w2 Ibar2*)``
with the severities taken at the steady state reached under ``u``. The problem
splits by which equilibrium ``u`` leads to:

* disease-free: the severity term vanishes, so the cheapest admissible
  control sits at the corner ``u_i = max(0, zeta_i <k^2>/<k> - gamma_i)``;
* strain ``s`` exclusive: only ``Ibar_s*`` is nonzero and depends on ``u_s``
  through the fixed point of the self-consistency map; minimised by projected
  gradient descent with backtracking over the (closed, shrunk) control region.

The global optimum is the cheapest of the three regime optima.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable

import numpy as np

from .dynamics import ControlEffort, EpidemicParams, _fmt
from .equilibrium import EquilibriumState, Regime, exclusive_severity, steady_state
from .errors import InfeasibleRegime, LineSearchFailure, MaxIterations, ValidationError
from .network import DegreeDistribution

__all__ = [
    "CostModel",
    "FeasibleRegion",
    "DescentOptions",
    "ExclusiveResult",
    "OptimalSolution",
    "control_cost",
    "epidemic_cost",
    "disease_free_bounds",
    "feasible_region",
    "solve_disease_free",
    "objective",
    "regime_objective",
    "severity_gradient",
    "solve_exclusive",
    "solve_global",
]

DELTA = 1e-6


@dataclass(frozen=True)
class CostModel:
    """Linear control cost ``K1 u1 + K2 u2`` and severity cost ``K3 (w1 I1 + w2 I2)``."""

    K1: float
    K2: float
    K3: float
    w1: float = 1.0
    w2: float = 1.0
    kind: str = "Linear"

    def __post_init__(self):
        if self.kind != "Linear":
            raise ValidationError(f"unsupported cost kind {self.kind!r}")
        for name in ("K1", "K2", "K3"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise ValidationError(f"{name} >= 0")
        for name in ("w1", "w2"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise ValidationError(f"{name} > 0")

    def scaled(self, scale: float) -> "CostModel":
        """Same model with both unit control costs multiplied by ``scale``."""
        return CostModel(self.K1 * scale, self.K2 * scale, self.K3, self.w1, self.w2, self.kind)

    def to_dict(self) -> dict:
        return {"K1": self.K1, "K2": self.K2, "K3": self.K3, "w1": self.w1, "w2": self.w2}


def control_cost(cm: CostModel, u: ControlEffort) -> float:
    return cm.K1 * u.u1 + cm.K2 * u.u2


def epidemic_cost(cm: CostModel, ibar1: float, ibar2: float) -> float:
    return cm.K3 * (cm.w1 * ibar1 + cm.w2 * ibar2)


def disease_free_bounds(dist: DegreeDistribution, params: EpidemicParams) -> tuple[float, float]:
    """``zeta_i <k^2>/<k> - gamma_i``: the curing rate at which strain ``i`` hits ``T_i = 1``."""
    r = dist.branching_ratio
    return params.zeta1 * r - params.gamma1, params.zeta2 * r - params.gamma2


@dataclass(frozen=True)
class FeasibleRegion:
    """Closed control set leading to ``regime``.

    One coordinate (``primary``) is confined to ``[lo, hi]``; the other must
    satisfy ``u_other >= max(floor, slope * u_primary + intercept)``.
    Strict inequalities are tightened by ``delta``.
    """

    regime: Regime
    primary: int
    lo: float
    hi: float
    floor: float
    slope: float
    intercept: float
    delta: float

    @property
    def other(self) -> int:
        return 1 - self.primary

    def other_lower(self, up: float) -> float:
        return max(self.floor, self.slope * up + self.intercept)

    def contains(self, u, tol: float = 0.0) -> bool:
        u = _arr(u)
        up, uo = u[self.primary], u[self.other]
        return bool(
            self.lo - tol <= up <= self.hi + tol and uo >= self.other_lower(up) - tol
        )

    def _halfplanes(self) -> list[tuple[np.ndarray, float]]:
        """Constraints as ``a @ u >= b``."""
        e_p = np.zeros(2)
        e_p[self.primary] = 1.0
        e_o = np.zeros(2)
        e_o[self.other] = 1.0
        planes = [(e_p, self.lo), (e_o, self.floor)]
        if math.isfinite(self.hi):
            planes.append((-e_p, -self.hi))
        if math.isfinite(self.intercept):
            planes.append((e_o - self.slope * e_p, self.intercept))
        return planes

    def project(self, u) -> np.ndarray:
        """Euclidean projection onto the region (exact: candidates on edges and vertices)."""
        u = _arr(u).astype(float)
        if self.contains(u):
            return u
        planes = self._halfplanes()
        candidates = []
        for a, b in planes:
            candidates.append(u + (b - a @ u) / (a @ a) * a)
        for (a1, b1), (a2, b2) in combinations(planes, 2):
            mat = np.vstack([a1, a2])
            if abs(np.linalg.det(mat)) > 1e-14:
                candidates.append(np.linalg.solve(mat, [b1, b2]))
        best, best_d = None, math.inf
        for c in candidates:
            if self.contains(c, tol=1e-10):
                d = float(np.sum((c - u) ** 2))
                if d < best_d:
                    best, best_d = c, d
        if best is None:
            raise InfeasibleRegime(f"{self.regime} region is empty")
        return self._repair(best)

    def _repair(self, u: np.ndarray) -> np.ndarray:
        # remove rounding so that contains() holds with zero tolerance
        out = u.copy()
        out[self.primary] = min(max(out[self.primary], self.lo), self.hi)
        out[self.other] = max(out[self.other], self.other_lower(out[self.primary]))
        return out

    def sample(self, rng: np.random.Generator, n: int, span: float = 1.0) -> np.ndarray:
        """``n`` random feasible points, the free coordinate within ``span`` of its lower bound."""
        hi = self.hi if math.isfinite(self.hi) else self.lo + span
        up = rng.uniform(self.lo, hi, n)
        lower = np.maximum(self.floor, self.slope * up + self.intercept)
        uo = lower + rng.uniform(0.0, span, n)
        out = np.empty((n, 2))
        out[:, self.primary] = up
        out[:, self.other] = uo
        return out

    def to_dict(self) -> dict:
        return {
            "regime": str(self.regime),
            "primary": self.primary + 1,
            "lo": self.lo,
            "hi": self.hi if math.isfinite(self.hi) else None,
            "floor": self.floor,
            "slope": self.slope,
            "intercept": self.intercept if math.isfinite(self.intercept) else None,
            "delta": self.delta,
        }


def _arr(u) -> np.ndarray:
    if isinstance(u, ControlEffort):
        return u.as_array()
    return np.asarray(u, dtype=float)


def feasible_region(
    dist: DegreeDistribution,
    params: EpidemicParams,
    target: Regime | str,
    delta: float = DELTA,
) -> FeasibleRegion:
    """Controls that make ``target`` the globally stable equilibrium.

    Raises
    ------
    InfeasibleRegime
        An exclusive regime was requested for a strain that cannot persist
        even without control.
    """
    target = Regime(target)
    b1, b2 = disease_free_bounds(dist, params)
    if target is Regime.DISEASE_FREE:
        lo1 = max(0.0, b1) + (delta if b1 > 0 else 0.0)
        lo2 = max(0.0, b2) + (delta if b2 > 0 else 0.0)
        return FeasibleRegion(target, 0, lo1, math.inf, lo2, 0.0, -math.inf, delta)
    if target is Regime.EXCLUSIVE_1:
        s, b = 0, b1
        # u2 > zeta2 (gamma1 + u1) / zeta1 - gamma2
        slope = params.zeta2 / params.zeta1
        intercept = slope * params.gamma1 - params.gamma2 + delta
    elif target is Regime.EXCLUSIVE_2:
        s, b = 1, b2
        slope = params.zeta1 / params.zeta2
        intercept = slope * params.gamma2 - params.gamma1 + delta
    else:
        raise ValidationError(f"no feasible region for regime {target}")
    if b - delta < 0:
        raise InfeasibleRegime(
            f"{target} needs zeta{s + 1} <k^2>/<k> > gamma{s + 1} (bound {b:.6g})"
        )
    return FeasibleRegion(target, s, 0.0, b - delta, 0.0, slope, intercept, delta)


def solve_disease_free(dist: DegreeDistribution, params: EpidemicParams) -> ControlEffort:
    """Cheapest control that drives both strains to extinction.

    The returned point is the infimum of the open disease-free region: every
    strain that needs curing sits exactly at ``T_i = 1``. It depends on the
    network only through ``<k>`` and ``<k^2>``.
    """
    b1, b2 = disease_free_bounds(dist, params)
    return ControlEffort(max(0.0, b1), max(0.0, b2))


def objective(
    dist: DegreeDistribution,
    params: EpidemicParams,
    cm: CostModel,
    u: ControlEffort,
) -> tuple[float, EquilibriumState]:
    """Long-run cost of ``u`` and the equilibrium it leads to."""
    eq = steady_state(dist, params, u)
    return control_cost(cm, u) + epidemic_cost(cm, eq.ibar1, eq.ibar2), eq


def _severity_fn(dist, params, strain) -> Callable[[float], float]:
    zeta = (params.zeta1, params.zeta2)[strain]
    gamma = (params.gamma1, params.gamma2)[strain]

    def severity(us: float) -> float:
        return exclusive_severity(dist, zeta / (gamma + us))

    return severity


def regime_objective(
    dist: DegreeDistribution, params: EpidemicParams, cm: CostModel, strain: int
) -> Callable[[np.ndarray], float]:
    """Objective restricted to the exclusive regime of ``strain`` (0 or 1)."""
    severity = _severity_fn(dist, params, strain)
    weight = cm.K3 * (cm.w1, cm.w2)[strain]

    def f(u: np.ndarray) -> float:
        return cm.K1 * u[0] + cm.K2 * u[1] + weight * severity(u[strain])

    return f


def severity_gradient(
    dist: DegreeDistribution,
    params: EpidemicParams,
    strain: int,
    us: float,
    upper: float = math.inf,
) -> float:
    """``d Ibar_s* / d u_s`` by central differences re-solving the fixed point.

    Falls back to a second-order one-sided stencil when the central stencil
    would step past ``upper`` (the threshold kink) or make ``gamma + u``
    nonpositive.
    """
    severity = _severity_fn(dist, params, strain)
    gamma = (params.gamma1, params.gamma2)[strain]
    h = max(1e-6, 1e-6 * abs(us))
    if us + h > upper:
        return (3 * severity(us) - 4 * severity(us - h) + severity(us - 2 * h)) / (2 * h)
    if gamma + us - h <= 0:
        return (-3 * severity(us) + 4 * severity(us + h) - severity(us + 2 * h)) / (2 * h)
    return (severity(us + h) - severity(us - h)) / (2 * h)


@dataclass(frozen=True)
class DescentOptions:
    eps2: float = 1e-8
    step0: float = 1.0
    shrink: float = 0.5
    armijo: float = 1e-4
    min_step: float = 1e-12
    max_iter: int = 10_000
    delta: float = DELTA


@dataclass
class ExclusiveResult:
    control: ControlEffort
    objective: float
    region: FeasibleRegion
    trace: list[tuple[int, float, float, float, float]] = field(default_factory=list)
    iterations: int = 0

    def trace_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iter", "u1", "u2", "objective", "step"])
        for it, u1, u2, obj, step in self.trace:
            writer.writerow([it] + [_fmt(v) for v in (u1, u2, obj, step)])
        return buf.getvalue()


def _gradient(dist, params, cm, strain, u, region) -> np.ndarray:
    weight = cm.K3 * (cm.w1, cm.w2)[strain]
    g = np.array([cm.K1, cm.K2], dtype=float)
    if weight:
        # the kink where the surviving strain dies sits delta above the region's cap
        g[strain] += weight * severity_gradient(
            dist, params, strain, u[strain], upper=region.hi + region.delta
        )
    return g


def solve_exclusive(
    dist: DegreeDistribution,
    params: EpidemicParams,
    cm: CostModel,
    strain: int,
    opts: DescentOptions | None = None,
) -> ExclusiveResult:
    """Cheapest control keeping ``strain`` (1 or 2) as the sole survivor.

    Projected gradient descent from the projection of ``u = 0``. Each step
    backtracks from ``opts.step0`` until the Armijo condition holds along the
    projection arc; the loop stops once successive iterates are within
    ``opts.eps2``.
    """
    opts = opts or DescentOptions()
    if strain not in (1, 2):
        raise ValidationError("strain must be 1 or 2")
    s = strain - 1
    target = Regime.EXCLUSIVE_1 if s == 0 else Regime.EXCLUSIVE_2
    region = feasible_region(dist, params, target, opts.delta)
    f = regime_objective(dist, params, cm, s)

    u = region.project(np.zeros(2))
    fu = f(u)
    trace = [(0, float(u[0]), float(u[1]), fu, 0.0)]
    for it in range(1, opts.max_iter + 1):
        g = _gradient(dist, params, cm, s, u, region)
        t = opts.step0
        while True:
            cand = region.project(u - t * g)
            step = cand - u
            if np.linalg.norm(step) <= opts.eps2:
                return ExclusiveResult(ControlEffort(*u), fu, region, trace, it - 1)
            fc = f(cand)
            if fc <= fu + opts.armijo * float(g @ step):
                break
            t *= opts.shrink
            if t < opts.min_step:
                raise LineSearchFailure(
                    f"backtracking fell below {opts.min_step:g} at u=({u[0]:.6g}, {u[1]:.6g})"
                )
        u, fu = cand, fc
        trace.append((it, float(u[0]), float(u[1]), fu, t))
        if np.linalg.norm(step) <= opts.eps2:
            return ExclusiveResult(ControlEffort(*u), fu, region, trace, it)
    raise MaxIterations(f"no convergence within {opts.max_iter} descent steps")


@dataclass
class OptimalSolution:
    control: ControlEffort
    objective: float
    regime: Regime
    equilibrium: EquilibriumState
    per_regime: dict[Regime, tuple[ControlEffort, float]] = field(default_factory=dict)
    skipped: dict[Regime, str] = field(default_factory=dict)
    marginal: bool = False

    def to_dict(self) -> dict:
        return {
            "regime": str(self.regime),
            "control": self.control.to_dict(),
            "objective": self.objective,
            "marginal": self.marginal,
            "equilibrium": self.equilibrium.to_dict(),
            "candidates": {
                str(reg): {"control": c.to_dict(), "objective": v}
                for reg, (c, v) in self.per_regime.items()
            },
            "skipped": {str(reg): why for reg, why in self.skipped.items()},
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def solve_global(
    dist: DegreeDistribution,
    params: EpidemicParams,
    cm: CostModel,
    opts: DescentOptions | None = None,
) -> OptimalSolution:
    """Compare the disease-free and both exclusive optima and keep the cheapest.

    Ties go to the disease-free regime, then to strain 1.
    """
    per_regime: dict[Regime, tuple[ControlEffort, float]] = {}
    states: dict[Regime, EquilibriumState] = {}
    skipped: dict[Regime, str] = {}

    u_free = solve_disease_free(dist, params)
    value, eq = objective(dist, params, cm, u_free)
    per_regime[Regime.DISEASE_FREE] = (u_free, value)
    states[Regime.DISEASE_FREE] = eq

    for strain, regime in ((1, Regime.EXCLUSIVE_1), (2, Regime.EXCLUSIVE_2)):
        try:
            res = solve_exclusive(dist, params, cm, strain, opts)
        except InfeasibleRegime as exc:
            skipped[regime] = str(exc)
            continue
        value, eq = objective(dist, params, cm, res.control)
        per_regime[regime] = (res.control, value)
        states[regime] = eq

    best = Regime.DISEASE_FREE
    for regime in (Regime.EXCLUSIVE_1, Regime.EXCLUSIVE_2):
        if regime in per_regime and per_regime[regime][1] < per_regime[best][1]:
            best = regime
    control, value = per_regime[best]
    eq = states[best]
    return OptimalSolution(
        control,
        value,
        best,
        eq,
        per_regime,
        skipped,
        marginal=best is Regime.DISEASE_FREE and eq.cls.margin_flag,
    )
