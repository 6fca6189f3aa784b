"""Equilibrium switching under a symmetric curing rate ``u1 = u2 = u``.

Along the symmetric path the stable equilibrium only changes at three kinds
of points: where the two ESRs cross and where either strain's threshold
quantity reaches 1. Lowering the unit control cost pushes the optimal ``u``
up through these regimes; once the network is disease-free the optimal ``u``
stays at the fulfilling threshold.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from .dynamics import ControlEffort, EpidemicParams, _fmt
from .equilibrium import Regime, classify, exclusive_severity
from .errors import TrivialRatioCase, ValidationError
from .network import DegreeDistribution
from .optimizer import CostModel, disease_free_bounds

__all__ = [
    "SwitchingPattern",
    "SwitchingProfile",
    "Sample",
    "Transition",
    "fulfilling_threshold",
    "regime_path",
    "predict_switching_pattern",
    "symmetric_objective",
    "optimal_symmetric_control",
    "symmetric_sweep",
]

GOLDEN_TOL = 1e-8
BISECTION_STEPS = 10


def fulfilling_threshold(dist: DegreeDistribution, params: EpidemicParams) -> float:
    """Smallest symmetric curing rate that makes the network disease-free."""
    b1, b2 = disease_free_bounds(dist, params)
    return max(0.0, b1, b2)


def _ratios_equal(params: EpidemicParams) -> bool:
    lhs = params.zeta1 * params.gamma2
    rhs = params.zeta2 * params.gamma1
    return abs(lhs - rhs) <= 1e-12 * max(abs(lhs), abs(rhs), 1e-300)


def _crossing(params: EpidemicParams) -> float | None:
    """Symmetric ``u > 0`` at which the two ESRs coincide, if any."""
    if params.zeta1 == params.zeta2:
        return None
    uc = (params.zeta1 * params.gamma2 - params.zeta2 * params.gamma1) / (params.zeta2 - params.zeta1)
    return uc if uc > 0 else None


def _dominant(dist, params, u: float) -> Regime:
    cls = classify(dist, params, ControlEffort(u, u), tol_marginal=0.0, tol_degenerate=0.0)
    return cls.tag


def regime_path(
    dist: DegreeDistribution, params: EpidemicParams
) -> list[tuple[float, float, Regime]]:
    """Piecewise-constant regime along ``u1 = u2 = u`` for ``u >= 0``.

    Returns ``(start, end, regime)`` intervals covering ``[0, inf)``; breakpoints
    belong to the interval on their right.
    """
    if _ratios_equal(params):
        raise TrivialRatioCase("zeta1/gamma1 == zeta2/gamma2: ESRs never separate")
    points = {0.0}
    b1, b2 = disease_free_bounds(dist, params)
    for p in (b1, b2, _crossing(params)):
        if p is not None and p > 0:
            points.add(p)
    points = sorted(points)
    ends = points[1:] + [math.inf]
    path: list[tuple[float, float, Regime]] = []
    for start, end in zip(points, ends):
        mid = start + 1.0 if math.isinf(end) else 0.5 * (start + end)
        regime = _dominant(dist, params, mid)
        if path and path[-1][2] is regime:
            path[-1] = (path[-1][0], end, regime)
        else:
            path.append((start, end, regime))
    return path


@dataclass(frozen=True)
class SwitchingPattern:
    """``kind`` is ``NoSwitch``, ``Single`` or ``Double``; ``regimes`` lists the visited equilibria."""

    kind: str
    regimes: tuple[Regime, ...]
    conditions_report: str
    literal_clause: str = ""

    def to_dict(self) -> dict:
        return {
            "pattern": self.kind,
            "regimes": [str(r) for r in self.regimes],
            "conditions": self.conditions_report,
            "literal_clause": self.literal_clause,
        }


def _literal_clause(dist, params) -> str:
    # the published single/double conditions, evaluated verbatim
    r = dist.branching_ratio
    z = (params.zeta1, params.zeta2)
    g = (params.gamma1, params.gamma2)
    ratio = [zi / gi if gi > 0 else math.inf for zi, gi in zip(z, g)]
    i = 0 if ratio[0] > ratio[1] else 1
    j = 1 - i
    if g[i] > 0 and z[i] * r / g[i] <= 1:
        return "none: no strain persists without control"
    if z[i] >= z[j]:
        return f"single: zeta{i + 1} >= zeta{j + 1}"
    if z[i] - g[i] > z[j] - g[j]:
        return f"single: zeta{i + 1} < zeta{j + 1} and zeta{i + 1}-gamma{i + 1} > zeta{j + 1}-gamma{j + 1}"
    both = all(g[n] == 0 or z[n] * r / g[n] > 1 for n in (0, 1))
    denom = z[j] - g[j]
    if both and denom != 0 and (z[i] - g[i]) / denom < 1:
        return (
            f"double: zeta{i + 1} < zeta{j + 1} and "
            f"(zeta{i + 1}-gamma{i + 1})/(zeta{j + 1}-gamma{j + 1}) < 1"
        )
    return "none of the published clauses applies"


def predict_switching_pattern(dist: DegreeDistribution, params: EpidemicParams) -> SwitchingPattern:
    """Regime sequence an increasing symmetric control walks through.

    The sequence is read off :func:`regime_path`, so it always agrees with the
    classifier. ``literal_clause`` records which published single/double
    condition holds for the same parameters; those conditions locate the
    thresholds with ``zeta - gamma`` instead of ``zeta <k^2>/<k> - gamma`` and
    can disagree with the path on strongly heterogeneous networks.

    Raises
    ------
    TrivialRatioCase
        ``zeta1/gamma1 == zeta2/gamma2``.
    """
    path = regime_path(dist, params)
    regimes = tuple(reg for _, _, reg in path)
    literal = _literal_clause(dist, params)
    b1, b2 = disease_free_bounds(dist, params)
    if len(regimes) == 1:
        report = "both threshold quantities below 1 without control"
        return SwitchingPattern("NoSwitch", regimes, report, literal)
    kind = {2: "Single", 3: "Double"}[len(regimes)]
    uc = _crossing(params)
    if kind == "Single":
        report = f"{regimes[0].label} dominant until u = {max(b1, b2):.6g}"
    else:
        report = (
            f"ESRs cross at u = {uc:.6g} before {regimes[0].label} dies at "
            f"u = {min(b1, b2):.6g}; {regimes[1].label} survives until u = {max(b1, b2):.6g}"
        )
    return SwitchingPattern(kind, regimes, report, literal)


def _regime_at(path, u: float) -> Regime:
    for start, end, reg in path:
        if start <= u < end:
            return reg
    return path[-1][2]


def symmetric_objective(
    dist: DegreeDistribution,
    params: EpidemicParams,
    cm: CostModel,
    u: float,
    path=None,
) -> tuple[float, Regime, float, float]:
    """``(objective, regime, ibar1, ibar2)`` for the symmetric control ``(u, u)``.

    At an ESR crossing both strains share the same severity; it is attributed
    to the regime entered as ``u`` increases.
    """
    path = path if path is not None else regime_path(dist, params)
    regime = _regime_at(path, u)
    ibar = [0.0, 0.0]
    if regime in (Regime.EXCLUSIVE_1, Regime.EXCLUSIVE_2):
        s = 0 if regime is Regime.EXCLUSIVE_1 else 1
        zeta = (params.zeta1, params.zeta2)[s]
        gamma = (params.gamma1, params.gamma2)[s]
        ibar[s] = exclusive_severity(dist, zeta / (gamma + u))
    value = (cm.K1 + cm.K2) * u + cm.K3 * (cm.w1 * ibar[0] + cm.w2 * ibar[1])
    return value, regime, ibar[0], ibar[1]


def optimal_symmetric_control(
    dist: DegreeDistribution,
    params: EpidemicParams,
    cm: CostModel,
    path=None,
    tol: float = GOLDEN_TOL,
) -> tuple[float, float, Regime, float, float]:
    """Minimise the symmetric objective over ``u in [0, ubar + 1]``.

    Each regime interval is searched separately (bounded golden-section/Brent),
    and every interval endpoint is a candidate too, so kinks where the
    severity curve changes branch are found exactly. Within ``1e-10`` relative,
    endpoint candidates win ties.

    Returns ``(u, objective, regime, ibar1, ibar2)``.
    """
    path = path if path is not None else regime_path(dist, params)
    ubar = fulfilling_threshold(dist, params)
    top = ubar + 1.0

    def f(u):
        return symmetric_objective(dist, params, cm, u, path)[0]

    knots = sorted({0.0, top} | {s for s, _, _ in path if s < top})
    best_u, best_f = None, math.inf
    for u in knots:
        fu = f(u)
        if fu < best_f:
            best_u, best_f = u, fu
    slack = 1e-10 * (1.0 + abs(best_f))
    interior = None
    for a, b in zip(knots[:-1], knots[1:]):
        res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": tol})
        if res.fun < best_f - slack and (interior is None or res.fun < interior[1]):
            interior = (float(res.x), float(res.fun))
    if interior is not None and interior[1] < best_f - slack:
        best_u = interior[0]
    value, regime, i1, i2 = symmetric_objective(dist, params, cm, best_u, path)
    return best_u, value, regime, i1, i2


@dataclass(frozen=True)
class Sample:
    scale: float
    u: float
    regime: Regime
    ibar1: float
    ibar2: float
    objective: float


@dataclass(frozen=True)
class Transition:
    u: float
    from_regime: Regime
    to_regime: Regime
    scale: float

    def to_dict(self) -> dict:
        return {"u": self.u, "from": str(self.from_regime), "to": str(self.to_regime), "scale": self.scale}


@dataclass
class SwitchingProfile:
    samples: list[Sample]
    transitions: list[Transition]
    fulfilling_threshold: float
    pattern: SwitchingPattern | None = None

    @property
    def regimes(self) -> list[Regime]:
        """Distinct regimes in the order they were visited."""
        out: list[Regime] = []
        for s in self.samples:
            if not out or out[-1] is not s.regime:
                out.append(s.regime)
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["scale", "u", "regime", "ibar1", "ibar2", "objective"])
        for s in self.samples:
            writer.writerow(
                [_fmt(s.scale), _fmt(s.u), str(s.regime), _fmt(s.ibar1), _fmt(s.ibar2), _fmt(s.objective)]
            )
        writer.writerow(["# fulfilling_threshold", _fmt(self.fulfilling_threshold)])
        return buf.getvalue()

    def transitions_dict(self) -> dict:
        return {
            "fulfilling_threshold": self.fulfilling_threshold,
            "transitions": [t.to_dict() for t in self.transitions],
        }

    def transitions_json(self) -> str:
        return json.dumps(self.transitions_dict(), indent=2)


def _localize(dist, params, u_lo: float, u_hi: float, from_regime: Regime, steps: int) -> float:
    # bisection on u, asking the classifier which side of the boundary each midpoint is on
    lo, hi = u_lo, u_hi
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        tag = classify(dist, params, ControlEffort(mid, mid)).tag
        if tag is from_regime:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def symmetric_sweep(
    dist: DegreeDistribution,
    params: EpidemicParams,
    cm_base: CostModel,
    scale_grid: Sequence[float],
    bisection_steps: int = BISECTION_STEPS,
) -> SwitchingProfile:
    """Optimal symmetric control for each unit-cost scale in ``scale_grid``.

    ``scale_grid`` must be positive and strictly decreasing: the control cost
    is ``scale * (K1 + K2) * u``. Consecutive samples in different regimes
    mark a transition, localised by bisection on ``u``.
    """
    grid = np.asarray(scale_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValidationError("scale_grid must be a non-empty 1-d sequence")
    if np.any(grid <= 0):
        raise ValidationError("scale_grid entries > 0")
    if np.any(np.diff(grid) >= 0):
        raise ValidationError("scale_grid must be strictly decreasing")
    pattern = predict_switching_pattern(dist, params)
    path = regime_path(dist, params)
    samples = []
    for scale in grid:
        u, value, regime, i1, i2 = optimal_symmetric_control(dist, params, cm_base.scaled(scale), path)
        samples.append(Sample(float(scale), u, regime, i1, i2, value))
    transitions = []
    for prev, cur in zip(samples[:-1], samples[1:]):
        if cur.regime is not prev.regime:
            u_switch = _localize(dist, params, prev.u, cur.u, prev.regime, bisection_steps)
            transitions.append(Transition(u_switch, prev.regime, cur.regime, cur.scale))
    return SwitchingProfile(samples, transitions, fulfilling_threshold(dist, params), pattern)
