"""Scenario files and the model-mismatch experiment.

A scenario is a small JSON document::

    {
      "schema": 1,
      "name": "scenario I",
      "network": {"type": "moments", "mean_degree": 1.996, "second_moment": 13.75},
      "params": {"zeta1": 0.3, "zeta2": 0.3, "gamma1": 0.5, "gamma2": 0.3},
      "cost": {"K1": 15, "K2": 10, "K3": 50, "w1": 1, "w2": 1},
      "options": {"grid": {"start": 0.1, "stop": 1.0, "num": 19}}
    }

``network.type`` is one of ``pmf`` (``pmf`` or ``counts`` list), ``power_law``
(``k_min``, ``k_max``, ``exponent``), ``ba`` (``n``, ``m``, ``seed``) or
``moments`` (``mean_degree``, ``second_moment``). A moments network is
synthesised on a tiny support: it reproduces every quantity that depends on
the two moments alone, and commands that need the full pmf refuse it.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from .dynamics import ControlEffort, EpidemicParams, integrate
from .equilibrium import EquilibriumClass, EquilibriumState, Regime, classify, steady_state
from .errors import DegenerateCase, ParseError, ValidationError
from .network import (
    DegreeDistribution,
    ba_degree_sequence,
    from_histogram,
    from_moments,
    power_law,
)
from .optimizer import CostModel, solve_disease_free

__all__ = [
    "SCHEMA_VERSION",
    "Scenario",
    "MismatchReport",
    "load_scenario",
    "scenario_from_dict",
    "build_network",
    "bundled_scenario",
    "bundled_names",
    "cross_apply",
    "applied_state",
    "grid_values",
    "geometric_values",
]

SCHEMA_VERSION = 1

_TOP_KEYS = {"schema", "name", "network", "params", "cost", "options"}
_NETWORK_KEYS = {
    "pmf": ({"type"}, {"pmf", "counts", "k_max", "mean_degree", "second_moment", "source"}),
    "power_law": ({"type", "k_min", "k_max", "exponent"}, set()),
    "ba": ({"type", "n", "m", "seed"}, set()),
    "moments": ({"type", "mean_degree", "second_moment"}, set()),
}
_PARAM_KEYS = {"zeta1", "zeta2", "gamma1", "gamma2"}
_COST_KEYS = {"K1", "K2", "K3", "w1", "w2"}
_OPTION_KEYS = {
    "grid",
    "scale_grid",
    "control",
    "strain",
    "dt",
    "t_end",
    "sample_every",
    "tol",
    "compare_network",
}


@dataclass(frozen=True)
class Scenario:
    """Network, epidemic parameters, cost model and command options."""

    network: DegreeDistribution
    params: EpidemicParams
    cost: CostModel
    network_spec: dict
    name: str = ""
    options: dict = field(default_factory=dict)

    @property
    def moments_only(self) -> bool:
        """True when the pmf was synthesised from ``(<k>, <k^2>)`` alone."""
        return self.network_spec.get("type") == "moments"

    def with_seed(self, seed: int) -> "Scenario":
        """Regenerate a ``ba`` network with another seed; other networks are unchanged."""
        if self.network_spec.get("type") != "ba":
            return self
        spec = dict(self.network_spec, seed=int(seed))
        return replace(self, network=build_network(spec), network_spec=spec)

    def with_params(self, **changes: float) -> "Scenario":
        return replace(self, params=replace(self.params, **changes))

    def to_dict(self) -> dict:
        out = {
            "schema": SCHEMA_VERSION,
            "name": self.name,
            "network": copy.deepcopy(self.network_spec),
            "params": self.params.to_dict(),
            "cost": self.cost.to_dict(),
        }
        if self.options:
            out["options"] = copy.deepcopy(self.options)
        return out


def _reject_unknown(data: dict, allowed: set, where: str) -> None:
    extra = sorted(set(data) - allowed)
    if extra:
        raise ParseError(f"{where}: unknown field(s) {', '.join(extra)}")


def _number(data: dict, key: str, where: str) -> float:
    if key not in data:
        raise ParseError(f"{where}.{key}: missing")
    value = data[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ParseError(f"{where}.{key}: expected a number, got {type(value).__name__}")
    return float(value)


def _integer(data: dict, key: str, where: str) -> int:
    value = _number(data, key, where)
    if not value.is_integer():
        raise ParseError(f"{where}.{key}: expected an integer, got {value}")
    return int(value)


def _section(data: dict, key: str) -> dict:
    if key not in data:
        raise ParseError(f"{key}: missing")
    value = data[key]
    if not isinstance(value, dict):
        raise ParseError(f"{key}: expected an object")
    return value


def build_network(spec: dict, where: str = "network") -> DegreeDistribution:
    """Construct the degree distribution described by a ``network`` object."""
    if not isinstance(spec, dict):
        raise ParseError(f"{where}: expected an object")
    kind = spec.get("type")
    if kind not in _NETWORK_KEYS:
        raise ParseError(f"{where}.type: expected one of {sorted(_NETWORK_KEYS)}, got {kind!r}")
    required, optional = _NETWORK_KEYS[kind]
    _reject_unknown(spec, required | optional, where)
    missing = sorted(required - set(spec))
    if missing:
        raise ParseError(f"{where}.{missing[0]}: missing")
    if kind == "pmf":
        if ("pmf" in spec) == ("counts" in spec):
            raise ParseError(f"{where}: give exactly one of 'pmf' or 'counts'")
        key = "pmf" if "pmf" in spec else "counts"
        values = spec[key]
        if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values
        ):
            raise ParseError(f"{where}.{key}: expected a list of numbers")
        if key == "counts":
            return from_histogram(values)
        keep = ("pmf", "k_max", "mean_degree", "second_moment")
        return DegreeDistribution.from_dict({k: spec[k] for k in keep if k in spec})
    if kind == "power_law":
        return power_law(
            _integer(spec, "k_min", where), _integer(spec, "k_max", where), _number(spec, "exponent", where)
        )
    if kind == "ba":
        return ba_degree_sequence(
            _integer(spec, "n", where), _integer(spec, "m", where), _integer(spec, "seed", where)
        )
    mu1 = _number(spec, "mean_degree", where)
    mu2 = _number(spec, "second_moment", where)
    dist = from_moments(mu1, mu2)
    if abs(dist.mean_degree - mu1) > 1e-9 or abs(dist.second_moment - mu2) > 1e-9:
        raise ValidationError(f"synthesised pmf misses moments ({mu1}, {mu2})")
    return dist


def scenario_from_dict(data: Any) -> Scenario:
    """Validate a parsed scenario document.

    Raises
    ------
    ParseError
        Structural problems; the message names the offending field.
    ValidationError
        A value breaks a model invariant (for example ``zeta1 > 0``).
    """
    if not isinstance(data, dict):
        raise ParseError("scenario: expected a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scenario")
    if "schema" not in data:
        raise ParseError("schema: missing")
    if data["schema"] != SCHEMA_VERSION:
        raise ParseError(f"schema: unsupported version {data['schema']!r} (expected {SCHEMA_VERSION})")
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ParseError("name: expected a string")

    net_spec = _section(data, "network")
    network = build_network(net_spec)

    p = _section(data, "params")
    _reject_unknown(p, _PARAM_KEYS, "params")
    params = EpidemicParams(*(_number(p, k, "params") for k in ("zeta1", "zeta2", "gamma1", "gamma2")))

    c = _section(data, "cost")
    _reject_unknown(c, _COST_KEYS, "cost")
    cost = CostModel(
        _number(c, "K1", "cost"),
        _number(c, "K2", "cost"),
        _number(c, "K3", "cost"),
        _number(c, "w1", "cost") if "w1" in c else 1.0,
        _number(c, "w2", "cost") if "w2" in c else 1.0,
    )

    options = data.get("options", {})
    if not isinstance(options, dict):
        raise ParseError("options: expected an object")
    _reject_unknown(options, _OPTION_KEYS, "options")
    if "compare_network" in options:
        build_network(options["compare_network"], "options.compare_network")
    for key in ("grid", "scale_grid"):
        if key in options:
            g = options[key]
            if not isinstance(g, dict):
                raise ParseError(f"options.{key}: expected an object")
            _reject_unknown(g, {"start", "stop", "num"}, f"options.{key}")
            _number(g, "start", f"options.{key}")
            _number(g, "stop", f"options.{key}")
            if _integer(g, "num", f"options.{key}") < 1:
                raise ValidationError(f"options.{key}.num >= 1")
    if "control" in options:
        ctl = options["control"]
        if not isinstance(ctl, dict):
            raise ParseError("options.control: expected an object")
        _reject_unknown(ctl, {"u1", "u2"}, "options.control")
        ControlEffort(*(_number(ctl, k, "options.control") for k in ("u1", "u2")))
    if "strain" in options and options["strain"] not in (1, 2):
        raise ValidationError("options.strain must be 1 or 2")
    for key in ("dt", "t_end", "sample_every", "tol"):
        if key in options and _number(options, key, "options") <= 0:
            raise ValidationError(f"options.{key} > 0")

    return Scenario(network, params, cost, copy.deepcopy(net_spec), name, copy.deepcopy(options))


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario file."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"{path}: cannot read ({exc.strerror})") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)


def bundled_names() -> list[str]:
    """Names of the scenario files shipped with the package."""
    root = resources.files("epicure") / "data"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def bundled_scenario(name: str) -> Scenario:
    """Load a shipped scenario such as ``"scenario1"`` or ``"fig4"``."""
    res = resources.files("epicure") / "data" / f"{name}.json"
    if not res.is_file():
        raise ValidationError(f"no bundled scenario {name!r}; available: {', '.join(bundled_names())}")
    return scenario_from_dict(json.loads(res.read_text(encoding="utf-8")))


@dataclass(frozen=True)
class MismatchReport:
    """Designed controls and the equilibria they produce on the other network.

    ``a_under_b`` is network A driven by the control designed for B.
    """

    control_a: ControlEffort
    control_b: ControlEffort
    a_under_a: EquilibriumState
    b_under_b: EquilibriumState
    a_under_b: EquilibriumState
    b_under_a: EquilibriumState

    @staticmethod
    def _entry(control: ControlEffort, eq: EquilibriumState) -> dict:
        survivor = eq.ibar1 + eq.ibar2 > 0
        # equal ESRs: both strains carry infection, neither is exclusive
        mixed = survivor and eq.tag is Regime.DEGENERATE
        return {
            "control": control.to_dict(),
            "regime": str(Regime.DEGENERATE if mixed else eq.regime),
            "survivor": survivor,
            **eq.to_dict(),
        }

    def to_dict(self) -> dict:
        return {
            "design_a": self.control_a.to_dict(),
            "design_b": self.control_b.to_dict(),
            "a_under_a": self._entry(self.control_a, self.a_under_a),
            "b_under_b": self._entry(self.control_b, self.b_under_b),
            "a_under_b": self._entry(self.control_b, self.a_under_b),
            "b_under_a": self._entry(self.control_a, self.b_under_a),
        }


def cross_apply(
    a: Scenario | DegreeDistribution,
    b: Scenario | DegreeDistribution,
    params: EpidemicParams | None = None,
) -> MismatchReport:
    """Design the disease-free control on one network and run it on the other.

    Accepts two scenarios sharing parameters and cost, or two distributions
    plus ``params``.
    """
    if isinstance(a, Scenario) and isinstance(b, Scenario):
        if a.params != b.params:
            raise ValidationError("cross_apply: scenarios must share params")
        if a.cost != b.cost:
            raise ValidationError("cross_apply: scenarios must share cost")
        params = a.params
        dist_a, dist_b = a.network, b.network
    elif isinstance(a, DegreeDistribution) and isinstance(b, DegreeDistribution):
        if params is None:
            raise ValidationError("cross_apply: params required with bare distributions")
        dist_a, dist_b = a, b
    else:
        raise ValidationError("cross_apply: pass two scenarios or two distributions")
    ua = solve_disease_free(dist_a, params)
    ub = solve_disease_free(dist_b, params)
    return MismatchReport(
        ua,
        ub,
        applied_state(dist_a, params, ua),
        applied_state(dist_b, params, ub),
        applied_state(dist_a, params, ub),
        applied_state(dist_b, params, ua),
    )


def applied_state(
    dist: DegreeDistribution, params: EpidemicParams, control: ControlEffort
) -> EquilibriumState:
    """Steady state under ``control``, settling the equal-ESR case by integration.

    A disease-free design puts every strain it has to cure exactly at
    ``psi = <k>/<k^2>``, so on a different network the two ESRs are often
    equal. Above threshold the total infection is then determined but its
    split between strains is not; the split reported here is the one reached
    from the default initial condition.
    """
    try:
        return steady_state(dist, params, control)
    except DegenerateCase:
        pass
    run = integrate(dist, params, control)
    obs = run.observables
    dens = run.final
    cls = classify(dist, params, control)
    return EquilibriumState(
        EquilibriumClass(Regime.DEGENERATE, cls.t1, cls.t2, cls.margin_flag),
        obs.theta1 + obs.theta2,
        dens,
        1.0 - obs.ibar1 - obs.ibar2,
        obs.ibar1,
        obs.ibar2,
        obs.theta1,
        obs.theta2,
    )


def grid_values(spec: dict) -> list[float]:
    """Evenly spaced ``num`` points from ``start`` to ``stop`` inclusive."""
    return np.linspace(float(spec["start"]), float(spec["stop"]), int(spec["num"])).tolist()


def geometric_values(spec: dict) -> list[float]:
    """``num`` geometrically spaced points from ``start`` to ``stop`` inclusive."""
    start, stop = float(spec["start"]), float(spec["stop"])
    if start <= 0 or stop <= 0:
        raise ValidationError("scale grid endpoints > 0")
    return np.geomspace(start, stop, int(spec["num"])).tolist()
