"""Degree statistics of a complex network.

The mean-field model never looks at individual edges; everything it needs is
the degree distribution ``P(k)`` on ``k = 0..K`` and its first two moments.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import (
    AllIsolated,
    EmptyDistribution,
    InvalidRange,
    InvalidSize,
    ValidationError,
)

__all__ = [
    "DegreeDistribution",
    "from_histogram",
    "power_law",
    "regular",
    "ba_degrees",
    "ba_degree_sequence",
    "from_moments",
    "moments",
]

_SUM_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class DegreeDistribution:
    """Probability mass over node degrees with cached moments.

    Parameters
    ----------
    pmf : array_like
        ``pmf[k]`` is the fraction of nodes with degree ``k``.

    Attributes
    ----------
    k_max : int
        Largest degree ``K`` (``len(pmf) - 1``).
    mean_degree, second_moment : float
        ``<k>`` and ``<k^2>``.
    """

    pmf: np.ndarray
    k_max: int = field(init=False)
    mean_degree: float = field(init=False)
    second_moment: float = field(init=False)
    degrees: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        pmf = np.array(self.pmf, dtype=float).ravel()
        if pmf.size == 0:
            raise EmptyDistribution("pmf is empty")
        if not np.all(np.isfinite(pmf)):
            raise ValidationError("pmf entries must be finite")
        if np.any(pmf < 0):
            raise ValidationError("pmf[k] >= 0")
        total = pmf.sum()
        if total == 0:
            raise EmptyDistribution("pmf has no mass")
        if abs(total - 1.0) > _SUM_TOL:
            raise ValidationError(f"sum(pmf) = 1 (got {total!r})")
        k = np.arange(pmf.size, dtype=float)
        mean = float(k @ pmf)
        if mean <= 0:
            raise AllIsolated("mean_degree > 0: all mass sits on degree 0")
        pmf.setflags(write=False)
        k.setflags(write=False)
        object.__setattr__(self, "pmf", pmf)
        object.__setattr__(self, "degrees", k)
        object.__setattr__(self, "k_max", pmf.size - 1)
        object.__setattr__(self, "mean_degree", mean)
        object.__setattr__(self, "second_moment", float((k * k) @ pmf))

    @property
    def branching_ratio(self) -> float:
        """``<k^2>/<k>``, the factor that turns an ESR into a threshold quantity."""
        return self.second_moment / self.mean_degree

    def __eq__(self, other):
        if not isinstance(other, DegreeDistribution):
            return NotImplemented
        return self.k_max == other.k_max and np.array_equal(self.pmf, other.pmf)

    def __hash__(self):
        return hash(self.pmf.tobytes())

    def to_dict(self) -> dict:
        return {
            "pmf": self.pmf.tolist(),
            "k_max": self.k_max,
            "mean_degree": self.mean_degree,
            "second_moment": self.second_moment,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "DegreeDistribution":
        """Rebuild from ``{"pmf": [...], "k_max": K}``; stored moments are checked."""
        try:
            pmf = data["pmf"]
        except (KeyError, TypeError):
            raise ValidationError("degree distribution needs a 'pmf' list") from None
        dist = cls(pmf)
        if "k_max" in data and int(data["k_max"]) != dist.k_max:
            raise ValidationError(
                f"k_max = len(pmf) - 1 (got k_max={data['k_max']}, len(pmf)={len(pmf)})"
            )
        for key, value in (("mean_degree", dist.mean_degree), ("second_moment", dist.second_moment)):
            if key in data and abs(float(data[key]) - value) > 1e-12 * max(1.0, value):
                raise ValidationError(f"stored {key} {data[key]} disagrees with pmf ({value})")
        return dist

    @classmethod
    def from_json(cls, text: str) -> "DegreeDistribution":
        return cls.from_dict(json.loads(text))


def from_histogram(counts: Sequence[int]) -> DegreeDistribution:
    """Normalise a degree histogram (``counts[k]`` nodes of degree ``k``)."""
    counts = np.asarray(counts, dtype=float).ravel()
    if counts.size == 0 or counts.sum() == 0:
        raise EmptyDistribution("histogram has no nodes")
    if np.any(counts < 0):
        raise ValidationError("counts must be nonnegative")
    if counts[1:].sum() == 0:
        raise AllIsolated("every node has degree 0")
    return DegreeDistribution(counts / counts.sum())


def power_law(k_min: int, k_max: int, exponent: float) -> DegreeDistribution:
    """Truncated power law ``P(k) ~ k**-exponent`` on ``[k_min, k_max]``."""
    if k_min < 1:
        raise InvalidRange("k_min >= 1")
    if k_min > k_max:
        raise InvalidRange(f"k_min <= k_max (got {k_min} > {k_max})")
    if exponent <= 1:
        raise InvalidRange("exponent > 1")
    k = np.arange(k_min, k_max + 1, dtype=float)
    weights = k ** (-float(exponent))
    pmf = np.zeros(k_max + 1)
    pmf[k_min:] = weights / weights.sum()
    return DegreeDistribution(pmf)


def regular(c: int) -> DegreeDistribution:
    """Every node has degree ``c``."""
    if c < 1:
        raise InvalidRange("c >= 1")
    pmf = np.zeros(c + 1)
    pmf[c] = 1.0
    return DegreeDistribution(pmf)


def ba_degrees(n: int, m: int, seed: int) -> np.ndarray:
    """Per-node degrees of a Barabasi-Albert preferential-attachment graph.

    The graph is seeded with a star on ``m + 1`` nodes. Every later node
    attaches ``m`` edges to distinct existing nodes chosen with probability
    proportional to their current degree, so the graph is simple and has
    exactly ``m * (n - m)`` edges.
    """
    if m < 1:
        raise InvalidSize("m >= 1")
    if n <= m:
        raise InvalidSize(f"n > m (got n={n}, m={m})")
    rng = np.random.default_rng(seed)
    degree = np.zeros(n, dtype=np.int64)
    # one entry per edge endpoint; uniform draws from it are degree-proportional
    endpoints = np.empty(2 * m * (n - m), dtype=np.int64)
    degree[0] = m
    degree[1 : m + 1] = 1
    endpoints[0 : 2 * m : 2] = 0
    endpoints[1 : 2 * m : 2] = np.arange(1, m + 1)
    filled = 2 * m
    for node in range(m + 1, n):
        targets: set[int] = set()
        while len(targets) < m:
            targets.add(int(endpoints[rng.integers(filled)]))
        for t in sorted(targets):
            endpoints[filled] = t
            endpoints[filled + 1] = node
            filled += 2
            degree[t] += 1
        degree[node] = m
    return degree


def ba_degree_sequence(n: int, m: int, seed: int) -> DegreeDistribution:
    """Empirical degree distribution of one Barabasi-Albert realisation."""
    return from_histogram(np.bincount(ba_degrees(n, m, seed)))


def from_moments(mean_degree: float, second_moment: float) -> DegreeDistribution:
    """Synthesize an integer-support pmf with the given ``<k>`` and ``<k^2>``.

    Mass is placed on the adjacent degrees ``j = floor(<k^2>/<k>)`` and
    ``j + 1``, plus the lowest degree ``a < j`` that keeps every probability
    nonnegative (``a = 0`` for heavy-tailed moment pairs). Only quantities that
    depend on the two moments alone are meaningful on such a network.
    """
    mu1, mu2 = float(mean_degree), float(second_moment)
    if not (np.isfinite(mu1) and np.isfinite(mu2)) or mu1 <= 0:
        raise ValidationError("mean_degree > 0")
    if mu2 < mu1 * mu1 * (1 - 1e-12):
        raise ValidationError(
            f"second_moment >= mean_degree**2 (got {mu2} < {mu1 * mu1})"
        )
    if mu2 < mu1 * (1 - 1e-12):
        raise ValidationError(
            f"second_moment >= mean_degree for integer degrees (got {mu2} < {mu1})"
        )
    # integer support: the variance cannot drop below f(1 - f), f = frac(<k>)
    frac = mu1 - np.floor(mu1)
    min_var = frac * (1.0 - frac)
    if mu2 - mu1 * mu1 < min_var - 1e-12 * max(1.0, mu2):
        raise ValidationError(
            f"second_moment >= mean_degree**2 + {min_var:.6g} for integer degrees "
            f"(got variance {mu2 - mu1 * mu1:.6g})"
        )
    ratio = mu2 / mu1
    j = int(np.floor(ratio + 1e-12))
    if abs(ratio - j) <= 1e-12 * ratio and abs(mu1 - j) <= 1e-12 * j:
        return regular(j)
    # place the lowest support point a so that the three-point system is nonnegative
    for a in range(0, max(j, 1)):
        # solve p_a + p_j + p_j1 = 1, a p_a + j p_j + (j+1) p_j1 = mu1, same with squares
        mat = np.array(
            [[1.0, 1.0, 1.0], [a, j, j + 1.0], [a * a, j * j, (j + 1.0) ** 2]]
        )
        probs = np.linalg.solve(mat, [1.0, mu1, mu2])
        if np.all(probs >= -1e-14):
            probs = np.clip(probs, 0.0, None)
            probs /= probs.sum()
            pmf = np.zeros(j + 2)
            pmf[a] += probs[0]
            pmf[j] += probs[1]
            pmf[j + 1] += probs[2]
            return DegreeDistribution(pmf)
    raise ValidationError(
        f"no nonnegative integer-support pmf near <k^2>/<k>={ratio:.6g} reproduces "
        f"moments ({mu1}, {mu2})"
    )


def moments(dist: DegreeDistribution) -> tuple[float, float]:
    """``(<k>, <k^2>)`` of ``dist``."""
    return dist.mean_degree, dist.second_moment
