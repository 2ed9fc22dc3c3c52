"""Goodness-of-fit and summary statistics linking simulated ensembles to the analytic laws."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.interpolate import PchipInterpolator

from .densities import CLAMP_MARGIN, phi1_cumulative, radial_cdf, total_phi1_mass
from .errors import BinError, DomainError, InsufficientTail
from .model import ModelParams

SCHEMA_VERSION = 1


def ks_distance(sorted_samples, cdf) -> float:
    """sup |F_N - F| over the samples, checking both sides of every jump of F_N.

    ``cdf`` is called once on the whole sample array.
    """
    x = np.asarray(sorted_samples, dtype=float)
    n = x.size
    if n == 0:
        raise DomainError("no samples")
    if np.any(np.diff(x) < 0):
        raise DomainError("samples must be sorted ascending")
    f = np.asarray(cdf(x), dtype=float)
    i = np.arange(1, n + 1)
    upper = np.max(i / n - f)
    lower = np.max(f - (i - 1) / n)
    return float(max(upper, lower))


@dataclass
class Histogram:
    edges: np.ndarray
    density: np.ndarray
    overflow_mass: float = 0.0

    @property
    def masses(self) -> np.ndarray:
        return self.density * np.diff(self.edges)


def histogram_density(samples, edges, overflow: bool = False) -> Histogram:
    """Per-bin probability mass divided by bin width.

    Samples outside the edges raise :class:`BinError` unless ``overflow``
    is set, in which case samples above the last edge are counted in an
    overflow bin (needed for the unbounded overshoot law).
    """
    x = np.asarray(samples, dtype=float)
    e = np.asarray(edges, dtype=float)
    if e.ndim != 1 or e.size < 2 or np.any(np.diff(e) <= 0):
        raise BinError("edges must be strictly ascending with at least two entries")
    if x.size == 0:
        raise BinError("no samples")
    below = x < e[0]
    above = x > e[-1]
    if np.any(below) or (np.any(above) and not overflow):
        raise BinError(f"{int(below.sum() + above.sum())} samples fall outside [{e[0]}, {e[-1]}]")
    counts, _ = np.histogram(x[~above], bins=e)
    n = x.size
    return Histogram(e, counts / (n * np.diff(e)), float(above.sum()) / n)


def tail_exponent_estimate(samples, threshold: float = 1.0, top_fraction: float = 0.01,
                           min_exceedances: int = 1000) -> float:
    """Hill estimate of the survival tail index from the largest order statistics.

    Uses the top ``top_fraction`` of all samples (at least ``min_exceedances``),
    all of which must lie above ``threshold``.
    """
    x = np.sort(np.asarray(samples, dtype=float))
    exceed = x[x > threshold]
    if exceed.size < min_exceedances:
        raise InsufficientTail(f"{exceed.size} samples above {threshold}, need {min_exceedances}")
    k = min(max(min_exceedances, int(top_fraction * x.size)), exceed.size)
    top = exceed[-k:]
    ref = exceed[-k - 1] if k < exceed.size else threshold
    gamma = np.mean(np.log(top / ref))
    return float(1.0 / gamma)


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x."""
    lx = np.log(np.asarray(x, dtype=float))
    ly = np.log(np.asarray(y, dtype=float))
    return float(np.polyfit(lx, ly, 1)[0])


# -- analytic CDFs on interpolation grids ----------------------------------------------


def _support_nodes(params: ModelParams, npts: int) -> np.ndarray:
    k = np.arange(npts)
    cheb = 0.5 * (1.0 - np.cos(math.pi * (k + 0.5) / npts))
    nodes = np.clip(cheb, 2 * CLAMP_MARGIN, 1.0 - 2 * CLAMP_MARGIN)
    if not params.kind.bounded:
        nodes = np.concatenate([nodes, 1.0 + np.geomspace(2 * CLAMP_MARGIN, 1e6, npts)])
    return np.unique(nodes)


class AnalyticCdf:
    """Monotone interpolant of the radius (or |first coordinate|) CDF of the limit law.

    Beyond the last node of the overshoot law the survival function is
    continued as a power law with the exponent read off the last two nodes.
    """

    def __init__(self, params: ModelParams, axis: bool = False, npts: int = 400):
        self.params = params
        nodes = _support_nodes(params, npts)
        vals = phi1_cumulative(params, nodes) if axis else radial_cdf(params, nodes)
        vals = np.maximum.accumulate(np.clip(vals, 0.0, 1.0))
        self.mass = total_phi1_mass(params)
        x = np.concatenate([[0.0], nodes])
        f = np.concatenate([[0.0], vals])
        if params.kind.bounded:
            x = np.append(x, 1.0)
            f = np.append(f, self.mass)
        self._x_max = x[-1]
        self._interp = PchipInterpolator(x, f)
        if not params.kind.bounded:
            s1, s0 = self.mass - f[-1], self.mass - f[-2]
            self._tail_surv = s1
            self._tail_index = math.log(s0 / s1) / math.log(x[-1] / x[-2]) if s1 > 0 and s0 > s1 else 0.0

    def __call__(self, r):
        r = np.abs(np.asarray(r, dtype=float))
        out = np.empty_like(r)
        inside = r <= self._x_max
        out[inside] = self._interp(r[inside])
        beyond = ~inside
        if self.params.kind.bounded:
            out[beyond] = self.mass
        else:
            out[beyond] = self.mass - self._tail_surv * (self._x_max / r[beyond]) ** self._tail_index
        return np.clip(out, 0.0, 1.0)

    def signed(self, x):
        """CDF of the signed first coordinate from the |x| law (axis mode)."""
        x = np.asarray(x, dtype=float)
        return 0.5 + 0.5 * np.sign(x) * self(np.abs(x))


@lru_cache(maxsize=32)
def analytic_cdf(params: ModelParams, axis: bool = False) -> AnalyticCdf:
    return AnalyticCdf(params, axis)


@dataclass
class EnsembleSummary:
    kind: str
    dim: int
    alpha: float
    scale: float
    count: int
    seed: int
    radii: np.ndarray
    first_coords: np.ndarray
    ks_radius: float
    ks_first_coord: float
    histogram: Histogram
    meta: dict = field(default_factory=dict)

    def quantiles(self, probs=(0.01, 0.05, 0.25, 0.5, 0.75, 0.95, 0.99)) -> dict:
        return {f"{p:g}": float(np.quantile(self.radii, p)) for p in probs}

    def fraction_above(self, r: float) -> float:
        return float(np.mean(self.radii > r))

    def to_json_dict(self) -> dict:
        return {
            "schemaVersion": SCHEMA_VERSION,
            "kind": self.kind,
            "dim": self.dim,
            "alpha": self.alpha,
            "scale": self.scale,
            "count": self.count,
            "seed": self.seed,
            "ksRadius": self.ks_radius,
            "ksFirstCoord": self.ks_first_coord,
            "maxRadius": float(self.radii[-1]),
            "fractionAboveOne": self.fraction_above(1.0),
            "quantiles": self.quantiles(),
            "histogram": {
                "edges": self.histogram.edges.tolist(),
                "density": self.histogram.density.tolist(),
                "overflowMass": self.histogram.overflow_mass,
            },
            **self.meta,
        }


def summarize_ensemble(params: ModelParams, radii, first_coords, scale: float, seed: int,
                       bins: int = 50) -> EnsembleSummary:
    """Sort the samples once and attach KS distances against the analytic CDFs."""
    radii = np.sort(np.asarray(radii, dtype=float))
    first = np.sort(np.asarray(first_coords, dtype=float))
    ks_r = ks_distance(radii, analytic_cdf(params))
    ks_x = ks_distance(first, analytic_cdf(params, axis=True).signed)
    top = 1.0 if params.kind.bounded else 5.0
    hist = histogram_density(radii, np.linspace(0.0, top, bins + 1), overflow=not params.kind.bounded)
    return EnsembleSummary(params.kind.value, params.dim, params.alpha, float(scale), int(radii.size),
                           int(seed), radii, first, ks_r, ks_x, hist)
