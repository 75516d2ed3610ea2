"""Closed-form fitting of the vertical scalings d_i to discrete data.

Rather than minimizing the distance between the data and the attractor
itself (which depends on d in a complicated way), we minimize the collage
residual

    R(d) = sum_m (w_m - (Phi g)(z_m))^2,

where g is the piecewise-constant (nearest-neighbor) extension of the data.
By the collage theorem, the distance from the data to the attractor is at
most the collage distance divided by (1 - contraction factor), so a small
collage residual certifies a good fit.

R separates over segments, and each segment's term is an ordinary 1-D least
squares problem in d_i with the closed-form solution

    d_i = sum (alpha_i(z_m) - w_m)(beta_i(z_m) - g(gamma_i(z_m)))
          / sum (beta_i(z_m) - g(gamma_i(z_m)))^2,

the sums running over the samples of segment i (half-open, last segment
closed, so every sample contributes exactly once).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Sequence

import numpy as np

from .ifs_core import Knots, _abg_values, _frozen_array, segment_indices

__all__ = [
    "Series",
    "FitReport",
    "piecewise_constant_extension",
    "fit_d_discrete",
    "collage_residual",
]

#: Fitted |d_i| are clamped to this magnitude unless the caller overrides it;
#: the closed form can exceed 1 on adversarial data, which would break the
#: contraction the whole construction rests on.
D_MAX_DEFAULT = 0.99


@dataclass(frozen=True)
class Series:
    """Discrete data (z_m, w_m), m = 1..M, with strictly increasing z."""

    z: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        z = _frozen_array(self.z, "series abscissae")
        w = _frozen_array(self.w, "series ordinates")
        if z.size != w.size:
            raise ValueError("series abscissae and ordinates differ in length")
        if z.size < 2:
            raise ValueError("need at least 2 samples")
        if not np.all(np.diff(z) > 0):
            raise ValueError("series abscissae must be strictly increasing")
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "w", w)

    @classmethod
    def from_points(cls, points: Iterable[tuple[float, float]]) -> "Series":
        pts = list(points)
        return cls(np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))

    @property
    def m_count(self) -> int:
        return self.z.size


@dataclass(frozen=True)
class FitReport:
    """Result of a collage fit.

    ``clamped[i]`` marks segments whose closed-form d_i exceeded the allowed
    magnitude and was clamped; ``degenerate[i]`` marks segments where the
    denominator vanished (the objective is flat in d_i) and d_i was set to 0.
    ``collage_bound`` is the discrete collage-theorem bound
    sqrt(collage_rss / M) / (1 - contraction_factor): an a-priori ceiling on
    the RMS distance between the data and the attractor.
    """

    d: np.ndarray
    clamped: np.ndarray
    degenerate: np.ndarray
    collage_rss: float
    contraction_factor: float
    collage_bound: float

    def __post_init__(self):
        d = _frozen_array(self.d, "scaling factors")
        clamped = np.asarray(self.clamped, dtype=bool)
        degenerate = np.asarray(self.degenerate, dtype=bool)
        if not d.size == clamped.size == degenerate.size:
            raise ValueError("report arrays differ in length")
        for name, arr in (("clamped", clamped), ("degenerate", degenerate)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)
        object.__setattr__(self, "d", d)


def piecewise_constant_extension(series: Series) -> Callable:
    """Nearest-neighbor extension of the series to a function on [a, b].

    Returns a vectorized callable with g(z) = w_m for the sample z_m closest
    to z; a point exactly midway between two samples takes the left one.
    """
    z, w = series.z, series.w
    midpoints = (z[:-1] + z[1:]) / 2.0

    def extension(q):
        # searchsorted(side="left") sends q == midpoint to the left sample
        idx = np.searchsorted(midpoints, np.asarray(q, dtype=float), side="left")
        return w[idx]

    return extension


def _require_alignment(series: Series, knots: Knots) -> None:
    """Fitting preconditions: knots drawn from the series, endpoints shared."""
    pos = np.searchsorted(series.z, knots.x)
    ok = (pos < series.z.size) & (series.z[np.minimum(pos, series.z.size - 1)] == knots.x)
    if not np.all(ok):
        raise ValueError("knot abscissae must be a subset of series abscissae")
    if knots.x[0] != series.z[0] or knots.x[-1] != series.z[-1]:
        raise ValueError("knots must span the series (endpoint abscissae differ)")
    if knots.y[0] != series.w[0] or knots.y[-1] != series.w[-1]:
        raise ValueError("endpoint knot ordinates must equal the series values")


def _segment_terms(series: Series, knots: Knots):
    """Per-sample alpha, beta, and g(gamma) arrays plus segment labels."""
    g = piecewise_constant_extension(series)
    seg = segment_indices(knots, series.z)
    alpha, beta, gamma = _abg_values(knots, seg, series.z)
    return seg, alpha, beta, beta - g(gamma)


def fit_d_discrete(
    series: Series, knots: Knots, d_max: float = D_MAX_DEFAULT
) -> FitReport:
    """Fit all vertical scalings in closed form and report safeguards.

    Each segment solves its own least-squares problem (see module docstring).
    A denominator at or below eps_den = 1e-12 * M * (max|w| + max|y|)^2 is
    treated as degenerate (flat objective) and yields d_i = 0; a solution
    with |d_i| > d_max is clamped to sign(d_i) * d_max and flagged, never
    silently altered.
    """
    if not 0.0 < d_max < 1.0:
        raise ValueError("d_max must lie in (0, 1)")
    _require_alignment(series, knots)
    seg, alpha, _, resid_basis = _segment_terms(series, knots)
    w = series.w

    n = knots.n_segments
    d = np.zeros(n)
    degenerate = np.zeros(n, dtype=bool)
    clamped = np.zeros(n, dtype=bool)
    eps_den = (
        1e-12
        * series.m_count
        * (np.max(np.abs(w)) + np.max(np.abs(knots.y))) ** 2
    )
    for i in range(n):
        mask = seg == i
        basis = resid_basis[mask]
        denominator = float(basis @ basis)
        # "<=" so a denominator of exactly 0 (all-zero data makes eps_den 0
        # too) is still caught rather than dividing 0/0.
        if denominator <= eps_den:
            degenerate[i] = True
            continue
        d[i] = float((alpha[mask] - w[mask]) @ basis) / denominator
        if abs(d[i]) > d_max:
            d[i] = np.sign(d[i]) * d_max
            clamped[i] = True

    rss = collage_residual(series, knots, d)
    contraction = float(np.max(np.abs(d)))
    return FitReport(
        d=d,
        clamped=clamped,
        degenerate=degenerate,
        collage_rss=rss,
        contraction_factor=contraction,
        collage_bound=float(np.sqrt(rss / series.m_count) / (1.0 - contraction)),
    )


def collage_residual(series: Series, knots: Knots, d: Sequence[float]) -> float:
    """The objective R(d) = sum_m (w_m - (Phi g)(z_m))^2 for given scalings."""
    d_arr = np.asarray(d, dtype=float)
    if d_arr.ndim != 1 or d_arr.size != knots.n_segments:
        raise ValueError(
            f"expected {knots.n_segments} scaling factors, got {d_arr.size}"
        )
    _require_alignment(series, knots)
    seg, alpha, _, resid_basis = _segment_terms(series, knots)
    residual = series.w - (alpha - d_arr[seg] * resid_basis)
    return float(residual @ residual)
