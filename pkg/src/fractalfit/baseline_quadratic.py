"""Parameter-matched piecewise-quadratic baseline.

On each knot segment the baseline is the quadratic q_i(x) = k_i x^2 + r_i x
+ l_i constrained to interpolate both endpoint knot values, leaving exactly
one free scalar per segment -- the same parameter budget as the fractal
model's d_i, which is what makes the error comparison fair.

Internally the family is parametrized as chord plus bubble,

    q_i(x) = L_i(x) + s * B_i(x),   B_i(x) = (x - x_{i-1}) (x - x_i),

where L_i is the chord through the endpoint knots.  B_i vanishes at both
endpoints, so the constraints hold for every s, and the least-squares fit of
s is a 1-D projection.  This is numerically far better behaved than solving
for (k, r, l) directly: with abscissae up to 1e4 the monomial normal
equations live at scale 1e8.  The monomial coefficients are still reported
(``QuadModel.coeffs``) for inspection.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .ifs_core import Knots, _frozen_array, segment_indices
from .collage_fit import Series, _require_alignment

__all__ = ["QuadModel", "fit_quadratic", "evaluate_quad"]


@dataclass(frozen=True)
class QuadModel:
    """Per-segment quadratics through the knot values.

    ``curvature[i]`` is the bubble coefficient s of segment i (equal to the
    monomial coefficient k_i); ``chord_fallback[i]`` marks segments that had
    no interior samples to fit, where s defaults to 0 (the chord).
    """

    knots: Knots
    curvature: np.ndarray
    chord_fallback: np.ndarray

    def __post_init__(self):
        curvature = _frozen_array(self.curvature, "curvature")
        fallback = np.asarray(self.chord_fallback, dtype=bool)
        if curvature.size != self.knots.n_segments or fallback.size != curvature.size:
            raise ValueError("per-segment arrays must have one entry per segment")
        fallback.setflags(write=False)
        object.__setattr__(self, "curvature", curvature)
        object.__setattr__(self, "chord_fallback", fallback)

    @property
    def coeffs(self) -> list[tuple[float, float, float]]:
        """Monomial coefficients (k_i, r_i, l_i) of each segment."""
        x, y = self.knots.x, self.knots.y
        out = []
        for i, s in enumerate(self.curvature):
            xl, xr = x[i], x[i + 1]
            slope = (y[i + 1] - y[i]) / (xr - xl)
            out.append(
                (
                    float(s),
                    float(slope - s * (xl + xr)),
                    float(y[i] - slope * xl + s * xl * xr),
                )
            )
        return out


def fit_quadratic(series: Series, knots: Knots) -> QuadModel:
    """Least-squares fit of each segment's free quadratic parameter.

    Minimizes sum (w_m - L_i(z_m) - s B_i(z_m))^2 over the segment's samples;
    only samples strictly inside the segment contribute (B_i vanishes at the
    endpoints).  A segment with no interior samples keeps the chord (s = 0)
    and is flagged rather than failed.
    """
    _require_alignment(series, knots)
    seg = segment_indices(knots, series.z)
    x, y = knots.x, knots.y

    n = knots.n_segments
    curvature = np.zeros(n)
    fallback = np.zeros(n, dtype=bool)
    for i in range(n):
        mask = seg == i
        zz, ww = series.z[mask], series.w[mask]
        xl, xr = x[i], x[i + 1]
        inner = (zz > xl) & (zz < xr)
        if not np.any(inner):
            fallback[i] = True
            continue
        zz, ww = zz[inner], ww[inner]
        t = (zz - xl) / (xr - xl)
        chord = y[i] + (y[i + 1] - y[i]) * t
        bubble = (zz - xl) * (zz - xr)
        curvature[i] = float((ww - chord) @ bubble) / float(bubble @ bubble)
    return QuadModel(knots=knots, curvature=curvature, chord_fallback=fallback)


def evaluate_quad(model: QuadModel, x):
    """Evaluate the baseline at ``x`` (scalar or array) inside [a, b].

    Uses the chord-plus-bubble form, so knot values are reproduced exactly;
    segment membership follows the same half-open convention as the fractal
    evaluator.
    """
    scalar = np.ndim(x) == 0
    xs = np.atleast_1d(np.asarray(x, dtype=float))
    knots = model.knots
    kx, ky = knots.x, knots.y
    if np.any(xs < kx[0]) or np.any(xs > kx[-1]):
        raise ValueError(f"abscissae outside model domain [{knots.a}, {knots.b}]")
    seg = segment_indices(knots, xs)
    xl, xr = kx[seg], kx[seg + 1]
    t = (xs - xl) / (xr - xl)
    chord = ky[seg] + (ky[seg + 1] - ky[seg]) * t
    out = chord + model.curvature[seg] * (xs - xl) * (xs - xr)
    return float(out[0]) if scalar else out
