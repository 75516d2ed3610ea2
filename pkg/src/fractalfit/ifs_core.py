"""Affine iterated function systems for 1-D fractal interpolation.

An interpolation model over knots (x_0,y_0), ..., (x_N,y_N) is a family of
N affine maps

    A_i(x, y) = (a_i x + e_i,  c_i x + d_i y + f_i),        i = 1..N,

each constrained to send the graph endpoints (x_0,y_0), (x_N,y_N) to the
segment endpoints (x_{i-1},y_{i-1}), (x_i,y_i).  The vertical scalings d_i
(|d_i| < 1) remain free and control the roughness of the attractor.  The
associated operator on functions,

    (Phi g)(x) = alpha_i(x) - d_i * (beta_i(x) - g(gamma_i(x)))  on segment i,

is a sup-norm contraction with factor max|d_i|; its unique fixed point is the
fractal interpolation function passing through every knot.

Here alpha_i interpolates the segment endpoints, beta_i carries the segment
endpoints to (y_0, y_N), and gamma_i maps [x_{i-1}, x_i] onto the full domain
[a, b] (the inverse of x -> a_i x + e_i).

Segment membership is half-open: segment i covers [x_{i-1}, x_i), and the
last segment additionally includes b.  Segments are indexed 0..N-1 in code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Knots",
    "SegmentMap",
    "FifModel",
    "SampledFunction",
    "build_model",
    "alpha_beta_gamma",
    "segment_indices",
    "hutchinson_apply",
    "evaluate_fif",
    "default_depth",
    "fixed_point_residual",
]


def _frozen_array(values, name: str) -> np.ndarray:
    arr = np.array(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite values")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Knots:
    """Interpolation points (x_i, y_i), i = 0..N, with strictly increasing x.

    N = len(x) - 1 is the number of segments; at least two segments are
    required so that every horizontal contraction factor a_i is < 1.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _frozen_array(self.x, "knot abscissae")
        y = _frozen_array(self.y, "knot ordinates")
        if x.size != y.size:
            raise ValueError("knot abscissae and ordinates differ in length")
        if x.size < 3:
            raise ValueError("need at least 3 knots (2 segments)")
        if not np.all(np.diff(x) > 0):
            raise ValueError("knot abscissae must be strictly increasing")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @classmethod
    def from_points(cls, points: Iterable[tuple[float, float]]) -> "Knots":
        pts = list(points)
        return cls(np.array([p[0] for p in pts]), np.array([p[1] for p in pts]))

    @property
    def n_segments(self) -> int:
        return self.x.size - 1

    @property
    def a(self) -> float:
        return float(self.x[0])

    @property
    def b(self) -> float:
        return float(self.x[-1])


@dataclass(frozen=True)
class SegmentMap:
    """One affine map A(x, y) = (a x + e, c x + d y + f)."""

    a: float
    c: float
    d: float
    e: float
    f: float

    def apply(self, x, y):
        return self.a * x + self.e, self.c * x + self.d * y + self.f


@dataclass(frozen=True)
class FifModel:
    """A fractal interpolation model: knots plus one affine map per segment."""

    knots: Knots
    segments: tuple[SegmentMap, ...]

    @property
    def d(self) -> np.ndarray:
        return np.array([s.d for s in self.segments])

    @property
    def contraction_factor(self) -> float:
        return float(np.max(np.abs(self.d)))


@dataclass(frozen=True)
class SampledFunction:
    """A function represented by values on a strictly increasing grid."""

    grid: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        grid = _frozen_array(self.grid, "grid")
        values = _frozen_array(self.values, "values")
        if grid.size != values.size:
            raise ValueError("grid and values differ in length")
        if grid.size < 2:
            raise ValueError("need at least 2 grid points")
        if not np.all(np.diff(grid) > 0):
            raise ValueError("grid must be strictly increasing")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)


def build_model(knots: Knots, d: Sequence[float]) -> FifModel:
    """Assemble the IFS whose attractor interpolates ``knots``.

    The coefficients of each map are pinned by the endpoint conditions
    A_i(x_0, y_0) = (x_{i-1}, y_{i-1}) and A_i(x_N, y_N) = (x_i, y_i):

        a_i = (x_i - x_{i-1}) / (b - a)
        e_i = (b x_{i-1} - a x_i) / (b - a)
        c_i = (y_i - y_{i-1} - d_i (y_N - y_0)) / (b - a)
        f_i = (b y_{i-1} - a y_i - d_i (b y_0 - a y_N)) / (b - a)

    Raises ValueError if ``len(d) != N`` or any |d_i| >= 1 (the maps must be
    contractive for the attractor to exist).
    """
    d_arr = np.asarray(d, dtype=float)
    if d_arr.ndim != 1 or d_arr.size != knots.n_segments:
        raise ValueError(
            f"expected {knots.n_segments} scaling factors, got {d_arr.size}"
        )
    if np.any(np.abs(d_arr) >= 1.0):
        raise ValueError("vertical scalings must satisfy |d_i| < 1")

    x, y = knots.x, knots.y
    a, b = x[0], x[-1]
    y0, yn = y[0], y[-1]
    width = b - a
    segments = []
    for i in range(knots.n_segments):
        xl, xr = x[i], x[i + 1]
        yl, yr = y[i], y[i + 1]
        di = d_arr[i]
        segments.append(
            SegmentMap(
                a=(xr - xl) / width,
                c=(yr - yl - di * (yn - y0)) / width,
                d=float(di),
                e=(b * xl - a * xr) / width,
                f=(b * yl - a * yr - di * (b * y0 - a * yn)) / width,
            )
        )
    return FifModel(knots=knots, segments=tuple(segments))


def alpha_beta_gamma(
    knots: Knots, segment: int
) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
    """Coefficients (slope, intercept) of the segment's three affine functions.

    For segment i (0-based, spanning [x_i, x_{i+1}]):

    * alpha interpolates (x_i, y_i) and (x_{i+1}, y_{i+1}),
    * beta sends x_i -> y_0 and x_{i+1} -> y_N,
    * gamma maps [x_i, x_{i+1}] onto [a, b]; it is the inverse of the
      horizontal part of the segment map.
    """
    n = knots.n_segments
    if not 0 <= segment < n:
        raise ValueError(f"segment index {segment} out of range 0..{n - 1}")
    x, y = knots.x, knots.y
    xl, xr = x[segment], x[segment + 1]
    yl, yr = y[segment], y[segment + 1]
    a, b = x[0], x[-1]
    y0, yn = y[0], y[-1]
    width = xr - xl

    def line(vl: float, vr: float) -> tuple[float, float]:
        slope = (vr - vl) / width
        return float(slope), float(vl - slope * xl)

    return line(yl, yr), line(y0, yn), line(a, b)


def segment_indices(knots: Knots, x) -> np.ndarray:
    """Indices of the segments containing ``x`` (half-open, last closed)."""
    x = np.asarray(x, dtype=float)
    idx = np.searchsorted(knots.x, x, side="right") - 1
    return np.clip(idx, 0, knots.n_segments - 1)


def _abg_values(knots: Knots, seg: np.ndarray, x: np.ndarray):
    """Values of alpha, beta, gamma at ``x``, given segment indices ``seg``.

    Evaluated in the anchored form v_l + (v_r - v_l) * t with
    t = (x - x_l)/(x_r - x_l), which returns segment endpoint values exactly
    (no slope/intercept cancellation even for abscissae ~1e4).
    """
    kx, ky = knots.x, knots.y
    xl = kx[seg]
    t = (x - xl) / (kx[seg + 1] - xl)
    alpha = ky[seg] + (ky[seg + 1] - ky[seg]) * t
    beta = ky[0] + (ky[-1] - ky[0]) * t
    gamma = kx[0] + (kx[-1] - kx[0]) * t
    return alpha, beta, gamma


def _require_in_domain(knots: Knots, x: np.ndarray) -> None:
    if np.any(x < knots.x[0]) or np.any(x > knots.x[-1]):
        raise ValueError(
            f"abscissae outside model domain [{knots.a}, {knots.b}]"
        )


def hutchinson_apply(model: FifModel, g: SampledFunction) -> SampledFunction:
    """One application of the function-space operator Phi to ``g``.

    Returns Phi(g) sampled on the same grid; g(gamma_i(x)) is obtained by
    linear interpolation between the grid samples.  The grid must span the
    model domain [a, b] exactly, since gamma stretches every segment onto
    the whole of it.
    """
    knots = model.knots
    if g.grid[0] != knots.x[0] or g.grid[-1] != knots.x[-1]:
        raise ValueError("grid endpoints must coincide with the model domain")
    seg = segment_indices(knots, g.grid)
    alpha, beta, gamma = _abg_values(knots, seg, g.grid)
    d = model.d
    g_at_gamma = np.interp(gamma, g.grid, g.values)
    return SampledFunction(g.grid, alpha - d[seg] * (beta - g_at_gamma))


def evaluate_fif(model: FifModel, x, depth: int | None = None):
    """Evaluate the depth-th pre-fractal of the model at ``x``.

    Computes (Phi^depth b0)(x) where b0 is the chord through the endpoint
    knots, by unrolling the recursion

        g(x) = alpha_i(x) - d_i * (beta_i(x) - g(gamma_i(x)))

    into an accumulated affine transform of the base value.  The distance to
    the true attractor is at most (max|d_i|)^depth * ||b0 - g*||_inf, so the
    default depth (see :func:`default_depth`) gives the attractor to near
    machine precision.  Since b0 already satisfies the endpoint conditions,
    every pre-fractal passes through all knots exactly.

    Accepts a scalar or an array; raises ValueError outside [a, b].
    """
    if depth is None:
        depth = default_depth(model)
    if depth < 0:
        raise ValueError("depth must be >= 0")
    scalar = np.ndim(x) == 0
    cur = np.atleast_1d(np.asarray(x, dtype=float)).copy()
    knots = model.knots
    _require_in_domain(knots, cur)

    a, b = knots.x[0], knots.x[-1]
    y0, yn = knots.y[0], knots.y[-1]
    d = model.d
    acc_scale = np.ones_like(cur)
    acc_offset = np.zeros_like(cur)
    for _ in range(depth):
        if not np.any(acc_scale):
            break  # d == 0 everywhere reached: deeper levels contribute nothing
        seg = segment_indices(knots, cur)
        alpha, beta, gamma = _abg_values(knots, seg, cur)
        di = d[seg]
        acc_offset += acc_scale * (alpha - di * beta)
        acc_scale *= di
        # gamma is exact at segment endpoints but may drift out by one ulp
        # strictly inside; clamp so the next level's lookup stays in domain.
        cur = np.clip(gamma, a, b)
    base = y0 + (yn - y0) * (cur - a) / (b - a)
    out = acc_offset + acc_scale * base
    return float(out[0]) if scalar else out


def default_depth(model: FifModel, *, tol: float = 1e-9, cap: int = 48) -> int:
    """Smallest depth D with (max|d_i|)^D < tol, capped (cap matters as
    max|d_i| approaches 1, where the required depth diverges)."""
    c = model.contraction_factor
    if c == 0.0:
        return 1
    for depth in range(1, cap):
        if c**depth < tol:
            return depth
    return cap


def fixed_point_residual(
    model: FifModel, grid_resolution: int, depth: int | None = None
) -> float:
    """Self-consistency diagnostic: sup-norm of Phi(g) - g for g sampled
    from :func:`evaluate_fif` on a uniform grid.

    Near zero when the evaluation depth has converged and the grid resolves
    the attractor (gamma maps grid points to grid points whenever the knots
    are uniform and the interval count divides the grid's, making the
    interpolation step in Phi exact).
    """
    if grid_resolution < 2:
        raise ValueError("grid resolution must be >= 2")
    grid = np.linspace(model.knots.a, model.knots.b, grid_resolution)
    values = evaluate_fif(model, grid, depth)
    image = hutchinson_apply(model, SampledFunction(grid, values))
    return float(np.max(np.abs(image.values - values)))
