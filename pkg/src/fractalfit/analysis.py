"""Error metrics and the fractal-vs-quadratic comparison harness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .baseline_quadratic import QuadModel, evaluate_quad, fit_quadratic
from .collage_fit import D_MAX_DEFAULT, Series, fit_d_discrete
from .ifs_core import FifModel, build_model, default_depth, evaluate_fif, Knots

__all__ = ["ComparisonRow", "rms_error", "compare"]


@dataclass(frozen=True)
class ComparisonRow:
    """One dataset's error summary.

    By the collage theorem, fractal_rms <= collage_bound whenever no scaling
    factor was clamped; eval_depth is the pre-fractal depth actually used.
    """

    name: str
    fractal_rms: float
    quadratic_rms: float
    collage_bound: float
    contraction_factor: float
    eval_depth: int


def rms_error(h, series: Series, *, depth: int | None = None) -> float:
    """Root-mean-square error of a model against the series.

    ``h`` may be a FifModel (evaluated at ``depth``, default depth if None),
    a QuadModel, or any callable mapping an abscissa array to values.
    """
    if isinstance(h, FifModel):
        values = evaluate_fif(h, series.z, depth)
    elif isinstance(h, QuadModel):
        values = evaluate_quad(h, series.z)
    else:
        values = np.asarray(h(series.z), dtype=float)
    return float(np.sqrt(np.mean((values - series.w) ** 2)))


def compare(
    series: Series,
    knots: Knots,
    *,
    name: str = "",
    depth: int | None = None,
    d_max: float = D_MAX_DEFAULT,
) -> ComparisonRow:
    """Fit both models on identical (series, knots) and measure both errors.

    Pure function of its arguments: same inputs, same row.
    """
    report = fit_d_discrete(series, knots, d_max)
    model = build_model(knots, report.d)
    resolved_depth = default_depth(model) if depth is None else depth
    return ComparisonRow(
        name=name,
        fractal_rms=rms_error(model, series, depth=resolved_depth),
        quadratic_rms=rms_error(fit_quadratic(series, knots), series),
        collage_bound=report.collage_bound,
        contraction_factor=report.contraction_factor,
        eval_depth=resolved_depth,
    )
