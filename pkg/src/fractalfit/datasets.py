"""Series generators, ingestion, normalization, and knot selection.

Three built-in generators produce the raw series used throughout:

* a quintic polynomial sampled uniformly (its argument sweeps [-1, 2.5]),
* a DNA walk (+1 for purines A/G, -1 for pyrimidines C/T, cumulated),
* a seeded Gaussian random walk.

Raw series are normalized to mean 0 and mean-square 1 before fitting, so
errors are comparable across datasets.  Knots are chosen either manually
(1-based interior sample indices) or automatically at the most prominent
local extrema of a smoothed copy of the data.
"""

from __future__ import annotations

from dataclasses import dataclass
from os import PathLike
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy.signal import find_peaks

from .collage_fit import Series
from .ifs_core import Knots

__all__ = [
    "NormalizationParams",
    "gen_polynomial",
    "gen_dna_walk",
    "gen_random_walk",
    "load_series_csv",
    "normalize",
    "select_knots",
]


@dataclass(frozen=True)
class NormalizationParams:
    """Mean s1 and population standard deviation s2 used to normalize."""

    s1: float
    s2: float

    def __post_init__(self):
        if not self.s2 > 0:
            raise ValueError("standard deviation must be positive")


def gen_polynomial(m_count: int) -> Series:
    """Raw quintic series: v_m = f(7 (m-1) / (2 (M-1)) - 1), z_m = m.

    f(x) = -6x + 5x^2 + 5x^3 - 5x^4 + x^5, evaluated in Horner form so the
    result is bit-for-bit reproducible across platforms.
    """
    if m_count < 2:
        raise ValueError("need at least 2 samples")
    m = np.arange(1, m_count + 1, dtype=float)
    arg = 7.0 * (m - 1.0) / (2.0 * (m_count - 1.0)) - 1.0
    v = arg * (-6.0 + arg * (5.0 + arg * (5.0 + arg * (-5.0 + arg))))
    return Series(m, v)


def gen_dna_walk(text: str) -> Series:
    """Walk representation of a nucleotide sequence.

    Accepts plain sequence text or FASTA (lines starting with '>' are
    ignored); whitespace is stripped and case folded.  The walk starts at
    v_1 = 0 on the first nucleotide and steps by +1 for A/G and -1 for C/T
    from the second nucleotide on.
    """
    lines = [ln for ln in text.splitlines() if not ln.lstrip().startswith(">")]
    sequence = "".join("".join(lines).split()).upper()
    if not sequence:
        raise ValueError("empty nucleotide sequence")
    for pos, ch in enumerate(sequence, start=1):
        if ch not in "ACGT":
            raise ValueError(f"invalid nucleotide {ch!r} at position {pos}")
    steps = np.where(np.isin(list(sequence), ("A", "G")), 1.0, -1.0)
    v = np.concatenate([[0.0], np.cumsum(steps[1:])])
    return Series(np.arange(1, v.size + 1, dtype=float), v)


def gen_random_walk(m_count: int, seed: int) -> Series:
    """Gaussian random walk v_1 = 0, v_m = v_{m-1} + xi_m, xi ~ N(0, 1).

    The same (m_count, seed) always produces the identical series.
    """
    if m_count < 2:
        raise ValueError("need at least 2 samples")
    rng = np.random.default_rng(seed)
    v = np.concatenate([[0.0], np.cumsum(rng.standard_normal(m_count - 1))])
    return Series(np.arange(1, m_count + 1, dtype=float), v)


def load_series_csv(path: str | PathLike) -> Series:
    """Read a series from CSV: one numeric column (abscissae become 1..M)
    or two columns (z, w).  An optional single header line is detected by a
    non-numeric first field."""
    text = Path(path).read_text(encoding="utf-8")
    rows: list[list[float]] = []
    first_line = True
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip():
            continue
        cells = [c.strip() for c in line.split(",")]
        header_candidate = first_line
        first_line = False
        try:
            values = [float(c) for c in cells]
        except ValueError:
            try:
                float(cells[0])
            except ValueError:
                if header_candidate:
                    continue
            raise ValueError(f"{path}: non-numeric value on line {lineno}")
        if len(values) not in (1, 2) or (rows and len(values) != len(rows[-1])):
            raise ValueError(f"{path}: expected 1 or 2 columns, got {len(values)} on line {lineno}")
        rows.append(values)
    if len(rows) < 2:
        raise ValueError(f"{path}: need at least 2 data rows")
    data = np.array(rows)
    if data.shape[1] == 1:
        return Series(np.arange(1, data.shape[0] + 1, dtype=float), data[:, 0])
    return Series(data[:, 0], data[:, 1])


def normalize(series: Series) -> tuple[Series, NormalizationParams]:
    """Center and scale to mean 0, mean-square 1: w = (v - s1) / s2.

    s2 is the population standard deviation (divide by M) -- the sample
    convention would leave the mean square at M/(M-1), not 1.
    """
    s1 = float(np.mean(series.w))
    s2 = float(np.std(series.w))
    if s2 == 0.0:
        raise ValueError("constant series cannot be normalized")
    return Series(series.z, (series.w - s1) / s2), NormalizationParams(s1, s2)


def _moving_average(values: np.ndarray, window: int) -> np.ndarray:
    if window == 1:
        return values
    padded = np.pad(values, window // 2, mode="edge")
    return np.convolve(padded, np.full(window, 1.0 / window), mode="valid")


def select_knots(
    series: Series,
    mode: str = "manual",
    *,
    indices: Sequence[int] | None = None,
    n_interior: int | None = None,
    window: int = 101,
    prominence: float = 0.05,
) -> Knots:
    """Choose interpolation knots on the series; ordinates always come from
    the series itself, and both endpoints are always knots.

    Mode ``manual`` takes 1-based interior sample ``indices`` (1 and M are
    reserved for the endpoints).  Mode ``extrema`` smooths the series with a
    centered moving average of odd ``window`` length, finds local maxima and
    minima with at least ``prominence``, and keeps the ``n_interior`` most
    prominent ones (ties broken toward smaller index).  If fewer candidates
    than requested are found, the fit proceeds with what exists, except that
    fewer than 2 candidates against a request of >= 2 is an error.
    """
    m_count = series.m_count
    if mode == "manual":
        if not indices:
            raise ValueError("manual mode requires interior knot indices")
        chosen = sorted(int(i) for i in indices)
        if len(set(chosen)) != len(chosen):
            raise ValueError("duplicate knot indices")
        for i in chosen:
            if not 2 <= i <= m_count - 1:
                raise ValueError(
                    f"interior knot index {i} out of range 2..{m_count - 1} "
                    "(indices are 1-based; 1 and M are reserved for endpoints)"
                )
        interior = np.asarray(chosen, dtype=int) - 1
    elif mode == "extrema":
        if n_interior is None or n_interior < 1:
            raise ValueError("extrema mode requires n_interior >= 1")
        if window < 1 or window % 2 == 0:
            raise ValueError("smoothing window must be a positive odd integer")
        smoothed = _moving_average(series.w, window)
        cands: list[tuple[float, int]] = []
        for sign in (1.0, -1.0):
            peaks, props = find_peaks(sign * smoothed, prominence=prominence)
            cands.extend(zip(props["prominences"], peaks))
        if len(cands) == 0 or (n_interior >= 2 and len(cands) < 2):
            raise ValueError(
                f"found only {len(cands)} interior extrema with prominence >= "
                f"{prominence} (window {window}); need at least {min(n_interior, 2)}"
            )
        cands.sort(key=lambda c: (-c[0], c[1]))
        interior = np.sort([idx for _, idx in cands[:n_interior]])
    else:
        raise ValueError(f"unknown knot selection mode {mode!r}")

    full = np.concatenate([[0], interior, [m_count - 1]])
    return Knots(series.z[full], series.w[full])
