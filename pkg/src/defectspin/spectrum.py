"""Peak statistics, broadened spectra and plot-ready exports.

Statistics are moments of the weighted line list inside an analysis
window; the default window starts at 30 MHz because the low-frequency
branch of strongly coupled nuclei falls outside the measured range. The
width reported is the FWHM of a Gaussian sharing the distribution's
standard deviation. Rendered spectra are purely presentational.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .isotopes import GAUSSIAN_FWHM_FACTOR
from .solvers import LineList

DEFAULT_WINDOW = (30.0, math.inf)
DEFAULT_GRID = (0.0, 300.0, 0.1)        # MHz: start, stop, step
DEFAULT_LINE_WIDTH = 1.0                # MHz FWHM per line

# Fixed header key order so identical runs serialize byte-identically.
_HEADER_KEYS = ("field", "method", "seed", "shift", "window")


@dataclass(frozen=True)
class PeakStats:
    """Weighted moments of a line list inside an analysis window."""

    center: float
    sigma: float
    fwhm_gauss: float
    window: tuple[float, float]
    included_weight_fraction: float


@dataclass(eq=False)
class Spectrum:
    """Broadened, peak-normalized spectrum on a uniform grid."""

    grid: np.ndarray
    intensity: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.intensity = np.asarray(self.intensity, dtype=float)
        if self.grid.ndim != 1 or self.grid.size != self.intensity.size:
            raise ValueError("grid and intensity must be matching 1-d arrays")
        if self.grid.size >= 2:
            steps = np.diff(self.grid)
            if steps.min() <= 0 or not np.allclose(steps, steps[0], rtol=1e-9):
                raise ValueError("grid must be strictly increasing and uniform")
        if self.intensity.size and self.intensity.min() < 0:
            raise ValueError("intensities must be non-negative")


def peak_stats(lines: LineList, window=DEFAULT_WINDOW) -> PeakStats:
    """Weighted mean, standard deviation and Gaussian FWHM of the lines.

    Line mass is weight times intensity. Lines outside ``window`` are
    excluded from the moments; the included mass fraction is reported.
    """
    lo, hi = float(window[0]), float(window[1])
    if not lo < hi:
        raise ValueError("window must satisfy lo < hi")
    mass = lines.weights * lines.intensities
    total = float(mass.sum())
    inside = (lines.frequencies >= lo) & (lines.frequencies <= hi)
    m = mass[inside]
    if m.size == 0 or m.sum() <= 0.0:
        raise ValueError("no line with positive mass inside the analysis window")
    f = lines.frequencies[inside]
    m_sum = float(m.sum())
    center = float((m * f).sum() / m_sum)
    sigma = float(math.sqrt(max((m * (f - center) ** 2).sum() / m_sum, 0.0)))
    return PeakStats(
        center=center,
        sigma=sigma,
        fwhm_gauss=GAUSSIAN_FWHM_FACTOR * sigma,
        window=(lo, hi),
        included_weight_fraction=m_sum / total if total > 0 else 0.0,
    )


def default_grid() -> np.ndarray:
    start, stop, step = DEFAULT_GRID
    n = int(round((stop - start) / step))
    return start + step * np.arange(n + 1)


def synthesize(
    lines: LineList, grid: np.ndarray | None = None,
    per_line_width: float = DEFAULT_LINE_WIDTH,
) -> Spectrum:
    """Sum one Gaussian kernel per line, peak-normalized.

    Kernel area is proportional to weight times intensity and
    ``per_line_width`` is the per-line FWHM in MHz.
    """
    if per_line_width <= 0:
        raise ValueError("per_line_width must be positive")
    g = default_grid() if grid is None else np.asarray(grid, dtype=float)
    out = np.zeros(g.size)
    mass = lines.weights * lines.intensities
    live = mass > 0
    freqs, mass = lines.frequencies[live], mass[live]
    if freqs.size == 0:
        warnings.warn("no lines with positive mass; spectrum is all zero")
        return Spectrum(g, out, {"per_line_width": per_line_width, "shift": 0.0})
    if freqs.min() < g[0] or freqs.max() > g[-1]:
        warnings.warn(
            f"grid [{g[0]}, {g[-1]}] MHz does not cover all lines "
            f"([{freqs.min():.2f}, {freqs.max():.2f}] MHz)"
        )
    sig = per_line_width / GAUSSIAN_FWHM_FACTOR
    # Chunk the kernel sum so composite line lists stay within memory.
    for start in range(0, freqs.size, 4096):
        fs = freqs[start : start + 4096, None]
        ms = mass[start : start + 4096, None]
        out += (ms * np.exp(-((g[None, :] - fs) ** 2) / (2.0 * sig * sig))).sum(axis=0)
    peak = out.max()
    if peak > 0:
        out /= peak
    meta = dict(lines.meta)
    meta.update(
        method=lines.method,
        field=lines.field.tolist(),
        per_line_width=per_line_width,
        shift=meta.get("shift", 0.0),
    )
    return Spectrum(g, out, meta)


def shift(obj, delta: float):
    """Translate every frequency by ``delta`` MHz; records the shift."""
    delta = float(delta)
    if isinstance(obj, LineList):
        meta = dict(obj.meta)
        meta["shift"] = meta.get("shift", 0.0) + delta
        return LineList(
            obj.method,
            obj.field,
            obj.frequencies + delta,
            obj.intensities.copy(),
            obj.weights.copy(),
            meta,
        )
    if isinstance(obj, Spectrum):
        meta = dict(obj.meta)
        meta["shift"] = meta.get("shift", 0.0) + delta
        return Spectrum(obj.grid + delta, obj.intensity.copy(), meta)
    raise TypeError(f"cannot shift object of type {type(obj).__name__}")


def _format_header(meta: dict) -> list[str]:
    ordered = {}
    for key in _HEADER_KEYS:
        ordered[key] = meta.get(key)
    for key in sorted(meta):
        if key not in ordered:
            ordered[key] = meta[key]
    return [f"# {k} = {v}" for k, v in ordered.items() if v is not None]


def write_linelist(lines: LineList, path, extra_meta: dict | None = None):
    """Three-column export (frequency_MHz, intensity, weight), sorted."""
    ordered = lines.sorted()
    meta = dict(ordered.meta)
    meta.update(method=ordered.method, field=ordered.field.tolist())
    if extra_meta:
        meta.update(extra_meta)
    rows = [
        f"{f:.9g} {i:.9g} {w:.9g}"
        for f, i, w in zip(ordered.frequencies, ordered.intensities, ordered.weights)
    ]
    header = _format_header(meta)
    header.append("# frequency_MHz intensity weight")
    with open(path, "w") as fh:
        fh.write("\n".join(header + rows) + "\n")


def write_spectrum(spectrum: Spectrum, path, extra_meta: dict | None = None):
    """Two-column export (frequency_MHz, intensity) with metadata header."""
    meta = dict(spectrum.meta)
    if extra_meta:
        meta.update(extra_meta)
    rows = [
        f"{f:.9g} {v:.9g}" for f, v in zip(spectrum.grid, spectrum.intensity)
    ]
    header = _format_header(meta)
    header.append("# frequency_MHz intensity")
    with open(path, "w") as fh:
        fh.write("\n".join(header + rows) + "\n")
