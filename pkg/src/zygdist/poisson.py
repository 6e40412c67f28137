"""Exact spectral Poisson extension to the upper half-space, its second
y-derivative, the large-hyperbolic-derivative cell sets, and the bmo norms.

On the torus the Poisson kernel is a pure Fourier multiplier exp(-2 pi |k| y)
and the derivative multiplier is (2 pi |k|)^2 exp(-2 pi |k| y), so heights
need not be grid aligned and there is no kernel truncation error.  Fields are
restricted to y <= 1; the lowest frequencies dominate above that and carry no
scale information.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .dyadic import HalfSpaceSet, threshold_set
from .gridfn import GridFunction, bessel_lift, sup_norm, _freq_sq
from .secdiff import CELL_FRACS

_DEFAULT_FIELD_MARGIN = 2  # deepest field level is J_grid - margin, as for second differences


def _abs_freq(n: int, J: int) -> np.ndarray:
    return np.sqrt(_freq_sq(n, J))


def _apply_multiplier(f: GridFunction, mult: np.ndarray, label: str) -> GridFunction:
    if f.n == 1:
        out = np.fft.ifft(np.fft.fft(f.samples) * mult).real
    else:
        out = np.fft.ifft2(np.fft.fft2(f.samples) * mult).real
    return GridFunction(f.n, f.J_grid, out, label=label)


def poisson_extend(f: GridFunction, y: float) -> GridFunction:
    """Harmonic extension u(., y), one exact multiplier per height."""
    if y <= 0:
        raise ValueError("height must be > 0")
    mult = np.exp(-2.0 * np.pi * _abs_freq(f.n, f.J_grid) * y)
    return _apply_multiplier(f, mult, label=f"{f.label}|P[{y:g}]")


def d2y_extension(f: GridFunction, y: float) -> GridFunction:
    """d^2/dy^2 of the harmonic extension at height y."""
    if y <= 0:
        raise ValueError("height must be > 0")
    ak = _abs_freq(f.n, f.J_grid)
    mult = (2.0 * np.pi * ak) ** 2 * np.exp(-2.0 * np.pi * ak * y)
    return _apply_multiplier(f, mult, label=f"{f.label}|d2yP[{y:g}]")


@dataclass
class DerivativeField:
    """Per-cell max of y^(2-s) |d^2 u / dy^2| over the cell's probe points."""

    label: str
    s: float
    J_max: int
    values: dict[int, np.ndarray]

    @property
    def max_value(self) -> float:
        return max((float(v.max()) for v in self.values.values() if v.size), default=0.0)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level", "index", "value"])
            for j in sorted(self.values):
                flat = self.values[j].ravel()
                for pos, val in enumerate(flat):
                    writer.writerow([j, pos, repr(float(val))])


def derivative_field(f: GridFunction, s: float, J_max: int) -> DerivativeField:
    """Sample y^(2-s) |d2y u| at heights CELL_FRACS * 2^-j, all grid columns."""
    if not 0.0 < s <= 1.0:
        raise ValueError("s must lie in (0, 1]")
    if J_max > f.J_grid:
        raise ValueError(f"J_max={J_max} exceeds grid depth {f.J_grid}")
    values: dict[int, np.ndarray] = {}
    for j in range(J_max + 1):
        cells = 2**j
        pts = 2 ** (f.J_grid - j)
        level_max = np.zeros((cells,) * f.n)
        for frac in CELL_FRACS:
            y = frac * 2.0**-j
            g = np.abs(d2y_extension(f, y).samples) * y ** (2.0 - s)
            if f.n == 1:
                per_cell = g.reshape(cells, pts).max(axis=1)
            else:
                per_cell = g.reshape(cells, pts, cells, pts).max(axis=(1, 3))
            np.maximum(level_max, per_cell, out=level_max)
        values[j] = level_max
    return DerivativeField(label=f.label, s=s, J_max=J_max, values=values)


def holder_poisson_norm(f: GridFunction, s: float, J_max: int | None = None) -> float:
    """sup|f| + max over Whitney probe points of y^(2-s) |d2y u|."""
    if J_max is None:
        J_max = f.J_grid - _DEFAULT_FIELD_MARGIN
    field = derivative_field(f, s, J_max)
    return sup_norm(f) + field.max_value


def build_D(
    f: GridFunction, s: float, eps: float, J_max: int,
    field: DerivativeField | None = None,
) -> HalfSpaceSet:
    """Cells where y^(2-s) |d2y u| strictly exceeds eps somewhere."""
    if field is None:
        field = derivative_field(f, s, J_max)
    return threshold_set(field.values, eps, f.n, field.J_max)


@dataclass
class LipschitzReport:
    max_ratio: float
    pairs_used: int
    sample_count: int
    norm: float
    s: float


def lipschitz_check(f: GridFunction, s: float, sample_count: int, seed: int) -> LipschitzReport:
    """Hyperbolic Lipschitz constant of g = y^(2-s) d2y u, empirically.

    Samples point pairs at hyperbolic distance <= 2 (heights quantized to a
    per-octave ladder so derivative slices are computed once per height) and
    returns max |g(p) - g(q)| / (norm * rho(p, q)).  Same-seed runs with a
    larger sample count extend the same sequence.
    """
    norm = holder_poisson_norm(f, s)
    if norm == 0.0:
        raise ValueError("degenerate function: zero norm")
    N = f.grid_size
    J_top = f.J_grid - _DEFAULT_FIELD_MARGIN
    fracs = np.linspace(0.5, 1.0, 9)[1:]  # (1/2, 1] in eighths
    rng = np.random.default_rng(seed)
    u = rng.uniform(size=(sample_count, 6))

    lev1 = np.floor(u[:, 0] * (J_top + 1)).astype(int)
    fr1 = np.floor(u[:, 1] * fracs.size).astype(int)
    # neighbor height: same or adjacent level, any frac
    lev2 = np.clip(lev1 + np.round(2.0 * u[:, 2] - 1.0).astype(int), 0, J_top)
    fr2 = np.floor(u[:, 3] * fracs.size).astype(int)
    y1 = fracs[fr1] * 2.0 ** (-lev1.astype(float))
    y2 = fracs[fr2] * 2.0 ** (-lev2.astype(float))

    # one derivative slice per quantized height, gathered by fancy indexing
    slices = np.empty(((J_top + 1) * fracs.size,) + (N,) * f.n)
    for lev in range(J_top + 1):
        for fr in range(fracs.size):
            y = float(fracs[fr] * 2.0**-lev)
            slices[lev * fracs.size + fr] = d2y_extension(f, y).samples * y ** (2.0 - s)
    hid1 = lev1 * fracs.size + fr1
    hid2 = lev2 * fracs.size + fr2

    x1 = np.floor(u[:, 4] * N).astype(int)
    dx = np.round((2.0 * u[:, 5] - 1.0) * y1 * N).astype(int)
    x2 = (x1 + dx) % N
    tx = np.abs(x1 - x2) / N
    tx = np.minimum(tx, 1.0 - tx)
    if f.n == 1:
        g1 = slices[hid1, x1]
        g2 = slices[hid2, x2]
        dist_sq = tx**2
    else:
        rng2 = np.random.default_rng(seed + 1)
        v = rng2.uniform(size=(sample_count, 3))
        x1b = np.floor(v[:, 0] * N).astype(int)
        ang = 2.0 * np.pi * v[:, 1]
        dxa = np.round(dx * np.cos(ang)).astype(int)
        dxb = np.round(dx * np.sin(ang)).astype(int)
        x2 = (x1 + dxa) % N
        x2b = (x1b + dxb) % N
        g1 = slices[hid1, x1, x1b]
        g2 = slices[hid2, x2, x2b]
        ta = np.minimum(np.abs(dxa) % N, N - np.abs(dxa) % N) / N
        tb = np.minimum(np.abs(dxb) % N, N - np.abs(dxb) % N) / N
        dist_sq = ta**2 + tb**2

    rho = np.arccosh(1.0 + (dist_sq + (y1 - y2) ** 2) / (2.0 * y1 * y2))
    ok = (rho > 0) & (rho <= 2.0)
    ratios = np.abs(g1 - g2)[ok] / (norm * rho[ok])
    return LipschitzReport(
        max_ratio=float(ratios.max()) if ratios.size else 0.0,
        pairs_used=int(ok.sum()),
        sample_count=sample_count,
        norm=norm,
        s=s,
    )


def bmo_norm(f: GridFunction, J_max: int) -> float:
    """Dyadic mean-oscillation sup plus the global L2 norm.

    sup over dyadic cubes of levels 0..J_max of the L2 mean oscillation,
    plus the L2 norm over the torus (its single unit cube).
    """
    if J_max > f.J_grid:
        raise ValueError(f"J_max={J_max} exceeds grid depth {f.J_grid}")
    N = f.grid_size
    best = 0.0
    sums = f.samples.astype(float)
    sqs = f.samples.astype(float) ** 2
    count = 1
    # walk levels J_grid .. 0; oscillation is meaningful once recorded levels <= J_max
    for j in range(f.J_grid, -1, -1):
        if j <= J_max:
            mean = sums / count
            meansq = sqs / count
            osc_sq = np.maximum(meansq - mean**2, 0.0)
            best = max(best, float(osc_sq.max()))
        if j > 0:
            if f.n == 1:
                sums = sums[0::2] + sums[1::2]
                sqs = sqs[0::2] + sqs[1::2]
            else:
                h, w = sums.shape
                sums = sums.reshape(h // 2, 2, w // 2, 2).sum(axis=(1, 3))
                sqs = sqs.reshape(h // 2, 2, w // 2, 2).sum(axis=(1, 3))
            count *= 2**f.n
    l2 = math.sqrt(float((f.samples**2).mean()))
    return math.sqrt(best) + l2


def jbmo_direct_norm(f: GridFunction, s: float, J_max: int) -> float:
    """bmo norm of the order -s Bessel lift (the roughened function)."""
    if not 0.0 < s <= 1.0:
        raise ValueError("s must lie in (0, 1]")
    return bmo_norm(bessel_lift(f, -s), J_max)
