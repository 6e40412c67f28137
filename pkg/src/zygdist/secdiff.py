"""Maximal second differences, Holder/Zygmund seminorms over probe scales,
the large-second-difference cell sets, and empirical continuity checks.

The maximal second difference at (x, y) is the sup over directions |h| = y of
|f(x+h) - 2 f(x) + f(x-h)|.  On the grid, h is a lattice vector (exact for
n=1; rounded to within 2 percent of |h| = y for n=2), so every evaluation is
pure index arithmetic with periodic wraparound.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from .dyadic import HalfSpaceSet, threshold_set
from .gridfn import GridFunction

# probe heights inside a Whitney cell, as fractions of the cube side
CELL_FRACS = (0.625, 0.75, 0.875, 1.0)


def _directions(n: int, m: int, N: int, K: int) -> list[tuple[int, ...]]:
    """Lattice direction vectors of norm m (grid units), K angles for n=2."""
    if m < 1:
        raise ValueError("probe scale below grid resolution")
    if n == 1:
        return [(m,)]
    dirs: list[tuple[int, ...]] = []
    for i in range(max(K, 1)):
        theta = math.pi * i / max(K, 1)
        h = (round(m * math.cos(theta)), round(m * math.sin(theta)))
        norm = math.hypot(*h)
        if norm == 0 or abs(norm - m) > 0.02 * m:
            continue
        if h not in dirs and (-h[0], -h[1]) not in dirs:
            dirs.append(h)
    if not dirs:
        dirs = [(m, 0)]
    return dirs


def _d2_at_indices(samples: np.ndarray, idx, h: tuple[int, ...]) -> np.ndarray:
    """|f(x+h) - 2 f(x) + f(x-h)| at the given grid indices, periodic.

    Summed as (f(x+h) + f(x-h)) - 2 f(x) so the value is exactly even in h.
    """
    N = samples.shape[0]
    if samples.ndim == 1:
        i = idx[0]
        return np.abs((samples[(i + h[0]) % N] + samples[(i - h[0]) % N]) - 2.0 * samples[i])
    i, j = idx
    return np.abs(
        (samples[(i + h[0]) % N, (j + h[1]) % N]
         + samples[(i - h[0]) % N, (j - h[1]) % N])
        - 2.0 * samples[i, j]
    )


def second_difference(f: GridFunction, x, y: float, K: int = 1) -> float:
    """Maximal second difference at grid point x and scale y = m * 2^-J."""
    N = f.grid_size
    m = y * N
    if abs(m - round(m)) > 1e-9 or round(m) < 1:
        raise ValueError(f"y={y} is not a positive multiple of the grid step")
    m = int(round(m))
    idx = (np.asarray([x], dtype=int),) if f.n == 1 else (
        np.asarray([x[0]], dtype=int), np.asarray([x[1]], dtype=int))
    best = 0.0
    for h in _directions(f.n, m, N, K):
        best = max(best, float(_d2_at_indices(f.samples, idx, h)[0]))
    return best


def _default_K(n: int) -> int:
    return 1 if n == 1 else 8


def holder_seminorm(f: GridFunction, s: float, K: int | None = None, refine: int = 1) -> float:
    """max over grid x, probe scales and directions of Delta2 f / y^s.

    refine=1 probes the dyadic scales y = 2^-j, j = 1..J_grid-1; refine=r
    subdivides each octave into r scales (the declared resolution bias of the
    probe maximum shrinks as r grows).
    """
    if not 0.0 < s <= 1.0:
        raise ValueError("s must lie in (0, 1]")
    if refine < 1:
        raise ValueError("refine must be >= 1")
    K = _default_K(f.n) if K is None else K
    N = f.grid_size
    if f.n == 1:
        idx = (np.arange(N),)
    else:
        ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
        idx = (ii, jj)
    best = 0.0
    for j in range(1, f.J_grid):
        base = 2 ** (f.J_grid - j)
        ms = sorted({int(round(base * (0.5 + q / (2.0 * refine)))) for q in range(1, refine + 1)})
        for m in ms:
            if m < 1 or m >= N:
                continue
            y = m / N
            for h in _directions(f.n, m, N, K):
                val = float(_d2_at_indices(f.samples, idx, h).max())
                best = max(best, val / y**s)
    return best


@dataclass
class SecondDiffField:
    """Per-cell max of Delta2 f(x, y) / y^s over the cell's probe points."""

    label: str
    s: float
    J_max: int
    K: int
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


def second_diff_field(
    f: GridFunction, s: float, J_max: int,
    K: int | None = None, probes_per_cell: int = 8,
) -> SecondDiffField:
    """Sample the second-difference ratio on every Whitney cell.

    Probe heights are the CELL_FRACS multiples of the cube side that land on
    the grid (all four at levels j <= J_grid-3, the representable pair at
    J_grid-2); probe x points are stride-coarsened so each cell sees about
    probes_per_cell points per axis.
    """
    if not 0.0 < s <= 1.0:
        raise ValueError("s must lie in (0, 1]")
    if J_max > f.J_grid - 2:
        raise ValueError(f"J_max={J_max} too deep, need J_max <= J_grid-2={f.J_grid - 2}")
    K = _default_K(f.n) if K is None else K
    N = f.grid_size
    values: dict[int, np.ndarray] = {}
    for j in range(J_max + 1):
        cells_per_axis = 2**j
        pts_per_cell = min(2 ** (f.J_grid - j), probes_per_cell)
        stride = 2 ** (f.J_grid - j) // pts_per_cell
        probes = np.arange(0, N, stride)
        if f.n == 1:
            idx = (probes,)
        else:
            ii, jj = np.meshgrid(probes, probes, indexing="ij")
            idx = (ii, jj)
        level_max = np.zeros((cells_per_axis,) * f.n)
        base = 2 ** (f.J_grid - j)
        for frac in CELL_FRACS:
            m_exact = base * frac
            m = int(round(m_exact))
            if abs(m - m_exact) > 1e-9 or m < 1:
                continue
            y = m / N
            for h in _directions(f.n, m, N, K):
                vals = _d2_at_indices(f.samples, idx, h) / y**s
                if f.n == 1:
                    per_cell = vals.reshape(cells_per_axis, pts_per_cell).max(axis=1)
                else:
                    per_cell = vals.reshape(
                        cells_per_axis, pts_per_cell, cells_per_axis, pts_per_cell
                    ).max(axis=(1, 3))
                np.maximum(level_max, per_cell, out=level_max)
        values[j] = level_max
    return SecondDiffField(label=f.label, s=s, J_max=J_max, K=K, values=values)


def build_S(
    f: GridFunction, s: float, eps: float, J_max: int,
    K: int | None = None, probes_per_cell: int = 8,
    field: SecondDiffField | None = None,
) -> HalfSpaceSet:
    """Cells where the sampled second-difference ratio strictly exceeds eps."""
    if field is None:
        field = second_diff_field(f, s, J_max, K=K, probes_per_cell=probes_per_cell)
    return threshold_set(field.values, eps, f.n, field.J_max)


def _d2_vector(samples: np.ndarray, pos, m: np.ndarray, K: int) -> np.ndarray:
    """Maximal second difference at per-sample positions and scales m."""
    N = samples.shape[0]
    if samples.ndim == 1:
        i = pos[0]
        return np.abs((samples[(i + m) % N] + samples[(i - m) % N]) - 2.0 * samples[i])
    out = np.zeros(m.shape)
    i, j = pos
    for t in range(max(K, 1)):
        theta = math.pi * t / max(K, 1)
        ha = np.round(m * math.cos(theta)).astype(int)
        hb = np.round(m * math.sin(theta)).astype(int)
        norm = np.hypot(ha, hb)
        valid = (norm > 0) & (np.abs(norm - m) <= 0.02 * m)
        vals = np.abs(
            (samples[(i + ha) % N, (j + hb) % N]
             + samples[(i - ha) % N, (j - hb) % N])
            - 2.0 * samples[i, j]
        )
        np.maximum(out, np.where(valid, vals, 0.0), out=out)
    return out


@dataclass
class ContinuityReport:
    max_ratio: float
    pairs_used: int
    sample_count: int
    seminorm: float
    s: float


def continuity_check(f: GridFunction, s: float, sample_count: int, seed: int) -> ContinuityReport:
    """Empirical constant for the second-difference modulus of continuity.

    Samples admissible pairs (x, y), (x', y') with 1/2 < y/y' < 2 (and
    |x - x'| < y/2 when s = 1) and returns the max of
    |Delta2(x,y) - Delta2(x',y')| / (seminorm * modulus), where the modulus is
    |x-x'|^s + |y-y'|^s for s < 1 and the log-corrected variant at s = 1.
    Drawing more samples with the same seed extends the same sequence.
    """
    norm = holder_seminorm(f, s)
    if norm == 0.0:
        raise ValueError("degenerate function: zero seminorm")
    N = f.grid_size
    K = _default_K(f.n)
    rng = np.random.default_rng(seed)
    u = rng.uniform(size=(sample_count, 6))

    m1 = (1 + np.floor(u[:, 0] * (N // 2 - 1))).astype(int)
    ratio = 0.5 + 1.5 * u[:, 1]
    m2 = np.clip(np.round(m1 * ratio).astype(int), 1, N - 1)
    ok = (2 * m2 > m1) & (m2 < 2 * m1)

    if s == 1.0:
        span = np.maximum(np.ceil(m1 / 2.0) - 1.0, 0.0)
    else:
        span = m1.astype(float)
    dx = np.round((2.0 * u[:, 2] - 1.0) * span).astype(int)
    if f.n == 1:
        x1 = np.floor(u[:, 3] * N).astype(int)
        x2 = (x1 + dx) % N
        pos1, pos2 = (x1,), (x2,)
        dist_x = np.abs(dx) / N
    else:
        x1a = np.floor(u[:, 3] * N).astype(int)
        x1b = np.floor(u[:, 4] * N).astype(int)
        ang = 2.0 * np.pi * u[:, 5]
        dxa = np.round(dx * np.cos(ang)).astype(int)
        dxb = np.round(dx * np.sin(ang)).astype(int)
        pos1 = (x1a, x1b)
        pos2 = ((x1a + dxa) % N, (x1b + dxb) % N)
        dist_x = np.hypot(dxa, dxb) / N
        if s == 1.0:
            ok &= dist_x < m1 / (2.0 * N)

    d2_1 = _d2_vector(f.samples, pos1, m1, K)
    d2_2 = _d2_vector(f.samples, pos2, m2, K)

    y1 = m1 / N
    dy = np.abs(m1 - m2) / N
    if s == 1.0:
        with np.errstate(divide="ignore", invalid="ignore"):
            tx = np.where(dist_x > 0, dist_x * np.log(np.e + y1 / np.where(dist_x > 0, dist_x, 1.0)), 0.0)
            ty = np.where(dy > 0, dy * np.log(np.e + y1 / np.where(dy > 0, dy, 1.0)), 0.0)
        modulus = tx + ty
    else:
        modulus = dist_x**s + dy**s
    ok &= modulus > 0

    ratios = np.abs(d2_1 - d2_2)[ok] / (norm * modulus[ok])
    return ContinuityReport(
        max_ratio=float(ratios.max()) if ratios.size else 0.0,
        pairs_used=int(ok.sum()),
        sample_count=sample_count,
        seminorm=norm,
        s=s,
    )
