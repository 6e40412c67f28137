"""Dyadic cubes, Whitney cells, half-space sets, the Carleson functional,
and the hyperbolic geometry of the upper half-space over the torus.

A Whitney cell over the dyadic cube Q of level j is the slab
T(Q) = Q x [l(Q)/2, l(Q)].  Against the measure dx dy / y it carries exactly
|Q| * log 2, which makes the Carleson functional of any finite cell union an
exact finite sum.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

LOG2 = math.log(2.0)


@dataclass(frozen=True)
class DyadicCube:
    n: int
    level: int
    index: tuple[int, ...]

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")
        idx = tuple(int(v) for v in self.index)
        if len(idx) != self.n or any(not 0 <= v < 2**self.level for v in idx):
            raise ValueError(f"index {idx} outside [0, 2^{self.level})^{self.n}")
        object.__setattr__(self, "index", idx)

    @property
    def side(self) -> float:
        return 2.0**-self.level

    @property
    def volume(self) -> float:
        return 2.0 ** (-self.n * self.level)

    def contains(self, other: "DyadicCube") -> bool:
        """True iff other is a descendant of (or equal to) this cube."""
        if other.n != self.n or other.level < self.level:
            return False
        shift = other.level - self.level
        return all(o >> shift == s for o, s in zip(other.index, self.index))


def cube_contains(Q: DyadicCube, P: DyadicCube) -> bool:
    return Q.contains(P)


@dataclass(frozen=True)
class WhitneyCell:
    cube: DyadicCube

    @property
    def y_range(self) -> tuple[float, float]:
        side = self.cube.side
        return (side / 2.0, side)

    @property
    def weight(self) -> float:
        # integral of dy/y over [l/2, l] times |Q|
        return self.cube.volume * LOG2

    def center(self) -> tuple[tuple[float, ...], float]:
        side = self.cube.side
        x = tuple((k + 0.5) * side for k in self.cube.index)
        return x, 0.75 * side


@dataclass(frozen=True)
class HalfSpacePoint:
    x: tuple[float, ...]
    y: float

    def __post_init__(self):
        if self.y <= 0:
            raise ValueError("y must be > 0")
        object.__setattr__(self, "x", tuple(float(v) for v in self.x))


class HalfSpaceSet:
    """Finite union of Whitney cells, stored as per-level boolean masks."""

    def __init__(self, n: int, J_max: int, masks: dict[int, np.ndarray] | None = None):
        if n not in (1, 2):
            raise ValueError("n must be 1 or 2")
        if J_max < 0:
            raise ValueError("J_max must be >= 0")
        self.n = n
        self.J_max = J_max
        self._masks = {}
        for j in range(J_max + 1):
            shape = (2**j,) * n
            if masks is not None and j in masks:
                m = np.asarray(masks[j], dtype=bool)
                if m.shape != shape:
                    raise ValueError(f"mask at level {j} has shape {m.shape}, expected {shape}")
                self._masks[j] = m
            else:
                self._masks[j] = np.zeros(shape, dtype=bool)

    @classmethod
    def from_cells(cls, n: int, J_max: int, cells) -> "HalfSpaceSet":
        out = cls(n, J_max)
        for item in cells:
            j, idx = item[0], tuple(item[1:]) if not isinstance(item[1], tuple) else item[1]
            if j > J_max:
                raise ValueError(f"cell level {j} exceeds J_max={J_max}")
            out._masks[j][idx] = True
        return out

    @classmethod
    def full_stack(cls, n: int, J_max: int) -> "HalfSpaceSet":
        out = cls(n, J_max)
        for j in range(J_max + 1):
            out._masks[j][...] = True
        return out

    def mask(self, j: int) -> np.ndarray:
        return self._masks[j]

    def cells(self):
        for j in range(self.J_max + 1):
            for idx in np.argwhere(self._masks[j]):
                yield WhitneyCell(DyadicCube(self.n, j, tuple(int(v) for v in idx)))

    @property
    def cell_count(self) -> int:
        return int(sum(m.sum() for m in self._masks.values()))

    def is_empty(self) -> bool:
        return self.cell_count == 0

    def __contains__(self, cell) -> bool:
        if isinstance(cell, WhitneyCell):
            j, idx = cell.cube.level, cell.cube.index
        else:
            j, idx = cell[0], tuple(cell[1]) if isinstance(cell[1], (tuple, list)) else (cell[1],)
        if j > self.J_max:
            return False
        return bool(self._masks[j][idx])

    def __eq__(self, other) -> bool:
        if not isinstance(other, HalfSpaceSet) or self.n != other.n or self.J_max != other.J_max:
            return False
        return all(np.array_equal(self._masks[j], other._masks[j]) for j in self._masks)

    def issubset(self, other: "HalfSpaceSet") -> bool:
        if self.n != other.n:
            return False
        for j in range(self.J_max + 1):
            mine = self._masks[j]
            if j > other.J_max:
                if mine.any():
                    return False
                continue
            if np.any(mine & ~other._masks[j]):
                return False
        return True

    def to_json(self) -> str:
        cells = [[j] + [int(v) for v in idx]
                 for j in range(self.J_max + 1)
                 for idx in np.argwhere(self._masks[j])]
        return json.dumps({"n": self.n, "J_max": self.J_max, "cells": cells})

    @classmethod
    def from_json(cls, text: str) -> "HalfSpaceSet":
        obj = json.loads(text)
        out = cls(obj["n"], obj["J_max"])
        for cell in obj["cells"]:
            out._masks[cell[0]][tuple(cell[1:])] = True
        return out

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["level"] + [f"k{i+1}" for i in range(self.n)])
            for j in range(self.J_max + 1):
                for idx in np.argwhere(self._masks[j]):
                    writer.writerow([j] + [int(v) for v in idx])


def threshold_set(values: dict[int, np.ndarray], eps: float, n: int, J_max: int) -> HalfSpaceSet:
    """Cells whose per-cell value strictly exceeds eps (ties excluded)."""
    if eps < 0:
        raise ValueError("eps must be >= 0")
    out = HalfSpaceSet(n, J_max)
    for j in range(J_max + 1):
        if j in values:
            out._masks[j] = values[j] > eps
    return out


def _pool_children(arr: np.ndarray, n: int) -> np.ndarray:
    if n == 1:
        return arr[0::2] + arr[1::2]
    h, w = arr.shape
    return arr.reshape(h // 2, 2, w // 2, 2).sum(axis=(1, 3))


def carleson_box_value(A: HalfSpaceSet, Q: DyadicCube, max_level: int | None = None) -> float:
    """(1/|Q|) * integral over Q x (0, l(Q)] of chi_A dy dx / y, exactly.

    Each cell T(P) with P inside Q contributes |P| * log 2.
    """
    if Q.n != A.n:
        raise ValueError("dimension mismatch")
    top = A.J_max if max_level is None else min(max_level, A.J_max)
    vol = 0.0
    for j in range(Q.level, top + 1):
        shift = j - Q.level
        sl = tuple(slice(k << shift, (k + 1) << shift) for k in Q.index)
        vol += float(A._masks[j][sl].sum()) * 2.0 ** (-A.n * j)
    return vol * 2.0 ** (A.n * Q.level) * LOG2


@dataclass
class CarlesonReport:
    """Depth-truncated Carleson suprema with a divergence diagnosis.

    m_values[i] is M_J at depth J = j_values[i]: the sup over dyadic boxes of
    level <= J of the box value computed from cells of level <= J.  M_J is
    constant in J beyond the deepest cell of the set.  The slope is a least
    squares fit of M_J against J over the top half of the depth range;
    "diverging" means it exceeds theta * log 2.
    """

    j_values: list[int]
    m_values: list[float]
    argmax: list[tuple[int, tuple[int, ...]] | None]
    slope: float
    theta: float
    diverging: bool
    fit_j: list[int] = field(default_factory=list)

    @property
    def m_final(self) -> float:
        return self.m_values[-1]

    @property
    def slope_over_log2(self) -> float:
        return self.slope / LOG2


def carleson_sup(A: HalfSpaceSet, J_range: tuple[int, int], theta: float) -> CarlesonReport:
    """M_J over a depth range, with the slope-based divergence flag.

    Depths beyond A.J_max are allowed: truncation there already includes every
    cell, so M_J continues with its final value.
    """
    j_lo, j_hi = int(J_range[0]), int(J_range[1])
    if j_lo < 0 or j_hi < j_lo:
        raise ValueError(f"empty or invalid depth range {J_range}")
    js = list(range(j_lo, j_hi + 1))

    m_values: list[float] = []
    argmax: list[tuple[int, tuple[int, ...]] | None] = []
    for J in js:
        best = 0.0
        best_cube = None
        top = min(J, A.J_max)
        acc = None  # volume of A-cells of level <= top inside each cube, per level
        for j in range(top, -1, -1):
            own = A._masks[j].astype(float) * 2.0 ** (-A.n * j)
            acc = own if acc is None else own + _pool_children(acc, A.n)
            values = acc * 2.0 ** (A.n * j)
            pos = int(np.argmax(values))
            val = float(values.flat[pos])
            if val > best:
                best = val
                best_cube = (j, tuple(int(v) for v in np.unravel_index(pos, values.shape)))
        m_values.append(best * LOG2)
        argmax.append(best_cube)

    fit_j = js[len(js) // 2:]
    if len(fit_j) < 2:
        fit_j = js[-2:] if len(js) >= 2 else js
    if len(fit_j) >= 2:
        ys = [m_values[js.index(j)] for j in fit_j]
        slope = float(np.polyfit(fit_j, ys, 1)[0])
    else:
        slope = 0.0
    return CarlesonReport(
        j_values=js,
        m_values=m_values,
        argmax=argmax,
        slope=slope,
        theta=theta,
        diverging=bool(slope > theta * LOG2),
        fit_j=fit_j,
    )


def torus_dist_sq(x1, x2) -> float:
    d = 0.0
    for a, b in zip(x1, x2):
        t = abs(a - b) % 1.0
        t = min(t, 1.0 - t)
        d += t * t
    return d


def hyperbolic_distance(p: HalfSpacePoint, q: HalfSpacePoint) -> float:
    """rho = arccosh(1 + (d_T(x,x')^2 + (y-y')^2) / (2 y y'))."""
    d2 = torus_dist_sq(p.x, q.x)
    num = d2 + (p.y - q.y) ** 2
    return float(np.arccosh(1.0 + num / (2.0 * p.y * q.y)))


def cell_diameter_bound(n: int) -> float:
    """Upper bound on the hyperbolic diameter of any Whitney cell.

    Worst pair inside T(Q): x-separation sqrt(n) l, y in [l/2, l]; the cosh
    argument is then at most 1 + 2 (n + 1/4), at every level.
    """
    return float(np.arccosh(1.0 + 2.0 * (n + 0.25)))


def _mark_intervals(mask: np.ndarray, lo_idx: np.ndarray, hi_idx: np.ndarray):
    """OR index ranges [lo, hi] (mod len(mask)) into a 1-d boolean mask."""
    size = mask.size
    full = hi_idx - lo_idx + 1 >= size
    if np.any(full):
        mask[...] = True
        return
    a = np.mod(lo_idx, size)
    b = np.mod(hi_idx, size)
    diff = np.zeros(size + 1, dtype=np.int64)
    wrap = a > b
    aw, bw = a[wrap], b[wrap]
    np.add.at(diff, np.zeros(aw.size, dtype=np.int64), 1)
    np.add.at(diff, bw + 1, -1)
    np.add.at(diff, aw, 1)
    diff[size] -= aw.size
    an, bn = a[~wrap], b[~wrap]
    np.add.at(diff, an, 1)
    np.add.at(diff, bn + 1, -1)
    mask |= np.cumsum(diff[:size]) > 0


def enlarge(A: HalfSpaceSet, R: float) -> HalfSpaceSet:
    """Cell-discretized hyperbolic R-neighborhood.

    Includes every cell (level <= J_max) whose center lies within hyperbolic
    distance R + delta_cell of some cell center of A, so the result always
    contains A and over-approximates the continuum neighborhood consistently
    across levels.
    """
    if R < 0:
        raise ValueError("R must be >= 0")
    thresh = R + cell_diameter_bound(A.n)
    cosh_m1 = math.cosh(thresh) - 1.0
    out = HalfSpaceSet(A.n, A.J_max)

    seeds = [(j, np.argwhere(A._masks[j])) for j in range(A.J_max + 1) if A._masks[j].any()]
    if not seeds:
        return out

    if A.n == 1:
        for j in range(A.J_max + 1):
            yc = 0.75 * 2.0**-j
            m = out._masks[j]
            for js, idx in seeds:
                if m.all():
                    break
                ys = 0.75 * 2.0**-js
                b = 2.0 * yc * ys * cosh_m1 - (yc - ys) ** 2
                if b <= 0:
                    continue
                w = math.sqrt(b)
                xs = (idx[:, 0].astype(float) + 0.5) * 2.0**-js
                lo = np.floor((xs - w) * 2**j - 0.5).astype(np.int64) + 1
                hi = np.ceil((xs + w) * 2**j - 0.5).astype(np.int64) - 1
                keep = hi >= lo
                if keep.any():
                    _mark_intervals(m, lo[keep], hi[keep])
        return out

    # n=2: KD-tree over seed centers replicated to the 8 torus images.
    from scipy.spatial import cKDTree

    seed_xy = []
    for js, idx in seeds:
        side = 2.0**-js
        xy = (idx.astype(float) + 0.5) * side
        seed_xy.append(np.column_stack([xy, np.full(len(xy), 0.75 * side)]))
    pts = np.vstack(seed_xy)
    images = []
    for dx in (-1.0, 0.0, 1.0):
        for dy in (-1.0, 0.0, 1.0):
            shifted = pts.copy()
            shifted[:, 0] += dx
            shifted[:, 1] += dy
            images.append(shifted)
    all_pts = np.vstack(images)

    for j in range(A.J_max + 1):
        yc = 0.75 * 2.0**-j
        # centers must satisfy d^2 < 2 yc ys cosh_m1 - (yc-ys)^2 for some seed;
        # bound the search radius by the largest admissible b over seed levels.
        b_max = 0.0
        for js, _ in seeds:
            ys = 0.75 * 2.0**-js
            b = 2.0 * yc * ys * cosh_m1 - (yc - ys) ** 2
            b_max = max(b_max, b)
        if b_max <= 0:
            continue
        tree = cKDTree(all_pts[:, :2])
        side = 2.0**-j
        g = (np.arange(2**j) + 0.5) * side
        cx, cy = np.meshgrid(g, g, indexing="ij")
        centers = np.column_stack([cx.ravel(), cy.ravel()])
        cand = tree.query_ball_point(centers, math.sqrt(b_max), return_sorted=False)
        m = out._masks[j]
        flat = m.ravel()
        for pos, neighbors in enumerate(cand):
            if not neighbors:
                continue
            pc = centers[pos]
            for t in neighbors:
                ys = all_pts[t, 2]
                b = 2.0 * yc * ys * cosh_m1 - (yc - ys) ** 2
                if b <= 0:
                    continue
                dx = pc[0] - all_pts[t, 0]
                dy = pc[1] - all_pts[t, 1]
                if dx * dx + dy * dy < b:
                    flat[pos] = True
                    break
    return out
