"""Critical-threshold estimation for the three bad-set constructions, the
cross-method comparison, the hyperbolic inclusion probes, and the
coefficient-truncation witness.

For each method the critical threshold is the infimum of eps for which the
eps-superlevel set stops looking like a Carleson-divergent set at desk scale.
It is bracketed by bisection on [0, eps_hi], where eps_hi is the method's own
probe-field maximum, so the set at eps_hi is empty by construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import poisson as _poisson
from . import secdiff as _secdiff
from . import wavelet as _wavelet
from .dyadic import LOG2, HalfSpaceSet, carleson_sup, enlarge, threshold_set
from .gridfn import GridFunction

METHODS = ("secdiff", "wavelet", "poisson")


@dataclass
class MethodContext:
    """A method's cached probe field plus the set builder derived from it."""

    method: str
    s: float
    J_max: int
    eps_hi: float
    values: dict[int, np.ndarray]
    n: int

    def build(self, eps: float) -> HalfSpaceSet:
        return threshold_set(self.values, eps, self.n, self.J_max)


def method_context(
    f: GridFunction, s: float, method: str,
    J_max: int | None = None, bank: _wavelet.FilterBank | None = None,
    K: int | None = None, probes_per_cell: int = 8,
) -> MethodContext:
    if method == "secdiff":
        J_max = f.J_grid - 2 if J_max is None else min(J_max, f.J_grid - 2)
        fld = _secdiff.second_diff_field(f, s, J_max, K=K, probes_per_cell=probes_per_cell)
        values = fld.values
    elif method == "wavelet":
        bank = bank or _wavelet.filter_bank(8)
        coeffs = _wavelet.analyze(f, bank)
        values = _wavelet.scale_ratio_field(coeffs, s)
        J_max = f.J_grid - 1 if J_max is None else min(J_max, f.J_grid - 1)
        values = {j: values[j] for j in range(J_max + 1)}
    elif method == "poisson":
        J_max = f.J_grid - 2 if J_max is None else min(J_max, f.J_grid - 2)
        fld = _poisson.derivative_field(f, s, J_max)
        values = fld.values
    else:
        raise ValueError(f"unknown method {method!r} (expected one of {METHODS})")
    eps_hi = max((float(v.max()) for v in values.values() if v.size), default=0.0)
    return MethodContext(method=method, s=s, J_max=J_max, eps_hi=eps_hi, values=values, n=f.n)


@dataclass
class ProbeRecord:
    eps: float
    m_values: list[float]
    slope: float
    diverging: bool


@dataclass
class DistanceEstimate:
    method: str
    s: float
    epsilon_star: float
    bracket: tuple[float, float]
    iterations: int
    theta: float
    J_range: tuple[int, int]
    J_max: int
    eps_hi: float
    resolution: float
    collapsed: bool
    monotone: bool
    warnings: list[str] = field(default_factory=list)
    trace: list[ProbeRecord] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "method": self.method,
            "s": self.s,
            "epsilon_star": self.epsilon_star,
            "bracket": list(self.bracket),
            "iterations": self.iterations,
            "theta": self.theta,
            "J_range": list(self.J_range),
            "J_max": self.J_max,
            "eps_hi": self.eps_hi,
            "resolution": self.resolution,
            "collapsed": self.collapsed,
            "monotone": self.monotone,
            "warnings": self.warnings,
            "slope_trace": [
                {"eps": p.eps, "M_J": p.m_values, "slope": p.slope, "diverging": p.diverging}
                for p in self.trace
            ],
        }


def epsilon_star(
    f: GridFunction, s: float, method: str,
    J_range: tuple[int, int], theta: float = 0.1, iterations: int = 20,
    context: MethodContext | None = None, **ctx_kwargs,
) -> DistanceEstimate:
    """Bisect for the smallest eps whose superlevel set is not diverging.

    The bracket invariant is: the set at the upper end never diverges, the
    lower end was observed diverging (or stayed at 0).  Divergence flags need
    not be monotone in eps at finite depth; a violated ordering in the probe
    trace is reported, not repaired.
    """
    ctx = context or method_context(f, s, method, **ctx_kwargs)
    warnings: list[str] = []
    trace: list[ProbeRecord] = []

    if ctx.eps_hi == 0.0:
        return DistanceEstimate(
            method=ctx.method, s=s, epsilon_star=0.0, bracket=(0.0, 0.0),
            iterations=iterations, theta=theta, J_range=tuple(J_range),
            J_max=ctx.J_max, eps_hi=0.0, resolution=0.0, collapsed=True,
            monotone=True, warnings=["trivial field: function has zero probe field"],
        )

    def probe(eps: float) -> ProbeRecord:
        report = carleson_sup(ctx.build(eps), J_range, theta)
        rec = ProbeRecord(eps=eps, m_values=report.m_values,
                          slope=report.slope, diverging=report.diverging)
        trace.append(rec)
        return rec

    top = probe(ctx.eps_hi)
    if top.diverging:
        warnings.append("set at eps_hi unexpectedly diverging")
    lo, hi = 0.0, ctx.eps_hi
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        if probe(mid).diverging:
            lo = mid
        else:
            hi = mid

    by_eps = sorted(trace, key=lambda p: p.eps)
    flags = [p.diverging for p in by_eps]
    monotone = all(not (flags[i] and not flags[i - 1]) for i in range(1, len(flags)))
    if not monotone:
        warnings.append("divergence flags not monotone across the probe trace")

    resolution = ctx.eps_hi * 2.0**-iterations
    return DistanceEstimate(
        method=ctx.method, s=s, epsilon_star=0.5 * (lo + hi), bracket=(lo, hi),
        iterations=iterations, theta=theta, J_range=tuple(J_range), J_max=ctx.J_max,
        eps_hi=ctx.eps_hi, resolution=resolution, collapsed=(lo == 0.0),
        monotone=monotone, warnings=warnings, trace=trace,
    )


@dataclass
class MethodComparison:
    s: float
    estimates: dict[str, DistanceEstimate]
    ratios: dict[str, float]
    band: float
    within_band: bool
    flagged: list[str]

    def as_dict(self) -> dict:
        return {
            "s": self.s,
            "methods": {m: e.as_dict() for m, e in self.estimates.items()},
            "ratios": self.ratios,
            "band": self.band,
            "within_band": self.within_band,
            "flagged": self.flagged,
        }


def compare_methods(
    f: GridFunction, s: float, J_range: tuple[int, int], theta: float = 0.1,
    band: float = 32.0, iterations: int = 20, **ctx_kwargs,
) -> MethodComparison:
    """Critical thresholds under all three constructions plus pairwise ratios.

    If both thresholds of a pair sit below their bisection resolution the
    ratio is defined as 1 (the zero-zero convention).
    """
    estimates = {
        m: epsilon_star(f, s, m, J_range, theta, iterations, **ctx_kwargs)
        for m in METHODS
    }
    ratios: dict[str, float] = {}
    flagged: list[str] = []
    for i, a in enumerate(METHODS):
        for b in METHODS[i + 1:]:
            ea, eb = estimates[a], estimates[b]
            key = f"{a}/{b}"
            if ea.collapsed and eb.collapsed:
                ratios[key] = 1.0
            elif eb.epsilon_star == 0.0:
                ratios[key] = math.inf
            else:
                ratios[key] = ea.epsilon_star / eb.epsilon_star
            r = ratios[key]
            if not (1.0 / band <= r <= band):
                flagged.append(key)
    return MethodComparison(
        s=s, estimates=estimates, ratios=ratios, band=band,
        within_band=not flagged, flagged=flagged,
    )


@dataclass
class InclusionReport:
    source_method: str
    target_method: str
    eps: float
    eta: float
    c_grid: tuple[float, ...]
    R_grid: tuple[float, ...]
    fractions: list[list[float]]
    achieved: tuple[float, float] | None
    source_cells: int

    def as_dict(self) -> dict:
        return {
            "source": self.source_method,
            "target": self.target_method,
            "eps": self.eps,
            "eta": self.eta,
            "c_grid": list(self.c_grid),
            "R_grid": list(self.R_grid),
            "fractions": self.fractions,
            "achieved": list(self.achieved) if self.achieved else None,
            "source_cells": self.source_cells,
        }


def _contained_fraction(source: HalfSpaceSet, target: HalfSpaceSet) -> float:
    total = source.cell_count
    if total == 0:
        return 1.0
    inside = 0
    for j in range(source.J_max + 1):
        m = source.mask(j)
        if j <= target.J_max:
            inside += int((m & target.mask(j)).sum())
    return inside / total


def inclusion_probe(
    f: GridFunction, s: float, eps: float,
    source_method: str, target_method: str,
    c_grid=(1.0, 0.5, 0.25, 0.125), R_grid=(0.5, 1.0, 2.0, 4.0),
    eta: float = 0.99,
    source_context: MethodContext | None = None,
    target_context: MethodContext | None = None,
    **ctx_kwargs,
) -> InclusionReport:
    """Fraction of source cells inside the R-enlarged target set at c * eps.

    The target threshold is lowered (c <= 1 grows the target set) and the
    target is hyperbolically enlarged; the preferred witness is the largest c
    and then the smallest R reaching the target fraction eta.
    """
    if any(not 0.0 < c <= 1.0 for c in c_grid):
        raise ValueError("c_grid entries must lie in (0, 1]")
    if any(r < 0.0 for r in R_grid):
        raise ValueError("R_grid entries must be >= 0")
    src_ctx = source_context or method_context(f, s, source_method, **ctx_kwargs)
    tgt_ctx = target_context or method_context(f, s, target_method, **ctx_kwargs)
    source = src_ctx.build(eps)

    cs = tuple(sorted(c_grid, reverse=True))
    rs = tuple(sorted(R_grid))
    fractions: list[list[float]] = []
    achieved: tuple[float, float] | None = None
    for c in cs:
        row = []
        base_target = tgt_ctx.build(c * eps)
        for R in rs:
            frac = _contained_fraction(source, enlarge(base_target, R))
            row.append(frac)
            if achieved is None and frac >= eta:
                achieved = (c, R)
        fractions.append(row)
    return InclusionReport(
        source_method=src_ctx.method, target_method=tgt_ctx.method, eps=eps,
        eta=eta, c_grid=cs, R_grid=rs, fractions=fractions,
        achieved=achieved, source_cells=source.cell_count,
    )


@dataclass
class WitnessReport:
    eps: float
    tail_norm: float
    tail_ok: bool
    per_depth: list[tuple[int, float, float]]
    box_ok: bool
    kept_cells: int
    d: float


def projection_distance_witness(
    f: GridFunction, s: float, eps: float, bank: _wavelet.FilterBank | None = None,
) -> WitnessReport:
    """Check the mechanics of the coefficient-truncation projection.

    (a) the discarded coefficient tail has smoothness norm <= eps exactly;
    (b) at every depth J, the kept coefficients' box sums are bounded by
        (2^n - 1) * (coefficient sup norm)^2 * M_J(bad set) / log 2,
        cell-exactly (a float slack of 1e-12 covers the arithmetic).
    """
    bank = bank or _wavelet.filter_bank(8)
    coeffs = _wavelet.analyze(f, bank)
    g = _wavelet.truncate_projection(coeffs, s, eps)
    tail = coeffs.minus(g)
    tail_norm = _wavelet.lip_wavelet_norm(tail, s)
    tail_ok = tail_norm <= eps or (eps == 0.0 and tail_norm == 0.0)

    ratio = _wavelet.scale_ratio_field(coeffs, s)
    c_norm = max((float(v.max()) for v in ratio.values() if v.size), default=0.0)
    factor = (2**f.n - 1) * c_norm**2
    T = _wavelet.build_T(coeffs, s, eps)

    per_depth: list[tuple[int, float, float]] = []
    box_ok = True
    kept = T.cell_count
    for J in range(coeffs.J_grid):
        lhs = _wavelet.jbmo_box_sup(g, s, max_level=J)
        m_J = carleson_sup(T, (J, J), theta=0.1).m_values[0]
        rhs = factor * m_J / LOG2
        per_depth.append((J, lhs, rhs))
        if lhs > rhs * (1.0 + 1e-12) + 1e-300:
            box_ok = False
    return WitnessReport(
        eps=eps, tail_norm=tail_norm, tail_ok=tail_ok,
        per_depth=per_depth, box_ok=box_ok, kept_cells=kept, d=g.d,
    )
