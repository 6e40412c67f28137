import math

import numpy as np
import pytest

from zygdist import (GridFunction, bessel_lift, parse_function_spec, sup_norm,
                     synthesize)
from zygdist.dyadic import carleson_sup
from zygdist.poisson import (bmo_norm, build_D, d2y_extension,
                             derivative_field, holder_poisson_norm,
                             jbmo_direct_norm, lipschitz_check, poisson_extend)
from zygdist.secdiff import CELL_FRACS
from zygdist.wavelet import analyze, jbmo_wavelet_norm

J = 12
N = 2**J


def brute_interval_oscillation(samples):
    """Sup of the L2 mean oscillation over every discrete interval."""
    n = samples.size
    s1 = np.concatenate([[0.0], np.cumsum(samples)])
    s2 = np.concatenate([[0.0], np.cumsum(samples**2)])
    best = 0.0
    for width in range(1, n + 1):
        sums = s1[width:] - s1[:-width]
        sqs = s2[width:] - s2[:-width]
        osc = sqs / width - (sums / width) ** 2
        best = max(best, float(osc.max()))
    return math.sqrt(max(best, 0.0))


class TestExtension:
    def test_constant_fixed_at_every_height(self):
        f = GridFunction(1, J, np.full(N, 1.7))
        for y in (0.01, 0.25, 1.0, 3.0):
            u = poisson_extend(f, y)
            assert np.max(np.abs(u.samples - 1.7)) < 1e-12

    def test_single_mode_decay(self, cos_12):
        for y in (0.03, 0.1, 0.5):
            u = poisson_extend(cos_12, y)
            want = math.exp(-2 * math.pi * y) * cos_12.samples
            assert np.max(np.abs(u.samples - want)) < 1e-12

    def test_boundary_refinement(self):
        # u(., 2^-J) approaches f as the grid refines
        spec = parse_function_spec("weierstrass s=1 levels=6 signs=plus")
        errs = []
        for Jg in (8, 10, 12):
            f = synthesize(spec, 1, Jg)
            u = poisson_extend(f, 2.0**-Jg)
            errs.append(float(np.max(np.abs(u.samples - f.samples))))
        assert errs[0] > errs[1] > errs[2]

    def test_max_principle_on_corpus_heights(self, weier1_12, cos_12):
        for f in (weier1_12, cos_12):
            sup = sup_norm(f)
            for j in range(J - 1):
                for frac in CELL_FRACS:
                    u = poisson_extend(f, frac * 2.0**-j)
                    assert np.max(np.abs(u.samples)) <= sup * (1 + 1e-12)

    def test_semigroup(self, weier1_12):
        one = poisson_extend(weier1_12, 0.12)
        two = poisson_extend(poisson_extend(weier1_12, 0.07), 0.05)
        assert np.max(np.abs(one.samples - two.samples)) / sup_norm(weier1_12) < 1e-10

    def test_height_must_be_positive(self, cos_12):
        with pytest.raises(ValueError):
            poisson_extend(cos_12, 0.0)


class TestD2y:
    def test_constant_vanishes(self):
        f = GridFunction(1, J, np.full(N, 5.0))
        assert np.max(np.abs(d2y_extension(f, 0.3).samples)) == 0.0

    def test_single_mode_closed_form(self, cos_12):
        y = 0.2
        got = d2y_extension(cos_12, y)
        want = (2 * math.pi) ** 2 * math.exp(-2 * math.pi * y) * cos_12.samples
        assert np.max(np.abs(got.samples - want)) / np.max(np.abs(want)) < 1e-12

    def test_finite_difference_oracle(self):
        x = np.arange(N) / N
        poly = sum(np.cos(2 * np.pi * k * x) / k for k in range(1, 6))
        f = GridFunction(1, J, poly, label="poly5")
        y = 0.1
        h = y / 100.0

        def fd(step):
            up = poisson_extend(f, y + step).samples
            mid = poisson_extend(f, y).samples
            dn = poisson_extend(f, y - step).samples
            return (up - 2 * mid + dn) / step**2

        richardson = (4.0 * fd(h / 2) - fd(h)) / 3.0
        exact = d2y_extension(f, y).samples
        rel = np.max(np.abs(richardson - exact)) / np.max(np.abs(exact))
        assert rel < 1e-6

    def test_sup_nonincreasing_in_y(self, weier1_12):
        heights = sorted({frac * 2.0**-j for j in range(J - 1) for frac in CELL_FRACS})
        sups = [np.max(np.abs(d2y_extension(weier1_12, y).samples)) for y in heights]

        for shallow, deep in zip(sups, sups[1:]):
            assert deep <= shallow * (1 + 1e-12)


class TestPoissonNorm:
    def test_constant(self):
        f = GridFunction(1, J, np.full(N, 2.0))
        assert abs(holder_poisson_norm(f, 1.0) - 2.0) < 1e-12

    def test_homogeneous(self, weier05_12):
        a = holder_poisson_norm(weier05_12, 0.5)
        b = holder_poisson_norm(weier05_12.scaled(4.0), 0.5)
        assert abs(b - 4.0 * a) < 1e-10 * a


class TestBuildD:
    def test_constant_empty_for_positive_eps(self):
        f = GridFunction(1, J, np.full(N, 2.0))
        for eps in (0.0, 0.01, 1.0):
            assert build_D(f, 1.0, eps, J - 2).is_empty()

    def test_empty_above_field_max(self, weier1_12):
        field = derivative_field(weier1_12, 1.0, J - 2)
        assert build_D(weier1_12, 1.0, field.max_value, J - 2, field=field).is_empty()

    def test_monotone_in_eps(self, weier1_12):
        field = derivative_field(weier1_12, 1.0, J - 2)
        d1 = build_D(weier1_12, 1.0, 0.2 * field.max_value, J - 2, field=field)
        d2 = build_D(weier1_12, 1.0, 0.6 * field.max_value, J - 2, field=field)
        assert d2.issubset(d1)

    def test_weierstrass_moderate_eps_diverges(self, weier1_12):
        field = derivative_field(weier1_12, 1.0, J - 2)
        D = build_D(weier1_12, 1.0, 0.2 * field.max_value, J - 2, field=field)
        assert carleson_sup(D, (4, J - 2), 0.1).diverging

    def test_scaling_covariance(self, weier1_12):
        lam, eps = 4.0, 2.5
        D1 = build_D(weier1_12, 1.0, eps, J - 2)
        D2 = build_D(weier1_12.scaled(lam), 1.0, lam * eps, J - 2)
        assert D1 == D2


class TestLipschitzCheck:
    def test_constant_ratio_zero(self):
        f = GridFunction(1, J, np.full(N, 3.0))
        rep = lipschitz_check(f, 1.0, 500, seed=0)
        assert rep.max_ratio == 0.0

    def test_zero_function_degenerate(self):
        f = GridFunction(1, J, np.zeros(N))
        with pytest.raises(ValueError):
            lipschitz_check(f, 1.0, 100, seed=0)

    def test_cos_bounded(self, cos_12):
        rep = lipschitz_check(cos_12, 1.0, 10_000, seed=1)
        assert 0.0 < rep.max_ratio < 50.0
        assert rep.pairs_used > 9000

    def test_doubling_stability(self, weier1_12):
        r1 = lipschitz_check(weier1_12, 1.0, 10_000, seed=42)
        r2 = lipschitz_check(weier1_12, 1.0, 20_000, seed=42)
        assert r2.max_ratio >= r1.max_ratio
        assert (r2.max_ratio - r1.max_ratio) <= 0.20 * r1.max_ratio

    def test_n2_bounded(self):
        f = synthesize(parse_function_spec("weierstrass s=1 levels=4"), 2, 8)
        rep = lipschitz_check(f, 1.0, 3000, seed=2)
        assert 0.0 < rep.max_ratio < 50.0


class TestBmo:
    def test_constant(self):
        f = GridFunction(1, J, np.full(N, 4.0))
        assert abs(bmo_norm(f, J) - 4.0) < 1e-12

    def test_symmetric_step(self):
        x = np.arange(N) / N
        f = GridFunction(1, J, np.where(x < 0.5, 1.0, -1.0))
        assert abs(bmo_norm(f, J) - 2.0) < 1e-12

    def test_dyadic_vs_all_intervals_on_log_function(self):
        f = synthesize(parse_function_spec("xlogx"), 1, J)
        lifted = bessel_lift(f, -1.0)
        # dyadic oscillation part of the norm
        dyadic_osc = bmo_norm(lifted, J) - math.sqrt(float((lifted.samples**2).mean()))
        brute = brute_interval_oscillation(lifted.samples)
        assert dyadic_osc <= brute * (1 + 1e-12)
        assert dyadic_osc >= 0.7 * brute

    def test_jmax_guard(self, cos_12):
        with pytest.raises(ValueError):
            bmo_norm(cos_12, J + 1)


class TestJbmoDirect:
    def test_constant(self):
        f = GridFunction(1, J, np.full(N, 2.0))
        assert abs(jbmo_direct_norm(f, 1.0, J) - 2.0) < 1e-10

    def test_homogeneous(self, weier1_12):
        a = jbmo_direct_norm(weier1_12, 1.0, J)
        b = jbmo_direct_norm(weier1_12.scaled(4.0), 1.0, J)
        assert abs(b - 4.0 * a) < 1e-9 * a

    def test_atom_band_against_wavelet_norm(self, atom_12, bank8):
        for s in (0.5, 1.0):
            direct = jbmo_direct_norm(atom_12, s, J)
            coeff = jbmo_wavelet_norm(analyze(atom_12, bank8), s)
            ratio = direct / coeff
            assert 1 / 50 < ratio < 50
