import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from phydp.isi_moments import (
    MAX_ORACLE_ORDER,
    IsiConfig,
    IsiDistribution,
    MomentTable,
    central_moments,
    enumerate_isi,
    enumeration_moments,
    isi_atoms,
    pulse_coeff,
    pulse_coeff_sum,
    raw_moments,
    tail_coeff_sum,
    window_coeffs,
)
from phydp.specfn import sinc

from conftest import coeff_tail_bound, direct_coeff_sum

# sum_{t != 0} sinc(t - tau)^n, frozen from 30-digit mpmath nsum over both sides.
G_ORACLE = {
    (1, 0.3): 0.14160630866586022,
    (2, 0.1): 0.032468790724921018,
    (2, 0.9): 0.98805517025586322,
    (3, 0.1): 0.00055993547995814949,
    (3, 0.3): 0.040247176231688207,
    (3, 0.5): 0.24198772453440409,
    (4, 0.5): 0.16907761725838397,
    (4, 0.9): 0.93619631916736606,
    (5, 0.1): 9.7408252629036962e-6,
    (5, 0.5): 0.103764896755625,
    (6, 0.3): 0.002554571600072903,
    (6, 0.9): 0.90572260985953621,
}
TAU_GRID = np.linspace(0.0, 1.0, 101)


def brute_force_distribution(tau, p, window):
    """ISI atoms by explicit loops over sign tuples."""
    coeffs = [sinc(t - tau) for t in range(-window, window + 1) if t]
    atoms = []
    for signs in itertools.product((1, -1), repeat=len(coeffs)):
        value = sum(s * c for s, c in zip(signs, coeffs))
        plus = signs.count(1)
        atoms.append((value, p**plus * (1 - p) ** (len(coeffs) - plus)))
    return atoms


class TestPulseCoeff:
    def test_examples(self):
        assert pulse_coeff(1, 0.0) == 0.0
        assert pulse_coeff(1, 1.0) == 1.0
        assert pulse_coeff(2, 0.5) == pytest.approx(-2 / (3 * math.pi), abs=1e-15)

    def test_zero_index(self):
        with pytest.raises(ValueError):
            pulse_coeff(0, 0.3)

    def test_window_layout(self):
        c = window_coeffs(0.25, 3)
        expected = [sinc(t - 0.25) for t in (-3, -2, -1, 1, 2, 3)]
        np.testing.assert_array_equal(c, expected)


class TestPulseCoeffSum:
    def test_examples(self):
        assert pulse_coeff_sum(1, 0.5) == pytest.approx(1 - 2 / math.pi, abs=1e-15)
        assert pulse_coeff_sum(2, 0.5) == pytest.approx(1 - 4 / math.pi**2, abs=1e-13)
        assert pulse_coeff_sum(3, 0.0) == 0.0

    @pytest.mark.parametrize("key", sorted(G_ORACLE))
    def test_frozen_oracle(self, key):
        assert pulse_coeff_sum(*key) == pytest.approx(G_ORACLE[key], rel=1e-12, abs=1e-15)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_endpoints(self, n):
        assert pulse_coeff_sum(n, 0.0) == 0.0
        assert pulse_coeff_sum(n, 1.0) == 1.0

    def test_first_order_is_exact_branch(self):
        for tau in TAU_GRID:
            assert pulse_coeff_sum(1, tau) == 1.0 - sinc(tau)

    def test_sum_of_samples_identity(self):
        for tau in TAU_GRID:
            assert abs(pulse_coeff_sum(1, tau) + sinc(tau) - 1.0) <= 1e-10

    def test_energy_identity(self):
        for tau in TAU_GRID:
            assert abs(pulse_coeff_sum(2, tau) + sinc(tau) ** 2 - 1.0) <= 1e-10

    @pytest.mark.parametrize("n", range(2, 7))
    def test_against_direct_sum(self, n):
        terms = 10**5
        for tau in np.round(np.arange(0.1, 1.0, 0.1), 10):
            direct = direct_coeff_sum(n, tau, terms)
            # the float64 oracle itself is only good to a few ulps of 1
            allowed = 10 * coeff_tail_bound(n, tau, terms) + 16 * np.spacing(1.0)
            assert abs(pulse_coeff_sum(n, tau) - direct) <= allowed

    def test_large_order_fallback(self):
        # tau^-n overflows here; the direct path must still agree with a brute sum
        val = pulse_coeff_sum(400, 0.01)
        assert math.isfinite(val)
        assert val == pytest.approx(direct_coeff_sum(400, 0.01, 200), rel=1e-12, abs=1e-300)

    @pytest.mark.parametrize("n, tau", [(0, 0.5), (1.5, 0.5), (2, -0.1), (2, 1.1)])
    def test_invalid(self, n, tau):
        with pytest.raises(ValueError):
            pulse_coeff_sum(n, tau)

    def test_tail_sum_shrinks_with_window(self):
        tails = [tail_coeff_sum(2, 0.4, L) for L in (2, 5, 10, 14)]
        assert all(a > b > 0 for a, b in zip(tails, tails[1:]))


class TestIsiConfig:
    @pytest.mark.parametrize("kw", [{"tau": -0.1}, {"tau": 1.2}, {"tau": 0.5, "p": 1.5},
                                    {"tau": 0.5, "window": 0}, {"tau": 0.5, "max_order": 0}])
    def test_invalid(self, kw):
        with pytest.raises(ValueError):
            IsiConfig(**kw)

    def test_defaults(self):
        cfg = IsiConfig(0.3)
        assert (cfg.p, cfg.window, cfg.max_order) == (0.5, 10, 4)


class TestCentralMoments:
    def test_uniform_half_offset(self):
        t = central_moments(IsiConfig(0.5, 0.5, max_order=2))
        assert t.source == "formula"
        assert t.mean == 0.0
        assert t.central[2] == pytest.approx(0.5947152654306489, abs=1e-13)
        assert t.raw[2] == pytest.approx(0.5947152654306489, abs=1e-13)

    def test_deterministic_source(self):
        t = central_moments(IsiConfig(0.5, 1.0, max_order=6))
        g1 = 1 - 2 / math.pi
        assert t.mean == pytest.approx(g1, abs=1e-15)
        assert t.central[1:] == [0.0] * 6
        np.testing.assert_allclose(t.raw, [g1**n for n in range(7)], rtol=1e-14)

    def test_zero_offset(self):
        t = central_moments(IsiConfig(0.0, 0.3, max_order=5))
        assert t.mean == 0.0
        assert t.central == [1.0, 0.0, 0.0, 0.0, 0.0, 0.0]

    @settings(max_examples=60, deadline=None)
    @given(st.floats(0, 1), st.floats(0, 1), st.integers(2, 8))
    def test_table_invariants(self, tau, p, order):
        t = central_moments(IsiConfig(tau, p, max_order=order))
        assert t.order == order
        assert t.central[0] == 1.0
        assert t.central[1] == 0.0
        assert t.central[2] >= 0.0
        assert t.raw[0] == 1.0
        assert t.raw[1] == pytest.approx(t.mean, abs=1e-15)

    @pytest.mark.parametrize("p", [0.0, 1.0])
    def test_degenerate_sources_have_no_spread(self, p):
        for tau in (0.1, 0.5, 0.9):
            t = central_moments(IsiConfig(tau, p, max_order=8))
            assert all(m == 0.0 for m in t.central[1:])


class TestRawMoments:
    def test_zero_mean_identity(self):
        t = raw_moments(MomentTable(mean=0.0, central=[1.0, 0.0, 0.3, -0.1, 0.7]))
        assert t.raw == t.central

    def test_binomial_shift(self):
        # X ~ mean 2, variance 1, third central moment 0, fourth 3 (normal)
        t = raw_moments(MomentTable(mean=2.0, central=[1.0, 0.0, 1.0, 0.0, 3.0]))
        np.testing.assert_allclose(t.raw, [1.0, 2.0, 5.0, 14.0, 43.0])

    def test_to_dict(self):
        d = central_moments(IsiConfig(0.5, 0.5, max_order=2)).to_dict()
        assert set(d) == {"source", "order", "mean", "central", "raw"}
        assert d["order"] == 2


class TestEnumeration:
    def test_zero_offset_single_atom(self):
        d = enumerate_isi(IsiConfig(0.0, 0.5, window=4))
        assert d.atoms == [(0.0, 1.0)]

    def test_unit_offset(self):
        d = enumerate_isi(IsiConfig(1.0, 0.3, window=2))
        values = sorted(v for v, _ in d.atoms)
        assert values == pytest.approx([-1.0, 1.0], abs=1e-15)
        masses = dict((round(v), m) for v, m in d.atoms)
        assert masses[1] == pytest.approx(0.3)
        assert masses[-1] == pytest.approx(0.7)

    def test_against_brute_force(self):
        tau, p, L = 0.37, 0.8, 3
        ref = brute_force_distribution(tau, p, L)
        d = isi_atoms(IsiConfig(tau, p, L))
        shift = d.tail_mean_shift
        got = sorted(zip((d.values - shift).tolist(), d.masses.tolist()))
        exp = sorted(ref)
        np.testing.assert_allclose([v for v, _ in got], [v for v, _ in exp], atol=1e-14)
        np.testing.assert_allclose([m for _, m in got], [m for _, m in exp], rtol=1e-12)

    def test_merge_keeps_mass(self):
        cfg = IsiConfig(0.5, 0.5, window=6)
        merged, raw = enumerate_isi(cfg), isi_atoms(cfg)
        assert merged.values.size < raw.values.size
        assert math.fsum(merged.masses) == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("tau", [0.1, 0.5, 0.9])
    @pytest.mark.parametrize("p", [0.0, 0.3, 0.5, 0.999, 1.0])
    def test_masses_and_mean(self, tau, p):
        d = enumerate_isi(IsiConfig(tau, p, window=8))
        assert np.all(d.masses >= 0)
        assert abs(math.fsum(d.masses) - 1.0) <= 1e-12
        mean = math.fsum(d.masses * d.values)
        assert abs(mean - (2 * p - 1) * (1 - sinc(tau))) <= 1e-10
        assert d.tail_std_bound >= 0

    def test_variance_near_formula(self):
        cfg = IsiConfig(0.5, 0.5, window=10)
        d = enumerate_isi(cfg)
        var = float(np.dot(d.masses, d.values**2))
        # add back the variance the window leaves out
        assert abs(var + d.tail_variance - 0.5947152654306489) <= 2e-3
        assert var + d.tail_variance == pytest.approx(0.5947152654306489, abs=1e-12)

    def test_window_limit(self):
        with pytest.raises(MemoryError):
            enumerate_isi(IsiConfig(0.5, 0.5, window=15))

    def test_distribution_type(self):
        d = enumerate_isi(IsiConfig(0.2, 0.5, window=2))
        assert isinstance(d, IsiDistribution)


class TestEnumerationMoments:
    def test_single_atom(self):
        t = enumeration_moments(enumerate_isi(IsiConfig(0.0, 0.5, window=3)), 6)
        assert t.source == "enumeration"
        assert t.central == [1.0] + [0.0] * 6
        assert t.raw == [1.0] + [0.0] * 6

    def test_order_limit(self):
        d = enumerate_isi(IsiConfig(0.3, 0.5, window=2))
        with pytest.raises(ValueError):
            enumeration_moments(d, MAX_ORACLE_ORDER + 1)

    def test_second_moment_within_tail(self):
        cfg = IsiConfig(0.5, 0.5, window=10)
        d = enumerate_isi(cfg)
        t = enumeration_moments(d, 4)
        mu2 = central_moments(cfg).central[2]
        assert abs(t.central[2] - mu2) <= d.tail_std_bound**2

    @pytest.mark.parametrize("tau", [0.25, 0.5, 0.75])
    @pytest.mark.parametrize("p", [0.3, 0.5, 0.9])
    def test_low_orders_agree_with_formula(self, tau, p):
        cfg = IsiConfig(tau, p, window=10, max_order=4)
        formula = central_moments(cfg)
        exact = enumeration_moments(enumerate_isi(cfg), 4)
        for n in range(4):
            # the window drops 2^n [p(1-p)^n + (1-p)(-p)^n] * tail G(n)
            tail = 0.0
            if n >= 2:
                bracket = p * (1 - p) ** n + (1 - p) * (-p) ** n
                tail = abs(2**n * bracket * tail_coeff_sum(n, tau, 10))
            assert abs(formula.central[n] - exact.central[n]) <= 1e-6 + tail, n
        assert exact.raw[1] == pytest.approx(exact.mean, abs=1e-15)

    def test_fourth_order_gap_is_real(self):
        # the product formula drops cross terms from order 4 on
        cfg = IsiConfig(0.5, 0.5, window=10, max_order=4)
        formula = central_moments(cfg)
        exact = enumeration_moments(enumerate_isi(cfg), 4)
        assert formula.central[4] - exact.central[4] < -0.4
