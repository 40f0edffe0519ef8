import math

import numpy as np
import pytest
from scipy import stats
from scipy.special import gamma

from retrans.mc import Mode, SimConfig, TailCurve, empirical_ccdf, geometric_grid, loglog_slope
from retrans.tandem import TandemModel, bounds, bracket_check, ccdf_N_tandem, simulate_tandem


def direct_sum(p, q, n, terms):
    return math.log(math.fsum(
        (math.exp(-p * (k - 1)) - math.exp(-p * k)) * (1 - math.exp(-q * k)) ** n for k in range(1, terms + 1)
    ))


class TestModel:
    def test_validation(self):
        with pytest.raises(ValueError):
            TandemModel(0.0, 1.0)
        with pytest.raises(ValueError):
            TandemModel(1.0, -1.0)

    def test_pmf_normalised(self):
        m = TandemModel(0.7, 1.0)
        k = np.arange(1, 200)
        assert math.fsum(np.exp(m.log_pmf(k))) == pytest.approx(1.0, abs=1e-12)

    def test_exponent(self):
        assert TandemModel(1.5, 1.0).exponent == 1.5
        assert TandemModel(1.0, 0.0).exponent == math.inf


class TestExact:
    def test_n_zero(self):
        assert ccdf_N_tandem(TandemModel(1.0, 1.0), 0).value == 0.0

    def test_direct_summation(self):
        got = ccdf_N_tandem(TandemModel(1.0, 1.0), 10).value
        assert got == pytest.approx(direct_sum(1.0, 1.0, 10, 200), rel=1e-13)
        assert got == pytest.approx(-1.8598553754844438, rel=1e-13)

    def test_single_hop(self):
        m = TandemModel(math.inf, math.log(2.0))
        assert ccdf_N_tandem(m, 3).value == pytest.approx(math.log(1 / 8), rel=1e-14)

    def test_lossless(self):
        assert ccdf_N_tandem(TandemModel(1.0, 0.0), 5).value == -math.inf

    def test_example_bracket(self):
        m = TandemModel(1.5, 1.0)
        lo, scaled, hi, inside = bracket_check(m, 10**4)
        assert inside
        assert lo == pytest.approx(math.exp(-1.5) * gamma(2.5))
        assert hi == pytest.approx(math.exp(1.5) * gamma(2.5))

    @pytest.mark.parametrize("ratio", [0.5, 1.0, 1.5, 3.0])
    @pytest.mark.parametrize("n", [10**3, 10**4, 10**5])
    def test_bracketing(self, ratio, n):
        assert bracket_check(TandemModel(ratio, 1.0), n)[3]

    @pytest.mark.parametrize("p, q", [(1.0, 1.0), (1.5, 1.0), (0.5, 1.0), (3.0, 2.0)])
    def test_slope(self, p, q):
        m = TandemModel(p, q)
        n = geometric_grid(1e3, 1e6)
        c = TailCurve.exact(n, [ccdf_N_tandem(m, int(x)).value for x in n])
        slope, _ = loglog_slope(c, 1e3, 1e6)
        assert abs(slope + p / q) <= 0.05

    def test_deep_underflow_in_success_probability(self):
        # exp(-q k) leaves the float range while P[L = k] is still relevant
        m = TandemModel(0.01, 20.0)
        v = ccdf_N_tandem(m, 1000).value
        assert v < 0.0
        lo, scaled, hi, inside = bracket_check(m, 1000)
        assert inside

    def test_bounds(self):
        lo, hi = bounds(TandemModel(1.0, 1.0))
        assert (lo, hi) == pytest.approx((math.exp(-1), math.e))


class TestSimulation:
    @pytest.mark.parametrize("mode", list(Mode))
    def test_lossless_limit(self, mode):
        m = TandemModel(1.0, 0.0, per_hop_time=0.5)
        res = simulate_tandem(m, SimConfig(seed=1, sessions=10**4, mode=mode))
        assert np.all(res.n_attempts == 1)
        hops = res.total_time / 0.5
        assert np.all(hops >= 1) and np.all(hops == np.round(hops))
        # hop count is geometric: P[L > 1] = e^-1
        assert abs(np.mean(hops > 1) - math.exp(-1)) < 4 * math.sqrt(0.25 / 10**4)

    def test_single_hop_halving(self):
        m = TandemModel(math.inf, math.log(2.0))
        res = simulate_tandem(m, SimConfig(seed=2, sessions=10**6), time=False)
        se = math.sqrt(0.125 * 0.875 / 10**6)
        assert abs(np.mean(res.n_attempts > 3) - 0.125) < 4 * se

    def test_against_exact_sum(self):
        m = TandemModel(1.0, 1.0)
        res = simulate_tandem(m, SimConfig(seed=5, sessions=10**6), time=False)
        grid = [1, 2, 4, 8, 16, 32, 64]
        c = empirical_ccdf(res.n_attempts, grid)
        for n, lp, ci, _ in c.points():
            assert abs(lp - ccdf_N_tandem(m, n).value) <= ci

    def test_mode_equivalence(self):
        m = TandemModel(1.5, 1.0)
        geo = simulate_tandem(m, SimConfig(seed=3, sessions=10**5))
        nai = simulate_tandem(m, SimConfig(seed=4, sessions=10**5, mode=Mode.NAIVE_LOOP))
        assert stats.ks_2samp(geo.n_attempts, nai.n_attempts).pvalue > 0.01
        assert stats.ks_2samp(geo.total_time, nai.total_time).pvalue > 0.01

    def test_time_counts_whole_hops(self):
        m = TandemModel(1.0, 0.5)
        res = simulate_tandem(m, SimConfig(seed=6, sessions=10**4))
        # at least one hop per attempt and a final successful crossing
        assert np.all(res.total_time >= res.n_attempts)
        assert np.all(res.total_time == np.round(res.total_time))

    def test_worker_invariance(self):
        m = TandemModel(1.0, 1.0)
        a = simulate_tandem(m, SimConfig(seed=7, sessions=200000, workers=1))
        b = simulate_tandem(m, SimConfig(seed=7, sessions=200000, workers=2))
        assert np.array_equal(a.n_attempts, b.n_attempts)
        assert np.array_equal(a.total_time, b.total_time)
