import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from retrans.channel import ChannelModel
from retrans.dist import Deterministic, Exponential, HalfNormal, ParetoUnit, Weibull
from retrans.errors import InsufficientPointsError, ModelError
from retrans.mc import (
    BLOCK,
    CurveKind,
    Mode,
    SimConfig,
    TailCurve,
    default_workers,
    empirical_ccdf,
    geometric_grid,
    hill_estimator,
    loglog_slope,
    simulate,
)
from retrans.oracle import ccdf_N_quadrature

ALPHA15 = ChannelModel(Exponential(1.5), Exponential(1.0), Exponential(1.0))
MODE_MODELS = [
    ALPHA15,
    ChannelModel(Weibull(0.5, 1.0), Weibull(0.5, 1.0)),
    ChannelModel(HalfNormal(1.0), HalfNormal(math.sqrt(2.0)), Exponential(2.0)),
]


class TestSimConfig:
    def test_validation(self):
        with pytest.raises(ValueError):
            SimConfig(sessions=0)
        with pytest.raises(ValueError):
            SimConfig(seed=-1)
        assert SimConfig(mode="naive").mode is Mode.NAIVE_LOOP

    def test_default_workers(self, monkeypatch):
        monkeypatch.setenv("RETRANS_WORKERS", "3")
        assert default_workers() == 3
        monkeypatch.setenv("RETRANS_WORKERS", "junk")
        assert default_workers() == 1


class TestSimulate:
    @pytest.mark.parametrize("mode", list(Mode))
    def test_deterministic_channel(self, mode):
        res = simulate(ChannelModel(Deterministic(3.0), Deterministic(5.0)), SimConfig(sessions=100, mode=mode))
        assert np.all(res.n_attempts == 1)
        assert np.all(res.total_time == 3.0)
        assert list(res)[0].n_attempts == 1

    def test_uniform_law(self):
        n = 10**6
        res = simulate(ChannelModel(Exponential(1.0), Exponential(1.0)), SimConfig(seed=3, sessions=n), time=False)
        p = np.mean(res.n_attempts > 9)
        se = math.sqrt(0.1 * 0.9 / n)
        assert abs(p - 0.1) <= 4 * se

    def test_rejects_invalid_model(self):
        with pytest.raises(ModelError):
            simulate(ChannelModel(Exponential(1.0), Deterministic(5.0)), SimConfig(sessions=10))

    @pytest.mark.parametrize("model", MODE_MODELS, ids=lambda m: f"{m.L}|{m.A}")
    def test_mode_equivalence(self, model):
        size = 10**5
        geo = simulate(model, SimConfig(seed=31, sessions=size, mode=Mode.GEOMETRIC_SHORTCUT))
        nai = simulate(model, SimConfig(seed=32, sessions=size, mode=Mode.NAIVE_LOOP))
        assert nai.truncation_count == 0
        assert stats.ks_2samp(geo.n_attempts, nai.n_attempts).pvalue > 0.01
        assert stats.ks_2samp(geo.total_time, nai.total_time).pvalue > 0.01

    def test_reproducible_across_workers(self):
        cfg = dict(seed=99, sessions=3 * BLOCK + 17)
        a = simulate(ALPHA15, SimConfig(workers=1, **cfg))
        b = simulate(ALPHA15, SimConfig(workers=3, **cfg))
        c = simulate(ALPHA15, SimConfig(workers=1, **cfg))
        for x, y in ((a, b), (a, c)):
            assert np.array_equal(x.n_attempts, y.n_attempts)
            assert np.array_equal(x.total_time, y.total_time)
        grid = geometric_grid(1, 1e3, integer=True)
        assert empirical_ccdf(a.n_attempts, grid).to_csv() == empirical_ccdf(b.n_attempts, grid).to_csv()

    def test_different_seeds_differ(self):
        a = simulate(ALPHA15, SimConfig(seed=1, sessions=1000))
        b = simulate(ALPHA15, SimConfig(seed=2, sessions=1000))
        assert not np.array_equal(a.total_time, b.total_time)

    def test_naive_cap_marks_truncation(self):
        model = ChannelModel(Exponential(0.5), Exponential(1.0))
        res = simulate(model, SimConfig(seed=4, sessions=5000, max_attempts=3, mode=Mode.NAIVE_LOOP))
        cut = res.truncated
        assert res.truncation_count > 0
        assert np.all(res.n_attempts[cut] == 3)
        assert np.all(np.isinf(res.total_time[cut]))
        assert np.all(res.n_attempts[~cut] <= 3)

    def test_geometric_handles_huge_N(self):
        # alpha = 0.2: N has no mean; the shortcut still draws it in one step
        model = ChannelModel(Exponential(0.2), Exponential(1.0))
        res = simulate(model, SimConfig(seed=5, sessions=10**5), time=False)
        assert res.n_attempts.max() > 10**15
        # draws beyond 2**62 failures are clipped there and flagged
        cap = (1 << 62) + 1
        assert res.truncation_count > 0
        assert np.all(res.n_attempts[res.truncated] == cap)
        assert np.all(res.n_attempts[~res.truncated] < cap)

    def test_hill_on_N(self):
        res = simulate(ChannelModel(Exponential(1.5), Exponential(1.0)), SimConfig(seed=6, sessions=10**7), time=False)
        assert 1.35 <= hill_estimator(res.n_attempts, 1000) <= 1.65


class TestEmpiricalCcdf:
    def test_examples(self):
        c = empirical_ccdf([1, 2, 3, 4], [2.5])
        assert c.log_p[0] == math.log(0.5)
        assert c.n_exceed[0] == 2

    def test_beyond_max(self):
        c = empirical_ccdf([1, 2, 3, 4], [2.5, 10.0])
        assert c.n_exceed[1] == 0
        assert c.log_p[1] == -math.inf
        assert c.degenerate[1]

    def test_exponential_at_five(self):
        x = Exponential(1.0).sample(np.random.default_rng(7), 10**6)
        c = empirical_ccdf(x, [5.0])
        assert abs(c.log_p[0] + 5.0) <= c.ci_halfwidth[0]

    def test_rejects_unsorted_grid(self):
        with pytest.raises(ValueError):
            empirical_ccdf([1, 2], [2.0, 1.0])

    @settings(max_examples=100, deadline=None)
    @given(
        st.lists(st.floats(0.0, 1e6), min_size=1, max_size=200),
        st.lists(st.floats(0.0, 1e6), min_size=1, max_size=30, unique=True),
    )
    def test_curve_invariants(self, samples, grid):
        c = empirical_ccdf(samples, sorted(grid))
        assert np.all(c.log_p[1:] <= c.log_p[:-1])
        assert np.all(np.diff(c.n_exceed) <= 0)
        assert np.array_equal(np.round(np.exp(c.log_p) * c.sample_size).astype(int), c.n_exceed)


class TestSerialisation:
    def curve(self):
        return empirical_ccdf([1.0, 2.0, 3.0, 4.0], [0.5, 2.5, 10.0], CurveKind.T_CURVE, {"seed": 3, "model": "L=x"})

    def test_csv(self):
        c = self.curve()
        text = c.to_csv()
        assert "arg,log_p,ci_halfwidth,n_exceed\n" in text
        assert "# format_version: 1\n" in text
        back = TailCurve.from_csv(text)
        assert back.to_csv() == text
        assert back.kind is CurveKind.T_CURVE and back.meta["seed"] == 3

    def test_json(self):
        c = self.curve()
        back = TailCurve.from_json(c.to_json())
        assert back.points() == c.points()
        assert back.to_json() == c.to_json()

    def test_exact_curve(self):
        c = TailCurve.exact([1.0, 2.0], [-0.1, -0.2])
        assert c.is_exact and not c.degenerate.any()
        assert TailCurve.from_csv(c.to_csv()).points() == c.points()

    def test_args_must_increase(self):
        with pytest.raises(ValueError):
            TailCurve.exact([2.0, 1.0], [-0.1, -0.2])


class TestGrid:
    def test_quarter_decades(self):
        g = geometric_grid(1.0, 100.0)
        assert g.size == 9
        assert np.allclose(np.diff(np.log10(g)), 0.25)

    def test_integer(self):
        g = geometric_grid(1, 100, integer=True)
        assert g[0] == 1 and g[-1] == 100 and np.all(g == np.round(g))


class TestHill:
    def test_pareto(self):
        x = ParetoUnit(2.0).sample(np.random.default_rng(8), 10**6)
        assert 1.8 <= hill_estimator(x, 1000) <= 2.2

    def test_constant(self):
        with pytest.raises(ValueError):
            hill_estimator(np.full(100, 3.0), 10)

    @pytest.mark.parametrize("k", [1, 100])
    def test_k_range(self, k):
        with pytest.raises(ValueError):
            hill_estimator(np.arange(1.0, 101.0), k)


class TestSlope:
    def test_exact_line(self):
        n = np.geomspace(10, 1e6, 12)
        slope, err = loglog_slope(TailCurve.exact(n, -1.5 * np.log(n)), 10, 1e6)
        assert slope == pytest.approx(-1.5, rel=1e-12)
        assert err == pytest.approx(0.0, abs=1e-12)

    def test_quadrature_curve(self):
        model = ChannelModel(Exponential(2.0), Exponential(1.0))
        n = geometric_grid(1e3, 1e6)
        c = TailCurve.exact(n, [ccdf_N_quadrature(model, x).value for x in n])
        slope, _ = loglog_slope(c, 1e3, 1e6)
        assert -2.05 <= slope <= -1.95

    def test_two_points(self):
        with pytest.raises(InsufficientPointsError) as err:
            loglog_slope(TailCurve.exact([1.0, 2.0], [-1.0, -2.0]), 0, 10)
        assert err.value.code == "INSUFFICIENT_POINTS"

    def test_weighted(self):
        x = Exponential(1.0).sample(np.random.default_rng(9), 10**6)
        c = empirical_ccdf(np.exp(x / 1.5), geometric_grid(2, 1000))
        slope, err = loglog_slope(c, 2, 1000)
        # P[e^(X/1.5) > y] = y^-1.5
        assert abs(slope + 1.5) <= 4 * err
