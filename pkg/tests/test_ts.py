import numpy as np
import pytest

from koopfreq import (
    AutocovSequence,
    DegenerateInputError,
    InvalidInputError,
    ParseError,
    TimeSeries,
    autocovariance,
    detrend_linear,
    inner_product,
    lag0_drift,
    normalize_unit_variance,
    read_timeseries_csv,
    write_timeseries_csv,
)


def tone(omega, n, amp=1.0):
    return TimeSeries(amp * np.exp(1j * omega * np.arange(n)))


class TestTimeSeries:
    def test_rejects_empty(self):
        with pytest.raises(InvalidInputError):
            TimeSeries(np.array([]))

    def test_rejects_non_finite(self):
        with pytest.raises(InvalidInputError):
            TimeSeries(np.array([1.0, np.nan]))
        with pytest.raises(InvalidInputError):
            TimeSeries(np.array([1.0, np.inf + 0j]))

    def test_rejects_bad_dt(self):
        with pytest.raises(InvalidInputError):
            TimeSeries(np.ones(4), dt=0.0)

    def test_is_real_flag(self):
        assert TimeSeries(np.array([1.0, -2.0])).is_real
        assert not TimeSeries(np.array([1.0, 1e-300j])).is_real

    def test_values_read_only(self):
        s = TimeSeries(np.ones(4))
        with pytest.raises(ValueError):
            s.values[0] = 2.0


class TestDetrend:
    def test_exact_affine_input_vanishes(self):
        t = np.arange(100, dtype=float)
        out = detrend_linear(TimeSeries(3.0 + 0.5 * t))
        assert np.abs(out.values).max() <= 1e-10 * 53.0

    def test_residual_has_no_trend(self):
        t = np.arange(1000, dtype=float)
        out = detrend_linear(TimeSeries(np.cos(0.3 * t) + 0.01 * t))
        # independent oracle: refit the output
        assert abs(out.values.mean()) < 1e-10
        slope = np.polyfit(t, out.values.real, 1)[0]
        assert abs(slope) < 1e-12

    def test_constant_vanishes(self):
        out = detrend_linear(TimeSeries(np.full(50, 7.0)))
        assert np.abs(out.values).max() <= 1e-12

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            detrend_linear(TimeSeries(np.array([1.0])))

    def test_preserves_realness(self):
        out = detrend_linear(TimeSeries(np.arange(10.0) + 2.0))
        assert out.is_real


class TestNormalize:
    def test_two_points(self):
        out = normalize_unit_variance(TimeSeries(np.array([0.0, 2.0])))
        assert np.allclose(out.values, [-1.0, 1.0], atol=1e-15)

    def test_moments_of_output(self):
        t = np.arange(10_000, dtype=float)
        out = normalize_unit_variance(TimeSeries(5.0 * np.cos(0.3 * t) + 2.0))
        c = out.values
        assert abs(c.mean()) <= 1e-12
        assert abs(np.mean(c.real**2 + c.imag**2) - 1.0) <= 1e-12

    def test_constant_is_degenerate(self):
        with pytest.raises(DegenerateInputError):
            normalize_unit_variance(TimeSeries(np.full(10, 3.0)))

    def test_detrend_normalize_idempotent(self):
        rng = np.random.default_rng(5)
        series = TimeSeries(np.cumsum(rng.standard_normal(500)) + 0.2 * np.arange(500))

        def pipeline(s):
            return normalize_unit_variance(detrend_linear(s))

        once = pipeline(series)
        twice = pipeline(once)
        assert np.abs(twice.values - once.values).max() <= 1e-10


class TestInnerProduct:
    def test_ones(self):
        s = TimeSeries(np.ones(4))
        assert inner_product(s, s, 4) == pytest.approx(1.0)

    def test_unit_modulus_tone(self):
        s = tone(1.7, 1000)
        assert inner_product(s, s, 1000) == pytest.approx(1.0, abs=1e-12)

    def test_cross_tone_geometric_bound(self):
        n = 10_000
        h, g = tone(0.3, n), tone(0.7, n)
        bound = 2.0 / (n * abs(1 - np.exp(0.4j)))
        assert abs(inner_product(h, g, n)) <= bound

    def test_self_product_real_nonnegative(self):
        rng = np.random.default_rng(0)
        s = TimeSeries(rng.standard_normal(64) + 1j * rng.standard_normal(64))
        v = inner_product(s, s, 64)
        assert v.imag == 0.0
        assert v.real >= 0.0

    def test_insufficient_samples(self):
        s = TimeSeries(np.ones(3))
        with pytest.raises(InvalidInputError):
            inner_product(s, s, 4)


class TestAutocovariance:
    def test_constant_series(self):
        c = 2.0 - 1.0j
        s = TimeSeries(np.full(200, c))
        ac = autocovariance(s, max_lag=5, n=100)
        assert np.allclose(ac.rho, abs(c) ** 2, atol=1e-13)

    @pytest.mark.parametrize("method", ["direct", "fft"])
    def test_pure_tone_phases(self, method):
        omega, lags, n = 0.3, 8, 500
        s = tone(omega, n + lags)
        ac = autocovariance(s, max_lag=lags, n=n, method=method)
        expected = np.exp(-1j * omega * np.arange(lags + 1))
        assert np.abs(ac.rho - expected).max() <= 1e-12

    def test_two_tone_limit(self):
        a, b, w1, w2 = 1.5, 0.7, 0.3, 1.1
        n, lags = 100_000, 10
        t = np.arange(n + lags)
        s = TimeSeries(a * np.exp(1j * w1 * t) + b * np.exp(1j * w2 * t))
        ac = autocovariance(s, max_lag=lags, n=n)
        lag = np.arange(lags + 1)
        limit = a**2 * np.exp(-1j * w1 * lag) + b**2 * np.exp(-1j * w2 * lag)
        assert np.abs(ac.rho - limit).max() <= 1e-3

    @pytest.mark.parametrize("seed,length", [(0, 257), (1, 1024), (2, 10_000)])
    def test_fft_matches_direct(self, seed, length):
        rng = np.random.default_rng(seed)
        s = TimeSeries(rng.standard_normal(length) + 1j * rng.standard_normal(length))
        lags = min(64, length // 4)
        n = length - lags
        d = autocovariance(s, lags, n, method="direct")
        f = autocovariance(s, lags, n, method="fft")
        scale = np.abs(d.rho).max()
        assert np.abs(d.rho - f.rho).max() <= 1e-10 * scale

    def test_real_series_gives_real_rho(self):
        rng = np.random.default_rng(3)
        s = TimeSeries(rng.standard_normal(500))
        ac = autocovariance(s, 20, 400, method="fft")
        assert np.all(ac.rho.imag == 0.0)

    def test_conjugated_series_conjugates_rho(self):
        rng = np.random.default_rng(4)
        v = rng.standard_normal(300) + 1j * rng.standard_normal(300)
        ac = autocovariance(TimeSeries(v), 16, 250, method="direct")
        ac_conj = autocovariance(TimeSeries(np.conj(v)), 16, 250, method="direct")
        assert np.abs(ac_conj.rho - np.conj(ac.rho)).max() <= 1e-12

    def test_lag_bound_holds_for_stationary_input(self):
        rng = np.random.default_rng(6)
        s = TimeSeries(rng.standard_normal(4000) + 1j * rng.standard_normal(4000))
        ac = autocovariance(s, 50, 3000)
        assert ac.lag_bound_excess() == 0.0

    def test_too_short(self):
        with pytest.raises(InvalidInputError):
            autocovariance(TimeSeries(np.ones(10)), max_lag=5, n=6)

    def test_invariants_enforced(self):
        with pytest.raises(InvalidInputError):
            AutocovSequence(rho=np.array([-1.0 + 0j, 0.1]), sample_count=10, max_lag=1)
        with pytest.raises(InvalidInputError):
            AutocovSequence(rho=np.array([1.0 + 0.5j, 0.1]), sample_count=10, max_lag=1)


def test_lag0_drift_stationary_vs_trended():
    rng = np.random.default_rng(7)
    flat = TimeSeries(rng.standard_normal(10_000))
    trended = TimeSeries(rng.standard_normal(10_000) + 0.01 * np.arange(10_000))
    assert lag0_drift(flat) < 0.1
    assert lag0_drift(trended) > 0.5


class TestCsvRoundTrip:
    def test_real_series(self, tmp_path):
        s = TimeSeries(np.sin(0.1 * np.arange(100)), dt=0.25, label="demo")
        path = tmp_path / "real.csv"
        write_timeseries_csv(s, path)
        assert path.read_text().splitlines()[0] == "t,value"
        back = read_timeseries_csv(path)
        assert back.is_real
        assert back.dt == pytest.approx(0.25, rel=1e-12)
        assert np.array_equal(back.values, s.values)

    def test_complex_series(self, tmp_path):
        rng = np.random.default_rng(8)
        s = TimeSeries(rng.standard_normal(50) + 1j * rng.standard_normal(50), dt=0.01)
        path = tmp_path / "cplx.csv"
        write_timeseries_csv(s, path)
        assert path.read_text().splitlines()[0] == "t,re,im"
        back = read_timeseries_csv(path)
        assert np.array_equal(back.values, s.values)

    def test_rejects_jitter(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,value\n0,1\n1,1\n2.5,1\n3,1\n")
        with pytest.raises(ParseError):
            read_timeseries_csv(path)

    def test_rejects_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,val\n0,1\n1,2\n")
        with pytest.raises(ParseError, match="line 1"):
            read_timeseries_csv(path)

    def test_reports_offending_line(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("t,value\n0,1\n1,oops\n")
        with pytest.raises(ParseError, match="line 3"):
            read_timeseries_csv(path)
