"""Time-series container, preprocessing, and autocovariance estimation.

Series are stored as complex values even when the data is real; a derived
``is_real`` flag lets downstream code take real fast paths.  All averages
here are finite truncations of long-time limits: the caller chooses the
sample count ``n`` explicitly and it is reported back, so convergence in
``n`` can be observed instead of assumed.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
import numpy as np
import scipy.fft

from .errors import DegenerateInputError, InvalidInputError, ParseError

__all__ = [
    "TimeSeries",
    "AutocovSequence",
    "detrend_linear",
    "normalize_unit_variance",
    "inner_product",
    "autocovariance",
    "lag0_drift",
    "read_timeseries_csv",
    "write_timeseries_csv",
]


@dataclass(frozen=True, eq=False)
class TimeSeries:
    """Uniformly sampled scalar observable.

    Parameters
    ----------
    values : array_like of complex
        The samples f(0), f(1), ...  Stored read-only as complex128.
    dt : float
        Time units per step (> 0).
    label : str
        Free-text metadata carried through to reports.

    The ``is_real`` flag is derived, never passed: it is True iff every
    imaginary part is exactly zero.
    """

    values: np.ndarray
    dt: float = 1.0
    label: str = ""
    is_real: bool = field(init=False)

    def __post_init__(self):
        arr = np.asarray(self.values, dtype=np.complex128)
        if arr.ndim != 1:
            raise InvalidInputError(f"series values must be 1-d, got shape {arr.shape}")
        if arr.size == 0:
            raise InvalidInputError("series must be nonempty")
        if not np.isfinite(arr).all():
            raise InvalidInputError("series contains non-finite values")
        if not (self.dt > 0):
            raise InvalidInputError(f"dt must be positive, got {self.dt}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "is_real", bool(np.all(arr.imag == 0.0)))

    def __len__(self) -> int:
        return self.values.size

    def rho0_hat(self, n: int | None = None) -> float:
        """Empirical mean of |f|^2 over the first ``n`` samples (all by default)."""
        n = len(self) if n is None else n
        v = self.values[:n]
        return float(np.mean(v.real**2 + v.imag**2))

    def replace_values(self, values: np.ndarray, label: str | None = None) -> "TimeSeries":
        return TimeSeries(values, dt=self.dt, label=self.label if label is None else label)


@dataclass(frozen=True, eq=False)
class AutocovSequence:
    """Estimated autocovariance lags rho_0..rho_L of a series.

    ``rho[l]`` is the truncated average (1/n) * sum_{k<n} f(k) * conj(f(k+l)).
    ``sample_count`` records the n used.  rho_0 is exactly real and >= 0.

    The textbook bound |rho_l| <= rho_0 holds for the limiting averages but
    can fail for short or strongly non-stationary finite samples, so it is
    exposed as the ``lag_bound_excess`` diagnostic rather than enforced.
    """

    rho: np.ndarray
    sample_count: int
    max_lag: int

    def __post_init__(self):
        arr = np.asarray(self.rho, dtype=np.complex128)
        if arr.ndim != 1 or arr.size != self.max_lag + 1:
            raise InvalidInputError(
                f"rho must hold max_lag+1 = {self.max_lag + 1} entries, got {arr.size}"
            )
        if arr[0].imag != 0.0 or arr[0].real < 0.0:
            raise InvalidInputError(f"rho_0 must be real and >= 0, got {arr[0]}")
        if self.sample_count < 1:
            raise InvalidInputError("sample_count must be >= 1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "rho", arr)

    @property
    def rho0(self) -> float:
        return float(self.rho[0].real)

    def lag_bound_excess(self) -> float:
        """How far max_l |rho_l| exceeds rho_0 (0.0 when the bound holds)."""
        return max(0.0, float(np.abs(self.rho).max() - self.rho0))


def detrend_linear(series: TimeSeries) -> TimeSeries:
    """Subtract the least-squares affine fit a + b*t from the series.

    Real and imaginary parts are fit jointly (the fit is linear, so this is
    identical to fitting them independently).  The residual has mean ~0 and
    no remaining linear trend.
    """
    n = len(series)
    if n < 2:
        raise InvalidInputError("detrend_linear needs at least 2 samples")
    v = series.values
    t = np.arange(n, dtype=np.float64)
    tc = t - t.mean()
    slope = np.dot(tc, v) / np.dot(tc, tc)
    residual = v - v.mean() - slope * tc
    return series.replace_values(residual)


def normalize_unit_variance(series: TimeSeries) -> TimeSeries:
    """Rescale to empirical mean 0 and empirical variance 1.

    Variance is the mean of |f - mean|^2.  A series with exactly zero
    variance (constant) cannot be normalized.
    """
    centered = series.values - series.values.mean()
    var = float(np.mean(centered.real**2 + centered.imag**2))
    if var == 0.0:
        raise DegenerateInputError("cannot normalize a zero-variance series")
    return series.replace_values(centered / np.sqrt(var))


def inner_product(h: TimeSeries, g: TimeSeries, n: int) -> complex:
    """Truncated empirical inner product (1/n) * sum_{k<n} h_k * conj(g_k)."""
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if len(h) < n or len(g) < n:
        raise InvalidInputError(
            f"inner_product needs {n} samples, series have {len(h)} and {len(g)}"
        )
    return complex(np.dot(h.values[:n], np.conj(g.values[:n])) / n)


def autocovariance(
    series: TimeSeries,
    max_lag: int,
    n: int,
    method: str = "auto",
) -> AutocovSequence:
    """Estimate rho_l = (1/n) * sum_{k<n} f(k)*conj(f(k+l)) for l = 0..max_lag.

    Parameters
    ----------
    method : {"auto", "direct", "fft"}
        "direct" sums each lag independently; "fft" computes all lags in one
        cross-correlation pass (zero-padded, no tapering).  The two agree to
        relative 1e-10; "auto" picks fft when max_lag is large enough for the
        transform to pay off.
    """
    if max_lag < 0:
        raise InvalidInputError(f"max_lag must be >= 0, got {max_lag}")
    if n < 1:
        raise InvalidInputError(f"n must be >= 1, got {n}")
    if len(series) < n + max_lag:
        raise InvalidInputError(
            f"series too short: need n + max_lag = {n + max_lag} samples, have {len(series)}"
        )
    if method == "auto":
        method = "fft" if max_lag >= 32 else "direct"

    f = series.values
    if method == "direct":
        rho = np.empty(max_lag + 1, dtype=np.complex128)
        for lag in range(max_lag + 1):
            rho[lag] = np.dot(f[:n], np.conj(f[lag : lag + n])) / n
    elif method == "fft":
        x = f[:n]
        y = f[: n + max_lag]
        size = scipy.fft.next_fast_len(n + max_lag)
        # z_m = sum_j conj(x_j) * y_{j+m}; rho_l = conj(z_l) / n
        z = scipy.fft.ifft(np.conj(scipy.fft.fft(x, size)) * scipy.fft.fft(y, size))
        rho = np.conj(z[: max_lag + 1]) / n
    else:
        raise InvalidInputError(f"unknown autocovariance method {method!r}")

    if series.is_real:
        rho = rho.real.astype(np.complex128)
    rho[0] = rho[0].real
    return AutocovSequence(rho=rho, sample_count=n, max_lag=max_lag)


def lag0_drift(series: TimeSeries, n: int | None = None) -> float:
    """Stationarity diagnostic: relative drift of rho_0 between n and n/2 samples.

    Large values suggest the lag-0 average has not stabilized at the
    available length.  No threshold is claimed; this is reported as-is.
    """
    n = len(series) if n is None else n
    if n < 2:
        raise InvalidInputError("lag0_drift needs n >= 2")
    full = series.rho0_hat(n)
    half = series.rho0_hat(n // 2)
    if full == 0.0:
        return 0.0
    return abs(full - half) / full


# ---------------------------------------------------------------------------
# CSV interchange format: header "t,re,im" (complex) or "t,value" (real),
# rows at uniform spacing in t.

_REL_JITTER = 1e-9


def write_timeseries_csv(series: TimeSeries, path: str | Path) -> None:
    """Write a series in the t,re,im / t,value CSV format (17 significant digits)."""
    path = Path(path)
    lines = []
    if series.is_real:
        lines.append("t,value")
        for k, v in enumerate(series.values):
            lines.append(f"{k * series.dt:.17g},{v.real:.17g}")
    else:
        lines.append("t,re,im")
        for k, v in enumerate(series.values):
            lines.append(f"{k * series.dt:.17g},{v.real:.17g},{v.imag:.17g}")
    path.write_text("\n".join(lines) + "\n")


def read_timeseries_csv(path: str | Path, label: str | None = None) -> TimeSeries:
    """Parse the t,re,im / t,value CSV format, rejecting non-uniform spacing.

    Raises ParseError with a line number on malformed rows, and on relative
    spacing jitter beyond 1e-9.
    """
    path = Path(path)
    raw = path.read_text().splitlines()
    rows = [(i + 1, line.strip()) for i, line in enumerate(raw) if line.strip()]
    if not rows:
        raise ParseError(f"{path}: empty file")
    header_line, header = rows[0]
    cols = [c.strip().lower() for c in header.split(",")]
    if cols == ["t", "value"]:
        complex_input = False
    elif cols == ["t", "re", "im"]:
        complex_input = True
    else:
        raise ParseError(f"expected header 't,value' or 't,re,im', got {header!r}", line=header_line)
    if len(rows) < 2:
        raise ParseError(f"{path}: no data rows")

    times = np.empty(len(rows) - 1)
    values = np.empty(len(rows) - 1, dtype=np.complex128)
    for k, (lineno, line) in enumerate(rows[1:]):
        parts = line.split(",")
        if len(parts) != len(cols):
            raise ParseError(f"expected {len(cols)} fields, got {len(parts)}", line=lineno)
        try:
            nums = [float(p) for p in parts]
        except ValueError as exc:
            raise ParseError(str(exc), line=lineno) from None
        times[k] = nums[0]
        values[k] = complex(nums[1], nums[2]) if complex_input else nums[1]

    if len(times) < 2:
        raise ParseError(f"{path}: need at least 2 samples")
    dt = (times[-1] - times[0]) / (len(times) - 1)
    if dt <= 0:
        raise ParseError(f"{path}: time column must be strictly increasing")
    expected = times[0] + dt * np.arange(len(times))
    jitter = np.abs(times - expected).max() / dt
    if jitter > _REL_JITTER:
        raise ParseError(f"{path}: non-uniform time spacing (relative jitter {jitter:.3g})")
    return TimeSeries(values, dt=float(dt), label=path.stem if label is None else label)
