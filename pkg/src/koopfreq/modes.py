"""Frequency extraction from eigenvectors, conjugate pairing, and the
mean-ergodic per-frequency estimator.

Unit convention: every function here that works on eigenvectors uses
radians per step, with omega in (-pi, pi].  The mean-ergodic estimator
(`yosida`, `yosida_scan`) is the one boundary that speaks cycles per step
(its defining exponent is exp(-2*pi*i*omega*t)); the conversion happens
there and nowhere else.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Sequence

import numpy as np
import scipy.fft

from .errors import DegenerateInputError, InvalidInputError
from .ts import TimeSeries

__all__ = [
    "FrequencyEstimate",
    "ModeEstimate",
    "YosidaEstimate",
    "extract_frequency",
    "pair_conjugates",
    "yosida",
    "yosida_scan",
    "cycles_to_radians",
    "radians_to_cycles",
]

_PAD_FACTOR = 8


def cycles_to_radians(omega_cycles: float) -> float:
    return _wrap_radians(2.0 * math.pi * omega_cycles)


def radians_to_cycles(omega_rad: float) -> float:
    return omega_rad / (2.0 * math.pi)


def _wrap_radians(omega: float) -> float:
    """Wrap to (-pi, pi]."""
    w = math.remainder(omega, 2.0 * math.pi)
    if w <= -math.pi:
        w += 2.0 * math.pi
    return w


@dataclass(frozen=True)
class FrequencyEstimate:
    """Frequency read off one eigenvector.

    peak_sharpness compares the main spectral peak against the strongest
    non-adjacent bin of the natural-resolution transform (math.inf when the
    rest of the spectrum is numerically empty, e.g. an exact tone).
    secondary_omegas lists other peaks above half the main one: a nonempty
    list warns that the vector may mix several equal-energy tones.
    """

    omega: float  # radians per step, in (-pi, pi]
    extraction: str  # "dft_peak" or "local_maxima_count"
    peak_sharpness: float
    secondary_omegas: tuple[float, ...] = ()


@dataclass(frozen=True, eq=False)
class ModeEstimate:
    """One identified mode: energy, frequency, and optional conjugate link."""

    index: int
    energy: float
    omega: float  # radians per step
    extraction: str = "dft_peak"
    peak_sharpness: float = math.nan
    pair_index: int | None = None
    unpaired_real: bool = False  # real-series mode that found no conjugate partner
    secondary_omegas: tuple[float, ...] = ()
    eigvec: np.ndarray | None = None

    @property
    def omega_cycles(self) -> float:
        return radians_to_cycles(self.omega)


@dataclass(frozen=True, eq=False)
class YosidaEstimate:
    """Truncated mean-ergodic average a_omega at one frequency.

    omega is in cycles per step; |a_omega|^2 estimates the energy carried at
    that frequency and can never exceed the total signal energy rho_0.
    """

    omega: float
    a_omega: complex
    t_used: int
    partial_curve: tuple[tuple[int, complex], ...] | None = None

    @property
    def energy(self) -> float:
        return abs(self.a_omega) ** 2


def extract_frequency(eigvec: np.ndarray, method: str = "dft_peak") -> FrequencyEstimate:
    """Estimate the dominant angular frequency of a (delay-space) eigenvector.

    dft_peak: zero-pad to 8x length, locate the magnitude peak of the
    transform, refine with quadratic interpolation on the log-magnitude of
    the three bins around it.  Resolution ~ 2*pi/(8*D).

    local_maxima_count: count strict local maxima m of the real part and
    return omega = 2*pi*m/D.  Only meaningful when the vector is (close to)
    a single real tone or an isolated complex tone; kept as the cheap
    cross-check it is.
    """
    v = np.asarray(eigvec, dtype=np.complex128).ravel()
    dim = v.size
    if dim < 8:
        raise InvalidInputError(f"eigenvector too short for frequency extraction: {dim} < 8")
    if not np.any(v):
        raise DegenerateInputError("cannot extract a frequency from the zero vector")

    if method == "local_maxima_count":
        x = v.real
        count = int(np.sum((x[1:-1] > x[:-2]) & (x[1:-1] > x[2:])))
        omega = _wrap_radians(2.0 * math.pi * count / dim)
        return FrequencyEstimate(omega=omega, extraction=method, peak_sharpness=math.nan)
    if method != "dft_peak":
        raise InvalidInputError(f"unknown extraction method {method!r}")

    padded = scipy.fft.fft(v, _PAD_FACTOR * dim)
    mag = np.abs(padded)
    peak = int(np.argmax(mag))
    size = mag.size

    # Quadratic refinement on log-magnitude, circular neighbors.
    left, mid, right = mag[(peak - 1) % size], mag[peak], mag[(peak + 1) % size]
    if left > 0 and right > 0 and mid > 0:
        la, lb, lc = math.log(left), math.log(mid), math.log(right)
        denom = la - 2.0 * lb + lc
        delta = 0.0 if denom == 0.0 else 0.5 * (la - lc) / denom
        delta = float(np.clip(delta, -0.5, 0.5))
    else:
        delta = 0.0
    omega = _wrap_radians(2.0 * math.pi * (peak + delta) / size)

    # Sharpness and multiplicity come from the natural-resolution spectrum,
    # where a pure tone occupies one bin (plus leakage into its neighbors).
    natural = np.abs(scipy.fft.fft(v))
    nat_peak = int(np.argmax(natural))
    main = natural[nat_peak]
    others = natural.copy()
    for off in (-1, 0, 1):
        others[(nat_peak + off) % dim] = 0.0
    runner = float(others.max())
    sharpness = math.inf if runner <= 1e-12 * main else float(main / runner)

    secondary = []
    if runner > 0.5 * main:
        half = np.nonzero(others > 0.5 * main)[0]
        # Report each contiguous cluster once, at its strongest bin.
        for cluster in np.split(half, np.nonzero(np.diff(half) > 1)[0] + 1):
            best = cluster[int(np.argmax(others[cluster]))]
            secondary.append(_wrap_radians(2.0 * math.pi * best / dim))
    return FrequencyEstimate(
        omega=omega,
        extraction=method,
        peak_sharpness=sharpness,
        secondary_omegas=tuple(secondary),
    )


def pair_conjugates(
    modes: Sequence[ModeEstimate],
    is_real: bool,
    eps_pair: float = 0.1,
    omega_tol: float | None = None,
) -> list[ModeEstimate]:
    """Link +omega/-omega partners of a real observable.

    Modes must be sorted by energy descending.  Two modes pair when their
    frequencies cancel within omega_tol (default 2*pi/D from the eigenvector
    length) and their energies agree within eps_pair relative.  A paired
    mode's combined energy is the sum over the pair (~2 sigma).  For complex
    observables the list is returned unchanged; real modes left without a
    partner are flagged.
    """
    out = list(modes)
    if not is_real:
        return out
    energies = [m.energy for m in out]
    if any(b > a for a, b in zip(energies, energies[1:])):
        raise InvalidInputError("modes must be sorted by energy descending")

    paired: dict[int, int] = {}
    for a in range(len(out)):
        if a in paired:
            continue
        ma = out[a]
        tol_a = omega_tol
        if tol_a is None:
            if ma.eigvec is None:
                raise InvalidInputError("pair_conjugates needs omega_tol when modes carry no eigenvector")
            tol_a = 2.0 * math.pi / len(ma.eigvec)
        best = None
        for b in range(a + 1, len(out)):
            if b in paired:
                continue
            mb = out[b]
            mismatch = abs(_wrap_radians(ma.omega + mb.omega))
            if mismatch > tol_a:
                continue
            top = max(ma.energy, mb.energy)
            if top > 0 and abs(ma.energy - mb.energy) / top > eps_pair:
                continue
            if best is None or mismatch < best[1]:
                best = (b, mismatch)
        if best is not None:
            b = best[0]
            paired[a] = b
            paired[b] = a

    result = []
    for i, m in enumerate(out):
        if i in paired:
            result.append(replace(m, pair_index=out[paired[i]].index, unpaired_real=False))
        else:
            # A zero/pi mode is its own conjugate; only flag genuine misses.
            self_conj = abs(_wrap_radians(2.0 * m.omega)) <= (omega_tol or 1e-9)
            result.append(replace(m, pair_index=None, unpaired_real=not self_conj))
    return result


def combined_energy(mode: ModeEstimate, modes: Sequence[ModeEstimate]) -> float:
    """Energy of the mode plus its conjugate partner, if linked."""
    if mode.pair_index is None:
        return mode.energy
    partner = next(m for m in modes if m.index == mode.pair_index)
    return mode.energy + partner.energy


def yosida(
    series: TimeSeries,
    omega: float,
    t_used: int,
    checkpoints: bool = False,
) -> YosidaEstimate:
    """Truncated mean-ergodic average (1/T) * sum_{t<T} exp(-2*pi*i*omega*t) f(t).

    omega is in cycles per step.  With checkpoints=True the running average
    is also reported at 10 logarithmically spaced horizons, which is the
    convergence trace worth plotting.
    """
    if t_used < 1:
        raise InvalidInputError(f"t_used must be >= 1, got {t_used}")
    if t_used > len(series):
        raise InvalidInputError(f"t_used {t_used} exceeds series length {len(series)}")
    t = np.arange(t_used)
    weighted = np.exp(-2.0j * math.pi * omega * t) * series.values[:t_used]
    total = np.cumsum(weighted)
    a_omega = complex(total[-1] / t_used)

    curve = None
    if checkpoints:
        t0 = max(1, t_used // 1000)
        marks = np.unique(np.geomspace(t0, t_used, 10).round().astype(int))
        curve = tuple((int(m), complex(total[m - 1] / m)) for m in marks)
    return YosidaEstimate(omega=omega, a_omega=a_omega, t_used=t_used, partial_curve=curve)


def yosida_scan(
    series: TimeSeries,
    omega_min: float,
    omega_max: float,
    n_points: int,
    t_used: int,
) -> list[YosidaEstimate]:
    """Evaluate the mean-ergodic average on a uniform frequency grid.

    Frequencies are cycles per step inside (-0.5, 0.5].  One vectorized pass
    costs O(n_points * T); when the grid lands exactly on the Fourier bins
    k/T the whole scan collapses to a single FFT.
    """
    if n_points < 2:
        raise InvalidInputError("omega scan needs at least 2 points")
    if not (-0.5 < omega_min < omega_max <= 0.5):
        raise InvalidInputError(
            f"omega range must satisfy -0.5 < min < max <= 0.5 cycles/step, got [{omega_min}, {omega_max}]"
        )
    if t_used < 1 or t_used > len(series):
        raise InvalidInputError(f"t_used must be in [1, {len(series)}], got {t_used}")

    grid = omega_min + (omega_max - omega_min) * np.arange(n_points) / (n_points - 1)

    bins = grid * t_used
    on_fft_grid = (
        np.abs(bins - np.round(bins)).max() < 1e-9
        and abs((bins[1] - bins[0]) - round(bins[1] - bins[0])) < 1e-9
    )
    if on_fft_grid:
        spectrum = scipy.fft.fft(series.values[:t_used]) / t_used
        amps = spectrum[np.round(bins).astype(int) % t_used]
    else:
        chunk = 4096
        acc = np.zeros(n_points, dtype=np.complex128)
        for start in range(0, t_used, chunk):
            t = np.arange(start, min(start + chunk, t_used))
            acc += np.exp(-2.0j * math.pi * np.outer(grid, t)) @ series.values[t[0] : t[-1] + 1]
        amps = acc / t_used
    return [
        YosidaEstimate(omega=float(w), a_omega=complex(a), t_used=t_used)
        for w, a in zip(grid, amps)
    ]
