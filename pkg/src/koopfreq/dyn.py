"""Reference simulators and synthetic signal generators.

Everything here is bit-deterministic given its arguments: the integrators
are plain fixed-step RK4 loops, and all randomness comes from a fully
specified counter-based generator (splitmix64) so synthetic oracles can be
reproduced exactly, in any language, from the seed alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DivergenceError, InvalidInputError
from .gridio import GridData
from .ts import TimeSeries

__all__ = [
    "Lorenz63State",
    "RotorState",
    "GridRecipe",
    "SplitMix64",
    "integrate_lorenz63",
    "integrate_rotor",
    "synth_tones",
    "synth_grid",
]

# Trajectories that leave this ball signal a step-size or parameter bug.
_STATE_BOUND = 1e3

DEFAULT_BURN_IN = 10_000


@dataclass(frozen=True)
class Lorenz63State:
    """State and parameters of the Lorenz-63 flow (classic chaotic defaults)."""

    x: float = 1.0
    y: float = 1.0
    z: float = 1.0
    sigma: float = 10.0
    rho: float = 28.0
    beta: float = 8.0 / 3.0


@dataclass(frozen=True)
class RotorState:
    """Lorenz-63 state coupled with a circle angle xi in [0, 2*pi)."""

    lorenz: Lorenz63State = field(default_factory=Lorenz63State)
    xi: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "xi", self.xi % (2.0 * math.pi))


class SplitMix64:
    """Counter-based deterministic random stream.

    Output word i is splitmix64(seed + i):

        z = (seed + (i+1) * 0x9E3779B97F4A7C15) mod 2^64
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 mod 2^64
        z = (z ^ (z >> 27)) * 0x94D049BB133111EB mod 2^64
        z = z ^ (z >> 31)

    Uniforms map the top 53 bits to [0, 1); Gaussians use the Box-Muller
    transform on consecutive uniform pairs.  Complex Gaussians are
    circularly symmetric with E|z|^2 = 1.
    """

    _GAMMA = np.uint64(0x9E3779B97F4A7C15)
    _M1 = np.uint64(0xBF58476D1CE4E5B9)
    _M2 = np.uint64(0x94D049BB133111EB)

    def __init__(self, seed: int):
        self._seed = np.uint64(seed & 0xFFFFFFFFFFFFFFFF)
        self._counter = 0

    def _words(self, count: int) -> np.ndarray:
        idx = np.arange(self._counter + 1, self._counter + count + 1, dtype=np.uint64)
        self._counter += count
        with np.errstate(over="ignore"):
            z = self._seed + idx * self._GAMMA
            z = (z ^ (z >> np.uint64(30))) * self._M1
            z = (z ^ (z >> np.uint64(27))) * self._M2
            z ^= z >> np.uint64(31)
        return z

    def uniforms(self, count: int) -> np.ndarray:
        """count floats uniform in [0, 1)."""
        return (self._words(count) >> np.uint64(11)).astype(np.float64) / float(1 << 53)

    def normals(self, count: int) -> np.ndarray:
        """count standard real Gaussians."""
        u = self.uniforms(2 * count)
        radius = np.sqrt(-2.0 * np.log1p(-u[::2]))
        return radius * np.cos(2.0 * math.pi * u[1::2])

    def complex_normals(self, count: int) -> np.ndarray:
        """count circularly symmetric complex Gaussians with unit E|z|^2."""
        u = self.uniforms(2 * count)
        radius = np.sqrt(-np.log1p(-u[::2]))
        return radius * np.exp(2.0j * math.pi * u[1::2])


def _lorenz_step(x, y, z, dt, sigma, rho, beta):
    # Classic RK4 on (sigma(y-x), x(rho-z)-y, xy-beta z); scalar floats for speed.
    k1x = sigma * (y - x)
    k1y = x * (rho - z) - y
    k1z = x * y - beta * z
    ax, ay, az = x + 0.5 * dt * k1x, y + 0.5 * dt * k1y, z + 0.5 * dt * k1z
    k2x = sigma * (ay - ax)
    k2y = ax * (rho - az) - ay
    k2z = ax * ay - beta * az
    bx, by, bz = x + 0.5 * dt * k2x, y + 0.5 * dt * k2y, z + 0.5 * dt * k2z
    k3x = sigma * (by - bx)
    k3y = bx * (rho - bz) - by
    k3z = bx * by - beta * bz
    cx, cy, cz = x + dt * k3x, y + dt * k3y, z + dt * k3z
    k4x = sigma * (cy - cx)
    k4y = cx * (rho - cz) - cy
    k4z = cx * cy - beta * cz
    x += dt / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    y += dt / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
    z += dt / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
    return x, y, z


def _check_state(x, y, z, step):
    if not (abs(x) < _STATE_BOUND and abs(y) < _STATE_BOUND and abs(z) < _STATE_BOUND):
        raise DivergenceError(
            f"Lorenz trajectory left |coord| < {_STATE_BOUND:g} at step {step}", step=step
        )


def integrate_lorenz63(
    initial: Lorenz63State | None = None,
    steps: int = 1,
    dt: float = 0.01,
    burn_in: int = DEFAULT_BURN_IN,
) -> TimeSeries:
    """RK4-integrate Lorenz-63 and return the mean-removed x component.

    The first ``burn_in`` steps are discarded before recording so the
    trajectory has settled onto the attractor.
    """
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    if dt <= 0:
        raise InvalidInputError(f"dt must be positive, got {dt}")
    if burn_in < 0:
        raise InvalidInputError(f"burn_in must be >= 0, got {burn_in}")
    s = initial or Lorenz63State()
    x, y, z = s.x, s.y, s.z
    for step in range(burn_in):
        x, y, z = _lorenz_step(x, y, z, dt, s.sigma, s.rho, s.beta)
        _check_state(x, y, z, step - burn_in)
    out = np.empty(steps)
    for step in range(steps):
        out[step] = x
        x, y, z = _lorenz_step(x, y, z, dt, s.sigma, s.rho, s.beta)
        _check_state(x, y, z, step)
    return TimeSeries(out - out.mean(), dt=dt, label="lorenz63.x")


def integrate_rotor(
    initial: RotorState | None = None,
    steps: int = 1,
    dt: float = 0.01,
    period: float = math.pi / 5.0,
    burn_in: int = DEFAULT_BURN_IN,
) -> TimeSeries:
    """Lorenz-63 coupled with an exact circle rotation; observable sin(xi + x/10).

    The angle advances by exactly 2*pi*dt/period per step (it is a discrete
    rotation map, not an integrated ODE), so its frequency carries no
    integrator error.
    """
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    if dt <= 0 or period <= 0:
        raise InvalidInputError("dt and period must be positive")
    if burn_in < 0:
        raise InvalidInputError(f"burn_in must be >= 0, got {burn_in}")
    s = initial or RotorState()
    x, y, z = s.lorenz.x, s.lorenz.y, s.lorenz.z
    xi = s.xi
    dphi = 2.0 * math.pi * dt / period
    two_pi = 2.0 * math.pi
    for step in range(burn_in):
        x, y, z = _lorenz_step(x, y, z, dt, s.lorenz.sigma, s.lorenz.rho, s.lorenz.beta)
        xi = (xi + dphi) % two_pi
        _check_state(x, y, z, step - burn_in)
    out = np.empty(steps)
    for step in range(steps):
        out[step] = math.sin(xi + x / 10.0)
        x, y, z = _lorenz_step(x, y, z, dt, s.lorenz.sigma, s.lorenz.rho, s.lorenz.beta)
        xi = (xi + dphi) % two_pi
        _check_state(x, y, z, step)
    return TimeSeries(out, dt=dt, label="rotor.sin")


def synth_tones(
    amps,
    omegas,
    noise_std: float = 0.0,
    seed: int = 0,
    steps: int = 1000,
    dt: float = 1.0,
) -> TimeSeries:
    """f(t) = sum_p a_p exp(i*omega_p*t) + noise, omegas in radians/step.

    Ground-truth mode energies are |a_p|^2 by construction.  Noise is
    circularly symmetric complex Gaussian with E|eps|^2 = noise_std^2, drawn
    from the documented seeded stream.
    """
    amps = np.asarray(amps, dtype=np.complex128)
    omegas = np.asarray(omegas, dtype=np.float64)
    if amps.shape != omegas.shape:
        raise InvalidInputError("amps and omegas must have the same length")
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    if omegas.size:
        if np.any(omegas <= -math.pi) or np.any(omegas > math.pi):
            raise InvalidInputError("omegas must lie in (-pi, pi] radians per step")
        if np.unique(omegas).size != omegas.size:
            raise InvalidInputError("omegas must be distinct")
    t = np.arange(steps)
    f = np.zeros(steps, dtype=np.complex128)
    for a, w in zip(amps, omegas):
        f += a * np.exp(1.0j * w * t)
    if noise_std > 0.0:
        f = f + noise_std * SplitMix64(seed).complex_normals(steps)
    return TimeSeries(f, dt=dt, label="tones")


@dataclass(frozen=True)
class GridRecipe:
    """Per-cell synthesis recipe for the gridded generator.

    ``amp`` is the target per-frequency coefficient |a_omega|: each cell
    carries 2*amp*cos(2*pi*omega*t + phase), whose mean-ergodic average at
    +/- omega has modulus exactly amp.  ``omega`` is cycles per step.
    """

    omega: float = 1.0 / 365.25
    amp: float = 0.5
    trend_slope: float = 0.0
    noise_std: float = 0.0
    dt: float = 1.0


def synth_grid(
    nx: int,
    ny: int,
    steps: int,
    recipe: GridRecipe,
    seed: int = 0,
) -> tuple[GridData, np.ndarray]:
    """Gridded dataset of per-cell tone + trend + noise, with its truth map.

    Returns (grid, truth) where truth[iy, ix] is the exact |a_omega| of the
    raw cell series (before any detrending/normalization a consumer applies).
    Cell phases and noise come from one seeded stream, cell-major.
    """
    if nx < 1 or ny < 1:
        raise InvalidInputError("grid needs nx >= 1 and ny >= 1")
    if steps < 1:
        raise InvalidInputError(f"steps must be >= 1, got {steps}")
    rng = SplitMix64(seed)
    t = np.arange(steps, dtype=np.float64)
    values = np.empty((steps, ny, nx))
    for iy in range(ny):
        for ix in range(nx):
            phase = 2.0 * math.pi * rng.uniforms(1)[0]
            cell = 2.0 * recipe.amp * np.cos(2.0 * math.pi * recipe.omega * t + phase)
            if recipe.trend_slope:
                cell = cell + recipe.trend_slope * t
            if recipe.noise_std > 0.0:
                cell = cell + recipe.noise_std * rng.normals(steps)
            values[:, iy, ix] = cell
    truth = np.full((ny, nx), float(recipe.amp))
    grid = GridData(values=values, dt=recipe.dt)
    return grid, truth
