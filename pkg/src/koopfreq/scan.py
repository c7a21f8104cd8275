"""Double-grid eigenvalue scan and per-mode convergence verdicts.

For a grid of delay counts N_1 < ... < N_K, each with averaging lengths
M_{k,1} < ... < M_{k,l_k} >> N_k, the scan fills the table

    sigma[k][j][i] = (i-th eigenvalue of the Gram matrix at (N_k, M_{k,j})) / (N_k + 1)

and then judges each mode index i: the row must settle as M grows at every
N (inner limit), and the settled values must settle to a common number as N
grows (outer limit).  A nonzero double limit certifies a persistent
oscillation mode carrying that much energy; a stable limit below the energy
floor is reported as null; anything else is flagged as not converged.

The convergence tests are relative-spread Cauchy checks measured against
max(current value, energy floor), so near-zero rows cannot fail on noise
alone.  The floor defaults to a fraction of the empirical signal energy.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence

import numpy as np

from .errors import InvalidInputError
from .matrices import EigenResult, build_gram_family, top_eigen
from .ts import TimeSeries

__all__ = [
    "ToleranceConfig",
    "ScanGrid",
    "VerdictKind",
    "Verdict",
    "ScanReport",
    "judge_convergence_in_m",
    "judge_convergence_in_n",
    "run_scan",
]


@dataclass(frozen=True)
class ToleranceConfig:
    """Convergence tolerances for the scan verdicts.

    ``energy_floor`` is the absolute floor actually used by the judges; when
    None it is resolved as energy_floor_fraction * rho0_hat of the series.
    """

    eps_m: float = 0.05
    eps_n: float = 0.10
    tail_window: int = 3
    energy_floor_fraction: float = 0.01
    energy_floor: float | None = None

    def __post_init__(self):
        if self.eps_m <= 0 or self.eps_n <= 0:
            raise InvalidInputError("eps_m and eps_n must be positive")
        if self.tail_window < 2:
            raise InvalidInputError("tail_window must be >= 2")
        if self.energy_floor_fraction < 0:
            raise InvalidInputError("energy_floor_fraction must be >= 0")

    @property
    def floor(self) -> float:
        return 0.0 if self.energy_floor is None else self.energy_floor

    def resolved(self, rho0_hat: float) -> "ToleranceConfig":
        if self.energy_floor is not None:
            return self
        return replace(self, energy_floor=self.energy_floor_fraction * rho0_hat)


@dataclass(frozen=True)
class ScanGrid:
    """The (N_k, M_{k,j}) evaluation grid.

    ``m_over_n_floor`` makes the qualitative requirement M >> N checkable:
    the smallest M in each row must be at least that multiple of its N.
    """

    n_values: tuple[int, ...]
    m_values_per_n: tuple[tuple[int, ...], ...]
    top_k: int = 8
    m_over_n_floor: float = 10.0

    def __post_init__(self):
        ns = tuple(int(n) for n in self.n_values)
        ms = tuple(tuple(int(m) for m in row) for row in self.m_values_per_n)
        object.__setattr__(self, "n_values", ns)
        object.__setattr__(self, "m_values_per_n", ms)
        if not ns:
            raise InvalidInputError("grid needs at least one N value")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            raise InvalidInputError(f"N values must be strictly increasing, got {ns}")
        if len(ms) != len(ns):
            raise InvalidInputError("need one M row per N value")
        for n, row in zip(ns, ms):
            if not row:
                raise InvalidInputError(f"empty M row for N={n}")
            if any(b <= a for a, b in zip(row, row[1:])):
                raise InvalidInputError(f"M values must be strictly increasing at N={n}, got {row}")
            if row[0] < self.m_over_n_floor * n:
                raise InvalidInputError(
                    f"M must start at >= {self.m_over_n_floor} * N: got M={row[0]} at N={n}"
                )
        if not 1 <= self.top_k <= ns[0] + 1:
            raise InvalidInputError(f"top_k must be in [1, {ns[0] + 1}], got {self.top_k}")

    @classmethod
    def with_shared_m(
        cls,
        n_values: Sequence[int],
        m_values: Sequence[int],
        top_k: int = 8,
        m_over_n_floor: float = 10.0,
    ) -> "ScanGrid":
        """Grid using the same M ladder for every N."""
        return cls(
            n_values=tuple(n_values),
            m_values_per_n=tuple(tuple(m_values) for _ in n_values),
            top_k=top_k,
            m_over_n_floor=m_over_n_floor,
        )

    def infeasible_cells(self, series_len: int) -> list[tuple[int, int]]:
        """(k, j) indices where N_k + M_{k,j} + 1 exceeds the series length."""
        bad = []
        for k, (n, row) in enumerate(zip(self.n_values, self.m_values_per_n)):
            for j, m in enumerate(row):
                if n + m + 1 > series_len:
                    bad.append((k, j))
        return bad


class VerdictKind(str, Enum):
    EIGENFREQUENCY = "eigenfrequency"
    NULL_ENERGY = "null_energy"
    NOT_CONVERGED_IN_M = "not_converged_in_m"
    NOT_CONVERGED_IN_N = "not_converged_in_n"


@dataclass(frozen=True)
class Verdict:
    kind: VerdictKind
    energy: float | None = None  # set for EIGENFREQUENCY
    failed_at_n: int | None = None  # first failing N (value, not index) for NOT_CONVERGED_IN_M

    @property
    def is_eigenfrequency(self) -> bool:
        return self.kind is VerdictKind.EIGENFREQUENCY


@dataclass(frozen=True, eq=False)
class ScanReport:
    """Scan output: the sigma table, one verdict per mode index, and context."""

    grid: ScanGrid
    sigma: tuple[np.ndarray, ...]  # per k: array of shape (l_k, top_k)
    verdicts: tuple[Verdict, ...]
    tol: ToleranceConfig  # with the absolute energy_floor resolved
    rho0_hat: float
    final_eigen: EigenResult  # eigenpairs at (N_K, M_{K,l_K})
    diagnostics: tuple[str, ...] = field(default_factory=tuple)

    def sigma_rows(self):
        """Flat (N, M, i, sigma) tuples, in grid order."""
        for k, n in enumerate(self.grid.n_values):
            for j, m in enumerate(self.grid.m_values_per_n[k]):
                for i in range(self.grid.top_k):
                    yield n, m, i, float(self.sigma[k][j, i])


def judge_convergence_in_m(sigma_row: Sequence[float], tol: ToleranceConfig) -> bool:
    """Has the sequence settled over its last tail_window entries?

    Relative spread (max-min)/max(last, floor) <= eps_m.  Rows shorter than
    the window are judged not converged.
    """
    row = np.asarray(sigma_row, dtype=np.float64)
    if row.size < tol.tail_window:
        return False
    tail = row[-tol.tail_window :]
    spread = float(tail.max() - tail.min())
    denom = max(float(tail[-1]), tol.floor)
    if denom == 0.0:
        return spread == 0.0
    return spread / denom <= tol.eps_m


def judge_convergence_in_n(sigma_final: Sequence[float], tol: ToleranceConfig) -> Verdict:
    """Judge the outer limit from the settled values sigma*_1..sigma*_K.

    Cauchy test on the last two entries, measured against max(last, floor):
    pass with the last value at or above the floor -> eigenfrequency carrying
    that energy; pass below the floor -> null energy; fail -> not converged.
    """
    seq = np.asarray(sigma_final, dtype=np.float64)
    if seq.size < 2:
        raise InvalidInputError("judging the N limit needs at least 2 values")
    last, prev = float(seq[-1]), float(seq[-2])
    denom = max(last, tol.floor)
    cauchy = abs(last - prev) == 0.0 if denom == 0.0 else abs(last - prev) / denom <= tol.eps_n
    if not cauchy:
        return Verdict(VerdictKind.NOT_CONVERGED_IN_N)
    if last >= tol.floor and last > 0.0:
        return Verdict(VerdictKind.EIGENFREQUENCY, energy=last)
    return Verdict(VerdictKind.NULL_ENERGY)


def _scan_row(series: TimeSeries, n: int, m_row: Sequence[int], top_k: int):
    grams = build_gram_family(series, n, m_row)
    eigens = [top_eigen(g, top_k) for g in grams]
    sigma = np.clip(np.stack([e.renormalized for e in eigens]), 0.0, None)
    return sigma, eigens[-1]


def run_scan(
    series: TimeSeries,
    grid: ScanGrid,
    tol: ToleranceConfig | None = None,
    threads: int = 1,
) -> ScanReport:
    """Fill the sigma table over the grid and judge every mode index.

    Rows (fixed N, increasing M) share one prefix-sum pass, so Gram matrices
    for all M in a row cost one sweep over the series.  Rows are independent
    and may be evaluated in parallel with ``threads`` > 1; the result does
    not depend on the schedule.
    """
    tol = (tol or ToleranceConfig()).resolved(series.rho0_hat())
    bad = grid.infeasible_cells(len(series))
    if bad:
        cells = ", ".join(
            f"(N={grid.n_values[k]}, M={grid.m_values_per_n[k][j]})" for k, j in bad
        )
        raise InvalidInputError(
            f"grid infeasible for series of length {len(series)}: {cells}"
        )

    rows: list[tuple[np.ndarray, EigenResult]]
    if threads > 1 and len(grid.n_values) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(_scan_row, series, n, m_row, grid.top_k)
                for n, m_row in zip(grid.n_values, grid.m_values_per_n)
            ]
            rows = [f.result() for f in futures]
    else:
        rows = [
            _scan_row(series, n, m_row, grid.top_k)
            for n, m_row in zip(grid.n_values, grid.m_values_per_n)
        ]
    sigma = tuple(r[0] for r in rows)
    final_eigen = rows[-1][1]

    diagnostics: list[str] = []
    for k, n in enumerate(grid.n_values):
        if sigma[k].shape[0] < tol.tail_window:
            diagnostics.append(
                f"M row at N={n} has {sigma[k].shape[0]} < tail_window={tol.tail_window} entries"
            )
    if len(grid.n_values) < 2:
        diagnostics.append("single N value: the N limit cannot be judged")

    verdicts: list[Verdict] = []
    for i in range(grid.top_k):
        failed_n = None
        for k, n in enumerate(grid.n_values):
            if not judge_convergence_in_m(sigma[k][:, i], tol):
                failed_n = n
                break
        if failed_n is not None:
            verdicts.append(Verdict(VerdictKind.NOT_CONVERGED_IN_M, failed_at_n=failed_n))
            continue
        if len(grid.n_values) < 2:
            verdicts.append(Verdict(VerdictKind.NOT_CONVERGED_IN_N))
            continue
        settled = [float(sigma[k][-1, i]) for k in range(len(grid.n_values))]
        verdicts.append(judge_convergence_in_n(settled, tol))

    return ScanReport(
        grid=grid,
        sigma=sigma,
        verdicts=tuple(verdicts),
        tol=tol,
        rho0_hat=series.rho0_hat(),
        final_eigen=final_eigen,
        diagnostics=tuple(diagnostics),
    )
