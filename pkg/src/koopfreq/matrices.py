"""Trajectory, Gram, and lag-Toeplitz matrices and their leading eigenpairs.

Conventions reproduced exactly from the estimation formulas:

* Gram entry (i,j) = (1/M) * sum_{t=0..M} f(i+t)*conj(f(j+t)) -- the sum has
  M+1 terms with a 1/M prefactor, on purpose, so a pure tone gives the exact
  leading value (M+1)/M at any finite M.
* Renormalized eigenvalues divide by the matrix dimension N+1 (not N).  In
  the large-N limit the choice is immaterial; N+1 makes pure-tone examples
  exact at finite N.
* Singular values of the trajectory matrix relate to Gram eigenvalues by
  delta_i = sqrt(M * d_i).

Gram matrices are assembled from per-lag prefix sums of the lag-product
sequence c_l(u) = f(u+l)*conj(f(u)), which costs O(N*(N+M)) instead of the
naive O(N^2*M) and lets one pass serve every averaging length M in a scan
row.  The naive summation is kept only as a test oracle.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence, Union

import numpy as np
import scipy.linalg
import scipy.sparse.linalg

from .errors import ConvergenceError, InvalidInputError, ParseError
from .ts import AutocovSequence, TimeSeries

__all__ = [
    "DENSE_EIGEN_LIMIT",
    "TrajectoryMatrix",
    "GramMatrix",
    "AutocovMatrix",
    "EigenResult",
    "build_trajectory",
    "build_gram",
    "build_gram_family",
    "build_gram_naive",
    "build_autocov_matrix",
    "top_eigen",
    "dump_matrix",
    "load_matrix",
]

# Full dense Hermitian eigensolve up to this dimension; iterative top-k above.
DENSE_EIGEN_LIMIT = 512

# Residual acceptance for returned eigenpairs, relative to ||matrix||_2.
_RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class TrajectoryMatrix:
    """(N+1) x (M+1) matrix of delayed copies of the series, row i = f(i..i+M).

    Held as a stride view over the series buffer (no copy); use
    ``materialize()`` for an owned array.
    """

    series: TimeSeries
    n_delay: int
    m_avg: int

    def __post_init__(self):
        _check_window(self.series, self.n_delay, self.m_avg)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n_delay + 1, self.m_avg + 1)

    @property
    def view(self) -> np.ndarray:
        windows = np.lib.stride_tricks.sliding_window_view(self.series.values, self.m_avg + 1)
        return windows[: self.n_delay + 1]

    def materialize(self) -> np.ndarray:
        return np.array(self.view)


@dataclass(frozen=True, eq=False)
class GramMatrix:
    """Hermitian PSD (N+1) x (N+1) matrix of windowed lag products."""

    entries: np.ndarray
    n_delay: int
    m_avg: int
    source_label: str = ""

    def __post_init__(self):
        a = self.entries
        dim = self.n_delay + 1
        if a.shape != (dim, dim):
            raise InvalidInputError(f"entries must be {dim}x{dim}, got {a.shape}")
        if not np.array_equal(a, a.conj().T):
            raise InvalidInputError("Gram entries must be exactly Hermitian")
        a = a.copy()
        a.setflags(write=False)
        object.__setattr__(self, "entries", a)

    @property
    def dim(self) -> int:
        return self.n_delay + 1

    def trace(self) -> float:
        return float(np.trace(self.entries).real)


@dataclass(frozen=True, eq=False)
class AutocovMatrix:
    """Toeplitz Hermitian matrix with entry (i,j) = rho_{j-i} (conjugated below the diagonal)."""

    rho_source: AutocovSequence
    n_delay: int

    def __post_init__(self):
        if self.rho_source.max_lag < self.n_delay:
            raise InvalidInputError(
                f"need lags up to {self.n_delay}, autocovariance has max_lag {self.rho_source.max_lag}"
            )
        first_row = self.rho_source.rho[: self.n_delay + 1]
        entries = scipy.linalg.toeplitz(np.conj(first_row), first_row)
        entries.setflags(write=False)
        object.__setattr__(self, "_entries", entries)

    @property
    def entries(self) -> np.ndarray:
        return self._entries  # type: ignore[attr-defined]

    @property
    def dim(self) -> int:
        return self.n_delay + 1

    def trace(self) -> float:
        return float(self.dim * self.rho_source.rho0)


AnyLagMatrix = Union[GramMatrix, AutocovMatrix]


@dataclass(frozen=True, eq=False)
class EigenResult:
    """Top-k eigenpairs of a lag matrix, eigenvalues descending.

    ``renormalized[i]`` is eigenvalue[i] / (N+1): the quantity whose
    double-limit convergence certifies a persistent mode.  Eigenvector phase
    is fixed by making the largest-magnitude entry real positive so results
    are reproducible across runs.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    renormalized: np.ndarray
    top_k: int
    n_delay: int
    m_avg: int | None
    max_residual: float

    def singular_values(self) -> np.ndarray:
        """delta_i = sqrt(M * d_i) of the underlying trajectory matrix."""
        if self.m_avg is None:
            raise InvalidInputError("singular values need the averaging length M of a Gram matrix")
        return np.sqrt(self.m_avg * np.clip(self.eigenvalues, 0.0, None))


def _check_window(series: TimeSeries, n_delay: int, m_avg: int) -> None:
    if n_delay < 0 or m_avg < 1:
        raise InvalidInputError(f"need n_delay >= 0 and m_avg >= 1, got ({n_delay}, {m_avg})")
    need = n_delay + m_avg + 1
    if len(series) < need:
        raise InvalidInputError(
            f"series too short: need n_delay + m_avg + 1 = {need} samples, have {len(series)}"
        )


def build_trajectory(series: TimeSeries, n_delay: int, m_avg: int) -> TrajectoryMatrix:
    """Delay-embedding (trajectory) matrix handle over the series."""
    return TrajectoryMatrix(series=series, n_delay=n_delay, m_avg=m_avg)


def build_gram_family(
    series: TimeSeries,
    n_delay: int,
    m_list: Sequence[int],
    source_label: str = "",
) -> list[GramMatrix]:
    """Gram matrices at one delay count N for several averaging lengths M.

    The per-lag prefix sums are computed once over the longest window and
    sliced for every M, so adding a larger M to the list never changes the
    entries computed for the smaller ones.
    """
    ms = list(m_list)
    if not ms or any(b <= a for a, b in zip(ms, ms[1:])):
        raise InvalidInputError("m_list must be nonempty and strictly increasing")
    m_max = ms[-1]
    _check_window(series, n_delay, m_max)

    f = series.values
    dim = n_delay + 1
    label = source_label or series.label
    mats = [np.zeros((dim, dim), dtype=np.complex128) for _ in ms]
    for lag in range(dim):
        count = n_delay - lag + m_max + 1  # u = 0 .. (N-lag) + m_max
        lagprod = f[lag : lag + count] * np.conj(f[:count])
        prefix = np.concatenate(([0.0 + 0.0j], np.cumsum(lagprod)))
        rows = n_delay - lag + 1
        idx = np.arange(rows)
        for mat, m in zip(mats, ms):
            diag = (prefix[m + 1 : m + 1 + rows] - prefix[:rows]) / m
            mat[idx + lag, idx] = diag
            if lag:
                mat[idx, idx + lag] = np.conj(diag)
            else:
                mat[idx, idx] = diag.real  # exact-real diagonal
    return [
        GramMatrix(entries=mat, n_delay=n_delay, m_avg=m, source_label=label)
        for mat, m in zip(mats, ms)
    ]


def build_gram(
    series: TimeSeries, n_delay: int, m_avg: int, source_label: str = ""
) -> GramMatrix:
    """Gram matrix with entry (i,j) = (1/M) * sum_{t=0..M} f(i+t)*conj(f(j+t))."""
    return build_gram_family(series, n_delay, [m_avg], source_label)[0]


def build_gram_naive(series: TimeSeries, n_delay: int, m_avg: int) -> np.ndarray:
    """O(N^2 M) double-loop Gram summation; test oracle for the prefix-sum path."""
    _check_window(series, n_delay, m_avg)
    f = series.values
    dim = n_delay + 1
    out = np.empty((dim, dim), dtype=np.complex128)
    for i in range(dim):
        for j in range(dim):
            out[i, j] = np.sum(f[i : i + m_avg + 1] * np.conj(f[j : j + m_avg + 1])) / m_avg
    return out


def build_autocov_matrix(rho: AutocovSequence, n_delay: int) -> AutocovMatrix:
    """Toeplitz lag matrix from estimated autocovariances (the M -> inf Gram limit)."""
    return AutocovMatrix(rho_source=rho, n_delay=n_delay)


def _fix_phases(vectors: np.ndarray) -> np.ndarray:
    fixed = vectors.copy()
    for col in range(fixed.shape[1]):
        v = fixed[:, col]
        j = int(np.argmax(np.abs(v)))
        pivot = v[j]
        mag = abs(pivot)
        if mag > 0:
            v *= np.conj(pivot) / mag
            v[j] = v[j].real + 0.0j  # kill rounding residue in the pivot's phase
    return fixed


def _deterministic_start(dim: int) -> np.ndarray:
    # Fixed pseudo-random start vector: keeps ARPACK runs reproducible and
    # avoids symmetry-aligned starts (e.g. all-ones vs alternating modes).
    idx = np.arange(dim, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (idx + np.uint64(0x9E3779B97F4A7C15)) * np.uint64(0xBF58476D1CE4E5B9)
        z ^= z >> np.uint64(31)
    v = (z >> np.uint64(11)).astype(np.float64) / float(1 << 53) - 0.5
    return v / np.linalg.norm(v)


def top_eigen(matrix: AnyLagMatrix, k: int, maxiter: int | None = None) -> EigenResult:
    """k largest eigenvalues (descending) with orthonormal eigenvectors.

    Dense Hermitian solve for dimensions up to DENSE_EIGEN_LIMIT, otherwise
    a restarted Lanczos iteration with full reorthogonalization (ARPACK).
    Returned pairs satisfy ||A v - d v|| <= 1e-8 * ||A||; failure to reach
    that after the iteration cap raises ConvergenceError carrying the best
    residual seen.
    """
    a = matrix.entries
    dim = a.shape[0]
    if not 1 <= k <= dim:
        raise InvalidInputError(f"k must be in [1, {dim}], got {k}")

    # ARPACK needs k < dim-1; tiny margins fall back to the dense path.
    if dim <= DENSE_EIGEN_LIMIT or k > dim - 2:
        w, v = scipy.linalg.eigh(a)
        values = w[::-1][:k].copy()
        vectors = v[:, ::-1][:, :k].copy()
    else:
        try:
            w, v = scipy.sparse.linalg.eigsh(
                a,
                k=k,
                which="LA",
                tol=1e-10,
                maxiter=maxiter,
                ncv=min(dim, max(4 * k + 1, 40)),
                v0=_deterministic_start(dim),
            )
        except scipy.sparse.linalg.ArpackNoConvergence as exc:
            best = float("inf")
            if exc.eigenvalues is not None and len(exc.eigenvalues):
                res = np.linalg.norm(a @ exc.eigenvectors - exc.eigenvectors * exc.eigenvalues, axis=0)
                best = float(res.min())
            raise ConvergenceError(
                f"iterative eigensolver did not converge at dim {dim}, k {k}",
                best_residual=best,
            ) from exc
        order = np.argsort(w)[::-1]
        values = w[order]
        vectors = v[:, order]

    values = values.real.astype(np.float64)

    # Lanczos can return a skewed basis inside a (numerically) degenerate
    # eigenvalue cluster; re-orthonormalizing the cluster rotates within the
    # invariant subspace and leaves residuals unchanged.
    scale = float(max(abs(values[0]), abs(values[-1]), 1e-300))
    cluster_tol = 1e-8 * scale
    start = 0
    for end in range(1, k + 1):
        if end == k or values[end - 1] - values[end] > cluster_tol:
            if end - start > 1:
                q, _ = np.linalg.qr(vectors[:, start:end])
                vectors[:, start:end] = q
            start = end

    if isinstance(matrix, GramMatrix):
        # Exact (1/M) A A* constructions are PSD up to rounding; Toeplitz
        # matrices from estimated lags may be slightly indefinite and are
        # exempt.
        trace = float(np.trace(a).real)
        if values.min(initial=0.0) < -1e-10 * max(abs(trace), 1e-300):
            raise ConvergenceError(
                f"Gram matrix not PSD within tolerance (min eigenvalue {values.min()})",
                best_residual=float(values.min()),
            )

    norm_est = float(max(values.max(initial=0.0), abs(values.min(initial=0.0)), 1e-300))
    residuals = np.linalg.norm(a @ vectors - vectors * values, axis=0)
    max_residual = float(residuals.max())
    if max_residual > _RESIDUAL_RTOL * norm_est:
        raise ConvergenceError(
            f"eigenpair residual {max_residual:.3e} exceeds {_RESIDUAL_RTOL:.0e} * ||A||",
            best_residual=max_residual,
        )
    gram_vv = vectors.conj().T @ vectors
    if np.abs(gram_vv - np.eye(k)).max() > 1e-8:
        raise ConvergenceError("returned eigenvectors are not orthonormal to 1e-8")

    return EigenResult(
        eigenvalues=values,
        eigenvectors=_fix_phases(vectors),
        renormalized=values / dim,
        top_k=k,
        n_delay=matrix.n_delay,
        m_avg=matrix.m_avg if isinstance(matrix, GramMatrix) else None,
        max_residual=max_residual,
    )


# ---------------------------------------------------------------------------
# Debug dump: 16-byte header (magic "KGRM", u32 dim, u32 flags, u32 reserved)
# followed by row-major little-endian complex64 entries.

_MAGIC = b"KGRM"


def dump_matrix(matrix: AnyLagMatrix | np.ndarray, path: str | Path, flags: int = 0) -> None:
    entries = matrix if isinstance(matrix, np.ndarray) else matrix.entries
    dim = entries.shape[0]
    header = _MAGIC + struct.pack("<III", dim, flags, 0)
    payload = np.ascontiguousarray(entries, dtype="<c8").tobytes()
    Path(path).write_bytes(header + payload)


def load_matrix(path: str | Path) -> tuple[np.ndarray, int]:
    raw = Path(path).read_bytes()
    if len(raw) < 16 or raw[:4] != _MAGIC:
        raise ParseError(f"{path}: not a KGRM matrix dump")
    dim, flags, _ = struct.unpack("<III", raw[4:16])
    expected = 16 + dim * dim * 8
    if len(raw) != expected:
        raise ParseError(f"{path}: expected {expected} bytes for dim {dim}, got {len(raw)}")
    entries = np.frombuffer(raw[16:], dtype="<c8").reshape(dim, dim).astype(np.complex128)
    return entries, flags
