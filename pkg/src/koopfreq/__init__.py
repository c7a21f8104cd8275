"""koopfreq: persistent-oscillation (Koopman eigenfrequency) identification
from a single time series.

The pipeline: estimate windowed Gram matrices of the delay-embedded series,
renormalize their leading eigenvalues by the delay dimension, and require
the values to settle both as the averaging window grows and as the delay
count grows.  A nonzero double limit certifies a persistent mode and equals
the energy it carries; the mean-ergodic frequency average provides an
independent per-frequency cross-check.
"""

from .errors import (
    ConvergenceError,
    DegenerateInputError,
    DivergenceError,
    InvalidInputError,
    KoopfreqError,
    ParseError,
)
from .ts import (
    AutocovSequence,
    TimeSeries,
    autocovariance,
    detrend_linear,
    inner_product,
    lag0_drift,
    normalize_unit_variance,
    read_timeseries_csv,
    write_timeseries_csv,
)
from .matrices import (
    AutocovMatrix,
    EigenResult,
    GramMatrix,
    TrajectoryMatrix,
    build_autocov_matrix,
    build_gram,
    build_gram_family,
    build_trajectory,
    top_eigen,
)
from .scan import (
    ScanGrid,
    ScanReport,
    ToleranceConfig,
    Verdict,
    VerdictKind,
    judge_convergence_in_m,
    judge_convergence_in_n,
    run_scan,
)
from .modes import (
    FrequencyEstimate,
    ModeEstimate,
    YosidaEstimate,
    extract_frequency,
    pair_conjugates,
    yosida,
    yosida_scan,
)
from .dyn import (
    GridRecipe,
    Lorenz63State,
    RotorState,
    SplitMix64,
    integrate_lorenz63,
    integrate_rotor,
    synth_grid,
    synth_tones,
)
from .gridio import GridData, read_grid, write_grid

__version__ = "0.1.0"

__all__ = [
    "KoopfreqError", "InvalidInputError", "DegenerateInputError",
    "ConvergenceError", "DivergenceError", "ParseError",
    "TimeSeries", "AutocovSequence", "detrend_linear", "normalize_unit_variance",
    "inner_product", "autocovariance", "lag0_drift",
    "read_timeseries_csv", "write_timeseries_csv",
    "TrajectoryMatrix", "GramMatrix", "AutocovMatrix", "EigenResult",
    "build_trajectory", "build_gram", "build_gram_family", "build_autocov_matrix",
    "top_eigen",
    "ScanGrid", "ScanReport", "ToleranceConfig", "Verdict", "VerdictKind",
    "judge_convergence_in_m", "judge_convergence_in_n", "run_scan",
    "FrequencyEstimate", "ModeEstimate", "YosidaEstimate",
    "extract_frequency", "pair_conjugates", "yosida", "yosida_scan",
    "Lorenz63State", "RotorState", "GridRecipe", "SplitMix64",
    "integrate_lorenz63", "integrate_rotor", "synth_tones", "synth_grid",
    "GridData", "read_grid", "write_grid",
]
