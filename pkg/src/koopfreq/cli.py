"""Command-line front end.

Subcommands: ``simulate`` (reference systems and synthetic data),
``analyze`` (the double-grid eigenvalue scan with verdicts and mode
extraction), ``yosida`` (mean-ergodic estimates at chosen frequencies), and
``map`` (per-cell frequency energy over a gridded dataset).

Every command writes machine-readable outputs (canonical JSON and/or CSV)
and, unless ``--no-figures`` is given, renders a PNG figure next to them.

Exit codes: 0 success, 2 usage, 3 input parse, 4 numerical failure,
5 I/O failure.
"""

from __future__ import annotations

import functools
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import click
import numpy as np

from . import dyn, modes
from . import figures as figures_mod
from .errors import (
    ConvergenceError,
    DegenerateInputError,
    DivergenceError,
    InvalidInputError,
    ParseError,
)
from .gridio import read_grid, write_grid
from .report import fmt_float, write_csv, write_report
from .scan import ScanGrid, ToleranceConfig, run_scan
from .ts import (
    TimeSeries,
    detrend_linear,
    lag0_drift,
    normalize_unit_variance,
    read_timeseries_csv,
    write_timeseries_csv,
)

EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ParseError as exc:
            _fail(str(exc), EXIT_PARSE)
        except (InvalidInputError, DegenerateInputError) as exc:
            _fail(str(exc), EXIT_USAGE)
        except (ConvergenceError, DivergenceError) as exc:
            _fail(str(exc), EXIT_NUMERICAL)
        except OSError as exc:
            _fail(str(exc), EXIT_IO)

    return wrapper


def _parse_real(text: str) -> float:
    """Parse a real number, allowing pi expressions like 'pi/5' or '2pi'."""
    s = text.strip().lower().replace(" ", "")
    if "/" in s:
        num, den = s.split("/", 1)
        return _parse_real(num) / _parse_real(den)
    if s.endswith("pi"):
        head = s[:-2]
        if head in ("", "+"):
            return math.pi
        if head == "-":
            return -math.pi
        return float(head) * math.pi
    try:
        return float(s)
    except ValueError:
        raise InvalidInputError(f"cannot parse number {text!r}") from None


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(float(tok)) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise InvalidInputError(f"cannot parse integer list {text!r}") from None


def _parse_complex_list(text: str) -> list[complex]:
    out = []
    for tok in text.split(","):
        tok = tok.strip()
        if not tok:
            continue
        try:
            out.append(complex(tok))
        except ValueError:
            raise InvalidInputError(f"cannot parse complex number {tok!r}") from None
    return out


def _render_safely(render, *args, **kwargs):
    try:
        render(*args, **kwargs)
    except Exception as exc:  # figures are a convenience, never the data path
        click.echo(f"warning: figure rendering failed: {exc}", err=True)


def _load_series(path: str, detrend: bool, normalize: bool) -> TimeSeries:
    series = read_timeseries_csv(path)
    if detrend:
        series = detrend_linear(series)
    if normalize:
        series = normalize_unit_variance(series)
    return series


def _default_threads() -> int:
    return max(1, os.cpu_count() or 1)


@click.group()
def main():
    """Identify persistent oscillation modes of a time series and the energy
    they carry, from renormalized eigenvalues of its windowed Gram matrices,
    cross-checked by mean-ergodic frequency averages."""


# ---------------------------------------------------------------------------
# simulate


@main.command()
@click.argument("system", type=click.Choice(["lorenz63", "rotor", "tones", "grid"]))
@click.option("--out", required=True, type=click.Path(), help="Output CSV (or grid header JSON).")
@click.option("--steps", default=100_000, show_default=True, help="Recorded samples.")
@click.option("--dt", default=0.01, show_default=True, help="Time units per step.")
@click.option("--burn-in", default=dyn.DEFAULT_BURN_IN, show_default=True, help="Discarded transient steps (lorenz63/rotor).")
@click.option("--initial", default="1,1,1", show_default=True, help="Lorenz initial state x,y,z.")
@click.option("--xi0", default=0.0, show_default=True, help="Initial rotor angle.")
@click.option("--period", default="pi/5", show_default=True, help="Rotor rotation period (accepts pi expressions).")
@click.option("--amps", default="1", show_default=True, help="Tone amplitudes, comma-separated complex.")
@click.option("--omegas", default="0.3", show_default=True, help="Tone frequencies, radians/step.")
@click.option("--noise-std", default=0.0, show_default=True, help="Noise level (tones/grid).")
@click.option("--seed", default=0, show_default=True, help="Generator seed (tones/grid).")
@click.option("--nx", default=16, show_default=True, help="Grid cells in x.")
@click.option("--ny", default=16, show_default=True, help="Grid cells in y.")
@click.option("--omega", default=1.0 / 365.25, show_default=True, help="Grid tone frequency, cycles/step.")
@click.option("--amp", default=0.5, show_default=True, help="Grid tone coefficient |a_omega|.")
@click.option("--trend-slope", default=0.0, show_default=True, help="Grid linear trend per step.")
@_guard
def simulate(system, out, steps, dt, burn_in, initial, xi0, period, amps, omegas,
             noise_std, seed, nx, ny, omega, amp, trend_slope):
    """Generate a reference or synthetic dataset plus a provenance sidecar."""
    out = Path(out)
    meta = {
        "command": "simulate",
        "system": system,
        "steps": steps,
        "dt": dt,
    }
    if system in ("lorenz63", "rotor"):
        x0, y0, z0 = (_parse_real(tok) for tok in initial.split(","))
        state = dyn.Lorenz63State(x=x0, y=y0, z=z0)
        meta.update({"burn_in": burn_in, "initial": [x0, y0, z0]})
        if system == "lorenz63":
            series = dyn.integrate_lorenz63(state, steps=steps, dt=dt, burn_in=burn_in)
        else:
            period_val = _parse_real(period)
            series = dyn.integrate_rotor(
                dyn.RotorState(lorenz=state, xi=xi0),
                steps=steps, dt=dt, period=period_val, burn_in=burn_in,
            )
            meta.update({"period": period_val, "xi0": xi0})
        write_timeseries_csv(series, out)
    elif system == "tones":
        amp_list = _parse_complex_list(amps)
        omega_list = [_parse_real(tok) for tok in omegas.split(",") if tok.strip()]
        series = dyn.synth_tones(amp_list, omega_list, noise_std=noise_std, seed=seed,
                                 steps=steps, dt=dt)
        write_timeseries_csv(series, out)
        meta.update({
            "amps": [complex(a) for a in amp_list],
            "omegas_rad_per_step": omega_list,
            "noise_std": noise_std,
            "seed": seed,
            "truth_energies": sorted((abs(a) ** 2 for a in amp_list), reverse=True),
        })
    else:  # grid
        recipe = dyn.GridRecipe(omega=omega, amp=amp, trend_slope=trend_slope,
                                noise_std=noise_std, dt=dt)
        grid, truth = dyn.synth_grid(nx, ny, steps, recipe, seed=seed)
        write_grid(grid, out)
        truth_csv = out.with_name(out.stem + ".truth.csv")
        write_csv(truth_csv, ["ix", "iy", "abs_a"],
                  ((ix, iy, truth[iy, ix]) for iy in range(ny) for ix in range(nx)))
        meta.update({
            "nx": nx, "ny": ny,
            "omega_cycles_per_step": omega,
            "amp": amp, "trend_slope": trend_slope,
            "noise_std": noise_std, "seed": seed,
            "truth_csv": truth_csv.name,
        })
    sidecar = out.with_name(out.stem + ".meta.json")
    write_report(sidecar, meta)
    click.echo(f"wrote {out} and {sidecar}")


# ---------------------------------------------------------------------------
# analyze


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Time-series CSV.")
@click.option("--out", required=True, type=click.Path(), help="JSON report path.")
@click.option("--n-grid", required=True, help="Delay counts, e.g. 250,500,1000.")
@click.option("--m-grid", default=None, help="Shared averaging lengths, e.g. 2e4,1e5,2e5.")
@click.option("--m-grid-per-n", default=None, help="Per-N rows 'a,b;c,d' when ladders differ.")
@click.option("--top-k", default=8, show_default=True, help="Eigenvalues tracked per grid cell.")
@click.option("--eps-m", default=0.05, show_default=True, help="Relative spread allowed in the M limit.")
@click.option("--eps-n", default=0.10, show_default=True, help="Relative step allowed in the N limit.")
@click.option("--tail-window", default=3, show_default=True, help="Entries judged at the end of each M row.")
@click.option("--energy-floor", default=0.01, show_default=True, help="Null-energy floor as a fraction of signal energy.")
@click.option("--m-over-n-floor", default=10.0, show_default=True, help="Required minimum M/N ratio.")
@click.option("--detrend", is_flag=True, help="Remove the affine trend first.")
@click.option("--normalize", is_flag=True, help="Rescale to zero mean, unit variance first.")
@click.option("--yosida-check/--no-yosida-check", default=True, show_default=True,
              help="Cross-check each identified mode with the mean-ergodic average.")
@click.option("--threads", default=None, type=int, help="Worker threads (default: hardware count).")
@click.option("--figures/--no-figures", default=True, show_default=True, help="Render PNG figures.")
@_guard
def analyze(input_path, out, n_grid, m_grid, m_grid_per_n, top_k, eps_m, eps_n,
            tail_window, energy_floor, m_over_n_floor, detrend, normalize,
            yosida_check, threads, figures):
    """Run the eigenvalue scan, judge convergence, and extract mode frequencies."""
    series = _load_series(input_path, detrend, normalize)
    n_values = _parse_int_list(n_grid)
    if (m_grid is None) == (m_grid_per_n is None):
        raise InvalidInputError("give exactly one of --m-grid or --m-grid-per-n")
    if m_grid is not None:
        grid = ScanGrid.with_shared_m(n_values, _parse_int_list(m_grid),
                                      top_k=top_k, m_over_n_floor=m_over_n_floor)
    else:
        rows = [_parse_int_list(row) for row in m_grid_per_n.split(";")]
        grid = ScanGrid(tuple(n_values), tuple(tuple(r) for r in rows),
                        top_k=top_k, m_over_n_floor=m_over_n_floor)
    bad = grid.infeasible_cells(len(series))
    if bad:
        cells = ", ".join(
            f"(N={grid.n_values[k]}, M={grid.m_values_per_n[k][j]})" for k, j in bad
        )
        limits = "; ".join(
            f"N={grid.n_values[k]} supports M <= {len(series) - grid.n_values[k] - 1}"
            for k in sorted({k for k, _ in bad})
        )
        raise InvalidInputError(
            f"grid infeasible for {len(series)} samples: {cells}. Max usable: {limits}"
        )
    tol = ToleranceConfig(eps_m=eps_m, eps_n=eps_n, tail_window=tail_window,
                          energy_floor_fraction=energy_floor)
    threads = threads or _default_threads()
    scan_report = run_scan(series, grid, tol, threads=threads)

    mode_list: list[modes.ModeEstimate] = []
    for i, verdict in enumerate(scan_report.verdicts):
        if not verdict.is_eigenfrequency:
            continue
        vec = scan_report.final_eigen.eigenvectors[:, i]
        freq = modes.extract_frequency(vec)
        mode_list.append(modes.ModeEstimate(
            index=i,
            energy=verdict.energy,
            omega=freq.omega,
            extraction=freq.extraction,
            peak_sharpness=freq.peak_sharpness,
            secondary_omegas=freq.secondary_omegas,
            eigvec=vec,
        ))
    mode_list = modes.pair_conjugates(mode_list, series.is_real)

    yosida_rows = []
    if yosida_check:
        for m in mode_list:
            est = modes.yosida(series, m.omega_cycles, t_used=len(series))
            yosida_rows.append({
                "index": m.index,
                "omega_cycles_per_step": m.omega_cycles,
                "energy": est.energy,
                "t_used": est.t_used,
            })

    out = Path(out)
    report = {
        "command": "analyze",
        "input": str(input_path),
        "config": {
            "n_values": list(grid.n_values),
            "m_values_per_n": [list(r) for r in grid.m_values_per_n],
            "top_k": grid.top_k,
            "m_over_n_floor": grid.m_over_n_floor,
            "eps_m": scan_report.tol.eps_m,
            "eps_n": scan_report.tol.eps_n,
            "tail_window": scan_report.tol.tail_window,
            "energy_floor_fraction": scan_report.tol.energy_floor_fraction,
            "energy_floor": scan_report.tol.floor,
            "detrend": detrend,
            "normalize": normalize,
            "threads": threads,
        },
        "series": {
            "samples": len(series),
            "dt": series.dt,
            "is_real": series.is_real,
            "label": series.label,
            "rho0_hat": scan_report.rho0_hat,
            "lag0_drift": lag0_drift(series),
        },
        "sigma": [
            {"n": n, "m": m, "i": i, "sigma": s} for n, m, i, s in scan_report.sigma_rows()
        ],
        "verdicts": [
            {"i": i, "kind": v.kind.value, "energy": v.energy, "failed_at_n": v.failed_at_n}
            for i, v in enumerate(scan_report.verdicts)
        ],
        "modes": [
            {
                "index": m.index,
                "energy": m.energy,
                "omega_rad_per_step": m.omega,
                "omega_cycles_per_step": m.omega_cycles,
                "extraction": m.extraction,
                "peak_sharpness": m.peak_sharpness,
                "pair_index": m.pair_index,
                "combined_energy": modes.combined_energy(m, mode_list),
                "unpaired_real": m.unpaired_real,
                "secondary_omegas": list(m.secondary_omegas),
            }
            for m in mode_list
        ],
        "yosida_checks": yosida_rows,
        "diagnostics": list(scan_report.diagnostics),
        "counters": {
            "gram_builds": sum(len(r) for r in grid.m_values_per_n),
            "eigensolves": sum(len(r) for r in grid.m_values_per_n),
        },
    }
    write_report(out, report)
    sigma_csv = out.with_name(out.stem + "_sigma.csv")
    write_csv(sigma_csv, ["N", "M", "i", "sigma"], scan_report.sigma_rows())
    if figures:
        _render_safely(
            figures_mod.render_sigma_convergence,
            out.with_name(out.stem + "_sigma.png"),
            grid.n_values, grid.m_values_per_n, scan_report.sigma,
        )

    for m in mode_list:
        click.echo(
            f"mode {m.index}: energy {fmt_float(m.energy)}, "
            f"omega {fmt_float(m.omega)} rad/step"
            + (f", paired with {m.pair_index}" if m.pair_index is not None else "")
        )
    if not mode_list:
        click.echo("no persistent modes identified")
    click.echo(f"wrote {out} and {sigma_csv}")


# ---------------------------------------------------------------------------
# yosida


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(), help="Time-series CSV.")
@click.option("--out", required=True, type=click.Path(), help="Report path.")
@click.option("--omega", default=None, type=float, help="Frequency, cycles/step in (-0.5, 0.5].")
@click.option("--omega-range", default=None, help="Scan 'min:max:points', cycles/step.")
@click.option("--t-used", default=None, type=int, help="Samples averaged (default: all).")
@click.option("--detrend", is_flag=True, help="Remove the affine trend first.")
@click.option("--normalize", is_flag=True, help="Rescale to zero mean, unit variance first.")
@click.option("--format", "fmt", type=click.Choice(["json", "csv"]), default="json",
              show_default=True, help="Report format.")
@click.option("--figures/--no-figures", default=True, show_default=True, help="Render PNG figures.")
@_guard
def yosida(input_path, out, omega, omega_range, t_used, detrend, normalize, fmt, figures):
    """Mean-ergodic frequency average at one frequency or over a scanned range."""
    series = _load_series(input_path, detrend, normalize)
    t_used = t_used or len(series)
    if (omega is None) == (omega_range is None):
        raise InvalidInputError("give exactly one of --omega or --omega-range")
    out = Path(out)

    if omega is not None:
        if not (-0.5 < omega <= 0.5):
            raise InvalidInputError(f"omega must lie in (-0.5, 0.5] cycles/step, got {omega}")
        est = modes.yosida(series, omega, t_used, checkpoints=True)
        curve = est.partial_curve or ()
        if fmt == "csv":
            write_csv(out, ["t", "re", "im", "energy"],
                      ((t, a.real, a.imag, abs(a) ** 2) for t, a in curve))
        else:
            write_report(out, {
                "command": "yosida",
                "input": str(input_path),
                "omega_cycles_per_step": omega,
                "t_used": est.t_used,
                "a_omega": est.a_omega,
                "energy": est.energy,
                "rho0_hat": series.rho0_hat(t_used),
                "curve": [{"t": t, "re": a.real, "im": a.imag, "energy": abs(a) ** 2}
                          for t, a in curve],
            })
        if figures:
            _render_safely(figures_mod.render_yosida_curve,
                           out.with_name(out.stem + ".png"), curve, omega)
        click.echo(f"energy at {omega:g} cycles/step: {fmt_float(est.energy)}")
    else:
        try:
            lo, hi, points = omega_range.split(":")
            lo, hi, points = float(lo), float(hi), int(points)
        except ValueError:
            raise InvalidInputError(f"cannot parse --omega-range {omega_range!r}") from None
        estimates = modes.yosida_scan(series, lo, hi, points, t_used)
        rows = [(e.omega, e.a_omega.real, e.a_omega.imag, e.energy) for e in estimates]
        if fmt == "csv":
            write_csv(out, ["omega", "re", "im", "energy"], rows)
        else:
            write_report(out, {
                "command": "yosida",
                "input": str(input_path),
                "omega_range": {"min": lo, "max": hi, "points": points},
                "t_used": t_used,
                "estimates": [
                    {"omega": w, "re": re, "im": im, "energy": en} for w, re, im, en in rows
                ],
            })
        if figures:
            _render_safely(figures_mod.render_yosida_spectrum,
                           out.with_name(out.stem + ".png"),
                           [r[0] for r in rows], [r[3] for r in rows])
        peak = max(rows, key=lambda r: r[3])
        click.echo(f"peak energy {fmt_float(peak[3])} at {peak[0]:g} cycles/step")
    click.echo(f"wrote {out}")


# ---------------------------------------------------------------------------
# map


@main.command(name="map")
@click.option("--grid-input", required=True, type=click.Path(), help="Grid header JSON.")
@click.option("--out", required=True, type=click.Path(), help="Output CSV (ix,iy,abs_a).")
@click.option("--omega", required=True, type=float, help="Frequency, cycles/step in (-0.5, 0.5].")
@click.option("--t-used", default=None, type=int, help="Samples averaged per cell (default: all).")
@click.option("--detrend", is_flag=True, help="Remove each cell's affine trend first.")
@click.option("--normalize", is_flag=True, help="Rescale each cell to unit variance first.")
@click.option("--threads", default=None, type=int, help="Worker threads (default: hardware count).")
@click.option("--figures/--no-figures", default=True, show_default=True, help="Render PNG figures.")
@_guard
def map_cmd(grid_input, out, omega, t_used, detrend, normalize, threads, figures):
    """Per-cell frequency-energy map over a gridded dataset."""
    if not (-0.5 < omega <= 0.5):
        raise InvalidInputError(f"omega must lie in (-0.5, 0.5] cycles/step, got {omega}")
    grid = read_grid(grid_input)
    t_used = t_used or grid.nt
    if t_used > grid.nt:
        raise InvalidInputError(f"t_used {t_used} exceeds grid nt {grid.nt}")
    threads = threads or _default_threads()

    def one_cell(iy: int, ix: int) -> float:
        cell = TimeSeries(grid.cell(ix, iy).astype(np.complex128), dt=grid.dt)
        try:
            if detrend:
                cell = detrend_linear(cell)
            if normalize:
                cell = normalize_unit_variance(cell)
        except DegenerateInputError:
            return math.nan
        return abs(modes.yosida(cell, omega, t_used).a_omega)

    result = np.empty((grid.ny, grid.nx))
    if threads > 1 and grid.ny > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            futures = {
                pool.submit(one_cell, iy, ix): (iy, ix)
                for iy in range(grid.ny) for ix in range(grid.nx)
            }
            for fut, (iy, ix) in futures.items():
                result[iy, ix] = fut.result()
    else:
        for iy in range(grid.ny):
            for ix in range(grid.nx):
                result[iy, ix] = one_cell(iy, ix)

    out = Path(out)
    write_csv(out, ["ix", "iy", "abs_a"],
              ((ix, iy, result[iy, ix]) for iy in range(grid.ny) for ix in range(grid.nx)))
    nan_cells = int(np.isnan(result).sum())
    summary = {
        "command": "map",
        "grid_input": str(grid_input),
        "nx": grid.nx, "ny": grid.ny, "nt": grid.nt,
        "omega_cycles_per_step": omega,
        "t_used": t_used,
        "detrend": detrend,
        "normalize": normalize,
        "cells": grid.nx * grid.ny,
        "zero_variance_cells": nan_cells,
        "mean_abs_a": float(np.nanmean(result)) if nan_cells < result.size else None,
    }
    summary_path = out.with_name(out.stem + ".summary.json")
    write_report(summary_path, summary)
    if figures:
        _render_safely(figures_mod.render_map, out.with_name(out.stem + ".png"),
                       result, title=f"|a| at {omega:g} cycles/step")
    click.echo(f"{nan_cells} zero-variance cells of {result.size}")
    click.echo(f"wrote {out} and {summary_path}")


if __name__ == "__main__":
    main()
