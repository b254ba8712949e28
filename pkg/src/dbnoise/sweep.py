"""Experiment driver: single cells, (energy x frequency) sweeps, outputs.

A cell propagates the two counter-injected packets independently under
the shared potential to a common settled time, analyzes the pair, and
evaluates the noise.  Sweep cells are fully independent; workers write
into per-cell slots that are merged in deterministic (energy index,
frequency index) order, so the output files are byte-identical for any
worker count.  Output numerics use 12 significant digits and no locale.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import __version__
from .config import ExperimentConfig, build_experiment, config_lines
from .errors import ConfigError, DbnoiseError
from .model import init_gaussian
from .noise import NoiseRecord, OccupationPair, noise
from .propagation import evolve_to, propagate_until_settled, structure_window
from .resonance import (
    arrival_time,
    find_resonances,
    invert_ridge,
    ridge_frequency,
    transit_time,
)
from .scattering import ScatteringRecord, analyze_pair

#: fixed record column order (energy and frequency identify the cell)
RECORD_COLUMNS = (
    "energy",
    "frequency",
    "T_a",
    "R_a",
    "T_b",
    "R_b",
    "I_left_sq",
    "I_right_sq",
    "P_LL",
    "P_RR",
    "P_LR",
    "t1",
    "S_over_4q2h",
    "bracket",
)

OBSERVABLES = ("S", "I2")


def fmt_float(x: float) -> str:
    """12 significant digits, '.' decimal separator, no locale."""
    return f"{x:.11e}"


@dataclass(frozen=True)
class SingleResult:
    """One cell: scattering record, noise, and the settled fields."""

    energy: float
    frequency: float
    record: ScatteringRecord
    noise_record: NoiseRecord
    norm_drift_a: float
    norm_drift_b: float
    field_a: object
    field_b: object

    def row(self) -> list[float]:
        r = self.record
        return [
            self.energy,
            self.frequency,
            r.t_a,
            r.r_a,
            r.t_b,
            r.r_b,
            abs(r.overlap_left) ** 2,
            abs(r.overlap_right) ** 2,
            r.p_ll,
            r.p_rr,
            r.p_lr,
            r.t1,
            self.noise_record.s,
            self.noise_record.bracket,
        ]


def run_single(
    cfg: ExperimentConfig,
    energy: float | None = None,
    frequency: float | None = None,
    packet_b=None,
) -> SingleResult:
    """Run one experiment cell.

    ``energy`` overrides the packet central energy and ``frequency`` the
    well drive (rad/fs; negative values realize the sign-flipped drive).
    Unless ``packet_b`` is given, the second packet is the exact mirror
    of the first (same energy, opposite momentum and position); both see
    the same oscillator phase.  The packets are propagated independently
    until both have settled, the earlier one is advanced to the common
    analysis time, and the pair is analyzed there.
    """
    packet_a = cfg.packet if energy is None else replace(cfg.packet, energy=energy)
    potential = cfg.potential
    if frequency is not None and potential is not None:
        potential = replace(potential, osc_angular_frequency=frequency)
    if packet_b is None:
        packet_b = packet_a.mirrored()

    field_a0 = init_gaussian(packet_a, cfg.grid, cfg.model)
    field_b0 = init_gaussian(packet_b, cfg.grid, cfg.model)
    res_a = propagate_until_settled(field_a0, potential, cfg.propagation, cfg.model)
    res_b = propagate_until_settled(field_b0, potential, cfg.propagation, cfg.model)
    t1 = max(res_a.t1, res_b.t1)
    fin_a = evolve_to(res_a.final_field, potential, cfg.propagation, cfg.model, t1)
    fin_b = evolve_to(res_b.final_field, potential, cfg.propagation, cfg.model, t1)
    field_a, field_b = fin_a.final_field, fin_b.final_field

    window = structure_window(potential, cfg.propagation.barrier_margin)
    record = analyze_pair(
        field_a,
        field_b,
        injected_a=packet_a.direction,
        injected_b=packet_b.direction,
        check_window=window,
        settle_threshold=cfg.propagation.settle_threshold,
    )
    occ = OccupationPair(cfg.f_a, cfg.f_b)
    noise_rec = noise(occ, 0.5 * (record.t_a + record.t_b), record.p_ll)
    return SingleResult(
        energy=packet_a.energy,
        frequency=0.0
        if potential is None
        else potential.osc_angular_frequency,
        record=record,
        noise_record=noise_rec,
        norm_drift_a=abs(field_a.norm_sq() - field_a0.norm_sq()),
        norm_drift_b=abs(field_b.norm_sq() - field_b0.norm_sq()),
        field_a=field_a,
        field_b=field_b,
    )


@dataclass(frozen=True)
class SweepPlan:
    """Energy and frequency axes over a base configuration."""

    energies: np.ndarray
    frequencies: np.ndarray
    base: ExperimentConfig
    workers: int = 1

    def __post_init__(self):
        for name, arr in (("energies", self.energies), ("frequencies", self.frequencies)):
            a = np.asarray(arr, dtype=float)
            if a.size == 0:
                raise ConfigError(f"{name} must be nonempty")
            if a.size > 1 and not np.all(np.diff(a) > 0):
                raise ConfigError(f"{name} must be strictly increasing")
            object.__setattr__(self, name, a)
        if self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")

    @classmethod
    def from_config(cls, cfg: ExperimentConfig, workers: int = 1) -> "SweepPlan":
        return cls(
            energies=cfg.sweep_energies,
            frequencies=cfg.sweep_frequencies,
            base=cfg,
            workers=workers,
        )


def _cell_task(args):
    """Worker entry: compute one cell from the raw config dict."""
    raw, i, j, energy, frequency = args
    cfg = build_experiment(raw)
    try:
        res = run_single(cfg, energy=energy, frequency=frequency)
        return i, j, res.row(), ""
    except DbnoiseError as exc:
        # keep the failure attached to its (E, w) cell identity
        msg = f"{type(exc).__name__}: {exc}".replace(",", ";").replace("\n", " ")
        return i, j, None, msg


@dataclass(frozen=True)
class RidgeReport:
    """Per-frequency noise-maximum energies against the analytic ridge.

    Two comparisons are reported.  ``e_pred``/``deviation`` anchor the
    ridge formula at the transfer-matrix resonance ``e_r0``; for broad
    resonances the noise maximum sits a few meV below the transmission
    peak (the same-side product R*T keeps growing below the peak while
    the overlap is still suppressed), so this comparison carries that
    constant offset.  ``e_shape_pred``/``shape_deviation`` anchor the
    same formula at the measured static noise maximum instead
    (``anchor_energy``), which is how a measured map is compared against
    the predicted ridge *shape*.
    """

    e_r0: float
    anchor_energy: float
    frequencies: np.ndarray
    e_star: np.ndarray
    e_pred: np.ndarray
    deviation: np.ndarray
    e_shape_pred: np.ndarray
    shape_deviation: np.ndarray
    tau_t: np.ndarray
    in_regime: np.ndarray  # |w| <= 1/tau_t


def extract_ridge(energies, frequencies, s_matrix, potential, model, x0, e_r0=None):
    """Locate the per-frequency noise maximum and compare with the ridge.

    The argmax over energies is refined by a three-point parabolic fit
    (ties break toward lower energy); predictions invert the ridge
    formula on the branch through (anchor, w=0).  Frequencies beyond the
    negative-branch knee have no prediction and report NaN; deviations
    are reported unclipped.
    """
    if e_r0 is None:
        e_r0 = find_resonances(potential, model)[0][0]
    energies = np.asarray(energies, dtype=float)
    frequencies = np.asarray(frequencies, dtype=float)
    n_e = len(energies)
    e_star = np.full(len(frequencies), np.nan)
    tau = np.full(len(frequencies), np.nan)
    for j, w in enumerate(frequencies):
        col = s_matrix[:, j]
        if not np.any(np.isfinite(col)):
            continue
        i = int(np.nanargmax(col))
        est = energies[i]
        if 0 < i < n_e - 1 and np.all(np.isfinite(col[i - 1 : i + 2])):
            denom = col[i - 1] - 2.0 * col[i] + col[i + 1]
            if denom < 0:
                h = energies[i + 1] - energies[i]
                est = energies[i] + 0.5 * h * (col[i - 1] - col[i + 1]) / denom
        e_star[j] = est

    anchor = float(e_star[int(np.argmin(np.abs(frequencies)))])

    def predictions(anchor_energy):
        out = np.full(len(frequencies), np.nan)
        if not math.isfinite(anchor_energy):
            return out
        for j, w in enumerate(frequencies):
            pred = invert_ridge(
                w, anchor_energy, potential.barrier_height, x0, model
            )
            if pred is not None:
                out[j] = pred
        return out

    e_pred = predictions(e_r0)
    e_shape_pred = predictions(anchor)
    for j in range(len(frequencies)):
        ref = e_pred[j] if np.isfinite(e_pred[j]) else e_r0
        tau[j] = transit_time(potential, ref, model)
    with np.errstate(invalid="ignore"):
        in_regime = np.abs(frequencies) <= 1.0 / tau
    return RidgeReport(
        e_r0=e_r0,
        anchor_energy=anchor,
        frequencies=frequencies,
        e_star=e_star,
        e_pred=e_pred,
        deviation=np.abs(e_star - e_pred),
        e_shape_pred=e_shape_pred,
        shape_deviation=np.abs(e_star - e_shape_pred),
        tau_t=tau,
        in_regime=in_regime,
    )


def header_lines(cfg: ExperimentConfig, extra=()):
    lines = [f"# dbnoise {__version__}"]
    lines += [f"# {line}" for line in config_lines(cfg)]
    lines += [f"# {line}" for line in extra]
    return lines


def write_records_csv(path, cfg, entries):
    """entries: iterable of (energy, frequency, row_floats_or_None, err).

    Failed cells keep their (energy, frequency) identity in the row and
    carry NaN for every physics column.
    """
    with open(path, "w") as fh:
        for line in header_lines(cfg):
            fh.write(line + "\n")
        fh.write(",".join(RECORD_COLUMNS + ("error",)) + "\n")
        for energy, frequency, values, err in entries:
            if values is None:
                cells = [fmt_float(energy), fmt_float(frequency)]
                cells += ["nan"] * (len(RECORD_COLUMNS) - 2)
            else:
                cells = [fmt_float(v) for v in values]
            fh.write(",".join(cells) + f",{err}\n")


def parse_records_csv(path):
    """Read a records file back into axes and per-column matrices."""
    rows = []
    with open(path) as fh:
        header = None
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if header is None:
                header = line.split(",")
                continue
            rows.append(line.split(","))
    if header is None or not rows:
        raise ConfigError(f"no data rows in {path}")
    idx = {name: header.index(name) for name in RECORD_COLUMNS}
    data = {
        name: np.array([float(r[idx[name]]) for r in rows]) for name in RECORD_COLUMNS
    }
    energies = np.unique(data["energy"][np.isfinite(data["energy"])])
    freqs = np.unique(data["frequency"][np.isfinite(data["frequency"])])
    mats = {}
    for name in RECORD_COLUMNS[2:]:
        m = np.full((len(energies), len(freqs)), np.nan)
        for k in range(len(rows)):
            e, w = data["energy"][k], data["frequency"][k]
            if not (np.isfinite(e) and np.isfinite(w)):
                continue
            i = int(np.searchsorted(energies, e))
            j = int(np.searchsorted(freqs, w))
            m[i, j] = data[name][k]
        mats[name] = m
    return energies, freqs, mats


def observable_matrix(mats: dict, observable: str) -> np.ndarray:
    """S or the side-averaged squared overlap |I|^2 from record matrices."""
    if observable == "S":
        return mats["S_over_4q2h"]
    if observable == "I2":
        return 0.5 * (mats["I_left_sq"] + mats["I_right_sq"])
    raise ConfigError(
        f"unknown observable {observable!r}; expected one of {OBSERVABLES}"
    )


def write_heatmap(path, cfg, energies, frequencies, matrix, e_r0, model, x0):
    """Rectangular (energy x frequency) matrix with a ridge overlay column.

    The last column holds the ridge frequency evaluated at the row
    energy (NaN outside the arcsin domain), so any plotting tool can
    draw the predicted locus over the data.
    """
    pot_vb = cfg.raw["potential.v_b"]
    with open(path, "w") as fh:
        for line in header_lines(cfg):
            fh.write(line + "\n")
        cols = ["energy"] + [fmt_float(w) for w in frequencies] + ["ridge_frequency"]
        fh.write(",".join(cols) + "\n")
        for i, e in enumerate(energies):
            try:
                wr = ridge_frequency(e, e_r0, pot_vb, x0, model)
            except DbnoiseError:
                wr = math.nan
            vals = [fmt_float(e)] + [fmt_float(v) for v in matrix[i]] + [fmt_float(wr)]
            fh.write(",".join(vals) + "\n")


def write_ridge_csv(path, cfg, report: RidgeReport):
    extra = [
        f"E_r0 = {report.e_r0!r}",
        f"static_noise_max = {report.anchor_energy!r}",
    ]
    with open(path, "w") as fh:
        for line in header_lines(cfg, extra=extra):
            fh.write(line + "\n")
        fh.write(
            "frequency,E_star,E_pred,deviation,"
            "E_shape_pred,shape_deviation,tau_t,in_regime\n"
        )
        for k in range(len(report.frequencies)):
            fh.write(
                ",".join(
                    [
                        fmt_float(report.frequencies[k]),
                        fmt_float(report.e_star[k]),
                        fmt_float(report.e_pred[k]),
                        fmt_float(report.deviation[k]),
                        fmt_float(report.e_shape_pred[k]),
                        fmt_float(report.shape_deviation[k]),
                        fmt_float(report.tau_t[k]),
                        str(int(report.in_regime[k])),
                    ]
                )
                + "\n"
            )


def write_manifest(path, cfg, files, seedless=False, extra=()):
    """Reproducibility manifest: version, full config, derived constants.

    Deliberately excludes wall time and worker count so that outputs are
    byte-identical across schedulings of the same experiment.
    """
    lines = [f"dbnoise {__version__}", f"seedless = {str(seedless).lower()}"]
    lines += config_lines(cfg)
    model = cfg.model
    lines.append(f"derived.m_star_ev_fs2_nm2 = {model.effective_mass!r}")
    if cfg.potential is not None:
        try:
            e_r0 = find_resonances(cfg.potential, cfg.model)[0][0]
            lines.append(f"derived.static_resonance_ev = {e_r0!r}")
            lines.append(
                f"derived.transit_time_fs = {transit_time(cfg.potential, e_r0, cfg.model)!r}"
            )
        except DbnoiseError:
            lines.append("derived.static_resonance_ev = none")
    lines.append(
        f"derived.arrival_time_fs = {arrival_time(cfg.packet.energy, cfg.packet.x0, cfg.model)!r}"
    )
    lines += list(extra)
    lines.append("files = " + ", ".join(files))
    Path(path).write_text("\n".join(lines) + "\n")


@dataclass(frozen=True)
class SweepResult:
    energies: np.ndarray
    frequencies: np.ndarray
    s_matrix: np.ndarray
    i2_matrix: np.ndarray
    ridge: RidgeReport | None
    n_errors: int
    out_dir: Path


def run_sweep(plan: SweepPlan, out_dir, seedless: bool = False) -> SweepResult:
    """Execute every (energy, frequency) cell and write all outputs.

    Produces records.csv, heatmap_S.csv, heatmap_I2.csv, ridge.csv and
    run_manifest.txt under ``out_dir``.  Cell failures are recorded in
    the records error column and as NaN matrix entries; the sweep
    continues.  Output row order is (energy index, frequency index)
    regardless of execution order.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    cfg = plan.base
    tasks = [
        (cfg.raw, i, j, float(e), float(w))
        for i, e in enumerate(plan.energies)
        for j, w in enumerate(plan.frequencies)
    ]
    slots = {}
    if plan.workers > 1 and len(tasks) > 1:
        chunk = max(1, len(tasks) // (plan.workers * 8))
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            for i, j, row, err in pool.map(_cell_task, tasks, chunksize=chunk):
                slots[(i, j)] = (row, err)
    else:
        for task in tasks:
            i, j, row, err = _cell_task(task)
            slots[(i, j)] = (row, err)

    ordered = [
        (float(plan.energies[i]), float(plan.frequencies[j]), *slots[(i, j)])
        for i in range(len(plan.energies))
        for j in range(len(plan.frequencies))
    ]
    n_err = sum(1 for entry in ordered if entry[2] is None)
    write_records_csv(out_dir / "records.csv", cfg, ordered)

    n_e, n_w = len(plan.energies), len(plan.frequencies)
    s_mat = np.full((n_e, n_w), np.nan)
    i2_mat = np.full((n_e, n_w), np.nan)
    k = 0
    for i in range(n_e):
        for j in range(n_w):
            row = ordered[k][2]
            k += 1
            if row is None:
                continue
            d = dict(zip(RECORD_COLUMNS, row))
            s_mat[i, j] = d["S_over_4q2h"]
            i2_mat[i, j] = 0.5 * (d["I_left_sq"] + d["I_right_sq"])

    ridge = None
    files = ["records.csv"]
    if cfg.potential is not None:
        e_r0 = find_resonances(cfg.potential, cfg.model)[0][0]
        ridge = extract_ridge(
            plan.energies,
            plan.frequencies,
            s_mat,
            cfg.potential,
            cfg.model,
            cfg.packet.x0,
            e_r0=e_r0,
        )
        write_ridge_csv(out_dir / "ridge.csv", cfg, ridge)
        for name, mat in (("S", s_mat), ("I2", i2_mat)):
            write_heatmap(
                out_dir / f"heatmap_{name}.csv",
                cfg,
                plan.energies,
                plan.frequencies,
                mat,
                e_r0,
                cfg.model,
                cfg.packet.x0,
            )
        files += ["heatmap_S.csv", "heatmap_I2.csv", "ridge.csv"]
    files.append("run_manifest.txt")
    write_manifest(out_dir / "run_manifest.txt", cfg, files, seedless=seedless)
    return SweepResult(
        energies=plan.energies,
        frequencies=plan.frequencies,
        s_matrix=s_mat,
        i2_matrix=i2_mat,
        ridge=ridge,
        n_errors=n_err,
        out_dir=out_dir,
    )


def emit_heatmap(records_path, out_path, observable: str, cfg: ExperimentConfig):
    """Post-process an existing records file into a heatmap matrix."""
    energies, freqs, mats = parse_records_csv(records_path)
    matrix = observable_matrix(mats, observable)
    if cfg.potential is None:
        raise ConfigError("heatmap overlay needs a potential (v_b > 0)")
    e_r0 = find_resonances(cfg.potential, cfg.model)[0][0]
    write_heatmap(
        out_path, cfg, energies, freqs, matrix, e_r0, cfg.model, cfg.packet.x0
    )
