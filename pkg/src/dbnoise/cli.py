"""Command-line driver.

Subcommands:

* ``single``   one (energy, frequency) cell -> records.csv
* ``sweep``    full grid -> records.csv, heatmaps, ridge.csv, manifest
* ``spectrum`` static transfer-matrix scan -> spectrum.csv + report
* ``ridge``    analytic ridge table -> ridge.csv
* ``heatmap``  rebuild a heatmap matrix from an existing records.csv

Exit codes: 0 on success, 2 for configuration errors, 3 for numerical
failures.  ``--seedless`` records in the manifest that the run used no
randomness (the solver never does; the flag makes the guarantee
auditable in the output).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__
from .config import default_config, load_config
from .errors import ConfigError, DbnoiseError
from .resonance import build_ridge_prediction, scan_spectrum
from .sweep import (
    SweepPlan,
    fmt_float,
    header_lines,
    emit_heatmap,
    run_single,
    run_sweep,
    write_manifest,
    write_records_csv,
)


def _build_parser():
    p = argparse.ArgumentParser(
        prog="dbnoise",
        description="Two-electron scattering noise in a driven double barrier",
    )
    p.add_argument("--version", action="version", version=f"dbnoise {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--config", type=Path, help="key-value config file")
        sp.add_argument("--out", type=Path, default=Path("dbnoise-out"))
        sp.add_argument(
            "--seedless",
            action="store_true",
            help="record that the run is RNG-free in the manifest",
        )

    sp = sub.add_parser("single", help="run one (energy, frequency) cell")
    common(sp)
    sp.add_argument("--energy", type=float, help="override packet energy (eV)")
    sp.add_argument("--frequency", type=float, help="override drive frequency (rad/fs)")

    sp = sub.add_parser("sweep", help="run the configured energy x frequency grid")
    common(sp)
    sp.add_argument("--workers", type=int, default=1)

    sp = sub.add_parser("spectrum", help="static transfer-matrix transmission scan")
    common(sp)
    sp.add_argument("--emin", type=float, default=0.005)
    sp.add_argument("--emax", type=float, default=0.25)
    sp.add_argument("--estep", type=float, default=1e-4)

    sp = sub.add_parser("ridge", help="tabulate the analytic resonance ridge")
    common(sp)

    sp = sub.add_parser("heatmap", help="rebuild a heatmap from records.csv")
    common(sp)
    sp.add_argument("--observable", required=True, help="S or I2")

    return p


def _load(args):
    return load_config(args.config) if args.config else default_config()


def _cmd_single(args) -> int:
    cfg = _load(args)
    res = run_single(cfg, energy=args.energy, frequency=args.frequency)
    args.out.mkdir(parents=True, exist_ok=True)
    write_records_csv(
        args.out / "records.csv", cfg, [(res.energy, res.frequency, res.row(), "")]
    )
    write_manifest(
        args.out / "run_manifest.txt",
        cfg,
        ["records.csv", "run_manifest.txt"],
        seedless=args.seedless,
    )
    r = res.record
    print(
        f"E = {res.energy:.6g} eV, w = {res.frequency:.6g} rad/fs: "
        f"T = {r.t_a:.6f}, P_LL = {r.p_ll:.6f}, S = {res.noise_record.s:.6f} "
        f"(4q^2/h), t1 = {r.t1:.1f} fs"
    )
    return 0


def _cmd_sweep(args) -> int:
    cfg = _load(args)
    plan = SweepPlan.from_config(cfg, workers=args.workers)
    result = run_sweep(plan, args.out, seedless=args.seedless)
    print(
        f"{len(result.energies)} x {len(result.frequencies)} cells -> "
        f"{result.out_dir} ({result.n_errors} failed)"
    )
    return 0 if result.n_errors == 0 else 3


def _cmd_spectrum(args) -> int:
    cfg = _load(args)
    if cfg.potential is None:
        raise ConfigError("spectrum needs a potential (v_b > 0)")
    spectrum = scan_spectrum(
        cfg.potential, cfg.model, (args.emin, args.emax), args.estep
    )
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "spectrum.csv", "w") as fh:
        for line in header_lines(cfg):
            fh.write(line + "\n")
        fh.write("energy,transmission\n")
        for e, t in zip(spectrum.energies, spectrum.transmissions):
            fh.write(f"{fmt_float(e)},{fmt_float(t)}\n")
    lines = [
        f"dbnoise {__version__} resonance report",
        f"mass_ratio = {cfg.model.mass_ratio!r}",
        f"m_star_ev_fs2_nm2 = {cfg.model.effective_mass!r}",
        f"barrier_height_ev = {cfg.potential.barrier_height!r}",
        f"barrier_width_nm = {cfg.potential.barrier_width!r}",
        f"well_width_nm = {cfg.potential.well_width!r}",
        f"scan_ev = [{args.emin!r}, {args.emax!r}] step {args.estep!r}",
    ]
    if spectrum.resonances:
        for k, (e_r, width) in enumerate(spectrum.resonances):
            lines.append(f"resonance[{k}]: E_r = {e_r!r} eV, width = {width!r} eV")
    else:
        lines.append("no resonance with T > 0.5 in range")
    (args.out / "resonance_report.txt").write_text("\n".join(lines) + "\n")
    print(lines[-1])
    return 0


def _cmd_ridge(args) -> int:
    cfg = _load(args)
    if cfg.potential is None:
        raise ConfigError("ridge needs a potential (v_b > 0)")
    pred = build_ridge_prediction(
        cfg.sweep_energies, cfg.potential, cfg.model, cfg.packet.x0
    )
    args.out.mkdir(parents=True, exist_ok=True)
    with open(args.out / "ridge.csv", "w") as fh:
        for line in header_lines(cfg, extra=[f"E_r0 = {pred.e_r0!r}"]):
            fh.write(line + "\n")
        fh.write("E_r,frequency,t_b,tau_t,in_regime\n")
        for row, ok in zip(pred.samples, pred.in_regime):
            e_r, w, tb, tt = row
            fh.write(
                f"{fmt_float(e_r)},{fmt_float(w)},{fmt_float(tb)},{fmt_float(tt)},{int(ok)}\n"
            )
    print(f"E_r0 = {pred.e_r0:.6f} eV, {len(pred.samples)} ridge samples")
    return 0


def _cmd_heatmap(args) -> int:
    cfg = _load(args)
    records = args.out / "records.csv"
    if not records.exists():
        raise ConfigError(f"no records file at {records}")
    out_path = args.out / f"heatmap_{args.observable}.csv"
    emit_heatmap(records, out_path, args.observable, cfg)
    print(f"wrote {out_path}")
    return 0


_COMMANDS = {
    "single": _cmd_single,
    "sweep": _cmd_sweep,
    "spectrum": _cmd_spectrum,
    "ridge": _cmd_ridge,
    "heatmap": _cmd_heatmap,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DbnoiseError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
