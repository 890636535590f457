"""Command-line front end.

Every subcommand reads an optional TOML scenario (``--config``), writes its
artifacts atomically under ``--out`` and prints a JSON summary on stdout.
CSV files start with a ``# schema_version=...`` comment line and come with
a JSON sidecar holding the resolved scenario.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from . import SCHEMA_VERSION, __version__
from .errors import ConfigError, InfeasibleError, NumericalError
from .material import TWO_PI, PRESETS

log = logging.getLogger("afcxpm")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def _fmt(x) -> str:
    """Locale-independent number formatting with fixed significant digits."""
    if isinstance(x, bool) or x is None:
        return str(x)
    if isinstance(x, int):
        return str(x)
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


class Output:
    """Collects artifacts for one invocation."""

    def __init__(self, out_dir: Path, scenario, command: str, seed: int):
        self.dir = out_dir
        self.scenario = scenario
        self.command = command
        self.seed = seed
        self.written: list[str] = []

    def header(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": "afcxpm",
            "version": __version__,
            "command": self.command,
            "seed": self.seed,
        }

    def json(self, name: str, payload: dict) -> dict:
        doc = {**self.header(), **payload, "scenario": self.scenario.to_dict()}
        path = self.dir / name
        atomic_write(path, json.dumps(doc, indent=2, sort_keys=False, allow_nan=True) + "\n")
        self.written.append(str(path))
        return doc

    def csv(self, name: str, columns: list[str], rows) -> None:
        buf = io.StringIO()
        buf.write(f"# schema_version={SCHEMA_VERSION} tool=afcxpm version={__version__} command={self.command}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
        path = self.dir / name
        atomic_write(path, buf.getvalue())
        self.written.append(str(path))
        meta = {**self.header(), "columns": columns, "scenario": self.scenario.to_dict()}
        side = path.with_suffix(".json")
        atomic_write(side, json.dumps(meta, indent=2) + "\n")
        self.written.append(str(side))


def _emit(doc: dict) -> None:
    sys.stdout.write(json.dumps(doc, indent=2, allow_nan=True) + "\n")


def _threads(args) -> int | None:
    n = args.threads
    if n is None and os.environ.get("AFCXPM_THREADS"):
        try:
            n = int(os.environ["AFCXPM_THREADS"])
        except ValueError:
            raise ConfigError(f"AFCXPM_THREADS must be an integer, got {os.environ['AFCXPM_THREADS']!r}")
    if n is not None:
        if n < 1:
            raise ConfigError(f"--threads must be >= 1, got {n}")
        try:
            import numba

            numba.set_num_threads(min(n, numba.config.NUMBA_NUM_THREADS))
        except ImportError:  # pragma: no cover
            pass
    return n


# --------------------------------------------------------------------------
# subcommands


def cmd_xpm_phase(args, scen, out: Output) -> dict:
    from .xpm import SignalField, phase_per_photon, probe_phase_shift, validity_warnings

    sig = scen.signal
    det_mhz = args.detuning_mhz if args.detuning_mhz is not None else sig.detuning_mhz
    photons = args.photons if args.photons is not None else sig.n_photons
    passes = args.passes if args.passes is not None else sig.passes
    transfer = args.transfer or sig.transfer
    if det_mhz == 0:
        raise ConfigError("--detuning-mhz must be non-zero")
    params = scen.params()
    signal = SignalField.single(photons, TWO_PI * det_mhz * 1e6, duration=sig.mode_duration, passes=passes)
    payload = {
        "detuning_mhz": det_mhz,
        "n_photons": photons,
        "passes": passes,
        "transfer": transfer,
        "phi_per_photon": phase_per_photon(params, signal.detuning, transfer),
        "phi_rad": probe_phase_shift(signal, params, transfer),
        "validity_warnings": validity_warnings(signal),
    }
    return out.json("xpm_phase.json", payload)


def cmd_spectrum_dump(args, scen, out: Output) -> dict:
    feat = scen.feature()
    rows = ((d / TWO_PI, a) for d, a in zip(feat.grid, feat.alpha))
    out.csv("spectrum.csv", ["detuning_hz", "alpha_per_m"], rows)
    comb = feat.comb
    return out.json(
        "spectrum.json",
        {
            "n_points": int(feat.grid.size),
            "storage_time_ns": feat.storage_time * 1e9,
            "mean_tooth_od": comb.mean_tooth_od,
            "effective_od": comb.effective_od,
            "comb_width_mhz": comb.comb_width_hz / 1e6,
        },
    )


def cmd_afc_efficiency(args, scen, out: Output) -> dict:
    from .afc import recall_efficiency

    d = args.d if args.d is not None else scen.comb.build().effective_od
    fin = args.finesse if args.finesse is not None else scen.comb.finesse
    if d < 0 or not fin > 0:
        raise ConfigError(f"need d >= 0 and finesse > 0, got d={d}, finesse={fin}")
    return out.json("afc_efficiency.json", {"d": d, "finesse": fin, "eta": recall_efficiency(d, fin)})


def cmd_loss(args, scen, out: Output) -> dict:
    from .loss import atoms_from_optical_depth, signal_loss, transmission

    params = scen.params()
    comb = scen.comb.build()
    det_mhz = args.detuning_mhz if args.detuning_mhz is not None else scen.signal.detuning_mhz
    passes = args.passes if args.passes is not None else scen.signal.passes
    if args.n_ground is not None:
        n_g = args.n_ground
    else:
        n_g = atoms_from_optical_depth(comb.effective_od, comb.n_teeth, params) / 2.0
    zl = signal_loss(params, n_g, TWO_PI * det_mhz * 1e6, passes)
    return out.json(
        "loss.json",
        {"detuning_mhz": det_mhz, "passes": passes, "n_ground": n_g, "zeta_l": zl, "transmission": transmission(zl)},
    )


def _echo_rows(trace):
    import numpy as np

    p = np.abs(trace.field_out) ** 2
    return zip(trace.t * 1e9, trace.field_out.real, trace.field_out.imag, p)


def cmd_simulate_echo(args, scen, out: Output) -> dict:
    from .afc import probe_echo_amplitude
    from .dynamics import run_echo

    feat = scen.feature()
    params = scen.params()
    probe = scen.probe.build()
    res = run_echo(feat, params, probe=probe, config=scen.solver.build())
    tr = res.trace
    out.csv("echo_trace.csv", ["t_ns", "re_E", "im_E", "abs_E2"], _echo_rows(tr))
    fd = probe_echo_amplitude(feat, probe)
    return out.json(
        "echo.json",
        {
            "t_echo_ns": res.delay * 1e9,
            "storage_time_ns": feat.storage_time * 1e9,
            "eta_numeric": res.efficiency,
            "eta_frequency_domain": fd.efficiency,
            "echo_phase_rad": res.phase,
            "max_closure_error": tr.max_closure_error,
            "max_bloch_excess": tr.max_bloch_violation,
        },
    )


def cmd_simulate_xpm(args, scen, out: Output) -> dict:
    from .dynamics import relative_echo_phase, run_echo, storage_window
    from .xpm import check_validity

    feat = scen.feature()
    params = scen.params()
    probe = scen.probe.build()
    cfg = scen.solver.build()
    window = storage_window(probe, feat.storage_time)
    signal = scen.signal.build(window)
    warnings = check_validity(signal)
    ref = run_echo(feat, params, probe=probe, config=cfg)
    kicked = run_echo(feat, params, probe=probe, signal=signal, transfer=scen.signal.transfer, config=cfg)
    out.csv("xpm_trace.csv", ["t_ns", "re_E", "im_E", "abs_E2"], _echo_rows(kicked.trace))
    return out.json(
        "xpm.json",
        {
            "phi_applied_rad": kicked.applied_phase,
            "echo_phase_difference_rad": relative_echo_phase(kicked.trace, ref.trace),
            "kick_time_ns": kicked.kick_time * 1e9,
            "eta_numeric": kicked.efficiency,
            "validity_warnings": warnings,
        },
    )


def _point_scenario(args, scen):
    from .scenario import parse_scenario

    if getattr(args, "point", None):
        return parse_scenario(args.point, args.preset)
    if getattr(args, "ranges", None):
        return parse_scenario(args.ranges, args.preset)
    return scen


def cmd_feasibility_check(args, scen, out: Output) -> dict:
    from .feasibility import check_conditions

    scen = _point_scenario(args, scen)
    out.scenario = scen
    point = scen.feasibility.build(scen.params())
    rep = check_conditions(point)
    return out.json("feasibility_check.json", rep.to_dict())


def cmd_feasibility_search(args, scen, out: Output) -> dict:
    from .feasibility import minimal_passes

    scen = _point_scenario(args, scen)
    out.scenario = scen
    s = scen.search
    try:
        res = minimal_passes(
            s.ranges(), s.bandwidth_khz * 1e3, s.loss_budget, s.gamma_hz, scen.params(), s.small_waveguide
        )
    except InfeasibleError as exc:
        out.json(
            "feasibility_search.json",
            {"feasible": False, "message": str(exc), "binding": exc.binding, "failures": exc.failures},
        )
        raise
    csv_text = res.pareto_csv()
    reader = csv.reader(io.StringIO(csv_text))
    cols = next(reader)
    out.csv("pareto.csv", cols, list(reader))
    best = res.report.to_dict()
    return out.json(
        "feasibility_search.json",
        {"feasible": True, "evaluated": res.evaluated, "n_feasible": len(res.feasible), "best": best},
    )


def cmd_reproduce_fig3(args, scen, out: Output) -> dict:
    from .measurement import detuning_sweep

    m = scen.measurement
    model = m.build(out.seed)
    dets = [TWO_PI * x * 1e6 for x in m.detunings_mhz]
    rows = detuning_sweep(dets, m.photon_levels, m.repetitions, model, scen.params(), scen.signal.transfer, scen.signal.passes)
    out.csv(
        "fig3.csv",
        ["detuning_mhz", "slope", "slope_err", "analytic"],
        ((r.detuning / TWO_PI / 1e6, r.slope, r.slope_err, r.analytic) for r in rows),
    )
    pulls = [(r.slope - r.analytic) / r.slope_err if r.slope_err > 0 else 0.0 for r in rows]
    return out.json(
        "fig3.json",
        {"n_detunings": len(rows), "max_abs_pull": max(abs(p) for p in pulls), "repetitions": m.repetitions},
    )


def cmd_reproduce_fig4(args, scen, out: Output) -> dict:
    from .measurement import time_bin_phase_experiment

    m = scen.measurement
    model = m.build(out.seed)
    rows = time_bin_phase_experiment(
        scen.signal.n_photons, scen.signal.detuning, m.repetitions, model, scen.params(), m.zeta_l, m.analysis()
    )
    out.csv(
        "fig4.csv",
        ["state", "phase_mean", "phase_sem", "error_before", "error_after"],
        ((r.state, r.phase_mean, r.phase_sem, r.error_before, r.error_after) for r in rows),
    )
    sig = [r for r in rows if r.state != "none"]
    return out.json(
        "fig4.json",
        {
            "phase_model_rad": sig[0].phase_true,
            "phase_shift_vs_none_rad": sig[0].phase_mean - rows[0].phase_mean,
            "max_error_change": max(abs(r.error_after - r.error_before) for r in sig),
        },
    )


COMMANDS = {
    ("xpm", "phase"): cmd_xpm_phase,
    ("spectrum", "dump"): cmd_spectrum_dump,
    ("afc", "efficiency"): cmd_afc_efficiency,
    ("loss", None): cmd_loss,
    ("simulate", "echo"): cmd_simulate_echo,
    ("simulate", "xpm"): cmd_simulate_xpm,
    ("feasibility", "check"): cmd_feasibility_check,
    ("feasibility", "search"): cmd_feasibility_search,
    ("reproduce", "fig3"): cmd_reproduce_fig3,
    ("reproduce", "fig4"): cmd_reproduce_fig4,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML scenario file")
    common.add_argument("--seed", type=int, help="RNG seed (overrides run.seed)")
    common.add_argument("--out", help="output directory (overrides run.out)")
    common.add_argument("--threads", type=int, help="worker threads (env AFCXPM_THREADS)")
    common.add_argument("--preset", choices=sorted(PRESETS), help="material preset")
    common.add_argument("-v", "--verbose", action="store_true")

    p = argparse.ArgumentParser(
        prog="afcxpm", description="AFC memory and Stark-shift cross-phase modulation simulator."
    )
    p.add_argument("--version", action="version", version=f"afcxpm {__version__}")
    sub = p.add_subparsers(dest="group", required=True)

    def leaf(parent, name, help_):
        return parent.add_parser(name, parents=[common], help=help_)

    g = sub.add_parser("xpm", help="cross-phase shift").add_subparsers(dest="action", required=True)
    x = leaf(g, "phase", "probe phase for a signal")
    x.add_argument("--detuning-mhz", type=float)
    x.add_argument("--photons", type=float)
    x.add_argument("--passes", type=int)
    x.add_argument("--transfer", action="store_true", help="excited population parked in an auxiliary level")

    g = sub.add_parser("spectrum", help="absorption profile").add_subparsers(dest="action", required=True)
    leaf(g, "dump", "write the alpha profile as CSV")

    g = sub.add_parser("afc", help="closed-form AFC figures").add_subparsers(dest="action", required=True)
    x = leaf(g, "efficiency", "recall efficiency")
    x.add_argument("--d", type=float)
    x.add_argument("--finesse", type=float)

    x = sub.add_parser("loss", parents=[common], help="off-resonant signal loss")
    x.add_argument("--detuning-mhz", type=float)
    x.add_argument("--passes", type=int)
    x.add_argument("--n-ground", type=float, help="ground-state atom number (default from the comb)")

    g = sub.add_parser("simulate", help="Maxwell-Bloch runs").add_subparsers(dest="action", required=True)
    leaf(g, "echo", "store a probe and record the echo")
    leaf(g, "xpm", "echo phase with and without the signal kick")

    g = sub.add_parser("feasibility", help="design conditions").add_subparsers(dest="action", required=True)
    x = leaf(g, "check", "evaluate one design point")
    x.add_argument("--point", help="TOML file with a [feasibility] table")
    x = leaf(g, "search", "grid search for the fewest passes")
    x.add_argument("--ranges", help="TOML file with a [search] table")

    g = sub.add_parser("reproduce", help="figure data").add_subparsers(dest="action", required=True)
    leaf(g, "fig3", "phase per photon versus detuning")
    leaf(g, "fig4", "time-bin state independence")
    return p


def main(argv=None) -> int:
    from .scenario import parse_scenario

    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    key = (args.group, getattr(args, "action", None))
    try:
        _threads(args)
        scen = parse_scenario(args.config, args.preset)
        run = scen.run
        if args.seed is not None:
            run = replace(run, seed=args.seed)
        if args.out is not None:
            run = replace(run, out=args.out)
        scen = replace(scen, run=run)
        out = Output(Path(run.out), scen, " ".join(k for k in key if k), run.seed)
        doc = COMMANDS[key](args, scen, out)
        doc = {k: v for k, v in doc.items() if k != "scenario"}
        doc["outputs"] = out.written
        _emit(doc)
        return EXIT_OK
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
