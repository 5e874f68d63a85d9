"""Command-line front end: vgap / synth / analyze / sim.

Exit codes: 0 success (including an infeasible synthesis, which is a
normal report), 2 usage, 3 parse or dimension errors, 4 internal numeric
failure.  RSSD_THREADS caps per-plant worker parallelism.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import fileio
from .errors import (
    DimensionMismatch,
    DivergentTrace,
    ParseError,
    RssdError,
    UnstableLoop,
)
from .lti import FrequencyGrid, augment_plant, eval_response, spectrum
from .margins import (
    closed_loop,
    disk_margin,
    sensitivity_curves,
    uncertainty_bounds,
)
from .nn_rssd import run_nn_rssd
from .sim import simulate, tracking_metrics
from .vgap import central_plant

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rssd",
        description="Simultaneous-stabilization controller synthesis toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
        ("vgap", "pairwise nu-gap matrix and central-plant report"),
        ("synth", "two-level GA synthesis of compensators and gain"),
        ("analyze", "closed-loop curves, eigenvalues, and margins"),
        ("sim", "linear closed-loop time simulation"),
    ):
        cmd = sub.add_parser(name, help=help_text)
        cmd.add_argument("plantset", help="plant-set JSON file")
        cmd.add_argument("--config", help="run-configuration JSON file")
        cmd.add_argument("--seed", type=int, help="override the config seed")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument("--grid", help="frequency grid override LO:HI:N "
                                        "(log10 rad/s exponents)")
        if name in ("analyze", "sim"):
            cmd.add_argument("--controller", required=True,
                             help="controller JSON file")
        if name == "sim":
            cmd.add_argument("--scenario", required=True,
                             help="scenario JSON file")
    return parser


def _threads() -> int:
    raw = os.environ.get("RSSD_THREADS", "").strip()
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        raise UsageError(f"RSSD_THREADS must be an integer, got {raw!r}")
    if value < 1:
        raise UsageError("RSSD_THREADS must be >= 1")
    return value


class UsageError(Exception):
    pass


def _grid_override(spec: str) -> FrequencyGrid:
    try:
        lo, hi, count = spec.split(":")
        return FrequencyGrid(np.logspace(float(lo), float(hi), int(count)))
    except (ValueError, DimensionMismatch) as exc:
        raise UsageError(f"bad --grid spec {spec!r}: {exc}") from exc


def _resolve(args):
    cfg = fileio.load_config(args.config) if args.config else fileio.config_from_obj({})
    grid = _grid_override(args.grid) if args.grid else cfg.grid
    seed = args.seed if args.seed is not None else cfg.seed
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return cfg, grid, seed, out


def _matrix_list(M):
    return None if M is None else fileio._matrix_obj(M)


def cmd_vgap(args) -> int:
    pset = fileio.load_plantset(args.plantset)
    _, grid, _, out = _resolve(args)
    result = central_plant(pset, grid)
    labels = [p.label for p in pset]
    with open(out / "gap_matrix.csv", "w") as fh:
        fh.write("label," + ",".join(labels) + "\n")
        for lab, row in zip(labels, result.gap_matrix):
            fh.write(lab + "," + ",".join(f"{v:.12g}" for v in row) + "\n")
    report = {
        "labels": labels,
        "central_index": result.index,
        "central_label": labels[result.index],
        "epsilon": result.epsilon,
        "max_vgap": [float(m) for m in result.gap_matrix.max(axis=1)],
    }
    (out / "vgap_report.json").write_text(fileio.canonical_json(report))
    print(f"central plant: {labels[result.index]} (epsilon={result.epsilon:.6g})")
    return EXIT_OK


def cmd_synth(args) -> int:
    pset = fileio.load_plantset(args.plantset)
    cfg, grid, seed, out = _resolve(args)
    if seed is None:
        raise UsageError("synth requires a seed (config or --seed)")
    if cfg.constraints is None or cfg.target is None:
        raise UsageError("synth requires constraints and target in the config")
    scp_cfg = fileio.ga_config(cfg.ga_scp, seed)
    rssd_cfg = fileio.ga_config(cfg.ga_rssd, seed + 1)
    report = run_nn_rssd(pset, cfg.constraints, cfg.target, scp_cfg, rssd_cfg,
                         grid)
    obj = {
        "feasible": report.feasible,
        "gain": _matrix_list(report.gain),
        "w_in": None if report.w_in is None else fileio._bank_obj(report.w_in),
        "w_out": None if report.w_out is None else fileio._bank_obj(report.w_out),
        "j1_history": report.j1_history,
        "j2": report.j2,
        "central_index": report.cp_index,
        "desired_eigenvalues": None if report.desired_eigenvalues is None else
            [[l.real, l.imag] for l in report.desired_eigenvalues],
        "verification": report.verification,
        "scp_generations": report.scp_generations,
        "rssd_invocations": report.rssd_invocations,
        "rssd_generations": report.rssd_generations,
        "seeds": report.seeds,
    }
    (out / "synthesis_report.json").write_text(fileio.canonical_json(obj))
    if report.feasible:
        fileio.save_controller(report.gain, report.w_in, report.w_out,
                               out / "controller.json")
        _analysis_bundle(pset, report.gain, report.w_in, report.w_out,
                         grid, out)
        print(f"feasible controller found (J2={report.j2:.6g})")
    else:
        print("no feasible controller found")
    return EXIT_OK


def _analysis_bundle(pset, gain, w_in, w_out, grid, out: Path) -> dict:
    def one(item):
        idx, plant = item
        aug = augment_plant(w_out, plant, w_in)
        resp = eval_response(aug, 1j * grid.points)
        sv = np.linalg.svd(resp, compute_uv=False)
        try:
            cl = closed_loop(aug, gain)
        except RssdError as exc:
            return idx, plant.label, {"error": str(exc)}, None
        from .lti import StateSpacePlant
        from .margins import closed_loop_matrix
        a_cl = closed_loop_matrix(aug, gain)
        eigs = spectrum(StateSpacePlant(a_cl, aug.B, aug.C, aug.D))
        tables = {
            "eigenvalues": [
                {"re": e.value.real, "im": e.value.imag,
                 "zeta": e.damping, "wn": e.natural_frequency}
                for e in eigs
            ],
        }
        if not cl.stable:
            return idx, plant.label, {"unstable": True, **tables}, (sv, None)
        curves = sensitivity_curves(aug, gain, grid)
        bounds = uncertainty_bounds(aug, gain, grid)
        margins = disk_margin(aug, gain, grid)
        tables.update({
            "unstable": False,
            "gsm": margins.gsm,
            "disk_alpha": margins.disk_alpha,
            "mdgm_db": margins.mdgm_db,
            "mdpm_deg": margins.mdpm_deg,
            "degenerate": margins.degenerate,
        })
        return idx, plant.label, tables, (sv, (curves, bounds))

    threads = _threads()
    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(one, enumerate(pset)))

    summary = {}
    for idx, label, tables, data in results:
        summary[label] = tables
        if data is None:
            continue
        sv, extra = data
        header = ["omega", "sigma_max", "sigma_min"]
        cols = [grid.points, sv[:, 0], sv[:, -1]]
        if extra is not None:
            curves, bounds = extra
            header += ["so_max", "so_min", "si_max", "si_min",
                       "kso_max", "kso_min", "out_mult_bound",
                       "inv_input_bound"]
            cols += [curves.so_max, curves.so_min, curves.si_max,
                     curves.si_min, curves.kso_max, curves.kso_min,
                     bounds.output_mult, bounds.inverse_input]
        fileio.write_csv(out / f"curves_{idx}_{label}.csv", header, cols)
        fileio.write_csv(
            out / f"eigenvalues_{idx}_{label}.csv",
            ["re", "im", "zeta", "wn"],
            list(zip(*[(e["re"], e["im"], e["zeta"], e["wn"])
                       for e in tables["eigenvalues"]]))
            if tables.get("eigenvalues") else [[], [], [], []],
        )
    (out / "margins.json").write_text(fileio.canonical_json(summary))
    return summary


def cmd_analyze(args) -> int:
    pset = fileio.load_plantset(args.plantset)
    _, grid, _, out = _resolve(args)
    gain, w_in, w_out = fileio.load_controller(args.controller)
    summary = _analysis_bundle(pset, gain, w_in, w_out, grid, out)
    flagged = [lab for lab, t in summary.items() if t.get("unstable")]
    if flagged:
        print("unstable loops: " + ", ".join(flagged))
    print(f"analysis written to {out}")
    return EXIT_OK


def cmd_sim(args) -> int:
    pset = fileio.load_plantset(args.plantset)
    _, _, _, out = _resolve(args)
    gain, w_in, w_out = fileio.load_controller(args.controller)
    scenario, metric_spec = fileio.load_scenario(args.scenario)

    def one(item):
        idx, plant = item
        traces = simulate(plant, gain, w_in, w_out, scenario)
        return idx, plant.label, traces

    with ThreadPoolExecutor(max_workers=_threads()) as pool:
        results = list(pool.map(one, enumerate(pset)))

    report = {}
    for idx, label, traces in results:
        header = ["time"]
        cols = [traces.time]
        r = traces.outputs.shape[1]
        m = traces.inputs.shape[1]
        for ch in range(r):
            header += [f"ref_{ch}", f"y_{ch}", f"err_{ch}"]
            cols += [traces.reference[:, ch], traces.outputs[:, ch],
                     traces.errors[:, ch]]
        for ch in range(m):
            header.append(f"u_{ch}")
            cols.append(traces.inputs[:, ch])
        fileio.write_csv(out / f"traces_{idx}_{label}.csv", header, cols)
        if traces.diverged:
            report[label] = {"diverged": True,
                             "divergence_time": traces.divergence_time}
            continue
        try:
            metrics = tracking_metrics(
                traces,
                float(metric_spec.get("error_band", 0.0087)),
                float(metric_spec.get("rms_ceiling", 0.0873)),
                float(metric_spec.get("steady_after", 0.0)),
            )
            report[label] = {"diverged": False, "passed": metrics.passed,
                             "channels": list(metrics.channels)}
        except DivergentTrace as exc:
            report[label] = {"diverged": True, "divergence_time": exc.args[0]}
    (out / "tracking_report.json").write_text(fileio.canonical_json(report))
    print(f"simulation written to {out}")
    return EXIT_OK


_COMMANDS = {
    "vgap": cmd_vgap,
    "synth": cmd_synth,
    "analyze": cmd_analyze,
    "sim": cmd_sim,
}


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ParseError, DimensionMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (RssdError, np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
