"""Command-line entry point.

Subcommands cover each subsystem (``field-map``, ``swr``,
``epr-spectrum``, ``deer-sim``, ``deer-fit``, ``snr``, ``yield``,
``phc-bands``, ``design``) plus ``reproduce``, which regenerates every
design-target number into one pass/fail table.  Every run writes a
manifest next to its outputs.  Exit codes: 0 success, 1 validation or
usage error, 2 numerical failure.  Diagnostics go to stderr; data goes
to files or stdout.
"""

from __future__ import annotations

import argparse
import os
import sys
import time
from pathlib import Path

THREADS_ENV = "SICYIG_THREADS"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise SystemExit(self.exit_with(message))

    @staticmethod
    def exit_with(message):
        print(f"error: {message}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sicyig", description=__doc__.split("\n")[0])
    parser.add_argument("--config", type=Path, default=None,
                        help="sensor configuration file (TOML); defaults to "
                             "the bundled reference design")
    parser.add_argument("--out", type=Path, default=Path("."),
                        help="output directory (created if missing)")
    parser.add_argument("--seed", type=int, default=0,
                        help="seed for the Monte-Carlo oracle")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="preferred tabular output format")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"BLAS thread count (overrides ${THREADS_ENV})")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("field-map", help="stripe field and gradient map")
    p.add_argument("--x-start", type=float, default=None)
    p.add_argument("--x-stop", type=float, default=None)
    p.add_argument("--x-points", type=int, default=200)
    p.add_argument("--z-half", type=float, default=0.0)
    p.add_argument("--z-points", type=int, default=1)
    p.add_argument("--xopt", action="store_true",
                   help="print the gradient optimum as JSON and skip the map")

    p = sub.add_parser("swr", help="spin-wave dispersion map and lines")
    p.add_argument("--modes", type=int, default=10)

    p = sub.add_parser("epr-spectrum", help="powder spectra and line lists")
    p.add_argument("--orientations", type=int, default=200)
    p.add_argument("--gradient", action="store_true",
                   help="apply the stripe-field shift at the probe/plane depths")

    sub.add_parser("deer-sim", help="plane-bath decay trace")

    p = sub.add_parser("deer-fit", help="invert a trace CSV for (dx, C2D)")
    p.add_argument("trace_csv", type=Path)

    p = sub.add_parser("snr", help="shot-noise budget report")
    p.add_argument("--points", type=int, default=100)

    p = sub.add_parser("yield", help="implantation yield statistics")
    p.add_argument("--profile", type=Path, required=True)
    p.add_argument("--dose", type=float, required=True, help="ions per cm^2")
    p.add_argument("--aperture-nm", type=float, required=True)
    p.add_argument("--decimation", type=float, default=1.0)
    p.add_argument("--devices", type=int, default=100)
    p.add_argument("--window", type=str, default=None, help="z1:z2 in nm")

    sub.add_parser("phc-bands", help="TM band diagram and gap report")

    p = sub.add_parser("design", help="lattice and nanobeam design tables")
    p.add_argument("--max-m", type=int, default=3)

    p = sub.add_parser("reproduce", help="regenerate all design targets")
    p.add_argument("--rows", type=str, default=None,
                   help="substring filter on claim ids")
    p.add_argument("--mc-configs", type=int, default=1200)
    return parser


def _cmd_field_map(args, cfg, out_dir):
    import json

    import numpy as np

    from .magnetostatics import find_xopt, gradient_profile
    from .reports import write_csv

    geom = cfg.stripe
    if args.xopt:
        x_opt, g_max = find_xopt(geom)
        print(json.dumps({"x_opt_nm": round(x_opt, 3),
                          "g_max_G_per_nm": round(g_max, 6)}, sort_keys=True))
        return []
    surface = geom.thickness_nm / 2
    x_start = args.x_start if args.x_start is not None else surface + 10.0
    x_stop = args.x_stop if args.x_stop is not None else surface + 350.0
    zs = (np.linspace(-args.z_half, args.z_half, args.z_points)
          if args.z_points > 1 else [0.0])
    rows = []
    for z in zs:
        for s in gradient_profile(geom, x_start, x_stop, args.x_points, z_nm=z):
            rows.append((s.position_nm[0], s.position_nm[2], s.b_dip_G[0],
                         s.b_dip_G[1], s.b_dip_G[2], s.grad_bz_x_G_per_nm))
    path = out_dir / "field_map.csv"
    write_csv(path, ["x_nm", "z_nm", "Bx_G", "By_G", "Bz_G", "dBz_dx_G_per_nm"],
              rows)
    return [path]


def _cmd_swr(args, cfg, out_dir):
    import numpy as np

    from .reports import write_csv
    from .swr import swr_lines, _eigenfrequencies

    model = cfg.swr_model
    lo, hi = cfg.swr_scan_G
    disp_rows = []
    for b0 in np.linspace(lo, hi, 81):
        _, freqs, _ = _eigenfrequencies(model, b0, args.modes)
        for mode, f in enumerate(freqs):
            disp_rows.append((b0, mode, f / 1e3))
    disp_path = out_dir / "swr_dispersion.csv"
    write_csv(disp_path, ["B0_G", "mode", "freq_GHz"], disp_rows)

    lines = swr_lines(model, cfg.microwave_freq_GHz, lo, hi)
    line_path = out_dir / "swr_lines.csv"
    write_csv(line_path, ["resonance_field_G", "strength", "edge"],
              [(ln.resonance_field_G, ln.oscillator_strength,
                ln.edge_localized) for ln in lines])
    return [disp_path, line_path]


def _probe_plane_positions(cfg):
    geom = cfg.stripe
    x_probe = (geom.thickness_nm / 2 + cfg.membrane_thickness_nm
               - cfg.probe_depth_nm)
    return x_probe, x_probe + cfg.deer_scenario.dx_nm


def _cmd_epr_spectrum(args, cfg, out_dir):
    import numpy as np

    from .constants import MHZ_PER_G
    from .magnetostatics import effective_zeeman_shift
    from .reports import json_report, write_csv, write_json
    from .spectra import gradient_shifted_lines, powder_spectrum, resonance_fields

    freq = cfg.microwave_freq_GHz
    orientation = (0.0, 0.0, 1.0)
    x_probe, x_plane = _probe_plane_positions(cfg)
    outputs = []
    line_payload = {}
    for idx, sys_ in enumerate(cfg.spin_systems):
        plain = resonance_fields(sys_, freq, orientation)
        shift = None
        lines = plain
        if args.gradient:
            x = x_probe if idx == 0 else x_plane
            b_iso = freq * 1e3 / (sys_.g[0] * MHZ_PER_G)
            shift = effective_zeeman_shift(cfg.stripe, (x, 0.0, 0.0), b_iso)
            lines = gradient_shifted_lines(sys_, freq, orientation, shift)
        label = sys_.label or f"system{idx}"
        line_payload[label] = {
            "shift_G": None if shift is None else shift.total_G,
            "lines": [{"field_G": ln.resonance_field_G,
                       "amplitude": ln.amplitude,
                       "transition": list(ln.transition)} for ln in lines],
        }
        fields = [ln.resonance_field_G for ln in plain if ln.amplitude > 1e-6]
        if fields:
            lo = min(fields) - 30 * sys_.linewidth_G
            hi = max(fields) + 30 * sys_.linewidth_G
        else:
            lo, hi = 3000.0, 3700.0
        grid = np.linspace(lo, hi, 2001)
        spec = powder_spectrum(sys_, freq, grid, n_orient=args.orientations)
        out_grid = grid - shift.total_G if shift is not None else grid
        path = out_dir / f"spectrum_{label}.csv"
        write_csv(path, ["B_G", "intensity"],
                  zip(out_grid.tolist(), spec.intensity.tolist()))
        outputs.append(path)
    json_path = out_dir / "epr_lines.json"
    write_json(json_path, json_report("epr_lines", line_payload))
    outputs.append(json_path)
    return outputs


def _cmd_deer_sim(args, cfg, out_dir):
    from .deer import time_trace
    from .reports import write_csv

    trace = time_trace(cfg.deer_scenario)
    path = out_dir / "deer_trace.csv"
    write_csv(path, ["td_us", "V"], zip(trace.td_us.tolist(), trace.v.tolist()))
    return [path]


def _cmd_deer_fit(args, cfg, out_dir):
    import numpy as np

    from .deer import DeerTrace, fit_plane
    from .reports import dump_json, json_report, read_csv

    header, rows = read_csv(args.trace_csv)
    if header[:2] != ["td_us", "V"]:
        raise ValueError(f"{args.trace_csv}: expected header td_us,V")
    if len(rows) < 8:
        raise ValueError("insufficient points: need at least 8 trace samples")
    td = np.array([float(r[0]) for r in rows])
    v = np.array([float(r[1]) for r in rows])
    sc = cfg.deer_scenario
    fit = fit_plane(DeerTrace(td, np.clip(v, 0.0, 1.0)), sc.p_pump,
                    b0_direction=sc.b0_direction, g_probe=sc.g_probe,
                    g_target=sc.g_target)
    flags = [name for name, on in (("bound-active", fit.bound_active),
                                   ("ill-conditioned", fit.ill_conditioned)) if on]
    payload = json_report("deer_fit", {
        "dx_nm": fit.dx_nm, "C2D_per_nm2": fit.c2d_per_nm2,
        "residual_rms": fit.residual_rms, "flags": flags,
    })
    sys.stdout.write(dump_json(payload))
    return []


def _cmd_snr(args, cfg, out_dir):
    from .deer import time_trace
    from .reports import dump_json, json_report
    from .snr import averaged_snr, experiment_time_s, r_opt, snr_single_shot

    budget = cfg.snr_budget
    v_end = float(time_trace(cfg.deer_scenario).v[-1])
    r0 = r_opt(budget)
    r_off = snr_single_shot(budget, v_end, "off_resonant")
    r_res = snr_single_shot(budget, v_end, "resonant")
    payload = json_report("snr_budget", {
        "r_opt": r0,
        "v_deer_end": v_end,
        "r_single_shot_off_resonant": r_off,
        "r_single_shot_resonant": r_res,
        "r_averaged_off_resonant": averaged_snr(r_off, budget.n_cycles),
        "t_per_point_s": experiment_time_s(budget.n_cycles, budget.t_rep_us, 1),
        "t_total_s": experiment_time_s(budget.n_cycles, budget.t_rep_us,
                                       args.points),
        "assumptions": [
            "photon shot-noise limited detection",
            "contrast evaluated at the last trace delay",
            f"x_contrast = {budget.x_contrast}",
            f"collection {budget.p_coll}, detection {budget.p_det}",
        ],
    })
    sys.stdout.write(dump_json(payload))
    return []


def _cmd_yield(args, cfg, out_dir):
    from .fabstats import (ApertureSpec, depth_window_probability,
                           expected_count, parse_profile, poisson_histogram,
                           usable_yield)
    from .reports import dump_json, json_report

    profile = parse_profile(args.profile)
    aperture = ApertureSpec(args.aperture_nm, args.dose, args.decimation)
    lam = expected_count(profile, aperture)
    hist = poisson_histogram(lam, args.devices)
    payload = {"lambda": lam,
               "histogram": [{"k": k, "expected": e, "rounded": r}
                             for k, e, r in hist]}
    if args.window:
        z1, z2 = (float(t) for t in args.window.split(":"))
        p = depth_window_probability(profile, z1, z2)
        payload["p_window"] = p
        payload["usable"] = usable_yield(lam, p, args.devices)
    sys.stdout.write(dump_json(json_report("implant_yield", payload)))
    return []


def _cmd_phc_bands(args, cfg, out_dir):
    from .photonics import find_gaps, k_path, tm_bands
    from .reports import json_report, write_csv, write_json

    p = cfg.data["photonic"]
    kpts, labels = k_path(p["kpoints_per_segment_count"])
    diagram = tm_bands(cfg.phc_lattice, kpts, labels, p["planewaves_count"])
    n_bands = diagram.bands.shape[1]
    band_path = out_dir / "phc_bands.csv"
    write_csv(band_path,
              ["k_index", "k_label"] + [f"band{i+1}" for i in range(n_bands)],
              [(i, labels[i]) + tuple(diagram.bands[i])
               for i in range(len(kpts))])

    def gap_dict(g):
        return {"kind": g.kind, "lower": g.lower_edge, "upper": g.upper_edge,
                "center": g.center, "width": g.width}

    gaps_path = out_dir / "phc_gaps.json"
    write_json(gaps_path, json_report("phc_gaps", {
        "complete": [gap_dict(g) for g in find_gaps(diagram)],
        "partial_KM": [gap_dict(g) for g in find_gaps(diagram, segment="KM")],
    }))
    return [band_path, gaps_path]


def _cmd_design(args, cfg, out_dir):
    from .photonics import find_gaps, k_path, lattice_from_zpl, nanobeam_widths, tm_bands

    lat = cfg.phc_lattice
    zpl = cfg.zpl_wavelength_nm
    p = cfg.data["photonic"]
    kpts, labels = k_path(p["kpoints_per_segment_count"])
    diagram = tm_bands(lat, kpts, labels, p["planewaves_count"])
    print(f"zero-phonon line {zpl:g} nm, r/a = {lat.r_over_a:g}")
    print("gap kind        a/lambda   lattice a (nm)  hole diameter (nm)")
    for g in find_gaps(diagram) + find_gaps(diagram, segment="KM"):
        a, d = lattice_from_zpl(zpl, g.center, lat.r_over_a)
        print(f"{g.kind:<14s}  {g.center:8.4f}  {a:14.1f}  {d:18.1f}")
    print()
    print("nanobeam widths (m * lambda/2):")
    for width, antinode in nanobeam_widths(zpl, args.max_m):
        tag = "center anti-node" if antinode else "center node"
        print(f"  {width:7.1f} nm  {tag}")
    return []


def _cmd_reproduce(args, cfg, out_dir):
    from .reports import write_csv, write_json
    from .reproduce import format_table, reproduce, rows_payload

    rows = reproduce(cfg, seed=args.seed, rows_filter=args.rows,
                     mc_configs=args.mc_configs)
    if not rows:
        raise ValueError(f"no claim rows match filter {args.rows!r}")
    print(format_table(rows))
    csv_path = out_dir / "reproduce.csv"
    write_csv(csv_path, ["claim_id", "target", "computed", "tolerance",
                         "passed", "note"],
              [(r.claim_id, r.target, r.computed, r.tolerance, r.passed, r.note)
               for r in rows])
    json_path = out_dir / "reproduce.json"
    write_json(json_path, rows_payload(rows))
    if not all(r.passed for r in rows):
        raise _RowFailure([csv_path, json_path])
    return [csv_path, json_path]


class _RowFailure(Exception):
    def __init__(self, outputs):
        self.outputs = outputs


_COMMANDS = {
    "field-map": _cmd_field_map,
    "swr": _cmd_swr,
    "epr-spectrum": _cmd_epr_spectrum,
    "deer-sim": _cmd_deer_sim,
    "deer-fit": _cmd_deer_fit,
    "snr": _cmd_snr,
    "yield": _cmd_yield,
    "phc-bands": _cmd_phc_bands,
    "design": _cmd_design,
    "reproduce": _cmd_reproduce,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1

    threads = args.threads
    if threads is None and os.environ.get(THREADS_ENV):
        try:
            threads = int(os.environ[THREADS_ENV])
        except ValueError:
            print(f"error: ${THREADS_ENV} must be an integer", file=sys.stderr)
            return 1
    if threads is not None:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS",
                    "MKL_NUM_THREADS"):
            os.environ[var] = str(threads)

    # heavy imports only after the thread environment is pinned
    import numpy as np

    from . import __version__
    from .config import ConfigError, default_config_path, load_config
    from .deer import QuadratureError
    from .fabstats import ProfileFormatError
    from .reports import RunManifest, write_manifest

    config_path = args.config or default_config_path()
    out_dir = args.out
    started = time.time()
    failure_outputs = None
    try:
        cfg = load_config(config_path)
        out_dir.mkdir(parents=True, exist_ok=True)
        outputs = _COMMANDS[args.command](args, cfg, out_dir)
        code = 0
    except _RowFailure as exc:
        print("error: one or more claim rows failed", file=sys.stderr)
        failure_outputs = exc.outputs
        outputs = exc.outputs
        code = 1
    except (ConfigError, ProfileFormatError, ValueError, KeyError,
            FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (QuadratureError, ArithmeticError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 2

    manifest = RunManifest(args.command, str(config_path), args.seed,
                           __version__, round(time.time() - started, 3),
                           tuple(str(p) for p in outputs))
    write_manifest(manifest, out_dir)
    if failure_outputs is not None:
        return 1
    return code


if __name__ == "__main__":
    raise SystemExit(main())
