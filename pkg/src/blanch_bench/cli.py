"""Command-line entry point: ``blanch-bench <subcommand> ...``."""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np


def _add_mesh_args(p):
    p.add_argument("--target-edge", type=float, default=0.2, help="coarse edge length (mm)")
    p.add_argument("--surface-refine", type=float, default=0.05, help="edge bound near the surface (mm)")
    p.add_argument("--no-ridges", action="store_true", help="flat skin surface")


def _geometry(args):
    from .fem import FingerSectionGeometry

    return FingerSectionGeometry(ridges_enabled=not args.no_ridges)


def cmd_mesh(args):
    from .fem import build_finger_mesh
    from .fem.io import write_mesh_csv

    mesh = build_finger_mesh(_geometry(args), args.target_edge, args.surface_refine)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_mesh_csv(mesh, out / "nodes.csv", out / "elements.csv")
    print(f"{mesh.n_nodes} nodes, {mesh.n_elements} elements -> {out}")
    return 0


def cmd_simulate(args):
    from .fem import (
        IndenterSpec,
        MaterialTable,
        SolveConfig,
        build_finger_mesh,
        contact_pressure_summary,
        recover_stress_field,
        resample_vm_grid,
        solve_indentation,
    )
    from .fem.io import write_solve_log, write_vm_grid_csv
    from .render import render_heatmap

    mesh = build_finger_mesh(_geometry(args), args.target_edge, args.surface_refine)
    materials = MaterialTable()
    indenter = IndenterSpec(args.width, args.depth, args.friction, args.fillet)
    cfg = SolveConfig(load_steps=args.load_steps, linear_solver=args.linear_solver)
    sol = solve_indentation(mesh, materials, indenter, cfg)
    grid = resample_vm_grid(recover_stress_field(mesh, materials, sol), mesh, spacing=args.spacing)
    summary = contact_pressure_summary(sol, indenter, mesh)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_vm_grid_csv(grid, out / "vm_grid.csv")
    write_solve_log(sol, out / "solve_log.json")
    render_heatmap(grid, (0.0, grid.max()), out / "vm_grid.png", units="Pa")
    info = {
        "label": indenter.label,
        "mean_pressure_mpa": summary.mean_pressure,
        "peak_pressure_mpa": summary.peak_pressure,
        "contact_width_mm": summary.contact_width,
        "total_reaction_n_per_mm": summary.total_reaction,
        "max_von_mises_pa": grid.max(),
    }
    (out / "summary.json").write_text(json.dumps(info, indent=2, sort_keys=True) + "\n")
    print(json.dumps(info, indent=2, sort_keys=True))
    return 0


def cmd_analyze_frames(args):
    from .imaging import analyze_stack, load_frame_stack, write_map, write_profile_csv
    from .render import render_heatmap

    stack = load_frame_stack(args.frames)
    cmap, radial, half = analyze_stack(stack, args.length, args.angle_step, args.samples)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_map(cmap, out / "color_change.f32")
    write_profile_csv(radial, out / "radial_profile.csv")
    write_profile_csv(half, out / "profile.csv")
    lim = float(np.abs(cmap.values).max())
    render_heatmap(cmap, (-lim, lim), out / "color_change.png", units="intensity")
    print(f"profile with {half.distance.size} samples -> {out / 'profile.csv'}")
    return 0


def cmd_regress(args):
    from .fem.io import read_vm_grid_csv
    from .imaging import read_profile_csv
    from .stats import build_design_matrix, pls_fit, write_dataset_csv, write_model_report

    grid = read_vm_grid_csv(args.grid)
    profile = read_profile_csv(args.profile)
    data = build_design_matrix(grid, profile, args.min_overlap)
    model = pls_fit(data, n_components=args.components, scale=not args.no_scale)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_dataset_csv(data, out / "dataset.csv")
    write_model_report(model, data.depth_coords, out / "pls.json")
    print(f"A = {model.n_components}, r2 = {model.fitted_r2:.4f} -> {out / 'pls.json'}")
    return 0


def cmd_synth(args):
    from .fem.io import read_vm_grid_csv
    from .imaging import save_frame_stack, write_profile_csv
    from .synth import (
        ForwardModel,
        forward_color_profile,
        noise_sigma_for_snr,
        preset_weights,
        radial_map_from_profile,
        synth_frame_stack,
    )

    grid = read_vm_grid_csv(args.grid)
    model = ForwardModel(preset_weights(args.preset, grid.depth_coords), args.gain, 0.0, args.seed)
    clean = forward_color_profile(grid, model)
    sigma = 0.0 if args.snr_db is None else noise_sigma_for_snr(clean.value, args.snr_db)
    profile = forward_color_profile(grid, model.with_noise(sigma))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_profile_csv(profile, out / "profile.csv")
    if args.frames:
        half = grid.lateral_coords[-1]
        n = int(round(2 * half / args.mm_per_pixel)) + 9
        cmap = radial_map_from_profile(profile, (n, n), args.mm_per_pixel)
        stack = synth_frame_stack(cmap, baseline=args.baseline, frame_noise=args.frame_noise, seed=args.seed)
        save_frame_stack(stack, out / "frames")
    print(f"noise sigma {sigma:.4g} -> {out}")
    return 0


def cmd_pipeline(args):
    from .pipeline import PipelineConfig, run_pipeline

    cfg = PipelineConfig.from_json(args.config) if args.config else PipelineConfig()
    cfg = cfg.with_overrides(seed=args.seed, output_dir=args.out)
    bundle = run_pipeline(cfg)
    for entry in bundle.report["conditions"]:
        if entry["status"] == "ok":
            print(f"{entry['label']:>8}  r2 = {entry['pls']['r2']:.3f}  max vm = {entry['max_von_mises_pa'] / 1e3:.1f} kPa")
        else:
            print(f"{entry['label']:>8}  FAILED: {entry['error']}")
    print(f"report -> {bundle.output_dir / 'report.json'}")
    return 0 if bundle.ok else 1


def cmd_render(args):
    from .fem.io import read_vm_grid_csv
    from .imaging import read_map
    from .render import render_heatmap

    if (args.grid is None) == (args.map is None):
        raise ValueError("give exactly one of --grid or --map")
    data = read_vm_grid_csv(args.grid) if args.grid else read_map(args.map)
    values = data.values
    vmin = float(values.min()) if args.vmin is None else args.vmin
    vmax = float(values.max()) if args.vmax is None else args.vmax
    render_heatmap(data, (vmin, vmax), args.out)
    print(f"heatmap -> {args.out}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(prog="blanch-bench", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mesh", help="build and export the fingertip mesh")
    _add_mesh_args(p)
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=cmd_mesh)

    p = sub.add_parser("simulate", help="solve one indentation and export the stress grid")
    _add_mesh_args(p)
    p.add_argument("--width", type=float, default=3.0, help="indenter width d (mm)")
    p.add_argument("--depth", type=float, default=1.0, help="indentation depth h (mm)")
    p.add_argument("--friction", type=float, default=0.4)
    p.add_argument("--fillet", type=float, default=0.1, help="indenter corner radius (mm)")
    p.add_argument("--load-steps", type=int, default=20)
    p.add_argument("--linear-solver", choices=("direct", "pcg"), default="direct")
    p.add_argument("--spacing", type=float, default=0.1, help="grid spacing (mm)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("analyze-frames", help="colour-change map and profiles from a frame directory")
    p.add_argument("--frames", required=True, help="directory with manifest.json and PNG frames")
    p.add_argument("--length", type=float, default=14.0, help="segment length (mm)")
    p.add_argument("--angle-step", type=float, default=20.0, help="degrees between segments")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_analyze_frames)

    p = sub.add_parser("regress", help="PLS regression of a profile on a stress grid")
    p.add_argument("--grid", required=True, help="vm_grid.csv")
    p.add_argument("--profile", required=True, help="profile.csv (one-sided)")
    p.add_argument("--components", type=int, default=None, help="fixed A (default: leave-one-out CV)")
    p.add_argument("--no-scale", action="store_true", help="do not scale columns to unit variance")
    p.add_argument("--min-overlap", type=float, default=5.0, help="required lateral overlap (mm)")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_regress)

    p = sub.add_parser("synth", help="synthetic colour-change profile (and frames) from a stress grid")
    p.add_argument("--grid", required=True)
    p.add_argument("--preset", choices=("papillary", "uniform"), default="papillary")
    p.add_argument("--gain", type=float, default=1e-4, help="intensity per Pa")
    p.add_argument("--snr-db", type=float, default=20.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--frames", action="store_true", help="also write a synthetic frame stack")
    p.add_argument("--mm-per-pixel", type=float, default=0.05)
    p.add_argument("--baseline", type=float, default=100.0)
    p.add_argument("--frame-noise", type=float, default=4.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("pipeline", help="run all conditions end to end")
    p.add_argument("--config", help="JSON configuration")
    p.add_argument("--out", help="output directory (overrides the config)")
    p.add_argument("--seed", type=int, default=None, help="overrides the config seed")
    p.set_defaults(func=cmd_pipeline)

    p = sub.add_parser("render", help="heatmap PNG of a grid CSV or a colour-change map")
    p.add_argument("--grid", help="vm_grid.csv")
    p.add_argument("--map", help="float32 map written by analyze-frames")
    p.add_argument("--vmin", type=float, default=None)
    p.add_argument("--vmax", type=float, default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_render)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except (ValueError, FileNotFoundError, OSError) as exc:
        print(f"blanch-bench {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
