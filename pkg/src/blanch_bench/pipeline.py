"""End-to-end runs: mesh, solve, stress grid, profile, regression, report."""

import json
import os
import platform
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .fem import (
    FingerSectionGeometry,
    IndenterSpec,
    MaterialTable,
    SolveConfig,
    build_finger_mesh,
    contact_pressure_summary,
    protocol_conditions,
    recover_stress_field,
    resample_vm_grid,
    solve_indentation,
)
from .fem.io import write_solve_log, write_vm_grid_csv
from .imaging import analyze_stack, load_frame_stack, write_profile_csv
from .render import render_heatmap
from .stats import build_design_matrix, model_report, ols_fit, pls_fit, write_dataset_csv
from .synth import (
    ForwardModel,
    forward_color_profile,
    noise_sigma_for_snr,
    preset_weights,
    radial_map_from_profile,
    synth_frame_stack,
)

SCHEMA_VERSION = 1
THREADS_ENV = "BLANCH_BENCH_THREADS"

_SECTIONS = {
    "geometry",
    "materials",
    "conditions",
    "indenter",
    "mesh",
    "solve",
    "grid",
    "profile",
    "regression",
    "output_dir",
    "seed",
    "render",
}
_INDENTER_KEYS = {"friction_mu", "corner_fillet"}
_MESH_KEYS = {"target_edge", "surface_refine"}
_GRID_KEYS = {"lateral_mm", "depth_mm", "spacing_mm", "mirror"}
_PROFILE_KEYS = {"source", "synth", "frames"}
_SYNTH_KEYS = {"preset", "weights", "gain", "snr_db", "via_frames", "frame_noise", "baseline", "mm_per_pixel"}
_FRAMES_KEYS = {"directories", "length_mm", "angle_step_deg"}
_REGRESSION_KEYS = {"n_components", "scale", "min_overlap_mm"}


def _check_keys(section, data, allowed):
    if not isinstance(data, dict):
        raise ValueError(f"config section {section!r} must be an object")
    unknown = set(data) - allowed
    if unknown:
        raise ValueError(f"unknown keys in {section!r}: {sorted(unknown)}")


def _dataclass_from(section, cls, data):
    _check_keys(section, data, {f.name for f in fields(cls)})
    return cls(**data)


@dataclass(frozen=True)
class PipelineConfig:
    geometry: FingerSectionGeometry = field(default_factory=FingerSectionGeometry)
    materials: MaterialTable = field(default_factory=MaterialTable)
    conditions: tuple = field(default_factory=lambda: tuple(protocol_conditions()))
    friction_mu: float = 0.4
    corner_fillet: float = 0.1
    target_edge: float = 0.2
    surface_refine: float = 0.05
    solve: SolveConfig = field(default_factory=SolveConfig)
    grid_lateral_mm: float = 7.0
    grid_depth_mm: float = 2.0
    grid_spacing_mm: float = 0.1
    grid_mirror: bool = True
    profile_source: str = "synth"  # or "frames"
    synth: dict = field(default_factory=dict)
    frames: dict = field(default_factory=dict)
    n_components: int = None
    scale: bool = True
    min_overlap_mm: float = 5.0
    output_dir: str = None
    seed: int = 0
    render: bool = True

    def __post_init__(self):
        if not self.conditions:
            raise ValueError("condition list is empty")
        conds = tuple((float(d), float(h)) for d, h in self.conditions)
        if len(set(conds)) != len(conds):
            raise ValueError("duplicate conditions")
        for d, h in conds:
            IndenterSpec(d, h, self.friction_mu, self.corner_fillet)
        # protocol order: widest first, deeper indentation first
        object.__setattr__(self, "conditions", tuple(sorted(conds, key=lambda c: (-c[0], -c[1]))))
        if self.profile_source not in ("synth", "frames"):
            raise ValueError("profile source must be 'synth' or 'frames'")
        if self.profile_source == "frames" and "directories" not in self.frames:
            raise ValueError("frames source needs 'directories' mapping condition labels to paths")

    @classmethod
    def from_dict(cls, data):
        """Build from the JSON layout; unknown keys anywhere are rejected."""
        _check_keys("config", data, _SECTIONS)
        kw = {}
        if "geometry" in data:
            kw["geometry"] = _dataclass_from("geometry", FingerSectionGeometry, data["geometry"])
        if "materials" in data:
            kw["materials"] = MaterialTable.from_dict(data["materials"])
        if "conditions" in data:
            conds = data["conditions"]
            if not isinstance(conds, list) or not all(
                isinstance(c, (list, tuple)) and len(c) == 2 for c in conds
            ):
                raise ValueError("conditions must be a list of [width_mm, depth_mm] pairs")
            kw["conditions"] = tuple(tuple(c) for c in conds)
        sub = data.get("indenter", {})
        _check_keys("indenter", sub, _INDENTER_KEYS)
        kw.update(sub)
        sub = data.get("mesh", {})
        _check_keys("mesh", sub, _MESH_KEYS)
        kw.update(sub)
        if "solve" in data:
            kw["solve"] = _dataclass_from("solve", SolveConfig, data["solve"])
        sub = data.get("grid", {})
        _check_keys("grid", sub, _GRID_KEYS)
        for key in _GRID_KEYS:
            if key in sub:
                kw[f"grid_{key}"] = sub[key]
        sub = data.get("profile", {})
        _check_keys("profile", sub, _PROFILE_KEYS)
        if "source" in sub:
            kw["profile_source"] = sub["source"]
        if "synth" in sub:
            _check_keys("profile.synth", sub["synth"], _SYNTH_KEYS)
            kw["synth"] = dict(sub["synth"])
        if "frames" in sub:
            _check_keys("profile.frames", sub["frames"], _FRAMES_KEYS)
            kw["frames"] = dict(sub["frames"])
        sub = data.get("regression", {})
        _check_keys("regression", sub, _REGRESSION_KEYS)
        kw.update(sub)
        for key in ("output_dir", "seed", "render"):
            if key in data:
                kw[key] = data[key]
        return cls(**kw)

    @classmethod
    def from_json(cls, path):
        return cls.from_dict(json.loads(Path(path).read_text()))

    def with_overrides(self, **kw):
        data = {f.name: getattr(self, f.name) for f in fields(self)}
        data.update({k: v for k, v in kw.items() if v is not None})
        return PipelineConfig(**data)

    def to_dict(self):
        return {
            "geometry": self.geometry.to_dict(),
            "materials": self.materials.to_dict(),
            "conditions": [list(c) for c in self.conditions],
            "indenter": {"friction_mu": self.friction_mu, "corner_fillet": self.corner_fillet},
            "mesh": {"target_edge": self.target_edge, "surface_refine": self.surface_refine},
            "solve": self.solve.to_dict(),
            "grid": {
                "lateral_mm": self.grid_lateral_mm,
                "depth_mm": self.grid_depth_mm,
                "spacing_mm": self.grid_spacing_mm,
                "mirror": self.grid_mirror,
            },
            "profile": {"source": self.profile_source, "synth": self.synth, "frames": self.frames},
            "regression": {
                "n_components": self.n_components,
                "scale": self.scale,
                "min_overlap_mm": self.min_overlap_mm,
            },
            "seed": self.seed,
            "render": self.render,
        }


@dataclass
class ReportBundle:
    report: dict
    timings: dict
    output_dir: Path

    @property
    def failed(self):
        return [c["label"] for c in self.report["conditions"] if c["status"] != "ok"]

    @property
    def ok(self):
        return not self.failed


def condition_label(d, h):
    return IndenterSpec(d, h).label


def _condition_seed(seed, d, h):
    """Noise seed for one condition; depends only on the run seed and (d, h)."""
    key = [int(seed), int(round(d * 1000)), int(round(h * 1000))]
    return int(np.random.SeedSequence(key).generate_state(1)[0])


def _synth_profile(cfg, grid, seed):
    s = cfg.synth
    if "weights" in s:
        w = np.asarray(s["weights"], dtype=float)
    else:
        w = preset_weights(s.get("preset", "papillary"), grid.depth_coords)
    model = ForwardModel(w, gain=float(s.get("gain", 1e-4)), noise_sigma=0.0, seed=seed)
    clean = forward_color_profile(grid, model)
    snr = s.get("snr_db", 20.0)
    sigma = 0.0 if snr is None else noise_sigma_for_snr(clean.value, float(snr))
    profile = forward_color_profile(grid, model.with_noise(sigma))
    meta = {"noise_sigma": sigma, "snr_db": snr}
    if s.get("via_frames", False):
        mpp = float(s.get("mm_per_pixel", 0.05))
        half = grid.lateral_coords[-1]
        n = int(round(2 * half / mpp)) + 9
        cmap = radial_map_from_profile(profile, (n, n), mpp)
        stack = synth_frame_stack(
            cmap,
            baseline=float(s.get("baseline", 100.0)),
            frame_noise=float(s.get("frame_noise", 4.0)),
            seed=seed,
        )
        _, _, profile = analyze_stack(stack, length=2 * half, angle_step=20.0)
        meta["via_frames"] = True
    return profile, meta


def _frames_profile(cfg, label):
    dirs = cfg.frames["directories"]
    if label not in dirs:
        raise FileNotFoundError(f"no frame directory configured for {label}")
    stack = load_frame_stack(dirs[label])
    _, _, profile = analyze_stack(
        stack,
        length=float(cfg.frames.get("length_mm", 14.0)),
        angle_step=float(cfg.frames.get("angle_step_deg", 20.0)),
    )
    return profile, {"frames": str(dirs[label])}


def _run_condition(cfg, mesh, d, h, out_dir):
    label = condition_label(d, h)
    cdir = out_dir / label
    cdir.mkdir(parents=True, exist_ok=True)
    times = {}
    t = time.perf_counter()
    indenter = IndenterSpec(d, h, cfg.friction_mu, cfg.corner_fillet)
    sol = solve_indentation(mesh, cfg.materials, indenter, cfg.solve)
    field_ = recover_stress_field(mesh, cfg.materials, sol)
    grid = resample_vm_grid(
        field_, mesh, (cfg.grid_lateral_mm, cfg.grid_depth_mm), cfg.grid_spacing_mm, cfg.grid_mirror
    )
    summary = contact_pressure_summary(sol, indenter, mesh)
    times["fem_s"] = time.perf_counter() - t
    write_vm_grid_csv(grid, cdir / "vm_grid.csv")
    write_solve_log(sol, cdir / "solve_log.json")

    t = time.perf_counter()
    seed = _condition_seed(cfg.seed, d, h)
    if cfg.profile_source == "synth":
        profile, pmeta = _synth_profile(cfg, grid, seed)
    else:
        profile, pmeta = _frames_profile(cfg, label)
    write_profile_csv(profile, cdir / "profile.csv")
    times["profile_s"] = time.perf_counter() - t

    t = time.perf_counter()
    data = build_design_matrix(grid, profile, cfg.min_overlap_mm)
    model = pls_fit(data, n_components=cfg.n_components, scale=cfg.scale)
    pls = model_report(model, data.depth_coords)
    write_dataset_csv(data, cdir / "dataset.csv")
    (cdir / "pls.json").write_text(json.dumps(pls, indent=2, sort_keys=True) + "\n")
    times["regression_s"] = time.perf_counter() - t

    if cfg.render:
        render_heatmap(grid, (0.0, grid.max()), cdir / "vm_grid.png", units="Pa")

    half_width = 0.5 * d
    under = data.lateral_coords <= half_width
    entry = {
        "label": label,
        "width_mm": d,
        "depth_mm": h,
        "status": "ok",
        "pressure": {
            "mean_pressure_mpa": summary.mean_pressure,
            "peak_pressure_mpa": summary.peak_pressure,
            "contact_width_mm": summary.contact_width,
            "total_reaction_n_per_mm": summary.total_reaction,
        },
        "max_von_mises_pa": grid.max(),
        "mean_color_change_under_punch": float(data.y[under].mean()),
        "profile": pmeta,
        "pls": pls,
        "files": {
            "vm_grid": f"{label}/vm_grid.csv",
            "profile": f"{label}/profile.csv",
            "pls": f"{label}/pls.json",
            "dataset": f"{label}/dataset.csv",
            "solve_log": f"{label}/solve_log.json",
        },
    }
    if cfg.render:
        entry["files"]["heatmap"] = f"{label}/vm_grid.png"
    return entry, times


def _pressure_color_regression(entries):
    ok = [e for e in entries if e["status"] == "ok"]
    table = [
        {
            "label": e["label"],
            "mean_pressure_mpa": e["pressure"]["mean_pressure_mpa"],
            "mean_color_change": e["mean_color_change_under_punch"],
        }
        for e in ok
    ]
    result = None
    if len(ok) >= 3:
        x = [row["mean_pressure_mpa"] for row in table]
        y = [row["mean_color_change"] for row in table]
        try:
            result = ols_fit(x, y).to_dict()
        except ValueError as exc:
            result = {"error": str(exc)}
    return {"table": table, "ols": result}


def _threads():
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValueError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None
    return max(1, n)


def run_pipeline(cfg, output_dir=None):
    """Run every condition and write the report bundle.

    A failing condition is recorded with its error message; the others
    are unaffected. ``report.json`` contains no timings, so identical
    configurations produce identical bytes; timings go to ``timings.json``.
    """
    out_dir = Path(output_dir or cfg.output_dir or "blanch_bench_out")
    out_dir.mkdir(parents=True, exist_ok=True)
    timings = {"conditions": {}}
    t0 = time.perf_counter()
    mesh, mesh_error = None, None
    try:
        mesh = build_finger_mesh(cfg.geometry, cfg.target_edge, cfg.surface_refine)
    except (ValueError, ArithmeticError) as exc:
        mesh_error = f"{type(exc).__name__}: {exc}"
    timings["mesh_s"] = time.perf_counter() - t0

    def work(item):
        d, h = item
        if mesh_error:
            return {"label": condition_label(d, h), "width_mm": d, "depth_mm": h, "status": "error", "error": mesh_error}, {}
        try:
            cfg.geometry.check_indenter(d)
            return _run_condition(cfg, mesh, d, h, out_dir)
        except Exception as exc:  # isolate the failure to this condition
            entry = {
                "label": condition_label(d, h),
                "width_mm": d,
                "depth_mm": h,
                "status": "error",
                "error": f"{type(exc).__name__}: {exc}",
            }
            return entry, {}

    items = list(cfg.conditions)
    n_threads = _threads()
    if n_threads > 1:
        with ThreadPoolExecutor(max_workers=n_threads) as pool:
            results = list(pool.map(work, items))
    else:
        results = [work(it) for it in items]

    entries = []
    for entry, times in results:
        entries.append(entry)
        timings["conditions"][entry["label"]] = times
    timings["total_s"] = time.perf_counter() - t0

    report = {
        "schema_version": SCHEMA_VERSION,
        "metadata": {
            "package_version": __version__,
            "numpy_version": np.__version__,
            "scipy_version": scipy.__version__,
            "python_version": platform.python_version(),
            "seed": int(cfg.seed),
            "mesh_nodes": int(mesh.n_nodes) if mesh is not None else None,
            "mesh_elements": int(mesh.n_elements) if mesh is not None else None,
        },
        "config": cfg.to_dict(),
        "conditions": entries,
        "pressure_vs_color": _pressure_color_regression(entries),
        "failed": [e["label"] for e in entries if e["status"] != "ok"],
    }
    (out_dir / "report.json").write_text(json.dumps(report, indent=2, sort_keys=True) + "\n")
    (out_dir / "timings.json").write_text(json.dumps(timings, indent=2, sort_keys=True) + "\n")
    return ReportBundle(report, timings, out_dir)
