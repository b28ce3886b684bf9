"""Batch front-end: design trajectories, render PSFs, compute metrics.

Subcommands write machine-readable outputs (trajectory JSON, binary grids
with JSON sidecars, metrics JSON, CSV curves) plus a rendered figure for
the report-style commands, and a manifest recording inputs, seed, version
and output digests so runs can be reproduced byte for byte.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .analysis import (
    Phantom,
    PsfMetrics,
    RidgeNotFound,
    efficiency_curve,
    lowlevel_alias_power,
    measure_fwhm,
    measure_ridge,
    phantom_experiment,
)
from .design2d import DegenerateShape, ProjectionSet2D, design_2d
from .design3d import (
    FovConstraintViolated,
    Trajectory3D,
    design_cones,
    design_pr3d_cones,
    design_pr3d_spiral,
)
from .gridding import GriddingConfig, OutOfBand, compute_psf, load_grid, save_grid
from .sampling import angular_dcf_2d
from .shapes import Circle, Shape, dual_shape, shape_from_dict

SCHEMA = "radial-fov/1"

_EXIT_SPEC = 2
_EXIT_DESIGN = 3


class SpecError(Exception):
    """Invalid shape spec or command arguments."""


_KIND_ALIASES = {"rect": "rectangle", "oval": "stadium"}


def parse_shape(text: str, res: float | None = None, is_k: bool = False) -> Shape:
    """Parse a compact ``kind:params`` spec, inline JSON, or ``@file``.

    FOV lengths are millimetres when ``res`` (mm/px) is given, pixels
    otherwise; k-space extent shapes are always cycles/px.
    """
    text = text.strip()
    try:
        if text.startswith("@"):
            spec = json.loads(Path(text[1:]).read_text())
            return shape_from_dict(spec, res=res)
        if text.startswith("{"):
            return shape_from_dict(json.loads(text), res=res)
        if ":" not in text:
            raise ValueError("expected kind:params")
        kind, _, params = text.partition(":")
        kind = _KIND_ALIASES.get(kind, kind)
        values = [float(v) for v in params.split(",") if v]
        scale = 1.0 if (is_k or not res) else 1.0 / res
        if kind == "circle":
            (w,) = values
            return shape_from_dict({"kind": "circle", "w": w * scale})
        if kind in ("ellipse", "rectangle", "diamond", "stadium"):
            wx, wy = values
            return shape_from_dict({"kind": kind, "wx": wx * scale, "wy": wy * scale})
        if kind == "star":
            lo, hi = values[0], values[1]
            lobes = int(values[2]) if len(values) > 2 else 4
            return shape_from_dict({"kind": "star", "kmin": lo, "kmax": hi, "lobes": lobes})
        raise ValueError(f"unknown shape kind {kind!r}")
    except SpecError:
        raise
    except Exception as exc:
        raise SpecError(f"bad shape spec {text!r}: {exc}") from exc


def _parse_kmax(text: str | None, fov: Shape | None) -> Shape:
    if text is None:
        return Circle(0.5)
    if text.startswith("dual"):
        if fov is None:
            raise SpecError("a dual kmax needs a FOV shape")
        nominal = float(text.partition(":")[2]) if ":" in text else 0.5
        return dual_shape(fov, nominal)
    return parse_shape(text, is_k=True)


def _json_default(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj)}")


def _write_json(path: Path, doc) -> None:
    path.write_text(json.dumps(doc, indent=2, default=_json_default) + "\n")


def _digest(path: Path) -> str:
    return "sha256:" + hashlib.sha256(path.read_bytes()).hexdigest()


def _write_manifest(outdir: Path, argv, inputs: dict, seed: int, outputs) -> None:
    doc = {
        "command": list(argv),
        "version": __version__,
        "seed": int(seed),
        "inputs": inputs,
        "outputs": {p.name: _digest(p) for p in outputs},
    }
    _write_json(outdir / "manifest.json", doc)


def _traj_doc(mode: str, kind: str, seed: int, shapes: dict, traj) -> dict:
    doc = {
        "schema": SCHEMA,
        "mode": mode,
        "kind": kind,
        "seed": int(seed),
        "shapes": shapes,
    }
    if isinstance(traj, ProjectionSet2D):
        doc["scale_factor"] = traj.scale_factor
        doc["N"] = traj.count
        doc["projections"] = [
            {"angle": float(a), "kmax": float(k), "dcf_angular": 1.0}
            for a, k in zip(traj.angles, traj.kmax)
        ]
    elif isinstance(traj, Trajectory3D):
        doc["N"] = traj.count
        if traj.cone_counts is not None:
            doc["cone_counts"] = [int(m) for m in traj.cone_counts]
        doc["projections"] = [
            {"theta": float(t), "phi": float(p), "kmax": float(k), "dcf_angular": float(w)}
            for t, p, k, w in zip(traj.theta, traj.phi, traj.kmax, traj.dcf_angular)
        ]
    else:
        doc["N"] = traj.count
        doc["cones"] = [
            {"theta": float(t), "kmax": float(k)}
            for t, k in zip(traj.deflections, traj.kmax)
        ]
    return doc


def _load_traj(path: Path):
    doc = json.loads(path.read_text())
    if doc.get("schema") != SCHEMA:
        raise SpecError(f"unsupported trajectory schema in {path}")
    shapes = {k: shape_from_dict(v) for k, v in doc["shapes"].items()}
    if doc["mode"] == "pr2d":
        pr = doc["projections"]
        pset = ProjectionSet2D(
            angles=np.array([p["angle"] for p in pr]),
            kmax=np.array([p["kmax"] for p in pr]),
            scale_factor=float(doc.get("scale_factor", 1.0)),
            phi0=float(pr[0]["angle"]),
            phi_width=math.pi if doc["kind"] == "full" else 2.0 * math.pi,
        )
        return doc, pset, shapes
    if doc["mode"] in ("pr3d-cones", "pr3d-spiral"):
        pr = doc["projections"]
        traj = Trajectory3D(
            theta=np.array([p["theta"] for p in pr]),
            phi=np.array([p["phi"] for p in pr]),
            kmax=np.array([p["kmax"] for p in pr]),
            dcf_angular=np.array([p["dcf_angular"] for p in pr]),
            method="cones_based" if doc["mode"] == "pr3d-cones" else "spiral_based",
            projection_kind=doc["kind"],
            seed=doc.get("seed"),
        )
        return doc, traj, shapes
    raise SpecError(f"trajectory mode {doc['mode']!r} cannot be loaded")


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    return plt


def _shape_outline(shape: Shape, scale: float = 1.0):
    ang = np.linspace(0.0, 2.0 * math.pi, 512)
    r = scale * np.asarray(shape(ang))
    return r * np.cos(ang), r * np.sin(ang)


def _save_psf_figure(vol, fov_shapes, path: Path) -> None:
    plt = _pyplot()
    mag = np.abs(vol.values)
    if vol.ndim == 3:
        mag = mag[vol.values.shape[0] // 2]
    peak = mag.max()
    fig, ax = plt.subplots(figsize=(6, 6))
    nx, ny = vol.dims[0], vol.dims[1]
    extent = (-(nx // 2), nx - nx // 2, -(ny // 2), ny - ny // 2)
    ax.imshow(np.log10(mag / peak + 1e-6), origin="lower", extent=extent, cmap="gray")
    fov = fov_shapes[0] if isinstance(fov_shapes, tuple) else fov_shapes
    if fov is not None:
        # the first aliasing ridges trace the FOV profile
        ox, oy = _shape_outline(fov)
        ax.plot(ox, oy, "w--", linewidth=0.8)
    ax.set_xlabel("x (px)")
    ax.set_ylabel("y (px)")
    ax.set_title("log10 |PSF| / peak")
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)


def _save_metrics_figure(directions, radii, fov: Shape, path: Path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(subplot_kw={"projection": "polar"}, figsize=(6, 6))
    ang = np.linspace(0.0, 2.0 * math.pi, 512)
    ax.plot(ang, np.asarray(fov(ang)), "-", label="designed FOV")
    ax.plot(directions, radii, "o", ms=4, label="measured ridge")
    ax.legend(loc="lower right")
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)


def _save_curve_figure(points, path: Path) -> None:
    plt = _pyplot()
    fig, ax = plt.subplots(figsize=(6, 4.5))
    x = [p.measure for p in points]
    y = [p.count for p in points]
    ax.plot(x, y, "o-")
    ax.set_xlabel("FOV area (px^2)" if points and points[0].shape.split(":")[0]
                  in ("circle", "ellipse", "rect", "diamond", "stadium") else "FOV volume (px^3)")
    ax.set_ylabel("projections")
    ax.set_title(points[0].shape if points else "")
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)


def _save_phantom_figure(report, path: Path) -> None:
    plt = _pyplot()
    recon = np.abs(report.recon.values)
    ref = np.abs(report.reference.values)
    if report.recon.ndim == 3:
        mid = recon.shape[0] // 2
        recon, ref = recon[mid], ref[mid]
    fig, axes = plt.subplots(1, 3, figsize=(12, 4))
    for ax, img, title in zip(
        axes, (ref, recon, np.abs(recon - ref)), ("reference", "reconstruction", "difference")
    ):
        ax.imshow(img, origin="lower", cmap="gray")
        ax.set_title(title)
        ax.axis("off")
    fig.suptitle(f"peak in-band alias {report.peak_inband_alias * 100:.2f}%")
    fig.savefig(path, dpi=110, bbox_inches="tight")
    plt.close(fig)


def _outdir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _design_from_args(args):
    """Build (mode, kind, shapes-dict, trajectory) from design flags."""
    mode = args.mode
    res = getattr(args, "res", None)
    kind = "half" if getattr(args, "half", False) else "full"
    seed = getattr(args, "seed", 0)
    if mode == "pr2d":
        if not args.fov:
            raise SpecError("pr2d needs --fov")
        fov = parse_shape(args.fov, res=res)
        kmax = _parse_kmax(args.kmax, fov)
        width = 2.0 * math.pi if kind == "half" else math.pi
        parity = args.parity if args.parity else "any"
        if parity not in ("any", "even", "odd"):
            parity = int(parity)
        pset = design_2d(fov, kmax, phi0=args.phi0, phi_width=width, parity=parity)
        shapes = {"fov": fov.to_dict(), "kmax": kmax.to_dict()}
        return mode, kind, shapes, pset, fov, kmax
    if not args.fovt:
        raise SpecError(f"{mode} needs --fovt")
    fovt = parse_shape(args.fovt, res=res)
    kmaxt = _parse_kmax(args.kmaxt, fovt)
    if mode == "cones3d":
        cones = design_cones(fovt, kmaxt)
        shapes = {"fovt": fovt.to_dict(), "kmaxt": kmaxt.to_dict()}
        return mode, kind, shapes, cones, fovt, kmaxt
    if not args.fovp:
        raise SpecError(f"{mode} needs --fovp")
    fovp = parse_shape(args.fovp, res=res)
    shapes = {"fovt": fovt.to_dict(), "fovp": fovp.to_dict(), "kmaxt": kmaxt.to_dict()}
    if mode == "pr3d-cones":
        traj = design_pr3d_cones(fovt, fovp, kmaxt, kind=kind, seed=seed)
    else:
        traj = design_pr3d_spiral(fovt, fovp, kmaxt, kind=kind)
    return mode, kind, shapes, traj, (fovt, fovp), kmaxt


def cmd_design(args, argv) -> int:
    out = _outdir(args)
    mode, kind, shapes, traj, fov_shapes, kmax = _design_from_args(args)
    doc = _traj_doc(mode, kind, args.seed, shapes, traj)
    if mode == "pr2d":
        weights = angular_dcf_2d(traj, fov_shapes)
        for rec, w in zip(doc["projections"], weights):
            rec["dcf_angular"] = float(w)
    path = out / "traj.json"
    _write_json(path, doc)
    _write_manifest(out, argv, {"mode": mode, "kind": kind, "shapes": shapes}, args.seed, [path])
    print(doc["N"])
    return 0


def cmd_psf(args, argv) -> int:
    out = _outdir(args)
    if args.traj:
        doc, traj, shapes = _load_traj(Path(args.traj))
        if doc["mode"] == "pr2d":
            fov_shapes = shapes["fov"]
        else:
            fov_shapes = (shapes["fovt"], shapes["fovp"])
        kind = doc["kind"]
        inputs = {"traj": str(args.traj)}
        seed = doc.get("seed", 0)
    else:
        mode, kind, shapes_doc, traj, fov_shapes, _ = _design_from_args(args)
        inputs = {"mode": mode, "kind": kind, "shapes": shapes_doc}
        seed = args.seed
    dims = None
    if args.dims:
        vals = [int(v) for v in str(args.dims).split(",")]
        dims = vals[0] if len(vals) == 1 else tuple(vals)
    cfg = GriddingConfig(oversampling=args.alpha, kernel_width=args.width)
    vol = compute_psf(traj, fov_shapes, dims=dims, config=cfg, dkr=args.dkr, kind=kind)
    bin_path = out / "psf.bin"
    save_grid(vol, bin_path)
    fig_path = out / "psf.png"
    _save_psf_figure(vol, fov_shapes, fig_path)
    _write_manifest(out, argv, inputs, seed,
                    [bin_path, bin_path.with_suffix(".json"), fig_path])
    print("x".join(str(d) for d in vol.dims))
    return 0


def cmd_metrics(args, argv) -> int:
    out = _outdir(args)
    vol = load_grid(Path(args.psf))
    fov = parse_shape(args.fov, res=args.res)
    kmax = _parse_kmax(args.kmax, fov) if args.kmax else None
    directions = np.deg2rad(np.arange(0.0, 360.0, args.dir_step))
    metrics = PsfMetrics()
    doc = {"psf": str(args.psf), "fov": fov.to_dict()}
    try:
        radii = measure_ridge(vol, directions, threshold=args.threshold)
        metrics.directions = [float(d) for d in directions]
        metrics.ridge_radius = [float(r) for r in radii]
        doc["directions_deg"] = [float(d) for d in np.rad2deg(directions)]
        doc["ridge_radius"] = metrics.ridge_radius
    except RidgeNotFound as exc:
        radii = None
        doc["ridge_error"] = str(exc)
    if vol.ndim == 2:
        metrics.fwhm = [float(measure_fwhm(vol, 0.0)), float(measure_fwhm(vol, math.pi / 2.0))]
        doc["fwhm"] = {"x": metrics.fwhm[0], "y": metrics.fwhm[1]}
        try:
            metrics.lowlevel_power_fraction = float(lowlevel_alias_power(vol, fov, kmax=kmax))
            doc["lowlevel_power_fraction"] = metrics.lowlevel_power_fraction
        except ValueError as exc:
            doc["lowlevel_error"] = str(exc)
    path = out / "metrics.json"
    _write_json(path, doc)
    outputs = [path]
    if radii is not None:
        fig = out / "metrics.png"
        _save_metrics_figure(directions, radii, fov, fig)
        outputs.append(fig)
    _write_manifest(out, argv, {"psf": str(args.psf), "fov": fov.to_dict()}, 0, outputs)
    if "lowlevel_power_fraction" in doc:
        print(f"{doc['lowlevel_power_fraction']:.6f}")
    return 0


def _parse_sizes(text: str, points: int):
    if ".." in text:
        lo, _, hi = text.partition("..")
        return list(np.linspace(float(lo), float(hi), points))
    return [float(v) for v in text.split(",")]


def cmd_curve(args, argv) -> int:
    out = _outdir(args)
    sizes = _parse_sizes(args.sizes, args.points)
    points = efficiency_curve(args.family, sizes, aspect=args.aspect,
                              z_ratio=args.zratio, xy_ratio=args.xyratio)
    path = out / "curve.csv"
    lines = ["shape,size_param,area_or_volume,N"]
    for p in points:
        lines.append(f"{p.shape},{p.size!r},{p.measure!r},{p.count}")
    path.write_text("\n".join(lines) + "\n")
    fig = out / "curve.png"
    _save_curve_figure(points, fig)
    _write_manifest(out, argv, {"family": args.family, "sizes": sizes}, 0, [path, fig])
    print(len(points))
    return 0


def cmd_phantom(args, argv) -> int:
    out = _outdir(args)
    widths_part, _, center_part = args.phantom.partition("@")
    widths = tuple(float(v) for v in widths_part.split(","))
    center = tuple(float(v) for v in center_part.split(",")) if center_part else None
    phantom = Phantom(widths=widths, center=center)
    res = args.res
    if args.method == "pr2d":
        fov_shapes = parse_shape(args.fov, res=res)
        shapes_doc = {"fov": fov_shapes.to_dict()}
    else:
        fovt = parse_shape(args.fovt, res=res)
        fovp = parse_shape(args.fovp, res=res)
        fov_shapes = (fovt, fovp)
        shapes_doc = {"fovt": fovt.to_dict(), "fovp": fovp.to_dict()}
    report = phantom_experiment(fov_shapes, args.method, phantom, seed=args.seed)
    doc = {
        "method": args.method,
        "phantom": {"widths": list(phantom.widths), "center": list(phantom.center)},
        "shapes": shapes_doc,
        "peak_inband_alias": report.peak_inband_alias,
        "alias_free": bool(report.alias_free),
        "threshold": report.threshold,
    }
    path = out / "phantom.json"
    _write_json(path, doc)
    fig = out / "phantom.png"
    _save_phantom_figure(report, fig)
    _write_manifest(out, argv, doc["shapes"], args.seed, [path, fig])
    print(f"{report.peak_inband_alias:.6f}")
    return 0


def _add_design_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--fov", help="2D FOV shape spec (kind:params)")
    p.add_argument("--fovt", help="axial FOV profile (transverse,axial widths)")
    p.add_argument("--fovp", help="transverse FOV profile")
    p.add_argument("--kmax", help="2D k-extent shape, or 'dual[:nominal]'")
    p.add_argument("--kmaxt", help="axial k-extent profile, or 'dual[:nominal]'")
    p.add_argument("--res", type=float, help="resolution in mm/px; FOV lengths become mm")
    p.add_argument("--full", dest="half", action="store_false", default=False,
                   help="full projections (default)")
    p.add_argument("--half", dest="half", action="store_true", help="half projections")
    p.add_argument("--seed", type=int, default=0, help="seed for randomized offsets")
    p.add_argument("--phi0", type=float, default=0.0, help="first projection angle (rad)")
    p.add_argument("--parity", default=None,
                   help="projection count constraint: even, odd, or an integer modulus")


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="radialfov",
                                 description="Radial k-space designs for anisotropic fields of view")
    sub = ap.add_subparsers(dest="cmd", required=True)

    d = sub.add_parser("design", help="design a trajectory and write traj.json")
    d.add_argument("mode", choices=["pr2d", "cones3d", "pr3d-cones", "pr3d-spiral"])
    _add_design_flags(d)
    d.add_argument("--out", default=".", help="output directory")
    d.set_defaults(func=cmd_design)

    p = sub.add_parser("psf", help="grid the point-spread function to psf.bin/.json/.png")
    p.add_argument("--traj", help="trajectory JSON from the design command")
    p.add_argument("mode", nargs="?", choices=["pr2d", "pr3d-cones", "pr3d-spiral"],
                   help="design inline instead of loading --traj")
    _add_design_flags(p)
    p.add_argument("--dims", help="frame size, one int or comma list")
    p.add_argument("--dkr", type=float, help="radial spacing (cycles/px)")
    p.add_argument("--alpha", type=float, default=1.5, help="grid oversampling")
    p.add_argument("--width", type=int, default=6, help="gridding kernel width")
    p.add_argument("--out", default=".")
    p.set_defaults(func=cmd_psf)

    m = sub.add_parser("metrics", help="PSF ridge/FWHM/low-level metrics")
    m.add_argument("--psf", required=True, help="psf.bin written by the psf command")
    m.add_argument("--fov", required=True, help="FOV shape the design targeted")
    m.add_argument("--kmax", help="k-extent shape of the design, or 'dual[:nominal]'")
    m.add_argument("--res", type=float)
    m.add_argument("--dir-step", type=float, default=10.0, help="probe step (degrees)")
    m.add_argument("--threshold", type=float, default=0.002, help="ridge detection level")
    m.add_argument("--out", default=".")
    m.set_defaults(func=cmd_metrics)

    c = sub.add_parser("curve", help="projection count vs FOV area/volume")
    c.add_argument("--family", required=True,
                   choices=["circle", "ellipse", "rect", "diamond", "stadium",
                            "sphere", "ellipsoid", "cylinder"])
    c.add_argument("--sizes", required=True, help="comma list or lo..hi range")
    c.add_argument("--points", type=int, default=6, help="points for a lo..hi range")
    c.add_argument("--aspect", type=float, default=1.0, help="2D width ratio")
    c.add_argument("--zratio", type=float, default=1.0, help="3D axial over transverse")
    c.add_argument("--xyratio", type=float, default=1.0, help="3D transverse ratio")
    c.add_argument("--out", default=".")
    c.set_defaults(func=cmd_curve)

    f = sub.add_parser("phantom", help="analytic-phantom aliasing experiment")
    f.add_argument("--method", required=True, choices=["pr2d", "pr3d-cones", "pr3d-spiral"])
    f.add_argument("--phantom", required=True, help="widths 'wx,wy[,wz][@cx,cy[,cz]]' in px")
    f.add_argument("--fov", help="2D FOV shape")
    f.add_argument("--fovt", help="axial FOV profile")
    f.add_argument("--fovp", help="transverse FOV profile")
    f.add_argument("--res", type=float)
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", default=".")
    f.set_defaults(func=cmd_phantom)
    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, argv)
    except SpecError as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return _EXIT_SPEC
    except (DegenerateShape, FovConstraintViolated, OutOfBand, RidgeNotFound) as exc:
        print(json.dumps({"error": type(exc).__name__, "message": str(exc)}), file=sys.stderr)
        return _EXIT_DESIGN


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
