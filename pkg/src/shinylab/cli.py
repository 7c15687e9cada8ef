"""Command-line entry point.

Subcommands: fresnel-curve, filter, scale, desaturate, sh-analyze, render,
coverage, bias, regress, serve, and pipeline (map -> render -> coverage ->
metrics -> regression, emitting a replication report).

Exit codes: 0 success, 2 validation, 3 I/O, 4 numeric.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import analysis, envmap, exprig, imstats, optics, pngio, render, sphharm
from .errors import DomainError, FormatError, MetricError, ToolkitError

_CLI_MATERIALS = {"metal": "metal", "shiny-black": "shiny_black", "shiny-white": "shiny_white"}


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, (FormatError, OSError)):
        return 3
    if isinstance(exc, MetricError):
        return 4
    if isinstance(exc, ToolkitError):
        return 2
    return 1


# ---------------------------------------------------------------------------
# Simple subcommands
# ---------------------------------------------------------------------------

def _cmd_fresnel_curve(args) -> int:
    curve = optics.curve(optics.ComplexIOR(args.n, args.k), args.step)
    with open(args.out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["theta_deg", "reflectance"])
        for theta, refl in curve.samples():
            writer.writerow([f"{theta:g}", f"{refl:.9f}"])
    print(f"wrote {len(curve.theta_deg)} samples to {args.out}")
    return 0


def _cmd_filter(args) -> int:
    emap = envmap.load(args.infile)
    op = envmap.low_pass if args.mode == "low" else envmap.high_pass
    envmap.save(op(emap, args.width, args.sigma_per_width), args.out)
    print(f"wrote {args.mode}-pass (width {args.width:g} px) to {args.out}")
    return 0


def _cmd_scale(args) -> int:
    envmap.save(envmap.scale_intensity(envmap.load(args.infile), args.factor), args.out)
    print(f"wrote x{args.factor:g} scaled map to {args.out}")
    return 0


def _cmd_desaturate(args) -> int:
    envmap.save(envmap.desaturate(envmap.load(args.infile)), args.out)
    print(f"wrote desaturated map to {args.out}")
    return 0


def _cmd_sh_analyze(args) -> int:
    emap = envmap.load(args.infile)
    spec = sphharm.project(emap, args.max_order)
    powers = sphharm.order_powers(spec, mode=args.power_mode)

    out = Path(args.out)
    with open(out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["l", "m", "coeff"])
        for l in range(spec.max_order + 1):
            for m in range(-l, l + 1):
                writer.writerow([l, m, f"{spec.coeff(l, m):.9g}"])

    power_out = Path(args.power_out) if args.power_out else out.with_name(out.stem + "_power.csv")
    with open(power_out, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["l", "rms_power"])
        for l, p in enumerate(powers):
            writer.writerow([l, f"{p:.9g}"])

    metrics = {
        "diffuseness": sphharm.diffuseness(powers),
        "brilliance": sphharm.brilliance(powers),
        "diffuseness2": sphharm.diffuseness2(powers),
    }
    metrics_out = (
        Path(args.metrics_out) if args.metrics_out else out.with_name(out.stem + "_metrics.json")
    )
    metrics_out.write_text(json.dumps(metrics, indent=2, sort_keys=True) + "\n")
    print(json.dumps(metrics, sort_keys=True))
    return 0


def _cmd_render(args) -> int:
    emap = envmap.load(args.map)
    material = render.MATERIALS[_CLI_MATERIALS[args.material]]()
    raster, mask = render.render_sphere(
        emap, material, args.size, object_name=args.object, pre_blur_width=args.pre_blur
    )
    # anchor the exposure at the base intensity so --factor actually dims or
    # boosts the image; a boost that would clip is re-normalized to peak 254
    _, scale = render.normalize_exposure(raster, mask)
    scaled = raster * (args.factor * scale)
    total = args.factor * scale
    renorm = False
    ceiling = render.exposure_target_linear()
    peak = float(scaled[mask].max())
    if peak > ceiling * (1.0 + 1e-12):
        scaled *= ceiling / peak
        total *= ceiling / peak
        renorm = True
    meta = render.StimulusMeta(
        object=args.object,
        material=material.kind,
        light_map=Path(args.map).stem,
        factor=args.factor,
        exposure_scale=total,
        renormalized=renorm,
    )
    stim = render.tone_map(scaled, mask, meta)
    pngio.save_gray(args.out, stim.image)
    if args.mask_out:
        pngio.save_mask(args.mask_out, stim.mask)
    print(f"wrote {stim.meta.stimulus_id} to {args.out} (exposure scale {total:.6g})")
    return 0


def _cmd_coverage(args) -> int:
    image = pngio.load_gray(args.img)
    mask = pngio.load_mask(args.mask) if args.mask else None
    cov = imstats.specular_coverage(image, mask, threshold=args.threshold)
    mean = imstats.mean_intensity(image, mask)
    payload = {
        "coverage": cov.coverage,
        "mean_intensity": mean,
        "object_pixels": cov.object_pixels,
        "above_pixels": cov.above_pixels,
        "threshold": cov.threshold,
    }
    if args.json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(f"coverage {cov.coverage:.4f}  mean {mean:.2f}  object px {cov.object_pixels}")
    return 0


def _cmd_bias(args) -> int:
    records = analysis.load_ratings_csv(args.ratings)
    maps = [args.map] if args.map else sorted({r.light_map for r in records})
    out = {m: analysis.bias_index(records, m) for m in maps}
    print(json.dumps(out, sort_keys=True))
    return 0


def _parse_column_ref(ref: str, default_column: str):
    if ":" in ref:
        path, column = ref.rsplit(":", 1)
    else:
        path, column = ref, default_column
    return Path(path), column


def _read_keyed_column(path: Path, column: str) -> dict:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or column not in rows[0]:
        raise DomainError(f"{path} has no column {column!r}")
    key = "light_map" if "light_map" in rows[0] else next(iter(rows[0]))
    return {row[key]: float(row[column]) for row in rows}


def _cmd_regress(args) -> int:
    x_path, x_col = _parse_column_ref(args.x, "diffuseness2")
    y_path, y_col = _parse_column_ref(args.y, "bias_index")
    x_map = _read_keyed_column(x_path, x_col)
    y_map = _read_keyed_column(y_path, y_col)
    keys = sorted(set(x_map) & set(y_map))
    if len(keys) < 2:
        raise DomainError("x and y tables share fewer than 2 keys")
    fit = analysis.linear_fit([x_map[k] for k in keys], [y_map[k] for k in keys])
    print(
        json.dumps(
            {
                "x": f"{x_path.name}:{x_col}",
                "y": f"{y_path.name}:{y_col}",
                "slope": fit.slope,
                "intercept": fit.intercept,
                "r_squared": fit.r_squared,
                "n_points": fit.n_points,
            },
            sort_keys=True,
        )
    )
    return 0


def _cmd_serve(args) -> int:
    exprig.serve(
        stimuli_dir=args.stimuli,
        store_path=args.store,
        port=args.port,
        host=args.host,
        expected_trials=args.trials,
    )
    return 0


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------

@dataclass
class PipelineConfig:
    """Parsed pipeline configuration (flat key = value text file)."""

    maps: dict  # id -> Path
    out_dir: Path
    size: int = 256
    threshold: int = 50
    max_order: int = 30
    objects: tuple = ("sphere",)
    conditions: tuple = render.STANDARD_CONDITIONS
    ratings: Path | None = None
    filter_width: float | None = None
    sigma_per_width: float = envmap.SIGMA_PER_WIDTH
    desaturate: bool = True

    def __post_init__(self):
        # map ids are unique by construction (dict); files are checked by
        # the pipeline stages that read them so failures carry a stage tag
        if not self.maps:
            raise DomainError("pipeline config names no light maps (map = id:path)")


def parse_pipeline_config(path) -> PipelineConfig:
    maps: dict = {}
    kv: dict = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DomainError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key == "map":
            map_id, _, map_path = value.partition(":")
            if not map_id or not map_path:
                raise DomainError(f"{path}:{lineno}: map entries use 'map = id:path'")
            if map_id in maps:
                raise DomainError(f"{path}:{lineno}: duplicate map id {map_id!r}")
            maps[map_id] = Path(map_path)
        else:
            kv[key] = value

    def _conditions(text: str):
        conds = []
        for item in text.split(","):
            mat, _, fac = item.strip().partition(":")
            if mat not in render.MATERIALS:
                raise DomainError(f"unknown material {mat!r} in conditions")
            conds.append((mat, float(fac)))
        return tuple(conds)

    known = {
        "out_dir",
        "size",
        "threshold",
        "max_order",
        "objects",
        "conditions",
        "ratings",
        "filter_width",
        "sigma_per_width",
        "desaturate",
    }
    unknown = set(kv) - known
    if unknown:
        raise DomainError(f"unknown pipeline config keys: {sorted(unknown)}")
    if "out_dir" not in kv:
        raise DomainError("pipeline config must set out_dir")
    return PipelineConfig(
        maps=maps,
        out_dir=Path(kv["out_dir"]),
        size=int(kv.get("size", 256)),
        threshold=int(kv.get("threshold", 50)),
        max_order=int(kv.get("max_order", 30)),
        objects=tuple(s.strip() for s in kv.get("objects", "sphere").split(",")),
        conditions=_conditions(kv["conditions"]) if "conditions" in kv else render.STANDARD_CONDITIONS,
        ratings=Path(kv["ratings"]) if "ratings" in kv else None,
        filter_width=float(kv["filter_width"]) if "filter_width" in kv else None,
        sigma_per_width=float(kv.get("sigma_per_width", envmap.SIGMA_PER_WIDTH)),
        desaturate=kv.get("desaturate", "true").lower() in ("true", "1", "yes"),
    )


class StageFailure(Exception):
    def __init__(self, stage: str, original: BaseException):
        super().__init__(f"pipeline stage {stage!r} failed: {original}")
        self.stage = stage
        self.original = original


def run_pipeline(config: PipelineConfig) -> dict:
    """Run map -> render -> coverage -> metrics (-> ratings analysis).

    Returns the replication report (also written to out_dir/report.json
    along with stimuli.csv, metrics.csv, stimulus PNGs and catalog.csv).
    Deterministic: identical configs produce byte-identical reports.
    """

    def stage(name):
        class _Stage:
            def __enter__(self):
                return None

            def __exit__(self, exc_type, exc, tb):
                if exc is not None and not isinstance(exc, StageFailure):
                    raise StageFailure(name, exc) from exc
                return False

        return _Stage()

    report: dict = {"stimuli": [], "maps": {}, "regressions": {}}

    with stage("envmap"):
        maps: dict = {}
        for map_id, path in config.maps.items():
            emap = envmap.load(path)
            if config.desaturate:
                emap = envmap.desaturate(emap)
            maps[map_id] = emap
        if config.filter_width is not None:
            w = config.filter_width
            for map_id in list(maps):
                base = maps[map_id]
                maps[f"{map_id}__lp{w:g}"] = envmap.low_pass(base, w, config.sigma_per_width)
                hp = envmap.high_pass(base, w, config.sigma_per_width)
                maps[f"{map_id}__hp{w:g}"] = envmap.EquirectMap(np.maximum(hp.data, 0.0))

    with stage("render"):
        out_dir = Path(config.out_dir)
        stim_dir = out_dir / "stimuli"
        stim_dir.mkdir(parents=True, exist_ok=True)
        stimuli = render.render_condition_set(
            maps, objects=config.objects, size=config.size, conditions=config.conditions
        )
        with open(stim_dir / "catalog.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["stimulus_id", "object", "material", "light_map", "factor", "filename"])
            for stim in stimuli:
                sid = stim.meta.stimulus_id
                pngio.save_gray(stim_dir / f"{sid}.png", stim.image)
                pngio.save_mask(stim_dir / f"{sid}_mask.png", stim.mask)
                writer.writerow(
                    [
                        sid,
                        stim.meta.object,
                        stim.meta.material,
                        stim.meta.light_map,
                        f"{stim.meta.factor:g}",
                        f"{sid}.png",
                    ]
                )

    with stage("coverage"):
        coverage_stats = []
        intensity_stats = []
        for stim in stimuli:
            cov = imstats.specular_coverage(stim, threshold=config.threshold)
            mean = imstats.mean_intensity(stim)
            report["stimuli"].append(
                {
                    "stimulus_id": stim.meta.stimulus_id,
                    "object": stim.meta.object,
                    "material": stim.meta.material,
                    "light_map": stim.meta.light_map,
                    "factor": stim.meta.factor,
                    "exposure_scale": stim.meta.exposure_scale,
                    "renormalized": stim.meta.renormalized,
                    "coverage": cov.coverage,
                    "mean_intensity": mean,
                }
            )
            common = dict(
                object=stim.meta.object,
                material=stim.meta.material,
                light_map=stim.meta.light_map,
                factor=stim.meta.factor,
            )
            coverage_stats.append(analysis.StimulusStat(value=cov.coverage, **common))
            intensity_stats.append(analysis.StimulusStat(value=mean, **common))
        with open(out_dir / "stimuli.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            cols = [
                "stimulus_id",
                "object",
                "material",
                "light_map",
                "factor",
                "exposure_scale",
                "renormalized",
                "coverage",
                "mean_intensity",
            ]
            writer.writerow(cols)
            for row in report["stimuli"]:
                writer.writerow([row[c] for c in cols])

    with stage("metrics"):
        for map_id, emap in maps.items():
            powers = sphharm.order_powers(sphharm.project(emap, config.max_order))
            report["maps"][map_id] = {
                "diffuseness": sphharm.diffuseness(powers),
                "brilliance": sphharm.brilliance(powers),
                "diffuseness2": sphharm.diffuseness2(powers),
            }
        with open(out_dir / "metrics.csv", "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["light_map", "diffuseness", "brilliance", "diffuseness2"])
            for map_id in sorted(report["maps"]):
                m = report["maps"][map_id]
                writer.writerow(
                    [map_id, m["diffuseness"], m["brilliance"], m["diffuseness2"]]
                )

    if config.ratings is not None:
        with stage("analysis"):
            records = analysis.load_ratings_csv(config.ratings)
            rated_maps = sorted({r.light_map for r in records} & set(report["maps"]))
            bias = {m: analysis.bias_index(records, m) for m in rated_maps}
            report["bias"] = bias
            with open(out_dir / "bias.csv", "w", newline="") as fh:
                writer = csv.writer(fh, lineterminator="\n")
                writer.writerow(["light_map", "bias_index"])
                for m in rated_maps:
                    writer.writerow([m, bias[m]])
            if len(rated_maps) >= 2:
                y = [bias[m] for m in rated_maps]
                for metric in ("diffuseness", "brilliance", "diffuseness2"):
                    fit = analysis.linear_fit(
                        [report["maps"][m][metric] for m in rated_maps], y
                    )
                    report["regressions"][f"bias_vs_{metric}"] = {
                        "slope": fit.slope,
                        "intercept": fit.intercept,
                        "r_squared": fit.r_squared,
                        "n_points": fit.n_points,
                    }
            for label, stats in (("coverage", coverage_stats), ("mean_intensity", intensity_stats)):
                try:
                    fits = analysis.coverage_rating_correlation(stats, records)
                except ToolkitError:
                    continue
                for cat, fit in fits.items():
                    report["regressions"][f"{cat}_confidence_vs_{label}"] = {
                        "slope": fit.slope,
                        "intercept": fit.intercept,
                        "r_squared": fit.r_squared,
                        "n_points": fit.n_points,
                    }

    with stage("report"):
        (out_dir / "report.json").write_text(
            json.dumps(report, indent=2, sort_keys=True) + "\n"
        )
    return report


def _cmd_pipeline(args) -> int:
    try:
        config = parse_pipeline_config(args.config)
        run_pipeline(config)
    except StageFailure as exc:
        print(str(exc), file=sys.stderr)
        return _exit_code(exc.original)
    print(f"pipeline report written to {Path(config.out_dir) / 'report.json'}")
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="shinylab",
        description="Specular-stimulus rendering and illumination statistics toolkit",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fresnel-curve", help="emit a reflectance-vs-angle CSV")
    p.add_argument("--n", type=float, required=True, help="real refraction coefficient")
    p.add_argument("--k", type=float, default=0.0, help="extinction coefficient")
    p.add_argument("--step", type=float, default=1.0, help="angle step in degrees")
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_fresnel_curve)

    p = sub.add_parser("filter", help="high/low-pass filter a panorama")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--width", type=float, required=True, help="filter width in pixels")
    p.add_argument("--mode", choices=["low", "high"], required=True)
    p.add_argument("--sigma-per-width", type=float, default=envmap.SIGMA_PER_WIDTH)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_filter)

    p = sub.add_parser("scale", help="scale a panorama's intensity")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--factor", type=float, required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_scale)

    p = sub.add_parser("desaturate", help="replace pixels with their luminance")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_desaturate)

    p = sub.add_parser("sh-analyze", help="spherical-harmonic spectrum and light statistics")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--max-order", type=int, default=sphharm.BRILLIANCE_MIN_ORDER)
    p.add_argument("--out", required=True, help="coefficient CSV (l, m, coeff)")
    p.add_argument("--power-out", default=None, help="per-order power CSV")
    p.add_argument("--metrics-out", default=None, help="metrics JSON")
    p.add_argument("--power-mode", choices=["rms", "sum"], default="rms")
    p.set_defaults(func=_cmd_sh_analyze)

    p = sub.add_parser("render", help="render one stimulus image")
    p.add_argument("--map", required=True)
    p.add_argument("--material", choices=sorted(_CLI_MATERIALS), required=True)
    p.add_argument("--factor", type=float, default=1.0)
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--object", choices=sorted(render.OBJECT_SHAPES), default="sphere")
    p.add_argument(
        "--pre-blur", type=float, default=None,
        help="blur the map before lookup (px), a stand-in for slight roughness",
    )
    p.add_argument("--out", required=True)
    p.add_argument("--mask", dest="mask_out", default=None)
    p.set_defaults(func=_cmd_render)

    p = sub.add_parser("coverage", help="specular coverage and mean intensity of an image")
    p.add_argument("--img", required=True)
    p.add_argument("--mask", default=None)
    p.add_argument("--threshold", type=int, default=imstats.DEFAULT_THRESHOLD)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=_cmd_coverage)

    p = sub.add_parser("bias", help="bias index per light map from a ratings CSV")
    p.add_argument("--ratings", required=True)
    p.add_argument("--map", default=None, help="restrict to one light map")
    p.set_defaults(func=_cmd_bias)

    p = sub.add_parser("regress", help="OLS fit between two keyed CSV columns")
    p.add_argument("--x", required=True, help="path[:column], default column diffuseness2")
    p.add_argument("--y", required=True, help="path[:column], default column bias_index")
    p.set_defaults(func=_cmd_regress)

    p = sub.add_parser("serve", help="run the rating-experiment HTTP service")
    p.add_argument("--stimuli", required=True)
    p.add_argument("--store", required=True)
    p.add_argument("--port", type=int, required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--trials", type=int, default=exprig.DEFAULT_TRIALS)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("pipeline", help="run the end-to-end replication pipeline")
    p.add_argument("--config", required=True)
    p.set_defaults(func=_cmd_pipeline)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except StageFailure as exc:
        print(str(exc), file=sys.stderr)
        return _exit_code(exc.original)
    except (ToolkitError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
