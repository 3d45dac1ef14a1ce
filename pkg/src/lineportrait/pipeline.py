"""Compose all stages into one photo-to-plotter-SVG job.

Stage order: decode, edge detection, tracing and simplification, color
quantization, shading placement, planning. Feature lines are scaled to the
page first so placement can work directly in output millimeters; the page
transform of the full image rectangle is shared by both path groups.
Every intermediate artifact is persisted when an output directory is given,
and meta.json records all parameters and the resolved seed, which is enough
to reproduce the SVG bit-exactly.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .exceptions import StageError
from .pathio import write_paths_json
from .placement import ShadingConfig, fill_shading
from .planner import (
    PlanStats,
    PlotDocument,
    order_paths,
    order_paths_human,
    scale_to_page,
    stats,
    to_svg,
)
from .quantize import darkest_mask, map_pixels, median_cut, quantization_error
from .raster import canny, edge_map_to_png, load_image, to_grayscale
from .strokegraph import StrokeGraph
from .strokemodel import ModelParams, params_from_dict
from .validation import check_rgb_image
from .vectorize import extract_points, simplify_path, trace_paths

STAGES = ("decode", "edges", "trace", "quantize", "shading", "plan")


@dataclass(frozen=True)
class CannyConfig:
    kernel_size: int = 5
    low_threshold: float = 0.10
    high_threshold: float = 0.30


@dataclass(frozen=True)
class TraceConfig:
    neighbor_distance: float = 2.0
    simplify_tolerance: float = 0.75


@dataclass(frozen=True)
class PageConfig:
    width: float = 148.0
    height: float = 210.0
    margin: float = 12.0
    pen_width: float = 0.5


@dataclass
class PipelineConfig:
    canny: CannyConfig = field(default_factory=CannyConfig)
    trace: TraceConfig = field(default_factory=TraceConfig)
    n_colors: int = 4
    shading: ShadingConfig = field(default_factory=ShadingConfig)
    page: PageConfig = field(default_factory=PageConfig)
    model_path: str | None = None
    out_dir: str | None = None
    seed: int | None = None
    human_order: bool = False

    def __post_init__(self):
        if self.n_colors < 1:
            raise ValueError("n_colors must be >= 1")

    def as_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, overrides: dict) -> "PipelineConfig":
        """Build a config from a possibly partial nested dict."""
        overrides = dict(overrides or {})
        base = cls()

        def merged(factory, current, key):
            return factory(**{**asdict(current), **overrides.pop(key, {})})

        canny_cfg = merged(CannyConfig, base.canny, "canny")
        trace_cfg = merged(TraceConfig, base.trace, "trace")
        shading_cfg = merged(ShadingConfig, base.shading, "shading")
        page_cfg = merged(PageConfig, base.page, "page")
        known = {"n_colors", "model_path", "out_dir", "seed", "human_order"}
        unknown = set(overrides) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
        return cls(
            canny=canny_cfg,
            trace=trace_cfg,
            shading=shading_cfg,
            page=page_cfg,
            **{k: overrides[k] for k in known & set(overrides)},
        )


def resolve_seed(seed: int | None) -> int:
    """The given seed, or a fresh entropy-derived one; always recordable."""
    if seed is not None:
        return int(seed)
    return int(np.random.SeedSequence().entropy) % (2**63)


def load_model_file(path: str | Path) -> tuple[ModelParams, list[StrokeGraph]]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    params, _, templates = params_from_dict(payload)
    if not templates:
        raise ValueError(f"model file {path} carries no template strokes")
    return params, templates


@dataclass
class PipelineResult:
    svg: bytes
    document: PlotDocument
    stats: PlanStats
    edges: np.ndarray
    feature_paths: list[np.ndarray]
    mask: np.ndarray
    palette: np.ndarray
    shading_paths: list[np.ndarray]
    meta: dict
    artifacts: dict[str, str]


def _save_mask_png(mask: np.ndarray, path: Path) -> None:
    img = Image.fromarray(np.where(mask, 0, 255).astype(np.uint8), mode="L")
    img.convert("1", dither=Image.NONE).save(path, format="PNG")


def run_pipeline(
    image: bytes | np.ndarray,
    cfg: PipelineConfig,
    model: ModelParams | None = None,
    templates: list[StrokeGraph] | None = None,
    on_stage=None,
) -> PipelineResult:
    """Run every stage; any stage failure is re-raised with its stage name.

    The model may be passed in directly or loaded from cfg.model_path; with
    neither, the shading stage is skipped and only feature lines are drawn.
    """
    timings: dict[str, float] = {}
    artifacts: dict[str, str] = {}
    out_dir = Path(cfg.out_dir) if cfg.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)

    def stage(name, fn):
        if on_stage is not None:
            on_stage(name)
        started = time.perf_counter()
        try:
            result = fn()
        except StageError:
            raise
        except Exception as exc:
            raise StageError(name, exc) from exc
        timings[name] = time.perf_counter() - started
        return result

    def persist(name: str, filename: str, writer) -> None:
        if out_dir is None:
            return
        target = out_dir / filename
        writer(target)
        artifacts[name] = str(target)

    seed = resolve_seed(cfg.seed)
    trace_seq, shading_seq = np.random.SeedSequence(seed).spawn(2)

    def decode_stage():
        nonlocal model, templates
        if model is None and cfg.model_path is not None:
            model, templates = load_model_file(cfg.model_path)
        if isinstance(image, (bytes, bytearray)):
            return load_image(bytes(image))
        return check_rgb_image(image)

    img = stage("decode", decode_stage)
    height, width = img.shape[:2]

    def edges_stage():
        gray = to_grayscale(img)
        edges = canny(
            gray,
            kernel_size=cfg.canny.kernel_size,
            low_threshold=cfg.canny.low_threshold,
            high_threshold=cfg.canny.high_threshold,
        )
        persist("edges", "edges.png", lambda p: p.write_bytes(edge_map_to_png(edges)))
        return edges

    edges = stage("edges", edges_stage)

    def trace_stage():
        points = extract_points(edges)
        raw_paths, singletons = trace_paths(
            points, cfg.trace.neighbor_distance, np.random.default_rng(trace_seq)
        )
        features = [simplify_path(p, cfg.trace.simplify_tolerance) for p in raw_paths]
        persist(
            "paths",
            "paths.json",
            lambda p: write_paths_json(p, features, (width, height), cfg.as_dict()),
        )
        return features, len(points), len(singletons)

    feature_paths, point_count, singleton_count = stage("trace", trace_stage)

    def quantize_stage():
        palette = median_cut(img, cfg.n_colors)
        indices = map_pixels(img, palette)
        mask = darkest_mask(indices, palette)
        error = quantization_error(img, palette, indices)
        persist("mask", "mask.png", lambda p: _save_mask_png(mask, p))
        persist(
            "palette",
            "palette.json",
            lambda p: p.write_text(
                json.dumps({"palette": palette.tolist(), "error": error}), encoding="utf-8"
            ),
        )
        return palette, mask

    palette, mask = stage("quantize", quantize_stage)

    def shading_stage():
        features_mm, transform = scale_to_page(
            feature_paths,
            cfg.page.width,
            cfg.page.height,
            cfg.page.margin,
            frame=(0.0, 0.0, float(width), float(height)),
        )
        # A single-color palette means the image has no relatively dark
        # region worth hatching; skip shading rather than fill everything.
        if model is not None and templates and len(palette) > 1:
            strokes = fill_shading(
                mask,
                model,
                templates,
                features_mm,
                cfg.shading,
                np.random.default_rng(shading_seq),
                transform,
            )
        else:
            strokes = []
        persist(
            "shading",
            "shading.json",
            lambda p: write_paths_json(p, strokes, (width, height), cfg.shading.as_dict()),
        )
        return features_mm, strokes

    features_mm, shading_paths = stage("shading", shading_stage)

    def plan_stage():
        if cfg.human_order:
            ordered = order_paths_human(features_mm, shading_paths)
        else:
            ordered = order_paths(features_mm + shading_paths)
        doc = PlotDocument(
            paths=ordered,
            page_width=cfg.page.width,
            page_height=cfg.page.height,
            pen_width=cfg.page.pen_width,
        )
        svg = to_svg(doc)
        persist("svg", "plan.svg", lambda p: p.write_bytes(svg))
        return doc, svg, stats(doc)

    document, svg, plan_stats = stage("plan", plan_stage)

    meta = {
        "config": {**cfg.as_dict(), "seed": seed},
        "seed": seed,
        "image_size": [width, height],
        "palette": palette.tolist(),
        "counts": {
            "edge_points": point_count,
            "singletons": singleton_count,
            "feature_paths": len(feature_paths),
            "shading_paths": len(shading_paths),
        },
        "stats": plan_stats.as_dict(),
        "timings": timings,
    }
    if out_dir is not None:
        target = out_dir / "meta.json"
        target.write_text(json.dumps(meta, indent=2), encoding="utf-8")
        artifacts["meta"] = str(target)

    return PipelineResult(
        svg=svg,
        document=document,
        stats=plan_stats,
        edges=edges,
        feature_paths=feature_paths,
        mask=mask,
        palette=palette,
        shading_paths=shading_paths,
        meta=meta,
        artifacts=artifacts,
    )
