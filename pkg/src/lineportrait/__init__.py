"""Photo to abstract plotter-ready line portrait.

Feature lines come from edge detection, tracing, and simplification;
shading comes from a one-shot stroke variation model scattered over the
darkest quantized color without touching; a greedy planner orders
everything for the pen and emits SVG.
"""

from .exceptions import GeometryError, ImageDecodeError, StageError, TrainingError
from .pipeline import (
    CannyConfig,
    PageConfig,
    PipelineConfig,
    PipelineResult,
    TraceConfig,
    load_model_file,
    run_pipeline,
)
from .placement import OccupancyIndex, ShadingConfig, can_place, fill_shading
from .planner import (
    PageTransform,
    PlanStats,
    PlotDocument,
    order_paths,
    scale_to_page,
    stats,
    to_svg,
)
from .quantize import MedianCutQuantizer, darkest_mask, map_pixels, median_cut
from .raster import CannyEdgeDetector, canny, edge_map_to_png, load_image, to_grayscale
from .strokegraph import StrokeGraph, path_from_deltas, resample_stroke
from .strokemodel import ModelDims, ModelParams, StrokeVariationModel, TrainConfig
from .templates import load_template_svg
from .vectorize import EdgeTracer, extract_points, simplify_path, trace_paths

__version__ = "0.1.0"

__all__ = [
    "CannyConfig",
    "CannyEdgeDetector",
    "EdgeTracer",
    "GeometryError",
    "ImageDecodeError",
    "MedianCutQuantizer",
    "ModelDims",
    "ModelParams",
    "OccupancyIndex",
    "PageConfig",
    "PageTransform",
    "PipelineConfig",
    "PipelineResult",
    "PlanStats",
    "PlotDocument",
    "ShadingConfig",
    "StageError",
    "StrokeGraph",
    "StrokeVariationModel",
    "TraceConfig",
    "TrainConfig",
    "TrainingError",
    "can_place",
    "canny",
    "darkest_mask",
    "edge_map_to_png",
    "extract_points",
    "fill_shading",
    "load_image",
    "load_model_file",
    "load_template_svg",
    "map_pixels",
    "median_cut",
    "order_paths",
    "path_from_deltas",
    "resample_stroke",
    "run_pipeline",
    "scale_to_page",
    "simplify_path",
    "stats",
    "to_grayscale",
    "to_svg",
    "trace_paths",
    "__version__",
]
