"""Command line entry points: train, generate, preview, plan, serve."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .exceptions import ImageDecodeError, StageError
from .pathio import read_paths_json
from .pipeline import CannyConfig, PageConfig, PipelineConfig, TraceConfig, run_pipeline
from .placement import ShadingConfig
from .planner import PlotDocument, order_paths, scale_to_page, stats, to_svg
from .raster import canny, edge_map_to_png, load_image, to_grayscale
from .strokemodel import StrokeVariationModel
from .templates import load_template_svg


def _fail(message: str, code: int) -> int:
    print(message, file=sys.stderr)
    return code


def _require_file(path: str, label: str) -> int | None:
    if not Path(path).is_file():
        return _fail(f"{label} not found: {path}", 2)
    return None


def _page_size(text: str) -> tuple[float, float]:
    try:
        w, h = text.lower().split("x")
        return float(w), float(h)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(
            f"page must look like 148x210 (mm), got {text!r}"
        ) from exc


def _cmd_train(args) -> int:
    missing = _require_file(args.sketch, "sketch")
    if missing is not None:
        return missing
    try:
        strokes = load_template_svg(Path(args.sketch).read_bytes())
    except ValueError as exc:
        return _fail(f"cannot parse sketch: {exc}", 1)
    if not strokes:
        return _fail("sketch contains no usable strokes", 1)
    model = StrokeVariationModel(
        n_points=args.n,
        latent_dim=args.latent,
        epochs=args.epochs,
        random_state=args.seed,
    )
    model.fit(strokes)
    model.save(args.out)
    print(
        json.dumps(
            {
                "out": args.out,
                "strokes": len(strokes),
                "epochs": args.epochs,
                "final_loss": model.losses_[-1],
            }
        )
    )
    return 0


def _cmd_generate(args) -> int:
    for path, label in ((args.image, "image"), (args.model, "model")):
        missing = _require_file(path, label)
        if missing is not None:
            return missing
    page_w, page_h = args.page
    cfg = PipelineConfig(
        canny=CannyConfig(),
        trace=TraceConfig(neighbor_distance=args.d),
        n_colors=args.k,
        shading=ShadingConfig(stroke_size=args.stroke_size, count_target=args.count),
        page=PageConfig(width=page_w, height=page_h),
        model_path=args.model,
        out_dir=args.out,
        seed=args.seed,
        human_order=args.human_order,
    )
    try:
        result = run_pipeline(Path(args.image).read_bytes(), cfg)
    except StageError as exc:
        return _fail(str(exc), 1)
    print(json.dumps({"out": args.out, "seed": result.meta["seed"], **result.stats.as_dict()}))
    return 0


def _cmd_preview(args) -> int:
    missing = _require_file(args.image, "image")
    if missing is not None:
        return missing
    try:
        img = load_image(Path(args.image).read_bytes())
        edges = canny(
            to_grayscale(img),
            kernel_size=args.kernel,
            low_threshold=args.low,
            high_threshold=args.high,
        )
    except (ImageDecodeError, ValueError) as exc:
        return _fail(str(exc), 1)
    Path(args.out).write_bytes(edge_map_to_png(edges))
    print(json.dumps({"out": args.out, "edge_pixels": int(edges.sum())}))
    return 0


def _cmd_plan(args) -> int:
    missing = _require_file(args.paths, "paths file")
    if missing is not None:
        return missing
    try:
        paths, (width, height), _ = read_paths_json(args.paths)
    except ValueError as exc:
        return _fail(f"cannot read paths: {exc}", 1)
    page_w, page_h = args.page
    paths_mm, _ = scale_to_page(
        paths, page_w, page_h, args.margin, frame=(0.0, 0.0, float(width), float(height))
    )
    doc = PlotDocument(
        paths=order_paths(paths_mm),
        page_width=page_w,
        page_height=page_h,
        pen_width=args.pen_width,
    )
    Path(args.out).write_bytes(to_svg(doc))
    print(json.dumps({"out": args.out, **stats(doc).as_dict()}))
    return 0


def _cmd_serve(args) -> int:
    if args.model is not None:
        missing = _require_file(args.model, "model")
        if missing is not None:
            return missing
    frontend = args.frontend
    if frontend is None and Path("frontend/dist").is_dir():
        frontend = "frontend/dist"

    import uvicorn

    from .service import create_app

    app = create_app(model_path=args.model, data_dir=args.data, frontend_dir=frontend)
    uvicorn.run(app, host=args.host, port=args.port)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lineportrait",
        description="Turn a photo into an abstract plotter-ready line portrait.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="learn stroke variations from a template sketch SVG")
    train.add_argument("--sketch", required=True, help="template sketch SVG")
    train.add_argument("--out", required=True, help="output model JSON path")
    train.add_argument("--epochs", type=int, default=4000)
    train.add_argument("--n", type=int, default=32, help="points per resampled stroke")
    train.add_argument("--latent", type=int, default=8, help="latent dimensions")
    train.add_argument("--seed", type=int, default=0)
    train.set_defaults(func=_cmd_train)

    generate = sub.add_parser("generate", help="run the full photo-to-SVG pipeline")
    generate.add_argument("--image", required=True, help="input photo")
    generate.add_argument("--model", required=True, help="trained model JSON")
    generate.add_argument("--out", required=True, help="output directory")
    generate.add_argument("--k", type=int, default=4, help="quantization colors")
    generate.add_argument("--d", type=float, default=2.0, help="tracing neighbor distance, px")
    generate.add_argument("--stroke-size", type=float, default=6.0, help="shading stroke size, mm")
    generate.add_argument("--count", type=int, default=400, help="shading stroke target count")
    generate.add_argument("--seed", type=int, default=None)
    generate.add_argument("--page", type=_page_size, default=(148.0, 210.0), help="page WxH in mm")
    generate.add_argument(
        "--human-order",
        action="store_true",
        help="draw features first, top to bottom, instead of the fast greedy order",
    )
    generate.set_defaults(func=_cmd_generate)

    preview = sub.add_parser("preview", help="write the edge map of a photo as PNG")
    preview.add_argument("--image", required=True)
    preview.add_argument("--kernel", type=int, default=5)
    preview.add_argument("--low", type=float, default=0.10)
    preview.add_argument("--high", type=float, default=0.30)
    preview.add_argument("--out", default="edges.png")
    preview.set_defaults(func=_cmd_preview)

    plan = sub.add_parser("plan", help="order traced paths and emit plotter SVG")
    plan.add_argument("--paths", required=True, help="paths JSON file")
    plan.add_argument("--out", required=True, help="output SVG path")
    plan.add_argument("--page", type=_page_size, default=(148.0, 210.0))
    plan.add_argument("--margin", type=float, default=12.0)
    plan.add_argument("--pen-width", type=float, default=0.5)
    plan.set_defaults(func=_cmd_plan)

    serve = sub.add_parser("serve", help="run the HTTP service")
    serve.add_argument("--port", type=int, default=8000)
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--model", default=None, help="trained model JSON")
    serve.add_argument("--data", default="portraits", help="job data directory")
    serve.add_argument("--frontend", default=None, help="static UI directory")
    serve.set_defaults(func=_cmd_serve)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
