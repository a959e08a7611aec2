"""Command line front end.

Exit codes: 0 success, 2 argument problems, 3 input parsing problems,
4 compute problems. Argument validation messages go to standard error;
the path of the written schema manifest goes to standard out on success.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import areal
from .core import (
    DEFAULT_GRID_BINS,
    MarkedPointPattern,
    ObservationWindow,
    parse_csv,
    serialize_csv,
)
from .errors import EmptyInput, FileTooLarge, MalformedRow, SashimiError
from .generators import matern_ii, poisson_csr, thomas_cluster
from .pipeline import (
    AnalysisConfig,
    FAMILIES,
    curves_json,
    diagram_csv,
    extract_features,
    features_csv,
    manifest_json,
)

EXIT_OK = 0
EXIT_ARGS = 2
EXIT_PARSE = 3
EXIT_COMPUTE = 4


def _fail(code: int, message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sashimi",
        description="Spatial feature extraction for segmented tissue images.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    ex = sub.add_parser("extract", help="compute features for one input file")
    ex.add_argument("--input", required=True, help="CSV of x,y,type rows")
    ex.add_argument("--types", required=True, help="comma list of 1-3 cell types")
    ex.add_argument(
        "--features",
        default="all",
        help="'all' or a comma subset of summaries,areal,topology",
    )
    ex.add_argument("--grid", type=int, default=areal.DEFAULT_Q,
                    help="quadrat tessellation side")
    ex.add_argument("--bins", type=int, default=DEFAULT_GRID_BINS,
                    help="distance grid size")
    ex.add_argument("--rmax", default="auto",
                    help="'auto' or the largest distance to evaluate")
    ex.add_argument("--seed", type=int, default=0)
    ex.add_argument("--out", default=None,
                    help="feature table path (default features.csv or .json)")
    ex.add_argument("--curves-out", default=None,
                    help="directory for curves.json and diagram.csv")
    ex.add_argument("--format", choices=("csv", "json"), default="csv")

    gen = sub.add_parser("generate", help="write a synthetic pattern as CSV")
    gen.add_argument("--model", choices=("csr", "thomas", "hardcore"),
                     default="csr")
    gen.add_argument("--intensity", type=float, default=200.0,
                     help="per-type expected points per unit area")
    gen.add_argument("--types", default="tumor,immune,stromal")
    gen.add_argument("--window", default="0,1,0,1",
                     help="x_min,x_max,y_min,y_max")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--clusters", type=float, default=20.0,
                     help="thomas: parent intensity")
    gen.add_argument("--offspring", type=float, default=10.0,
                     help="thomas: mean points per parent")
    gen.add_argument("--sigma", type=float, default=0.03,
                     help="thomas: offspring scatter")
    gen.add_argument("--radius", type=float, default=0.02,
                     help="hardcore: minimum separation")
    gen.add_argument("--out", default=None, help="path (default stdout)")

    srv = sub.add_parser("serve", help="run the HTTP service")
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--port", type=int, default=None,
                     help="default SASHIMI_PORT or 8000")
    srv.add_argument("--data-dir", default=None)
    srv.add_argument("--static-dir", default=None)
    srv.add_argument("--workers", type=int, default=None)
    return parser


def _split_csv_flag(raw: str) -> list[str]:
    return [part.strip() for part in raw.split(",") if part.strip()]


def _extract_config(args) -> AnalysisConfig | int:
    types = _split_csv_flag(args.types)
    if len(types) > 3:
        return _fail(EXIT_ARGS, "at most three types may be selected")
    if not types:
        return _fail(EXIT_ARGS, "at least one type is required")
    if args.features == "all":
        families = FAMILIES
    else:
        families = tuple(_split_csv_flag(args.features))
        unknown = [f for f in families if f not in FAMILIES]
        if unknown:
            return _fail(
                EXIT_ARGS,
                f"unknown feature families {unknown}; "
                f"pick from {', '.join(FAMILIES)} or 'all'",
            )
    if args.rmax == "auto":
        r_max = None
    else:
        try:
            r_max = float(args.rmax)
        except ValueError:
            return _fail(EXIT_ARGS, f"--rmax must be 'auto' or a number, got {args.rmax!r}")
    try:
        return AnalysisConfig(
            selected_types=tuple(types),
            feature_families=families,
            q=args.grid,
            bins=args.bins,
            r_max=r_max,
            seed=args.seed,
        )
    except (ValueError, SashimiError) as exc:
        return _fail(EXIT_ARGS, str(exc))


def cmd_extract(args) -> int:
    config = _extract_config(args)
    if isinstance(config, int):
        return config

    path = Path(args.input)
    try:
        data = path.read_bytes()
    except OSError as exc:
        return _fail(EXIT_PARSE, f"cannot read {path}: {exc}")
    try:
        pattern = parse_csv(data)
    except (MalformedRow, EmptyInput, FileTooLarge) as exc:
        return _fail(EXIT_PARSE, f"{path}: {exc}")

    try:
        table, bundle = extract_features(pattern, config)
        out_path = Path(
            args.out if args.out is not None else f"features.{args.format}"
        )
        if args.format == "csv":
            out_path.write_bytes(features_csv([table]))
        else:
            payload = {
                "features": {
                    k: (None if np.isnan(v) else v)
                    for k, v in table.features.items()
                },
                "metadata": table.metadata,
            }
            out_path.write_text(json.dumps(payload, indent=2) + "\n")
        manifest_dir = Path(args.curves_out) if args.curves_out else out_path.parent
        manifest_dir.mkdir(parents=True, exist_ok=True)
        manifest_path = manifest_dir / "manifest.json"
        manifest_path.write_bytes(manifest_json(config))
        if args.curves_out:
            curves_dir = Path(args.curves_out)
            (curves_dir / "curves.json").write_bytes(curves_json(bundle))
            (curves_dir / "diagram.csv").write_bytes(diagram_csv(bundle))
    except SashimiError as exc:
        return _fail(EXIT_COMPUTE, str(exc))
    print(manifest_path)
    return EXIT_OK


def _parse_window(raw: str) -> ObservationWindow:
    parts = [float(v) for v in raw.split(",")]
    if len(parts) != 4:
        raise ValueError("window needs four numbers: x_min,x_max,y_min,y_max")
    return ObservationWindow(*parts)


def cmd_generate(args) -> int:
    types = _split_csv_flag(args.types)
    if not types:
        return _fail(EXIT_ARGS, "at least one type is required")
    try:
        window = _parse_window(args.window)
    except (ValueError, SashimiError) as exc:
        return _fail(EXIT_ARGS, f"bad --window: {exc}")

    blocks = []
    labels = []
    try:
        for offset, label in enumerate(types):
            seed = args.seed + offset
            if args.model == "csr":
                pts = poisson_csr(args.intensity, window, seed)
            elif args.model == "thomas":
                pts = thomas_cluster(
                    args.clusters, args.offspring, args.sigma, window, seed
                )
            else:
                pts = matern_ii(args.intensity, args.radius, window, seed)
            blocks.append(pts)
            labels.extend([label] * len(pts))
    except (SashimiError, ValueError) as exc:
        return _fail(EXIT_ARGS, str(exc))

    points = np.vstack([b for b in blocks if len(b)]) if labels else np.empty((0, 2))
    pattern = MarkedPointPattern(points, np.asarray(labels, dtype=np.str_), window)
    blob = serialize_csv(pattern)
    if args.out is None:
        sys.stdout.write(blob.decode("utf-8"))
    else:
        Path(args.out).write_bytes(blob)
    return EXIT_OK


def cmd_serve(args) -> int:
    import os

    import uvicorn

    from .service import Settings, create_app

    settings = Settings.from_env()
    if args.data_dir is not None:
        settings.data_dir = Path(args.data_dir)
    if args.static_dir is not None:
        settings.static_dir = Path(args.static_dir)
    if args.workers is not None:
        settings.workers = args.workers
    port = args.port
    if port is None:
        port = int(os.environ.get("SASHIMI_PORT", "8000"))
    uvicorn.run(create_app(settings), host=args.host, port=port)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "extract":
        return cmd_extract(args)
    if args.command == "generate":
        return cmd_generate(args)
    return cmd_serve(args)


if __name__ == "__main__":
    sys.exit(main())
