"""``sizefit`` command line.

Exit codes: 0 success, 2 input error, 3 processing error.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys

from . import collar as _collar
from .exceptions import InputError, ProcessingError, SizefitError
from .geometry import DEFAULT_CONFIDENCE_THRESHOLD, SizeSpec
from .overlap import DEFAULT_TOLERANCE
from .pipeline import PRESETS, JobConfig, run, write_fixture

EXIT_OK, EXIT_INPUT, EXIT_PROCESSING = 0, 2, 3

log = logging.getLogger("sizefit")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="sizefit", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="resize the clothing of a segmentation map")
    r.add_argument("--segmap", required=True, help="indexed PNG, palette index = label id")
    r.add_argument("--palette", required=True, help="palette JSON sidecar")
    r.add_argument("--pose", required=True, help="OpenPose BODY_25 JSON")
    r.add_argument("--person-height-cm", type=float, required=True)
    r.add_argument("--person-shoulder-cm", type=float, required=True)
    r.add_argument("--cloth-height-cm", type=float, required=True)
    r.add_argument("--cloth-shoulder-cm", type=float, required=True)
    r.add_argument("--out", required=True, help="output PNG")
    r.add_argument("--out-palette", help="output palette sidecar (default: <out>.palette.json)")
    r.add_argument("--report", help="report JSON path")
    r.add_argument("--collar-iterations", type=int, default=_collar.DEFAULT_ITERATIONS)
    r.add_argument("--collar-sx-frac", type=float, default=_collar.DEFAULT_SX_FRAC)
    r.add_argument("--collar-sy-frac", type=float, default=_collar.DEFAULT_SY_FRAC)
    r.add_argument("--h-rule", choices=("alpha", "shoulder"), default="alpha")
    r.add_argument("--confidence-threshold", type=float, default=DEFAULT_CONFIDENCE_THRESHOLD)
    r.add_argument("--overlap-tolerance", type=float, default=DEFAULT_TOLERANCE)
    r.add_argument("--skip-collar", action="store_true")
    r.add_argument("--skip-overlap", action="store_true")

    f = sub.add_parser("fixture", help="write a synthetic person for testing")
    f.add_argument("--preset", choices=sorted(PRESETS), default="default")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out-dir", required=True)
    return parser


def _run(args) -> int:
    try:
        spec = SizeSpec(args.person_height_cm, args.person_shoulder_cm,
                        args.cloth_height_cm, args.cloth_shoulder_cm)
    except SizefitError as exc:
        print(f"sizefit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    config = JobConfig(
        segmap_path=args.segmap, palette_path=args.palette, pose_path=args.pose, spec=spec,
        out_path=args.out, report_path=args.report, out_palette_path=args.out_palette,
        h_rule=args.h_rule, collar_iterations=args.collar_iterations,
        collar_sx_frac=args.collar_sx_frac, collar_sy_frac=args.collar_sy_frac,
        confidence_threshold=args.confidence_threshold,
        skip_collar=args.skip_collar, skip_overlap=args.skip_overlap,
        overlap_tolerance=args.overlap_tolerance,
    )
    _, report = run(config)
    for warning in report.warnings:
        log.warning(warning)
    log.info("s_h=%.4f s_v=%.4f", report.scale["s_h"], report.scale["s_v"])
    return EXIT_OK


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="sizefit: %(levelname)s: %(message)s")
    try:
        if args.command == "run":
            return _run(args)
        paths = write_fixture(args.out_dir, args.preset, args.seed)
        print(json.dumps(paths, indent=2))
        return EXIT_OK
    except SizefitError as exc:
        kind = "input" if isinstance(exc, InputError) else "processing"
        where = f" [{exc.stage}]" if exc.stage else ""
        print(f"sizefit: {kind} error{where}: {exc}", file=sys.stderr)
        return EXIT_INPUT if isinstance(exc, InputError) else EXIT_PROCESSING
    except (FileNotFoundError, IsADirectoryError, PermissionError) as exc:
        print(f"sizefit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (ValueError, OSError) as exc:
        # PIL raises these on unreadable images
        print(f"sizefit: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
