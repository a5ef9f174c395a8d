"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 data or model error.  Data goes to
stdout; logs and errors go to stderr.
"""
from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from . import classifier as clf
from . import harness
from .errors import NumgridError
from .features import DEFAULT_MIN_RUN, FEATURE_NAMES, extract_features
from .imaging import DEFAULT_MIN_COMPONENT_SIZE, preprocess, read_image, write_binary_image

log = logging.getLogger("numgrid")

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _positive_float(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {text!r}")
    return v


def _type_list(text: str) -> List[str]:
    try:
        return [clf.parse_type(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _single_type(text: str) -> str:
    try:
        return clf.parse_type(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _combiner_list(text: str) -> List[str]:
    try:
        return [harness.parse_combiner(t) for t in text.split(",") if t.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _default_jobs() -> int:
    env = os.environ.get("NUMGRID_JOBS")
    if env is None:
        return 1
    try:
        return _positive_int(env)
    except argparse.ArgumentTypeError:
        raise UsageError(f"NUMGRID_JOBS: expected a positive integer, got {env!r}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="numgrid", description="Handwritten numeral recognition pipeline.")
    p.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def pipeline_flags(sp):
        sp.add_argument("--min-component-size", type=_positive_int, default=DEFAULT_MIN_COMPONENT_SIZE,
                        help="specks smaller than this many pixels are erased (default 5)")
        sp.add_argument("--min-run", type=_positive_int, default=DEFAULT_MIN_RUN,
                        help="unit steps needed for a direction run to count as a line (default 3)")

    def fit_flags(sp):
        sp.add_argument("--ridge", type=_positive_float, default=clf.DEFAULT_RIDGE,
                        help="initial relative ridge for singular covariances (default 1e-6)")
        sp.add_argument("--ridge-cap", type=_positive_float, default=clf.DEFAULT_RIDGE_CAP,
                        help="largest relative ridge before giving up (default 1e-2)")
        sp.add_argument("--jobs", type=_positive_int, default=None,
                        help="worker processes for feature extraction (env NUMGRID_JOBS)")

    sp = sub.add_parser("preprocess", help="write the normalized filled image and its skeleton")
    sp.add_argument("image")
    sp.add_argument("--out-filled", required=True)
    sp.add_argument("--out-skeleton", required=True)
    pipeline_flags(sp)

    sp = sub.add_parser("extract", help="print the 17 features as a CSV row")
    sp.add_argument("image")
    pipeline_flags(sp)

    sp = sub.add_parser("train", help="fit a discriminant model on a dataset tree")
    sp.add_argument("--data", required=True, help="directory with sub-folders 0..9")
    sp.add_argument("--type", required=True, type=_single_type,
                    help="linear|quadratic|diaglinear|diagquadratic|mahalanobis or L|Q|DL|DQ|M")
    sp.add_argument("--out", required=True, help="model file (JSON)")
    pipeline_flags(sp)
    fit_flags(sp)

    sp = sub.add_parser("classify", help="print the predicted label of an image")
    sp.add_argument("image")
    sp.add_argument("--model", required=True)
    pipeline_flags(sp)

    sp = sub.add_parser("evaluate", help="train/test every classifier and write a per-class accuracy table")
    sp.add_argument("--train", required=True)
    sp.add_argument("--test", help="test tree; omit together with --resubstitution to reuse --train")
    sp.add_argument("--resubstitution", action="store_true", help="score on the training set")
    sp.add_argument("--types", type=_type_list, default=list(clf.TYPES), help="comma list, e.g. L,Q,DL,DQ,M")
    sp.add_argument("--combine", type=_combiner_list, default=None,
                    help="comma list of majority3,majority5 (default: every combiner the types allow)")
    sp.add_argument("--report", help="output file (default stdout)")
    sp.add_argument("--format", choices=("csv", "markdown"), default=None,
                    help="defaults to markdown for .md report paths, csv otherwise")
    sp.add_argument("--confusion-dir", help="where confusion_<row>.csv files go "
                                            "(default: next to --report)")
    sp.add_argument("--legacy-labels", action="store_true",
                    help='use the older "L+DL+DQ+M majority" name for the five-way combiner row')
    pipeline_flags(sp)
    fit_flags(sp)
    return p


def _features(path: str, args):
    return extract_features(preprocess(read_image(path), args.min_component_size), args.min_run)


def _cmd_preprocess(args) -> int:
    p = preprocess(read_image(args.image), args.min_component_size)
    write_binary_image(args.out_filled, p.filled)
    write_binary_image(args.out_skeleton, p.skeleton)
    return EXIT_OK


def _cmd_extract(args) -> int:
    fv = _features(args.image, args)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(FEATURE_NAMES)
    w.writerow([repr(float(v)) if isinstance(v, float) else v for v in fv])
    return EXIT_OK


def _cache(args) -> harness.FeatureCache:
    jobs = args.jobs if args.jobs is not None else _default_jobs()
    return harness.FeatureCache(args.min_component_size, args.min_run, jobs)


def _cmd_train(args) -> int:
    ds = harness.load_dataset(args.data)
    X, y, _ = harness.dataset_features(ds, _cache(args))
    model = clf.fit(X, y, args.type, ridge=args.ridge, ridge_cap=args.ridge_cap)
    clf.save_model(model, args.out)
    log.info("wrote %s model (%d samples, ridge %g) to %s", model.type, len(y), model.ridge, args.out)
    return EXIT_OK


def _cmd_classify(args) -> int:
    model = clf.load_model(args.model)
    print(clf.classify(model, _features(args.image, args).as_array()))
    return EXIT_OK


def _cmd_evaluate(args) -> int:
    if args.test is None and not args.resubstitution:
        raise UsageError("evaluate needs --test DIR or --resubstitution")
    if args.test is not None and args.resubstitution:
        raise UsageError("--test and --resubstitution are mutually exclusive")
    types = set(args.types)
    if args.combine is None:
        combiners = [c for c, order in ((harness.MAJORITY5, harness.MAJORITY5_ORDER),
                                        (harness.MAJORITY3, harness.MAJORITY3_ORDER))
                     if set(order) <= types]
    else:
        combiners = args.combine
        for c, order in ((harness.MAJORITY5, harness.MAJORITY5_ORDER), (harness.MAJORITY3, harness.MAJORITY3_ORDER)):
            if c in combiners and not set(order) <= types:
                raise UsageError(f"--combine {c} needs --types to include {','.join(order)}")
    train = harness.load_dataset(args.train)
    test = train if args.resubstitution else harness.load_dataset(args.test)
    report = harness.evaluate(train, test, types, combiners, ridge=args.ridge, ridge_cap=args.ridge_cap,
                              cache=_cache(args), label_style="legacy" if args.legacy_labels else "default")
    fmt = args.format or ("markdown" if args.report and args.report.endswith(".md") else "csv")
    text = harness.render_report(report, fmt)
    if args.report:
        Path(args.report).write_text(text, newline="")
        conf_dir = args.confusion_dir or str(Path(args.report).resolve().parent)
    else:
        sys.stdout.write(text)
        conf_dir = args.confusion_dir
    if conf_dir:
        for path in harness.write_confusion_matrices(report, conf_dir):
            log.info("wrote %s", path)
    return EXIT_OK


COMMANDS = {
    "preprocess": _cmd_preprocess,
    "extract": _cmd_extract,
    "train": _cmd_train,
    "classify": _cmd_classify,
    "evaluate": _cmd_evaluate,
}


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"numgrid {args.command}: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumgridError as exc:
        where = getattr(args, "image", None) or getattr(args, "data", None) or getattr(args, "train", "")
        print(f"numgrid {args.command}: {where}: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (OSError, ValueError) as exc:
        print(f"numgrid {args.command}: {exc}", file=sys.stderr)
        return EXIT_DATA


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
