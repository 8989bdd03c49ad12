#!/usr/bin/env python3
"""
Fall Detection Toolkit

Command-line entry point: dataset checks, feature extraction, training,
cross-validated evaluation, parameter sweeps and the streaming gateway.

Exit codes: 0 success, 1 failure or an evaluation with undefined metrics,
2 usage error.
"""

import argparse
import asyncio
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

# Import our modules
try:
    from src.classifiers.serialization import ModelBundle, train_bundle
    from src.config.config_reader import get_config_reader, reset_config_reader
    from src.data.dataset import ActivityVocabulary, Dataset, load_canonical
    from src.data.splits import SplitSpec, stratified_subset
    from src.evaluation.protocol import ClassifierSelection, run_protocol
    from src.evaluation.sweeps import sweep_features, sweep_neighbors
    from src.features.assembler import FeatureConfig, FeatureMatrix, extract_matrix
    from src.features.wavelets import WaveletSpec
    from src.gateway.detector import FallDetector
    from src.gateway.service import GatewayService
    from src.gateway.windowing import WindowPolicy
    from src.utils.errors import FeatureConfigError, FoldError, ModelError
    from src.utils.report_formatter import FORMATS, report_formatter
except ImportError as e:
    print(f"[ERROR] Import Error: {e}", file=sys.stderr)
    print("\n[INFO] Please install required dependencies:", file=sys.stderr)
    print("   pip install -r requirements.txt", file=sys.stderr)
    sys.exit(1)


logger = logging.getLogger("fall_detect")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Invalid flag value or combination."""


# Set up logging
def setup_logging(config_path: Optional[str] = None, level: Optional[str] = None):
    """Configure logging based on config settings; logs go to stderr."""
    log_format = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    try:
        config_reader = get_config_reader(config_path)
        log_settings = config_reader.get_logging_settings()

        log_level = getattr(logging, (level or log_settings.get('level', 'INFO')).upper())
        logging.basicConfig(
            level=log_level,
            format=log_format,
            stream=sys.stderr
        )

        # Optionally log to file
        if 'log_file' in log_settings:
            file_handler = logging.FileHandler(log_settings['log_file'])
            file_handler.setFormatter(logging.Formatter(log_format))
            logging.getLogger().addHandler(file_handler)

    except Exception as e:
        # Fallback to basic logging if config fails
        logging.basicConfig(level=logging.INFO, format=log_format, stream=sys.stderr)
        logging.warning(f"Could not load logging config: {e}")


def _common_flags() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Path to config.yml (default: project root)")
    common.add_argument("--seed", type=int, help="Root seed for every random stream")
    common.add_argument("--threads", type=int, help="Worker threads for extraction and fold training")
    common.add_argument("--format", choices=FORMATS, help="Report format")
    common.add_argument("--log-level", choices=["DEBUG", "INFO", "WARNING", "ERROR"],
                        help="Override the configured log level")
    common.add_argument("--out", help="Output file (report, feature matrix or model)")
    return common


def _feature_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--features",
                        help="Comma-separated extractors: cwt,svm,total_abs_svm,sma,range,se,raw")
    parser.add_argument("--wavelet", help="CWT mother wavelet family (default bior2.2)")
    parser.add_argument("--scale", type=float, help="CWT scale (default 250)")


def _neighbor_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--knn", type=int, metavar="K", help="KNN neighbors (0 disables KNN)")
    parser.add_argument("--enn", type=int, metavar="E", help="ENN neighbors (0 disables ENN)")
    parser.add_argument("--preset", help="Neighbor preset from config (feature_sweep, comparison)")


def _split_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--folds", type=int, help="Number of random train/test splits")
    parser.add_argument("--split", type=float, metavar="FRACTION", help="Training fraction, e.g. 0.7")
    parser.add_argument("--rounding", choices=["half_up", "floor"],
                        help="Rounding of the training-set size")
    parser.add_argument("--timing", action=argparse.BooleanOptionalAction, default=None,
                        help="Include timing in reports (off makes seeded reports byte-identical)")


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = argparse.ArgumentParser(
        prog="fall_detect",
        description="Accelerometer fall detection: features, classifiers, evaluation and gateway.",
    )
    commands = parser.add_subparsers(dest="command", required=True)

    extract = commands.add_parser("extract", parents=[common],
                                  help="Extract a feature matrix (CSV, or .npz cache)")
    extract.add_argument("dataset", help="Canonical dataset CSV")
    _feature_flags(extract)

    train = commands.add_parser("train", parents=[common],
                                help="Fit KNN, ENN and BDT on a dataset and write a model bundle")
    train.add_argument("dataset", help="Canonical dataset CSV")
    _feature_flags(train)
    _neighbor_flags(train)

    evaluate = commands.add_parser("eval", parents=[common], help="Run the cross-validation protocol")
    evaluate.add_argument("dataset", help="Canonical dataset CSV")
    _feature_flags(evaluate)
    _neighbor_flags(evaluate)
    evaluate.add_argument("--bdt", action=argparse.BooleanOptionalAction, default=None,
                          help="Include the decision tree")
    evaluate.add_argument("--vm", action=argparse.BooleanOptionalAction, default=None,
                          help="Include the voting machine (needs all three classifiers)")
    evaluate.add_argument("--cache", help="Feature cache (.npz) to reuse or create")
    _split_flags(evaluate)

    sweep = commands.add_parser("sweep", parents=[common], help="Neighbor or feature-combination sweep")
    sweep.add_argument("kind", choices=["neighbors", "features"])
    sweep.add_argument("dataset", help="Canonical dataset CSV")
    _feature_flags(sweep)
    sweep.add_argument("--max", type=int, default=17, dest="max_k",
                       help="Largest odd neighbor count for the neighbor sweep (default 17)")
    sweep.add_argument("--combos", help="Semicolon-separated feature combinations (default: all 17)")
    sweep.add_argument("--subset", type=int, help="Run on a stratified subset of this many records")
    _neighbor_flags(sweep)
    _split_flags(sweep)

    gateway = commands.add_parser("gateway", parents=[common], help="Run the streaming fall detector")
    gateway.add_argument("--model", help="Model bundle written by 'train'")
    gateway.add_argument("--window", type=float, help="Window length in seconds")
    gateway.add_argument("--stride", type=float, help="Window stride in seconds")
    gateway.add_argument("--debounce", type=float, help="Minimum seconds between alerts")
    gateway.add_argument("--listen", help="'-' for stdin, or host:port for a TCP frame source")
    gateway.add_argument("--alert-address", help="host:port for alert subscribers")
    gateway.add_argument("--queue-size", type=int, help="Windows waiting for classification")

    check = commands.add_parser("convert-check", parents=[common],
                                help="Validate a canonical dataset file and summarize it")
    check.add_argument("dataset", help="Canonical dataset CSV")
    return parser


def _pick(flag, setting):
    return setting if flag is None else flag


def _output_format(args, default: Optional[str] = None) -> str:
    settings = get_config_reader().get_output_settings()
    return args.format or default or settings.get("format", "text")


def _write(text: str, out: Optional[str]):
    if out:
        Path(out).write_text(text, encoding="utf-8")
        logger.info(f"Wrote {out}")
    else:
        sys.stdout.write(text)
        sys.stdout.flush()


def _load_dataset(path: str) -> Dataset:
    settings = get_config_reader().get_dataset_settings()
    vocabulary = ActivityVocabulary(extra_falls=settings.get("fall_activities") or ())
    return load_canonical(path, vocabulary)


def _feature_config(args, names: Optional[str] = None) -> FeatureConfig:
    settings = get_config_reader().get_feature_settings()
    requested = names if names is not None else args.features
    if requested is None:
        requested = settings["enabled"]
    if isinstance(requested, str) and not requested.strip():
        raise UsageError("--features must name at least one extractor")
    wavelet = settings["wavelet"]
    try:
        return FeatureConfig.from_names(requested, WaveletSpec(
            family=_pick(getattr(args, "wavelet", None), wavelet["family"]),
            scale=float(_pick(getattr(args, "scale", None), wavelet["scale"])),
            tabulation_resolution=int(wavelet["resolution"]),
        ))
    except FeatureConfigError as e:
        raise UsageError(str(e))


def _neighbors(args) -> tuple:
    config_reader = get_config_reader()
    settings = config_reader.get_classifier_settings()
    k, e = settings["knn_k"], settings["enn_e"]
    if args.preset:
        try:
            preset = config_reader.get_preset(args.preset)
        except ValueError as err:
            raise UsageError(str(err))
        k, e = preset.get("knn_k", k), preset.get("enn_e", e)
    k, e = _pick(args.knn, k), _pick(args.enn, e)
    if (k is not None and k < 0) or (e is not None and e < 0):
        raise UsageError("--knn and --enn must be 0 (disabled) or a positive odd number")
    return k, e


def _split_spec(args) -> SplitSpec:
    settings = get_config_reader().get_evaluation_settings()
    return SplitSpec(
        train_fraction=float(_pick(args.split, settings["train_fraction"])),
        folds=int(_pick(args.folds, settings["folds"])),
        seed=int(_pick(args.seed, settings["seed"])),
        rounding=_pick(args.rounding, settings["rounding"]),
    )


def _threads(args) -> int:
    threads = int(_pick(args.threads, get_config_reader().get_evaluation_settings()["threads"]))
    if threads < 1:
        raise UsageError("--threads must be at least 1")
    return threads


def _report_timing(args) -> bool:
    return bool(_pick(args.timing, get_config_reader().get_evaluation_settings()["report_timing"]))


def cmd_extract(args) -> int:
    cfg = _feature_config(args)
    ds = _load_dataset(args.dataset)
    matrix = extract_matrix(ds, cfg, _threads(args))

    out = Path(args.out) if args.out else Path(args.dataset).with_suffix(".features.csv")
    if out.suffix == ".npz":
        matrix.save_cache(out)
    else:
        matrix.to_csv(out)
    timing = matrix.extraction_ms
    summary = {
        "records": len(matrix),
        "dimension": matrix.dimension,
        "features": cfg.label,
        "config_hash": cfg.config_hash,
        "output": str(out),
        "extraction_ms": {
            "mean": float(timing.mean()),
            "min": float(timing.min()),
            "max": float(timing.max()),
        },
    }
    sys.stdout.write(report_formatter.format_summary(summary, _output_format(args)))
    return EXIT_OK


def cmd_train(args) -> int:
    if not args.out:
        raise UsageError("train needs --out for the model bundle")
    cfg = _feature_config(args)
    k, e = _neighbors(args)
    ds = _load_dataset(args.dataset)
    matrix = extract_matrix(ds, cfg, _threads(args))
    bundle = train_bundle(matrix.values, matrix.labels, cfg, ds.expected_length, ds.fs, k, e)
    bundle.save(args.out)
    tree = bundle.voting.bdt
    summary = {
        "model_id": bundle.model_id,
        "output": args.out,
        "records": len(ds),
        "record_length": ds.expected_length,
        "fs": ds.fs,
        "features": cfg.label,
        "knn_k": k,
        "enn_e": e,
        "bdt": {"nodes": tree.n_nodes, "leaves": tree.n_leaves, "depth": tree.depth},
    }
    sys.stdout.write(report_formatter.format_summary(summary, _output_format(args)))
    return EXIT_OK


def _selection(args) -> ClassifierSelection:
    k, e = _neighbors(args)
    k = k or None
    e = e or None
    bdt = bool(_pick(args.bdt, get_config_reader().get_classifier_settings()["bdt"]))
    all_three = k is not None and e is not None and bdt
    vm = all_three if args.vm is None else args.vm
    try:
        return ClassifierSelection(knn_k=k, enn_e=e, bdt=bdt, vm=vm)
    except ModelError as err:
        raise UsageError(str(err))


def _cached_matrix(args, ds: Dataset, cfg: FeatureConfig, threads: int) -> FeatureMatrix:
    if args.cache:
        cached = FeatureMatrix.load_cache(args.cache, cfg.config_hash)
        if cached is not None and cached.record_ids == tuple(r.id for r in ds.records):
            logger.info(f"Using feature cache {args.cache}")
            return cached
    matrix = extract_matrix(ds, cfg, threads)
    if args.cache:
        matrix.save_cache(args.cache)
    return matrix


def cmd_eval(args) -> int:
    cfg = _feature_config(args)
    selection = _selection(args)
    spec = _split_spec(args)
    threads = _threads(args)
    ds = _load_dataset(args.dataset)
    matrix = _cached_matrix(args, ds, cfg, threads)

    report = run_protocol(ds, cfg, selection, spec, threads, matrix, _report_timing(args))
    _write(report_formatter.format_eval_report(report, _output_format(args)), args.out)
    if report.has_undefined:
        logger.warning("At least one fold produced an undefined metric")
        return EXIT_FAILURE
    return EXIT_OK


def cmd_sweep(args) -> int:
    spec = _split_spec(args)
    threads = _threads(args)
    if args.kind == "neighbors":
        if args.max_k < 1:
            raise UsageError("--max must be at least 1")
        cfg = _feature_config(args)
        ds = _load_dataset(args.dataset)
        if args.subset:
            ds = stratified_subset(ds, args.subset, spec.seed)
        try:
            table = sweep_neighbors(ds, cfg, spec, range(1, args.max_k + 1, 2), threads,
                                    _report_timing(args))
        except ModelError as e:
            raise UsageError(str(e))
    else:
        combos = None
        if args.combos:
            combos = [_feature_config(args, names) for names in args.combos.split(";") if names.strip()]
        explicit = args.knn is not None or args.enn is not None or args.preset
        k, e = _neighbors(args) if explicit else (3, 3)
        k, e = k or None, e or None
        try:
            selection = ClassifierSelection(knn_k=k, enn_e=e, bdt=True,
                                            vm=k is not None and e is not None)
        except ModelError as err:
            raise UsageError(str(err))
        ds = _load_dataset(args.dataset)
        if args.subset:
            ds = stratified_subset(ds, args.subset, spec.seed)
        table = sweep_features(ds, combos, spec, selection, threads,
                               _report_timing(args))
    _write(report_formatter.format_sweep(table, _output_format(args, args.format or "csv")), args.out)
    return EXIT_OK


def cmd_gateway(args) -> int:
    settings = get_config_reader().get_gateway_settings()
    model_path = _pick(args.model, settings["model_path"])
    if not model_path:
        raise UsageError("gateway needs --model (or gateway.model_path in config)")
    policy = WindowPolicy(
        window_length=float(_pick(args.window, settings["window_length"])),
        stride=float(_pick(args.stride, settings["stride"])),
        debounce=float(_pick(args.debounce, settings["debounce"])),
    )
    bundle = ModelBundle.load(model_path)
    detector = FallDetector(bundle, policy)
    listen = _pick(args.listen, settings["listen"])
    service = GatewayService(
        detector,
        listen=listen,
        alert_address=_pick(args.alert_address, settings["alert_address"]),
        queue_size=int(_pick(args.queue_size, settings["queue_size"])),
    )
    banner = (
        f"Gateway ready: model {bundle.model_id}, fs={bundle.fs:g} Hz, "
        f"L={detector.window_samples} (window {policy.window_length:g}s), "
        f"stride {policy.stride:g}s, debounce {policy.debounce:g}s, "
        f"features [{bundle.feature_config.label}], listening on {listen}"
    )
    print(banner, file=sys.stderr)
    logger.info(banner)

    try:
        counters = asyncio.run(service.run())
    except KeyboardInterrupt:
        logger.info("Interrupted, shutting down gateway")
        counters = service.counters
    print(json.dumps({"counters": counters.to_dict()}), file=sys.stderr)
    return EXIT_OK


def cmd_convert_check(args) -> int:
    ds = _load_dataset(args.dataset)
    activities = {}
    for r in ds.records:
        activities[r.activity_label] = activities.get(r.activity_label, 0) + 1
    summary = {
        "status": "ok",
        "name": ds.name,
        "records": len(ds),
        "record_length": ds.expected_length,
        "fs": ds.fs,
        "units": ds.units,
        "class_counts": ds.class_counts(),
        "activities": dict(sorted(activities.items())),
    }
    _write(report_formatter.format_summary(summary, _output_format(args)), args.out)
    return EXIT_OK


COMMANDS = {
    "extract": cmd_extract,
    "train": cmd_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "gateway": cmd_gateway,
    "convert-check": cmd_convert_check,
}


def _error_exit(command: str, error: Exception, message: str) -> int:
    sys.stderr.write(report_formatter.format_error(command, error, message))
    return EXIT_FAILURE


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point for the toolkit."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)

    reset_config_reader()
    setup_logging(args.config, args.log_level)
    command = args.command
    logger.debug(f"Running {command} with arguments: {vars(args)}")

    try:
        config_reader = get_config_reader(args.config)
        output = config_reader.get_output_settings()
        report_formatter.configure(pretty_print=output.get("pretty_print"))
        return COMMANDS[command](args)

    except UsageError as e:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {command}: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    except FileNotFoundError as e:
        logger.error(f"File not found: {e}")
        return _error_exit(command, e, "Input file not found. Check the path and try again.")

    except FoldError as e:
        logger.error(f"Evaluation failed in fold {e.fold_index}: {e.cause}")
        return _error_exit(command, e, f"Evaluation failed in fold {e.fold_index}")

    except ValueError as e:
        # Validation errors
        logger.error(f"Validation error in {command}: {e}")
        return _error_exit(command, e, f"Invalid input: {e}")

    except Exception as e:
        logger.error(f"Error in {command}: {e}", exc_info=True)
        return _error_exit(command, e, f"Failed to execute {command}: {e}")


if __name__ == "__main__":
    sys.exit(main())
