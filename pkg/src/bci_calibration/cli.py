from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Optional, Sequence

from .batch import BatchProcessor
from .config import METHODS, ConfigManager, RunConfig
from .core.tracing import configure_logging, logger
from .data.io import load_recording
from .errors import CalibrationError, ConfigError, ErrorCode, error_response, exit_code_for
from .evaluation import CrossValidationResult, EvalReport, cross_validate, merge_reports
from .pipeline import load_model, save_model, train_pipeline
from .reporting import text_table, write_report, write_statistics
from .synth import MANIFEST_NAME, SynthSpec, generate_suite, read_manifest, write_suite

RUN_CONFIG_NAME = "run_config.json"


def _band(text: str) -> tuple[float, float]:
    low, sep, high = text.partition(":")
    try:
        if not sep:
            raise ValueError
        return float(low), float(high)
    except ValueError:
        raise argparse.ArgumentTypeError(f"band must look like lo:hi, got {text!r}") from None


def _common_options() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", default=None, help="Flat JSON config file; flags override its values")
    common.add_argument("--log-level", default="INFO", choices=["DEBUG", "INFO", "WARNING", "ERROR"])
    common.add_argument("--out", default=None, help="Output directory")
    common.add_argument("--seed", type=int, default=None, help="Seed for every stochastic choice")
    common.add_argument("--jobs", type=int, default=None, help="Worker threads for sessions")
    common.add_argument(
        "--method",
        action="append",
        default=None,
        help=f"Method(s) out of {', '.join(METHODS)}; repeat or comma-separate",
    )
    common.add_argument("--band", type=_band, default=None, help="Bandpass edges in Hz as lo:hi")
    common.add_argument("--folds", type=int, default=None, help="Number of chronological folds")
    common.add_argument("--margin", type=int, default=None, help="Trials excluded on each side of a test block")
    common.add_argument("--pairs", type=int, default=None, help="CSP filter pairs per band")
    common.add_argument("--stat-unit", default=None, choices=["session", "subject"])
    return common


def build_parser() -> argparse.ArgumentParser:
    """Build the main argument parser with subcommands."""
    parser = argparse.ArgumentParser(
        prog="bci-calibration",
        description="Train and compare motor-imagery calibration pipelines",
    )
    subparsers = parser.add_subparsers(dest="command", help="Available commands")
    common = _common_options()

    synth_parser = subparsers.add_parser("synth", parents=[common], help="Generate a synthetic session suite")
    synth_parser.add_argument("--sessions", type=int, default=None, help="Number of sessions")
    synth_parser.add_argument("--subjects", type=int, default=None, help="Number of subjects")
    synth_parser.add_argument("--n-trials", type=int, default=None, help="Cues per session")
    synth_parser.add_argument("--modulation", type=float, default=None, help="ERD depth in [0, 1]")
    synth_parser.add_argument("--snr-db", type=float, default=None, help="Sensor SNR in dB")
    synth_parser.add_argument("--format", default=None, choices=["csv", "bin"], help="Recording file format")

    train_parser = subparsers.add_parser("train", parents=[common], help="Train one pipeline on a recording")
    train_parser.add_argument("recording", help="Recording file (.csv or .bin)")
    train_parser.add_argument("--model", default=None, help="Model output file (default: <out>/<name>.<method>.json)")

    evaluate_parser = subparsers.add_parser("evaluate", parents=[common], help="Cross-validate methods on sessions")
    evaluate_parser.add_argument(
        "data", nargs="*", help="Recording files, suite directories or sessions.json manifests"
    )

    compare_parser = subparsers.add_parser("compare", parents=[common], help="Statistical comparison of reports")
    compare_parser.add_argument("reports", nargs="+", help="report.json files from evaluate")

    inspect_parser = subparsers.add_parser("inspect-model", parents=[common], help="Summarize a trained model")
    inspect_parser.add_argument("model", help="Model file written by train")

    return parser


def _methods(values: Optional[list[str]]) -> Optional[list[str]]:
    if values is None:
        return None
    methods = [m.strip().lower() for value in values for m in value.split(",") if m.strip()]
    return list(dict.fromkeys(methods))


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Config file values, then command-line overrides."""
    manager = ConfigManager(args.config)
    manager.load()
    band = getattr(args, "band", None)
    manager.update(
        out=args.out,
        seed=args.seed,
        jobs=args.jobs,
        methods=_methods(args.method),
        band_low_hz=band[0] if band else None,
        band_high_hz=band[1] if band else None,
        folds=args.folds,
        margin=args.margin,
        n_pairs=args.pairs,
        stat_unit=args.stat_unit,
        sessions=getattr(args, "sessions", None),
        subjects=getattr(args, "subjects", None),
        n_trials=getattr(args, "n_trials", None),
        modulation=getattr(args, "modulation", None),
        snr_db=getattr(args, "snr_db", None),
        format=getattr(args, "format", None),
        data=getattr(args, "data", None) or None,
    )
    return manager.get().validate()


def _save_run_config(config: RunConfig, out_dir: Path) -> Path:
    manager = ConfigManager()
    manager.update(**config.to_dict())
    return manager.save(out_dir / RUN_CONFIG_NAME)


def _print_json(payload: Any) -> None:
    print(json.dumps(payload, ensure_ascii=False, indent=2, sort_keys=True))


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_help()
        return 1

    configure_logging(args.log_level)
    handlers = {
        "synth": cmd_synth,
        "train": cmd_train,
        "evaluate": cmd_evaluate,
        "compare": cmd_compare,
        "inspect-model": cmd_inspect_model,
    }
    try:
        return handlers[args.command](args)
    except Exception as exc:
        if not isinstance(exc, CalibrationError):
            logger.exception("unexpected failure in {}", args.command)
        print(json.dumps(error_response(exc), ensure_ascii=False, default=str), file=sys.stderr)
        return exit_code_for(exc)


def cmd_synth(args: argparse.Namespace) -> int:
    """Write a synthetic suite and its manifest."""
    config = resolve_config(args)
    base = SynthSpec(n_trials=config.n_trials, snr_db=config.snr_db).with_modulation(config.modulation)
    suite = generate_suite(base, n_sessions=config.sessions, n_subjects=config.subjects, seed=config.seed)
    out_dir = Path(config.out)
    manifest = write_suite(suite, out_dir, config.format)
    _save_run_config(config, out_dir)
    _print_json({
        "success": True,
        "sessions": len(suite),
        "subjects": len({s.subject_id for s in suite}),
        "manifest": str(manifest),
    })
    return 0


def _session_inputs(paths: Sequence[str]) -> list[dict[str, str]]:
    """(session, subject, recording) entries from files, directories and manifests."""
    entries: list[dict[str, str]] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            path = path / MANIFEST_NAME
        if path.suffix == ".json":
            entries.extend(read_manifest(path))
        else:
            entries.append({"session": path.stem, "subject": path.stem, "recording": str(path)})
    if not entries:
        raise ConfigError("data", "no sessions given")
    sessions = [e["session"] for e in entries]
    if len(set(sessions)) != len(sessions):
        raise ConfigError("data", "session identifiers must be unique")
    return entries


def run_evaluation(config: RunConfig) -> EvalReport:
    """Cross-validate every (session, method); failures are recorded, not raised."""
    entries = _session_inputs(config.data)
    pipeline = config.pipeline()

    def run_session(entry: dict[str, str]) -> tuple[list[CrossValidationResult], list[dict[str, Any]]]:
        results: list[CrossValidationResult] = []
        failures: list[dict[str, Any]] = []
        try:
            rec = load_recording(entry["recording"])
        except CalibrationError as exc:
            return [], [_failure(entry["session"], m, exc) for m in config.methods]
        for method in config.methods:
            try:
                result = cross_validate(rec, method, pipeline, config.folds, config.margin, session=entry["session"])
            except CalibrationError as exc:
                logger.error("{} {} failed: {}", entry["session"], method, exc)
                failures.append(_failure(entry["session"], method, exc))
                continue
            result.subject = entry.get("subject", entry["session"])
            results.append(result)
        return results, failures

    batch = BatchProcessor(config.jobs).process(entries, run_session)
    if batch.errors:
        index, error = batch.errors[0]
        raise CalibrationError(
            ErrorCode.INTERNAL_ERROR, f"session worker failed: {error}", {"session": entries[index]["session"]}
        ) from error

    results = [r for session_results, _ in batch.results for r in session_results]
    failures = [f for _, session_failures in batch.results for f in session_failures]
    provenance = {
        **config.pipeline().to_dict(),
        "folds": config.folds,
        "margin": config.margin,
        "seed": config.seed,
    }
    return EvalReport(results=results, methods=list(config.methods), stat_unit=config.stat_unit,
                      config=provenance, failures=failures)


def _failure(session: str, method: str, exc: CalibrationError) -> dict[str, Any]:
    return {"session": session, "method": method, "code": exc.code.value, "error": exc.message}


def cmd_evaluate(args: argparse.Namespace) -> int:
    """Run cross-validation, write the report artifacts and print the accuracy table."""
    config = resolve_config(args)
    out_dir = Path(config.out)
    report = run_evaluation(config)
    write_report(report, out_dir)
    _save_run_config(config, out_dir)
    print(text_table(("Subject", *report.methods), report.accuracy_table("session")))
    if report.failures:
        logger.warning("{} (session, method) runs failed", len(report.failures))
        return 1
    return 0


def cmd_compare(args: argparse.Namespace) -> int:
    """Merge reports and test method differences on every metric."""
    config = resolve_config(args)
    reports = [EvalReport.load(path) for path in args.reports]
    merged = merge_reports(reports, stat_unit=config.stat_unit)
    if len(merged.methods) < 2:
        raise CalibrationError(ErrorCode.INSUFFICIENT_DATA, "comparison needs at least two methods",
                               {"methods": merged.methods})
    units, _ = merged.unit_matrix("accuracy")
    if len(units) < 2:
        raise CalibrationError(ErrorCode.INSUFFICIENT_DATA, "comparison needs at least two units (df = 0)",
                               {"unit": merged.stat_unit, "n_units": len(units)})
    out_dir = Path(config.out)
    write_report(merged, out_dir)
    path = write_statistics(merged, out_dir)
    _print_json({"success": True, "statistics": str(path), "methods": merged.methods, "n_units": len(units)})
    return 0


def cmd_train(args: argparse.Namespace) -> int:
    """Train one method on a whole recording and save the model."""
    config = resolve_config(args)
    if len(config.methods) != 1:
        raise ConfigError("methods", "train needs exactly one --method")
    method = config.methods[0]
    rec = load_recording(args.recording)
    model = train_pipeline(rec, method, config.pipeline())
    target = Path(args.model) if args.model else Path(config.out) / f"{Path(args.recording).stem}.{method}.json"
    save_model(model, target)
    _print_json({"success": True, "model": str(target), "method": method, "n_features": model.n_features})
    return 0


def cmd_inspect_model(args: argparse.Namespace) -> int:
    model = load_model(args.model)
    _print_json({
        "format": model.format,
        "method": model.method.value,
        "channel_labels": list(model.channel_labels),
        "sample_rate_hz": model.sample_rate_hz,
        "preprocessing": model.preprocessing(),
        "bands": [
            {"band_hz": None if b.band_hz is None else list(b.band_hz), "n_components": b.n_components}
            for b in model.spatial.bands
        ],
        "n_features": model.n_features,
        "lda_gamma": model.lda.shrinkage_gamma,
    })
    return 0


if __name__ == "__main__":
    sys.exit(main())
