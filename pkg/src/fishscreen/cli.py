"""Command-line entry point.

Exit codes: 0 success, 1 usage error, 2 data validation failure,
3 numeric failure (for example a training split with one class).
"""
from __future__ import annotations

import argparse
import configparser
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .ingame import INGAME_MANIFEST, extract_ingame_features
from .io import (SessionFormatError, dump_json, load_json, model_from_dict, model_to_dict,
                 read_feature_csv, read_sessions, write_feature_csv, write_manifest_csv,
                 write_sessions)
from .ml.pipeline import (FeatureTable, PipelineConfig, mode_features, mode_table,
                          run_three_modes, select_features, split_indices, train_mode,
                          evaluate_model, ModeResult)
from .ml.split import InsufficientClass
from .ml.svm import DegenerateLabels, DimensionMismatch
from .model import Dataset, ProtocolConfig, validate_session
from .movement import (MANIFEST_VERSION, MOVEMENT_MANIFEST, MOVEMENT_MANIFEST_ROWS,
                       ProposedFeatureConfig, TooShort, extract_movement_features)
from .protocol import build_schedule, write_schedule_csv
from .report import build_report, provenance, render_markdown, write_report
from .simulator import default_profiles, load_profiles, make_cohort

log = logging.getLogger("fishscreen")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_pipeline_opts(p, selection=True):
    p.add_argument("--preset", choices=("paper", "auto"), default="paper",
                   help="fixed published feature lists, or run selection (default: paper)")
    p.add_argument("--C", type=float, default=1.0, help="soft-margin penalty (default: 1.0)")
    p.add_argument("--ratio", type=float, default=0.5, help="training fraction (default: 0.5)")
    p.add_argument("--scale-on-all", action="store_true",
                   help="fit the min-max scaler on all rows instead of the training half")
    if selection:
        p.add_argument("--correlation", type=float, default=0.9,
                       help="|r| threshold of the correlation filter (default: 0.9)")
        p.add_argument("--min-votes", type=int, default=2,
                       help="selection methods that must agree on a feature (default: 2)")
        p.add_argument("--max-k", type=int, default=10,
                       help="cap on forward-selection size (default: 10)")


def _add_feature_opts(p):
    p.add_argument("--active-threshold", type=float, default=None,
                   help="absolute |gyro| level for Active/Inactive (default: 1 x channel sd)")
    p.add_argument("--big-amplitude", type=float, default=None,
                   help="swing needed for a Big oscillation (default: 2 x channel sd)")


def _add_cohort_opts(p):
    p.add_argument("--n-adhd", type=int, default=26, help="ADHD subjects (default: 26)")
    p.add_argument("--n-control", type=int, default=26, help="control subjects (default: 26)")
    p.add_argument("--profiles", type=Path, default=None,
                   help="INI file with [adhd] and [control] profiles (default: shipped calibration)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="fishscreen", description=__doc__.splitlines()[0] if __doc__ else None)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def cmd(name, help_):
        p = sub.add_parser(name, help=help_, description=help_)
        p.add_argument("--config", type=Path, default=None,
                       help="key = value file whose [run] section supplies defaults for these flags")
        return p

    p = cmd("schedule", "write the stimulus schedule for one seed as CSV")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True, help="CSV file to write")
    p.add_argument("--isi-ms", type=float, default=1500.0)
    p.add_argument("--stimulus-duration-ms", type=float, default=1500.0)
    p.add_argument("--practice-targets", type=int, default=24)

    p = cmd("simulate", "simulate a labeled cohort (sessions JSONL + IMU CSVs)")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _add_cohort_opts(p)

    p = cmd("extract", "compute in-game and movement feature tables from sessions")
    p.add_argument("--sessions", type=Path, required=True, help="sessions JSONL file")
    p.add_argument("--out", type=Path, required=True, help="output directory")
    _add_feature_opts(p)

    p = cmd("select", "run feature selection on the training half of the feature tables")
    p.add_argument("--features", type=Path, required=True, help="directory written by extract")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True, help="selection JSON to write")
    _add_pipeline_opts(p)

    p = cmd("train", "train one linear SVM per mode")
    p.add_argument("--features", type=Path, required=True, help="directory written by extract")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--selection", type=Path, default=None,
                   help="selection JSON from `select` (required unless --preset paper)")
    p.add_argument("--mode", choices=("1", "2", "3", "all"), default="all")
    p.add_argument("--out", type=Path, required=True, help="model JSON to write")
    _add_pipeline_opts(p, selection=False)

    p = cmd("evaluate", "evaluate trained models on their held-out rows")
    p.add_argument("--features", type=Path, required=True, help="directory written by extract")
    p.add_argument("--models", type=Path, required=True, help="model JSON from `train`")
    p.add_argument("--out", type=Path, required=True, help="output directory for the report")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")

    p = cmd("pipeline", "simulate, extract, select, train and evaluate from one seed")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--out", type=Path, required=True, help="output directory")
    p.add_argument("--mode", choices=("1", "2", "3", "all"), default="all")
    p.add_argument("--sessions", type=Path, default=None,
                   help="use recorded sessions instead of simulating a cohort")
    p.add_argument("--no-figures", action="store_true", help="skip PNG figures")
    _add_cohort_opts(p)
    _add_feature_opts(p)
    _add_pipeline_opts(p)

    p = cmd("report", "render a report JSON as Markdown")
    p.add_argument("--report", type=Path, required=True, help="report JSON")
    p.add_argument("--out", type=Path, default=None, help="Markdown file (default: stdout)")
    return parser


# --- helpers ---------------------------------------------------------------

def _run_config(args) -> dict:
    """Everything that determines results; output locations are excluded."""
    skip = {"out", "config", "verbose", "func"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip:
            continue
        out[k] = str(v) if isinstance(v, Path) else v
    return out


def _pipeline_config(args, modes=(1, 2, 3)) -> PipelineConfig:
    return PipelineConfig(seed=args.seed, ratio=args.ratio, preset=args.preset, C=args.C,
                          correlation_threshold=getattr(args, "correlation", 0.9),
                          min_votes=getattr(args, "min_votes", 2),
                          max_k=getattr(args, "max_k", 10),
                          scale_on_all=args.scale_on_all, modes=tuple(modes))


def _modes(arg: str) -> tuple:
    return (1, 2, 3) if arg == "all" else (int(arg),)


def _need(path: Path):
    if path is not None and not path.exists():
        raise UsageError(f"no such file or directory: {path}")


def _profiles(path):
    if path is None:
        return default_profiles()
    _need(path)
    p = load_profiles(path)
    if "adhd" not in p or "control" not in p:
        raise UsageError(f"{path}: needs [adhd] and [control] sections")
    return p["adhd"], p["control"]


def _load_valid_sessions(path: Path) -> list:
    _need(path)
    sessions = read_sessions(path)
    problems = []
    for s in sessions:
        problems += [f"{s.subject_id}: {v}" for v in validate_session(s)]
    if problems:
        raise DataError("invalid sessions:\n  " + "\n  ".join(problems[:20]))
    return sessions


def _extract(sessions, args) -> dict:
    cfg = ProposedFeatureConfig(active_threshold=args.active_threshold,
                                big_amplitude=args.big_amplitude)
    ids = tuple(s.subject_id for s in sessions)
    labels = [s.label.sign if s.label else 0 for s in sessions]
    ing, mov, flags = [], [], []
    for s in sessions:
        vec = extract_ingame_features(s)
        ing.append(vec.values)
        flags.append(sorted(vec.degenerate))
        try:
            mov.append(extract_movement_features(s.imu, cfg).values)
        except TooShort as exc:
            raise DataError(f"{s.subject_id}: {exc}") from None
    return {"ingame": FeatureTable(ids, labels, INGAME_MANIFEST, ing),
            "movement": FeatureTable(ids, labels, MOVEMENT_MANIFEST, mov),
            "flags": dict(zip(ids, flags))}


def _write_features(tables: dict, out: Path, prov: dict):
    out.mkdir(parents=True, exist_ok=True)
    write_feature_csv(tables["ingame"], out / "ingame_features.csv", prov)
    write_feature_csv(tables["movement"], out / "movement_features.csv", prov)
    write_manifest_csv([(n, "ingame") for n in INGAME_MANIFEST], out / "ingame_manifest.csv",
                       MANIFEST_VERSION, prov)
    write_manifest_csv(MOVEMENT_MANIFEST_ROWS, out / "movement_manifest.csv", MANIFEST_VERSION, prov)
    with open(out / "ingame_degenerate.csv", "w") as fh:
        fh.write("# " + json.dumps(prov, sort_keys=True, separators=(",", ":")) + "\n")
        fh.write("subject_id,flags\n")
        for sid, f in tables["flags"].items():
            fh.write(f"{sid},{';'.join(f)}\n")


def _read_features(d: Path) -> dict:
    _need(d)
    tables = {"ingame": read_feature_csv(d / "ingame_features.csv"),
              "movement": read_feature_csv(d / "movement_features.csv")}
    if (tables["ingame"].names != INGAME_MANIFEST
            or tables["movement"].names != MOVEMENT_MANIFEST):
        raise DataError("feature columns do not match the manifests")
    if any(lab == 0 for lab in tables["ingame"].labels):
        raise DataError("feature tables contain unlabeled sessions")
    return tables


def _models_doc(results: dict, config: PipelineConfig, prov: dict) -> dict:
    return {"provenance": prov, "manifest_version": MANIFEST_VERSION,
            "config": config.to_dict(),
            "modes": {str(m): dict(model_to_dict(r.model), train_ids=list(r.train_ids),
                                   test_ids=list(r.test_ids)) for m, r in results.items()}}


# --- subcommands ------------------------------------------------------------

def cmd_schedule(args):
    cfg = ProtocolConfig(seed=args.seed, isi_ms=args.isi_ms,
                         stimulus_duration_ms=args.stimulus_duration_ms,
                         practice_target_count=args.practice_targets)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    write_schedule_csv(build_schedule(cfg), args.out,
                       json.dumps(provenance("schedule", _run_config(args)), sort_keys=True))


def cmd_simulate(args):
    adhd, ctrl = _profiles(args.profiles)
    ds = make_cohort(args.n_adhd, args.n_control, adhd, ctrl, args.seed)
    args.out.mkdir(parents=True, exist_ok=True)
    write_sessions(ds.sessions, args.out / "sessions.jsonl",
                   provenance=provenance("simulate", _run_config(args)))
    log.info("wrote %d sessions to %s", len(ds), args.out)


def cmd_extract(args):
    sessions = _load_valid_sessions(args.sessions)
    tables = _extract(sessions, args)
    _write_features(tables, args.out, provenance("extract", _run_config(args)))


def cmd_select(args):
    tables = _read_features(args.features)
    config = _pipeline_config(args)
    if config.preset == "paper":
        log.info("preset 'paper' fixes the features; selection methods are not run")
    selected = select_features(tables, config)
    train_idx, test_idx = split_indices(tables["ingame"], config)
    ids = tables["ingame"].subject_ids
    doc = {"provenance": provenance("select", _run_config(args)),
           "config": config.to_dict(),
           "train_ids": [ids[i] for i in train_idx], "test_ids": [ids[i] for i in test_idx],
           "banks": {b: {"final": list(names), **(sel.to_dict() if sel else {})}
                     for b, (names, sel) in selected.items()}}
    args.out.parent.mkdir(parents=True, exist_ok=True)
    dump_json(doc, args.out)


def cmd_train(args):
    tables = _read_features(args.features)
    config = _pipeline_config(args, _modes(args.mode))
    if config.preset == "paper":
        selected = select_features(tables, config)
    else:
        if args.selection is None:
            raise UsageError("--selection is required unless --preset paper")
        _need(args.selection)
        doc = load_json(args.selection)
        selected = {b: (tuple(v["final"]), None) for b, v in doc["banks"].items()}
    results = {}
    for mode in config.modes:
        names = mode_features(selected, mode)
        model, tr, te = train_mode(tables, mode, names, config)
        ids = tables["ingame"].subject_ids
        results[mode] = ModeResult(mode, names, model, None,
                                   tuple(ids[i] for i in tr), tuple(ids[i] for i in te))
    args.out.parent.mkdir(parents=True, exist_ok=True)
    dump_json(_models_doc(results, config, provenance("train", _run_config(args))), args.out)


def cmd_evaluate(args):
    tables = _read_features(args.features)
    _need(args.models)
    doc = load_json(args.models)
    results = {}
    for m, md in doc["modes"].items():
        mode = int(m)
        model = model_from_dict(md)
        table = mode_table(tables, mode)
        rows = [table.subject_ids.index(s) for s in md["test_ids"]]
        report = evaluate_model(model, table, rows)
        results[mode] = ModeResult(mode, model.feature_names, model, report,
                                   tuple(md["train_ids"]), tuple(md["test_ids"]))
    prov = provenance("evaluate", dict(_run_config(args), trained_with=doc.get("config")))
    write_report(build_report(results, prov), args.out, figures=not args.no_figures)


def cmd_pipeline(args):
    run_cfg = _run_config(args)
    if args.sessions is not None:
        sessions = _load_valid_sessions(args.sessions)
        try:
            Dataset(tuple(sessions))
        except ValueError as exc:
            raise DataError(str(exc)) from None
    else:
        adhd, ctrl = _profiles(args.profiles)
        sessions = make_cohort(args.n_adhd, args.n_control, adhd, ctrl, args.seed).sessions
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    tables = _extract(sessions, args)
    _write_features(tables, out / "features", provenance("pipeline", run_cfg))
    config = _pipeline_config(args, _modes(args.mode))
    results = run_three_modes(tables, config)
    prov = provenance("pipeline", run_cfg)
    dump_json(_models_doc(results, config, prov), out / "models.json")
    write_report(build_report(results, prov), out, figures=not args.no_figures)
    for m, r in sorted(results.items()):
        print(f"mode {m}: accuracy={r.report.accuracy:.4f} features={len(r.feature_names)}")


def cmd_report(args):
    _need(args.report)
    md = render_markdown(load_json(args.report)) + "\n"
    if args.out is None:
        sys.stdout.write(md)
    else:
        args.out.write_text(md)


COMMANDS = {"schedule": cmd_schedule, "simulate": cmd_simulate, "extract": cmd_extract,
            "select": cmd_select, "train": cmd_train, "evaluate": cmd_evaluate,
            "pipeline": cmd_pipeline, "report": cmd_report}


def _apply_config_file(parser, argv):
    """Parse ``argv`` with defaults taken from the ``[run]`` section of --config.

    Keys use flag names (``min_votes`` or ``min-votes``); explicit flags win,
    and flags that are required on the command line may come from the file.
    """
    command = next((a for a in argv if a in COMMANDS), None)
    if command is not None:
        pre = argparse.ArgumentParser(add_help=False)
        pre.add_argument("--config", type=Path, default=None)
        known, _ = pre.parse_known_args(argv[argv.index(command) + 1:])
        if known.config is not None:
            subparser = parser._subparsers._group_actions[0].choices[command]
            _load_run_section(subparser, known.config)
    return parser.parse_args(argv)


def _load_run_section(subparser, path: Path):
    if not path.exists():
        raise UsageError(f"no such config file: {path}")
    cp = configparser.ConfigParser()
    cp.read(path)
    if not cp.has_section("run"):
        raise UsageError(f"{path}: missing [run] section")
    actions = {a.dest: a for a in subparser._actions}
    defaults = {}
    for key, raw in cp["run"].items():
        dest = key.replace("-", "_")
        action = actions.get(dest)
        if action is None or dest in ("help", "config"):
            raise UsageError(f"{path}: unknown key '{key}'")
        if isinstance(action, argparse._StoreTrueAction):
            defaults[dest] = cp["run"].getboolean(key)
        elif action.type is not None:
            try:
                defaults[dest] = action.type(raw)
            except ValueError:
                raise UsageError(f"{path}: bad value for '{key}': {raw}") from None
        else:
            defaults[dest] = raw
        if action.choices is not None and defaults[dest] not in action.choices:
            raise UsageError(f"{path}: '{key}' must be one of {sorted(action.choices)}")
        action.required = False
    subparser.set_defaults(**defaults)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = _apply_config_file(parser, argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    except UsageError as exc:
        print(f"fishscreen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"fishscreen: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, SessionFormatError, TooShort, InsufficientClass, DimensionMismatch) as exc:
        print(f"fishscreen: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except DegenerateLabels as exc:
        print(f"fishscreen: numeric error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
