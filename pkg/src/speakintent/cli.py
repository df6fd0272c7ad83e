"""Command line interface.

Subcommands: run, stats-from-table, synth, filter-audio,
inspect-samples, preprocess-vad, parse-eaf.  ``run`` accepts a flat
``key = value`` config file; any key can be overridden by the flag of
the same name.  Exit codes: 0 ok, 2 config error, 3 data error,
4 infeasible sampling, 5 numerical failure.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import fields
from pathlib import Path

from .annotation import cue_summary, load_annotations, write_lines
from .audio import process_clip
from .errors import ConfigError, DataFormatError, NumericalError, SamplingError, SpeakIntentError
from .pipeline import RunConfig, prepare_participants, run
from .reports import parse_auc_table, stats_from_summary, write_stats_reports
from .sampling import EXPERIMENT_ORDER, Experiment, build_positives, exclusion_set, overlap_report, write_manifest
from .seeding import rng_for
from .synth import ScenarioConfig, generate_scenario, scenario_manifest, write_scenario
from .vad import clean, extract_onsets, load_vad, write_vad

EXIT_CODES = {ConfigError: 2, DataFormatError: 3, SamplingError: 4, NumericalError: 5}


def _parse_windows(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(tok) for tok in text.split(",") if tok.strip())
    except ValueError:
        raise ConfigError(f"bad windows list {text!r}")


def _parse_experiments(text: str) -> tuple[Experiment, ...]:
    try:
        return tuple(Experiment.from_name(tok) for tok in text.split(",") if tok.strip())
    except ValueError as exc:
        raise ConfigError(str(exc))


def _parse_interval(text: str) -> tuple[float, float]:
    try:
        lo, hi = text.split(":")
        return (float(lo), float(hi))
    except ValueError:
        raise ConfigError(f"bad interval {text!r}, expected LO:HI")


def _read_config_file(path: Path) -> dict[str, str]:
    if not path.is_file():
        raise ConfigError(f"config file {path} not found")
    out = {}
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = text.split("=", 1)
        out[key.strip()] = value.strip()
    return out


_RUN_FLAGS: dict[str, tuple] = {
    # key: (argparse kwargs, parser)
    "data_dir": ({"type": str}, Path),
    "out_dir": ({"type": str}, Path),
    "windows": ({"type": str, "help": "comma list, e.g. 1,2,3,4"}, _parse_windows),
    "experiments": ({"type": str, "help": "comma list of experiment names"}, _parse_experiments),
    "repetitions": ({"type": int}, int),
    "test_interval": ({"type": str, "help": "LO:HI seconds"}, _parse_interval),
    "alpha": ({"type": float}, float),
    "seed": ({"type": int}, int),
    "epochs": ({"type": int}, int),
    "folds": ({"type": int}, int),
    "batch_size": ({"type": int}, int),
    "channels": ({"type": int}, int),
    "learning_rate": ({"type": float}, float),
    "pause_s": ({"type": float}, float),
    "turn_s": ({"type": float}, float),
    "max_gap_s": ({"type": float}, float),
    "neg_ratio": ({"type": float}, float),
}
_RUN_BOOL_FLAGS = ("exclude_speech_negatives", "retrain_per_rep")


def _add_run_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", type=str, default=None, help="flat key = value config file")
    parser.add_argument("--reps", dest="repetitions", type=int, default=None, help=argparse.SUPPRESS)
    for key, (kwargs, _) in _RUN_FLAGS.items():
        if key == "repetitions":
            continue
        parser.add_argument(f"--{key.replace('_', '-')}", default=None, **kwargs)
    parser.add_argument("--repetitions", type=int, default=None)
    for key in _RUN_BOOL_FLAGS:
        parser.add_argument(f"--{key.replace('_', '-')}", action="store_true", default=None)


def _build_run_config(args: argparse.Namespace) -> RunConfig:
    values: dict[str, object] = {}
    if args.config:
        raw = _read_config_file(Path(args.config))
        for key, text in raw.items():
            if key in _RUN_FLAGS:
                try:
                    values[key] = _RUN_FLAGS[key][1](text)
                except ConfigError:
                    raise
                except ValueError:
                    raise ConfigError(f"config key {key}: bad value {text!r}")
            elif key in _RUN_BOOL_FLAGS:
                values[key] = text.lower() in ("1", "true", "yes", "on")
            else:
                raise ConfigError(f"unknown config key {key!r}")
    for key, (_, parse) in _RUN_FLAGS.items():
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = parse(flag) if isinstance(flag, str) else flag
    for key in _RUN_BOOL_FLAGS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    for required in ("data_dir", "out_dir"):
        if required not in values:
            raise ConfigError(f"{required} is required (flag --{required.replace('_', '-')} or config file)")
    known = {f.name for f in fields(RunConfig)}
    assert set(values) <= known
    return RunConfig(**values)  # type: ignore[arg-type]


def _cmd_run(args) -> int:
    config = _build_run_config(args)
    result = run(config)
    for name, path in sorted(result.report_paths.items()):
        print(f"{name}: {path}")
    for exp in config.experiments:
        cells = " ".join(
            f"{w:g}s={result.cells[(exp, w)].result.mean:.4f}" for w in config.windows
        )
        print(f"auc[{exp.cli_name}] {cells}")
    return 0


def _cmd_stats_from_table(args) -> int:
    table = parse_auc_table(Path(args.table))
    report = stats_from_summary(table, n=args.reps, alpha=args.alpha)
    paths = write_stats_reports(report, Path(args.out))
    for name, path in sorted(paths.items()):
        print(f"{name}: {path}")
    for name, reg in report.regressions.items():
        print(f"slope[{name}] = {reg.slope:+.4f} (r2 {reg.r_squared:.4f})")
    return 0


def _cmd_synth(args) -> int:
    kwargs = {
        "participants": args.participants,
        "duration_s": args.duration,
        "vad_rate_hz": args.vad_rate,
        "accel_rate_hz": args.accel_rate,
        "turn_rate_per_min": args.turn_rate,
        "mean_turn_s": args.mean_turn,
        "effect_strength": args.effect_strength,
        "effect_lead_s": args.effect_lead,
        "unsuccessful_rate_per_min": args.unsuccessful_rate,
        "seed": args.seed,
    }
    cfg = ScenarioConfig(**kwargs)
    scenario = generate_scenario(cfg)
    write_scenario(scenario, Path(args.out))
    manifest = scenario_manifest(cfg)
    totals = manifest["totals"]
    print(f"wrote scenario to {args.out}")
    print(
        f"participants={cfg.participants} onsets={totals['onsets']} "
        f"ints_start={totals['ints_start']} ints_continue={totals['ints_continue']}"
    )
    return 0


def _cmd_filter_audio(args) -> int:
    summary = process_clip(Path(args.infile), Path(args.outfile), args.cutoff_hz, args.gain)
    for key in sorted(summary):
        value = summary[key]
        text = f"{value:.6g}" if isinstance(value, float) else str(value)
        print(f"{key}={text}")
    return 0


def _cmd_inspect_samples(args) -> int:
    config = RunConfig(
        data_dir=Path(args.data_dir),
        out_dir=Path(args.out),
        windows=_parse_windows(args.windows),
        experiments=_parse_experiments(args.experiments),
        seed=args.seed,
        test_interval=_parse_interval(args.test_interval),
    )
    participants = prepare_participants(config)
    config.out_dir.mkdir(parents=True, exist_ok=True)
    from .annotation import TIER_NAMES, intention_windows
    from .evaluation import holdout_split
    from .sampling import build_negatives
    from .vad import CaseLabel, successful_case_windows

    rows = []
    for window_s in config.windows:
        for exp in config.experiments:
            for p in participants:
                succ = successful_case_windows(p.onsets, window_s, participant_id=p.pid, t0_s=p.vad.t0_s)
                _, test_succ = holdout_split(succ, config.test_interval, require_both=False)
                ann = []
                if p.doc is not None:
                    for label in (CaseLabel.INTS_START, CaseLabel.INTS_CONTINUE):
                        if TIER_NAMES[label] in p.doc.tiers:
                            ann.extend(intention_windows(p.doc, label, window_s))
                _, test_ann = holdout_split(ann, config.test_interval, require_both=False)
                positives = build_positives(exp, test_succ, test_ann, p.vad)
                if not positives or len(p.test_region) == 0:
                    continue
                excl = exclusion_set(exp, positives, succ)
                rng = rng_for(config.seed, "inspect", p.pid, exp.value, window_s)
                negatives = build_negatives(
                    len(positives),
                    window_s,
                    p.test_region,
                    excl,
                    rng,
                    participant_id=p.pid,
                    grid_s=1.0 / p.accel.rate_hz,
                    grid_anchor=float(p.accel.times[0]),
                )
                rows.extend((w, exp) for w in positives)
                rows.extend((w, exp) for w in negatives)
                speech_frac, silence_frac = overlap_report(negatives, p.vad)
                print(
                    f"overlap participant={p.pid} experiment={exp.cli_name} window={window_s:g}s "
                    f"speech={speech_frac:.4f} silence={silence_frac:.4f}"
                )
    manifest_path = config.out_dir / "samples_manifest.txt"
    write_manifest(rows, manifest_path)
    print(f"manifest: {manifest_path}")
    return 0


def _cmd_preprocess_vad(args) -> int:
    track = load_vad(Path(args.infile))
    cleaned = clean(track, args.pause_s, args.turn_s)
    write_vad(cleaned, Path(args.outfile))
    onsets = extract_onsets(cleaned)
    print(f"participant={cleaned.participant_id} frames={len(cleaned.frames)} onsets={len(onsets)}")
    for t in onsets:
        print(f"onset={t:g}")
    return 0


def _cmd_parse_eaf(args) -> int:
    doc = load_annotations(Path(args.infile))
    print(f"participant={doc.participant_id}")
    for name in sorted(doc.tiers):
        print(f"tier={name} annotations={len(doc.tiers[name])}")
    for cue, count in sorted(cue_summary(doc).items()):
        print(f"cue={cue!r} count={count}")
    if args.outfile:
        write_lines(doc, Path(args.outfile))
        print(f"wrote line format: {args.outfile}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="speakintent", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="full pipeline: train, evaluate, statistics, reports")
    _add_run_flags(p_run)
    p_run.set_defaults(func=_cmd_run)

    p_stats = sub.add_parser("stats-from-table", help="recompute the statistical layer from a summary table")
    p_stats.add_argument("--table", required=True)
    p_stats.add_argument("--out", required=True)
    p_stats.add_argument("--reps", type=int, default=100)
    p_stats.add_argument("--alpha", type=float, default=0.001)
    p_stats.set_defaults(func=_cmd_stats_from_table)

    p_synth = sub.add_parser("synth", help="generate a synthetic scenario")
    p_synth.add_argument("--out", required=True)
    p_synth.add_argument("--participants", type=int, default=13)
    p_synth.add_argument("--duration", type=float, default=4200.0)
    p_synth.add_argument("--vad-rate", type=float, default=1.0)
    p_synth.add_argument("--accel-rate", type=float, default=20.0)
    p_synth.add_argument("--turn-rate", type=float, default=2.0)
    p_synth.add_argument("--mean-turn", type=float, default=8.0)
    p_synth.add_argument("--effect-strength", type=float, default=5.0)
    p_synth.add_argument("--effect-lead", type=float, default=1.0)
    p_synth.add_argument("--unsuccessful-rate", type=float, default=0.3)
    p_synth.add_argument("--seed", type=int, default=0)
    p_synth.set_defaults(func=_cmd_synth)

    p_audio = sub.add_parser("filter-audio", help="high-pass filter and amplify a WAV clip")
    p_audio.add_argument("--in", dest="infile", required=True)
    p_audio.add_argument("--out", dest="outfile", required=True)
    p_audio.add_argument("--cutoff-hz", type=float, default=1500.0)
    p_audio.add_argument("--gain", type=float, default=20.0)
    p_audio.set_defaults(func=_cmd_filter_audio)

    p_inspect = sub.add_parser("inspect-samples", help="emit a sample manifest and speech-overlap report")
    p_inspect.add_argument("--data-dir", required=True)
    p_inspect.add_argument("--out", required=True)
    p_inspect.add_argument("--windows", default="1,2,3,4")
    p_inspect.add_argument("--experiments", default=",".join(e.cli_name for e in EXPERIMENT_ORDER))
    p_inspect.add_argument("--test-interval", default="3600:4200")
    p_inspect.add_argument("--seed", type=int, default=0)
    p_inspect.set_defaults(func=_cmd_inspect_samples)

    p_prep = sub.add_parser("preprocess-vad", help="clean a VAD track and list onsets")
    p_prep.add_argument("--in", dest="infile", required=True)
    p_prep.add_argument("--out", dest="outfile", required=True)
    p_prep.add_argument("--pause-s", type=float, default=1.5)
    p_prep.add_argument("--turn-s", type=float, default=1.5)
    p_prep.set_defaults(func=_cmd_preprocess_vad)

    p_eaf = sub.add_parser("parse-eaf", help="parse an annotation file and summarize its tiers")
    p_eaf.add_argument("--in", dest="infile", required=True)
    p_eaf.add_argument("--out", dest="outfile", default=None, help="optional line-format dump")
    p_eaf.set_defaults(func=_cmd_parse_eaf)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpeakIntentError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for err_type, code in EXIT_CODES.items():
            if isinstance(exc, err_type):
                return code
        return 3
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
