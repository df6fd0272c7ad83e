"""End-to-end orchestration: load data, train per window size, evaluate
the five experiments with repeated negative resampling, run the
statistical layer, and write deterministic report files.

Training uses successful cases only (window before each speech onset vs
random non-positive windows from the non-test region); the held-out
interval supplies every evaluation positive.  The trained fold ensemble
stays fixed across repetitions unless retrain_per_rep is set.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import __version__
from .accel import AccelSeries, AxisStats, WindowError, axis_stats, load_accel, normalize, slice_window
from .annotation import AnnotationDocument, TIER_NAMES, intention_windows, load_annotations
from .errors import ConfigError, DataFormatError, SamplingError
from .evaluation import ExperimentResult, holdout_split, run_experiment
from .intervals import IntervalSet
from .model import TrainConfig, TrainResult, predict, train
from .reports import StatsReport, SummaryTable, stats_from_summary, write_auc_table, write_stats_reports
from .sampling import EXPERIMENT_ORDER, Experiment, build_negatives, build_positives, exclusion_set
from .seeding import rng_for
from .vad import CaseLabel, CaseWindow, VadTrack, clean, extract_onsets, load_vad, speaking_intervals, successful_case_windows

DEFAULT_WINDOWS = (1.0, 2.0, 3.0, 4.0)


@dataclass(frozen=True)
class RunConfig:
    data_dir: Path
    out_dir: Path
    windows: tuple[float, ...] = DEFAULT_WINDOWS
    experiments: tuple[Experiment, ...] = EXPERIMENT_ORDER
    repetitions: int = 100
    test_interval: tuple[float, float] = (3600.0, 4200.0)
    alpha: float = 0.001
    seed: int = 0
    epochs: int = 10
    folds: int = 3
    batch_size: int = 32
    channels: int = 32
    learning_rate: float = 1e-3
    pause_s: float = 1.5
    turn_s: float = 1.5
    max_gap_s: float = 0.25
    neg_ratio: float = 1.0
    exclude_speech_negatives: bool = False
    retrain_per_rep: bool = False

    def __post_init__(self):
        object.__setattr__(self, "data_dir", Path(self.data_dir))
        object.__setattr__(self, "out_dir", Path(self.out_dir))
        if not self.windows or any(w <= 0 for w in self.windows):
            raise ConfigError("windows must be positive")
        if not self.experiments:
            raise ConfigError("at least one experiment required")
        if self.repetitions < 1:
            raise ConfigError("repetitions must be >= 1")
        if not self.test_interval[0] < self.test_interval[1]:
            raise ConfigError("test interval must be non-empty")
        if self.neg_ratio <= 0:
            raise ConfigError("neg_ratio must be positive")

    def train_config(self, window_s: float) -> TrainConfig:
        return TrainConfig(
            batch_size=self.batch_size,
            folds=self.folds,
            epochs=self.epochs,
            learning_rate=self.learning_rate,
            seed=int(rng_for(self.seed, "train", window_s).integers(2 ** 62)),
            channels=self.channels,
        )


@dataclass
class Participant:
    pid: str
    vad: VadTrack            # cleaned
    accel: AccelSeries
    doc: AnnotationDocument | None
    onsets: np.ndarray
    speech: list[tuple[float, float]]
    stats: AxisStats
    train_region: IntervalSet
    test_region: IntervalSet


def load_dataset(data_dir) -> list[tuple[VadTrack, AccelSeries, AnnotationDocument | None]]:
    """Read vad/, accel/ and annotations/ subdirectories, matched by stem."""
    data_dir = Path(data_dir)
    vad_dir = data_dir / "vad"
    if not vad_dir.is_dir():
        raise DataFormatError(f"{data_dir}: missing vad/ directory")
    out = []
    for vad_path in sorted(vad_dir.glob("*.vad")):
        track = load_vad(vad_path)
        pid = track.participant_id
        accel_path = data_dir / "accel" / f"{vad_path.stem}.accel"
        if not accel_path.is_file():
            raise DataFormatError(f"{accel_path}: missing accelerometer file for participant {pid}")
        series = load_accel(accel_path)
        doc = None
        for candidate in sorted((data_dir / "annotations").glob(f"{vad_path.stem}.*")) if (data_dir / "annotations").is_dir() else []:
            doc = load_annotations(candidate)
            break
        out.append((track, series, doc))
    if not out:
        raise DataFormatError(f"{vad_dir}: no .vad files found")
    return out


def prepare_participants(config: RunConfig) -> list[Participant]:
    test_iv = IntervalSet([config.test_interval])
    participants = []
    for raw_track, series, doc in load_dataset(config.data_dir):
        track = clean(raw_track, config.pause_s, config.turn_s)
        extent = series.extent
        train_region = test_iv.complement(extent)
        lo = max(extent[0], config.test_interval[0])
        hi = min(extent[1], config.test_interval[1])
        test_region = IntervalSet([(lo, hi)] if lo < hi else [])
        participants.append(
            Participant(
                pid=track.participant_id,
                vad=track,
                accel=series,
                doc=doc,
                onsets=extract_onsets(track),
                speech=speaking_intervals(track),
                stats=axis_stats(series, exclude=test_iv),
                train_region=train_region,
                test_region=test_region,
            )
        )
    if all(len(p.test_region) == 0 for p in participants):
        raise ConfigError(
            f"test interval {config.test_interval} lies outside every participant's data extent"
        )
    return participants


def _snap_to_grid(p: Participant, start_s: float) -> float:
    """Align a window start with the sensor sample grid.

    Windows are slices of a sampled signal; an off-grid start would fill
    the tensor by resampling, which tilts its noise spectrum relative to
    on-grid windows and is detectable by the classifier.
    """
    anchor = float(p.accel.times[0])
    snapped = anchor + round((start_s - anchor) * p.accel.rate_hz) / p.accel.rate_hz
    return max(snapped, anchor)


def _tensorize(p: Participant, windows: list[CaseWindow], label: int, max_gap_s: float):
    """Slice + normalize, silently dropping windows the series cannot fill."""
    out = []
    for w in windows:
        start = _snap_to_grid(p, w.start_s)
        try:
            t = slice_window(
                p.accel, start, start + w.length_s, label=label, case_label=w.label, max_gap_s=max_gap_s
            )
        except WindowError:
            continue
        out.append(normalize(t, p.stats))
    return out


@dataclass
class CellResult:
    result: ExperimentResult
    n_positives: int


@dataclass
class RunResult:
    config: RunConfig
    cells: dict[tuple[Experiment, float], CellResult]
    fold_aucs: dict[float, tuple[float, ...]]
    table: SummaryTable
    stats: StatsReport
    report_paths: dict[str, Path] = field(default_factory=dict)


def _negative_tensors(
    p: Participant,
    n: int,
    window_s: float,
    region: IntervalSet,
    exclusions: IntervalSet,
    rng: np.random.Generator,
    max_gap_s: float,
    max_attempts: int = 10_000,
):
    """n sampled negative windows as normalized tensors.

    A placement that lands on a recording gap is rejected and redrawn,
    sharing the attempt budget with exclusion-overlap rejections.
    """
    tensors = []
    attempts = 0
    while len(tensors) < n:
        if attempts >= max_attempts:
            raise SamplingError(
                f"negative placement infeasible for {p.pid} "
                f"(achieved {len(tensors)} of {n} after {attempts} attempts)"
            )
        attempts += 1
        try:
            (w,) = build_negatives(
                1,
                window_s,
                region,
                exclusions,
                rng,
                participant_id=p.pid,
                grid_s=1.0 / p.accel.rate_hz,
                grid_anchor=float(p.accel.times[0]),
                max_attempts=max_attempts,
            )
        except SamplingError:
            raise SamplingError(
                f"negative placement infeasible for {p.pid} (achieved {len(tensors)} of {n})"
            )
        try:
            t = slice_window(p.accel, w.start_s, w.end_s, label=0, case_label=CaseLabel.NEGATIVE, max_gap_s=max_gap_s)
        except WindowError:
            continue
        tensors.append(normalize(t, p.stats))
    return tensors


def run(config: RunConfig) -> RunResult:
    participants = prepare_participants(config)
    cells: dict[tuple[Experiment, float], CellResult] = {}
    fold_aucs: dict[float, tuple[float, ...]] = {}

    for window_s in config.windows:
        per_p_successful: dict[str, list[CaseWindow]] = {}
        per_p_train_pos: dict[str, list] = {}
        per_p_test_succ: dict[str, list[CaseWindow]] = {}
        per_p_test_ann: dict[str, list[CaseWindow]] = {}

        for p in participants:
            succ = successful_case_windows(p.onsets, window_s, participant_id=p.pid, t0_s=p.vad.t0_s)
            per_p_successful[p.pid] = succ
            train_succ, test_succ = holdout_split(succ, config.test_interval, require_both=False)
            per_p_test_succ[p.pid] = test_succ
            per_p_train_pos[p.pid] = _tensorize(p, train_succ, 1, config.max_gap_s)

            ann: list[CaseWindow] = []
            if p.doc is not None:
                for label in (CaseLabel.INTS_START, CaseLabel.INTS_CONTINUE):
                    if TIER_NAMES[label] in p.doc.tiers:
                        ann.extend(intention_windows(p.doc, label, window_s))
            _, test_ann = holdout_split(ann, config.test_interval, require_both=False)
            per_p_test_ann[p.pid] = test_ann

        train_pos = [t for p in participants for t in per_p_train_pos[p.pid]]
        if not train_pos:
            raise DataFormatError(f"empty train partition at window {window_s:g} s")

        def train_ensemble(rep: int | None = None) -> TrainResult:
            stream = ("train-neg", window_s) if rep is None else ("train-neg", window_s, rep)
            train_neg = []
            for p in participants:
                n_p = int(round(config.neg_ratio * len(per_p_train_pos[p.pid])))
                if n_p == 0:
                    continue
                excl = exclusion_set(
                    Experiment.SUCCESSFUL,
                    per_p_successful[p.pid],
                    per_p_successful[p.pid],
                    speech=p.speech if config.exclude_speech_negatives else (),
                )
                rng = rng_for(config.seed, *stream, p.pid)
                train_neg.extend(
                    _negative_tensors(p, n_p, window_s, p.train_region, excl, rng, config.max_gap_s)
                )
            cfg = config.train_config(window_s)
            if rep is not None:
                cfg = replace(cfg, seed=int(rng_for(cfg.seed, "rep", rep).integers(2 ** 62)))
            return train(train_pos, train_neg, cfg)

        fixed = None
        if not config.retrain_per_rep:
            fixed = train_ensemble()
            fold_aucs[window_s] = fixed.fold_aucs

        for exp in config.experiments:
            pos_tensors = []
            per_p_excl: dict[str, IntervalSet] = {}
            per_p_count: dict[str, int] = {}
            for p in participants:
                pos_windows = build_positives(exp, per_p_test_succ[p.pid], per_p_test_ann[p.pid], p.vad)
                tensors = _tensorize(p, pos_windows, 1, config.max_gap_s)
                pos_tensors.extend(tensors)
                per_p_count[p.pid] = len(tensors)
                per_p_excl[p.pid] = exclusion_set(
                    exp,
                    pos_windows,
                    per_p_successful[p.pid],
                    speech=p.speech if config.exclude_speech_negatives else (),
                )
            if not pos_tensors:
                raise DataFormatError(
                    f"no test positives for experiment {exp.cli_name!r} at window {window_s:g} s"
                )

            def sample_negatives(rep: int):
                out = []
                for p in participants:
                    n_p = int(round(config.neg_ratio * per_p_count[p.pid]))
                    if n_p == 0:
                        continue
                    rng = rng_for(config.seed, "eval-neg", p.pid, exp.value, window_s, rep)
                    out.extend(
                        _negative_tensors(p, n_p, window_s, p.test_region, per_p_excl[p.pid], rng, config.max_gap_s)
                    )
                return out

            if config.retrain_per_rep:
                aucs = []
                for rep in range(config.repetitions):
                    ensemble = train_ensemble(rep)
                    res = run_experiment(
                        lambda ws, e=ensemble: predict(e.nets, ws),
                        pos_tensors,
                        lambda r, rep=rep: sample_negatives(rep),
                        repetitions=1,
                        experiment=exp.value,
                        window_s=window_s,
                    )
                    aucs.append(res.auc_values[0])
                result = ExperimentResult.from_aucs(exp.value, window_s, aucs)
            else:
                result = run_experiment(
                    lambda ws: predict(fixed.nets, ws),
                    pos_tensors,
                    sample_negatives,
                    repetitions=config.repetitions,
                    experiment=exp.value,
                    window_s=window_s,
                )
            cells[(exp, window_s)] = CellResult(result=result, n_positives=len(pos_tensors))

    rows = {
        exp.value: tuple(
            (cells[(exp, w)].result.mean, cells[(exp, w)].result.std) for w in config.windows
        )
        for exp in config.experiments
    }
    table = SummaryTable(windows=tuple(config.windows), rows=rows)
    stats = stats_from_summary(table, n=config.repetitions, alpha=config.alpha)
    result = RunResult(config=config, cells=cells, fold_aucs=fold_aucs, table=table, stats=stats)
    result.report_paths = write_run_reports(result)
    return result


def _hash_inputs(data_dir: Path) -> list[tuple[str, str]]:
    out = []
    for path in sorted(data_dir.rglob("*")):
        if path.is_file():
            digest = hashlib.sha256(path.read_bytes()).hexdigest()
            out.append((path.relative_to(data_dir).as_posix(), digest))
    return out


def _config_lines(config: RunConfig) -> list[str]:
    return [
        f"data_dir = {config.data_dir}",
        f"out_dir = {config.out_dir}",
        f"windows = {','.join(f'{w:g}' for w in config.windows)}",
        f"experiments = {','.join(e.cli_name for e in config.experiments)}",
        f"repetitions = {config.repetitions}",
        f"test_interval = {config.test_interval[0]:g}:{config.test_interval[1]:g}",
        f"alpha = {config.alpha:g}",
        f"seed = {config.seed}",
        f"epochs = {config.epochs}",
        f"folds = {config.folds}",
        f"batch_size = {config.batch_size}",
        f"channels = {config.channels}",
        f"learning_rate = {config.learning_rate:g}",
        f"pause_s = {config.pause_s:g}",
        f"turn_s = {config.turn_s:g}",
        f"max_gap_s = {config.max_gap_s:g}",
        f"neg_ratio = {config.neg_ratio:g}",
        f"exclude_speech_negatives = {str(config.exclude_speech_negatives).lower()}",
        f"retrain_per_rep = {str(config.retrain_per_rep).lower()}",
    ]


def write_run_reports(result: RunResult) -> dict[str, Path]:
    config = result.config
    out_dir = config.out_dir
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {"auc_table": out_dir / "auc_table.txt", "raw": out_dir / "auc_raw.csv", "manifest": out_dir / "manifest.txt"}

    write_auc_table(result.table, paths["auc_table"])
    paths.update(write_stats_reports(result.stats, out_dir))

    lines = ["experiment,window_s,repetition,auc"]
    for exp in config.experiments:
        for w in config.windows:
            for rep, auc in enumerate(result.cells[(exp, w)].result.auc_values):
                lines.append(f"{exp.value},{w:g},{rep},{auc:.12f}")
    paths["raw"].write_text("\n".join(lines) + "\n", encoding="utf-8")

    manifest = [f"speakintent_version = {__version__}"]
    manifest += _config_lines(config)
    for w in config.windows:
        if w in result.fold_aucs:
            folds = ",".join(f"{a:.6f}" for a in result.fold_aucs[w])
            manifest.append(f"fold_val_auc[{w:g}s] = {folds}")
    for exp in config.experiments:
        for w in config.windows:
            manifest.append(f"n_positives[{exp.value},{w:g}s] = {result.cells[(exp, w)].n_positives}")
    for rel, digest in _hash_inputs(config.data_dir):
        manifest.append(f"sha256[{rel}] = {digest}")
    paths["manifest"].write_text("\n".join(manifest) + "\n", encoding="utf-8")
    return paths
