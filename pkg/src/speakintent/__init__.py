"""Inferring intentions to speak from wearable accelerometer data.

The package covers the full pipeline: cleaning diarized speaking-status
tracks and extracting pre-speech windows, ingesting interval
annotations of unrealized intentions, slicing and normalizing
accelerometer windows, training a small residual 1-D convolutional
classifier from scratch, evaluating with repeated ROC-AUC under five
sampling setups, and the accompanying statistical analysis.  A
synthetic scenario generator with planted pre-speech motion serves as
the verification oracle.
"""

__version__ = "0.1.0"

from .accel import AccelSeries, AxisStats, WindowTensor, axis_stats, load_accel, normalize, slice_window
from .annotation import (
    AnnotationDocument,
    AnnotationTier,
    cue_presence,
    cue_summary,
    intention_windows,
    load_annotations,
    parse_eaf,
    parse_lines,
)
from .audio import AudioClip, amplify, high_pass, process_clip
from .errors import ConfigError, DataFormatError, NumericalError, SamplingError, SpeakIntentError
from .evaluation import ExperimentResult, holdout_split, roc_auc, run_experiment
from .intervals import IntervalSet
from .model import ResidualConvNet, TrainConfig, forward, init_model, predict, train
from .pipeline import RunConfig, RunResult, run
from .reports import SummaryTable, parse_auc_table, stats_from_summary
from .sampling import Experiment, SampleSet, build_negatives, build_positives, overlap_report
from .stats import (
    RegressionResult,
    TTestResult,
    linregress,
    linregress_summary,
    t_sf_log,
    t_test_vs_random,
    welch_t_test,
)
from .synth import Scenario, ScenarioConfig, generate_scenario, scenario_manifest, write_scenario
from .vad import (
    CaseLabel,
    CaseWindow,
    VadTrack,
    clean,
    drop_short_turns,
    extract_onsets,
    load_vad,
    merge_short_pauses,
    successful_case_windows,
)

__all__ = [name for name in dir() if not name.startswith("_")]
