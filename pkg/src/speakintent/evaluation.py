"""ROC-AUC and the repeated negative-resampling evaluation protocol."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .accel import WindowTensor
from .vad import CaseWindow

DEFAULT_TEST_INTERVAL = (3600.0, 4200.0)
DEFAULT_REPETITIONS = 100


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties sharing their average rank."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(len(values), dtype=float)
    sorted_vals = values[order]
    edges = np.concatenate(([0], np.flatnonzero(np.diff(sorted_vals) != 0) + 1, [len(values)]))
    for i in range(len(edges) - 1):
        lo, hi = edges[i], edges[i + 1]
        ranks[order[lo:hi]] = 0.5 * (lo + hi + 1)
    return ranks


def roc_auc(scores, labels) -> float:
    """Area under the ROC curve via midranks.

    Equals the tie-adjusted concordance probability
    (#{pos > neg} + 0.5 * #{pos == neg}) / (#pos * #neg), so a constant
    scorer gets exactly 0.5.
    """
    scores = np.asarray(scores, dtype=float)
    labels = np.asarray(labels)
    if scores.shape != labels.shape or scores.ndim != 1:
        raise ValueError("scores and labels must be equal-length 1-d sequences")
    pos = labels == 1
    n_pos = int(pos.sum())
    n_neg = len(labels) - n_pos
    if n_pos == 0 or n_neg == 0:
        raise ValueError("roc_auc needs at least one positive and one negative label")
    ranks = _midranks(scores)
    return float((ranks[pos].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


@dataclass(frozen=True)
class ExperimentResult:
    """Per-repetition AUCs for one (experiment, window size) cell."""

    experiment: str
    window_s: float
    auc_values: np.ndarray = field(repr=False)
    mean: float = 0.0
    std: float = 0.0

    @classmethod
    def from_aucs(cls, experiment: str, window_s: float, aucs) -> "ExperimentResult":
        values = np.asarray(aucs, dtype=float)
        mean = float(values.mean())
        std = float(values.std(ddof=1)) if len(values) > 1 else 0.0
        return cls(experiment=experiment, window_s=window_s, auc_values=values, mean=mean, std=std)


def run_experiment(
    score_windows: Callable[[Sequence[WindowTensor]], np.ndarray],
    positives: Sequence[WindowTensor],
    sample_negatives: Callable[[int], Sequence[WindowTensor]],
    repetitions: int = DEFAULT_REPETITIONS,
    *,
    experiment: str = "",
    window_s: float = 0.0,
) -> ExperimentResult:
    """Score fixed positives against freshly resampled negatives.

    Per repetition r, ``sample_negatives(r)`` supplies a new negative set
    (its determinism is the caller's seed discipline), every window is
    scored with the fixed model, and one AUC is recorded.  The positive
    windows never change, so they are scored once.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    if len(positives) == 0:
        raise ValueError(f"no test positives for experiment {experiment!r}")
    pos_scores = np.asarray(score_windows(positives), dtype=float)
    aucs = np.empty(repetitions)
    for rep in range(repetitions):
        negatives = sample_negatives(rep)
        if len(negatives) == 0:
            raise ValueError(f"no negatives sampled in repetition {rep}")
        neg_scores = np.asarray(score_windows(negatives), dtype=float)
        scores = np.concatenate([pos_scores, neg_scores])
        labels = np.concatenate([np.ones(len(pos_scores), dtype=int), np.zeros(len(neg_scores), dtype=int)])
        aucs[rep] = roc_auc(scores, labels)
    return ExperimentResult.from_aucs(experiment, window_s, aucs)


def holdout_split(
    windows: Sequence[CaseWindow],
    test_interval: tuple[float, float] = DEFAULT_TEST_INTERVAL,
    *,
    require_both: bool = True,
) -> tuple[list[CaseWindow], list[CaseWindow]]:
    """Partition windows into (train, test) around a half-open interval.

    Train windows never intersect the interval, test windows lie fully
    inside it, and windows straddling a boundary are excluded from both
    sides so nothing leaks.  With require_both (the default) an empty
    partition raises; pass False when splitting one participant's share
    of a pooled dataset.
    """
    lo, hi = float(test_interval[0]), float(test_interval[1])
    if not lo < hi:
        raise ValueError("test interval must be non-empty")
    train, test = [], []
    for w in windows:
        if w.end_s <= lo or w.start_s >= hi:
            train.append(w)
        elif lo <= w.start_s and w.end_s <= hi:
            test.append(w)
    if require_both and (not train or not test):
        side = "train" if not train else "test"
        raise ValueError(f"empty {side} partition for test interval [{lo}, {hi})")
    return train, test
