import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _oracles import brute_force_auc
from speakintent.accel import WindowTensor
from speakintent.evaluation import ExperimentResult, holdout_split, roc_auc, run_experiment
from speakintent.vad import CaseLabel, CaseWindow


class TestRocAuc:
    def test_perfect_separation(self):
        assert roc_auc([0.9, 0.8, 0.2, 0.1], [1, 1, 0, 0]) == 1.0

    def test_constant_scores_are_chance(self):
        assert roc_auc([0.4] * 6, [1, 0, 1, 0, 1, 0]) == 0.5

    def test_three_of_four_concordant(self):
        assert roc_auc([0.9, 0.4, 0.6, 0.1], [1, 1, 0, 0]) == 0.75

    def test_single_class_rejected(self):
        with pytest.raises(ValueError, match="positive and one negative"):
            roc_auc([0.1, 0.2], [1, 1])

    def test_flip_labels_complements(self):
        rng = np.random.default_rng(0)
        scores = rng.normal(size=30)
        labels = rng.integers(0, 2, size=30)
        labels[0], labels[1] = 0, 1
        assert roc_auc(scores, labels) + roc_auc(scores, 1 - labels) == pytest.approx(1.0)

    @given(st.integers(0, 2 ** 31 - 1), st.booleans())
    @settings(max_examples=60)
    def test_matches_brute_force(self, seed, with_ties):
        rng = np.random.default_rng(seed)
        n = int(rng.integers(2, 60))
        labels = np.zeros(n, dtype=int)
        labels[: int(rng.integers(1, n))] = 1
        rng.shuffle(labels)
        if with_ties:
            scores = rng.integers(0, 4, size=n).astype(float)
        else:
            scores = rng.normal(size=n)
        assert roc_auc(scores, labels) == pytest.approx(brute_force_auc(scores, labels), abs=1e-12)

    @given(st.integers(0, 2 ** 31 - 1))
    @settings(max_examples=40)
    def test_invariant_under_increasing_transform(self, seed):
        rng = np.random.default_rng(seed)
        scores = rng.normal(size=40)
        labels = rng.integers(0, 2, size=40)
        labels[:2] = [0, 1]
        transformed = np.exp(3.0 * scores) + 7.0
        assert roc_auc(scores, labels) == pytest.approx(roc_auc(transformed, labels), abs=1e-12)


def _window(label, start=0.0):
    return WindowTensor(values=np.zeros((3, 4)), participant_id="p", start_s=start, end_s=start + 1, label=label)


class TestRunExperiment:
    def test_constant_scorer_gives_half(self):
        result = run_experiment(
            lambda ws: np.full(len(ws), 0.5),
            [_window(1)] * 3,
            lambda rep: [_window(0)] * 3,
            repetitions=7,
            experiment="successful",
            window_s=1.0,
        )
        assert result.auc_values.tolist() == [0.5] * 7
        assert result.mean == 0.5
        assert result.std == 0.0

    def test_requires_positives(self):
        with pytest.raises(ValueError, match="no test positives"):
            run_experiment(lambda ws: np.ones(len(ws)), [], lambda rep: [_window(0)], repetitions=1)

    def test_deterministic_given_sampler(self):
        def scorer(ws):
            return np.array([w.start_s for w in ws])

        def sampler(rep):
            rng = np.random.default_rng(rep)
            return [_window(0, start=float(rng.uniform(-2, 2))) for _ in range(4)]

        kwargs = dict(repetitions=9, experiment="all", window_s=1.0)
        a = run_experiment(scorer, [_window(1, 1.0), _window(1, 0.5)], sampler, **kwargs)
        b = run_experiment(scorer, [_window(1, 1.0), _window(1, 0.5)], sampler, **kwargs)
        np.testing.assert_array_equal(a.auc_values, b.auc_values)

    def test_from_aucs_std_convention(self):
        res = ExperimentResult.from_aucs("successful", 1.0, [0.4, 0.5, 0.6])
        assert res.std == pytest.approx(np.std([0.4, 0.5, 0.6], ddof=1))


def cw(start, end):
    return CaseWindow("p", start, end, CaseLabel.SUCCESSFUL)


class TestHoldoutSplit:
    def test_boundary_cases(self):
        windows = [cw(3599.0, 3600.0), cw(3600.0, 3601.0), cw(3599.5, 3600.5)]
        train, test = holdout_split(windows, (3600.0, 4200.0))
        assert [w.start_s for w in train] == [3599.0]
        assert [w.start_s for w in test] == [3600.0]

    def test_upper_boundary(self):
        windows = [cw(4199.0, 4200.0), cw(4200.0, 4201.0), cw(4199.5, 4200.5), cw(0.0, 1.0)]
        train, test = holdout_split(windows, (3600.0, 4200.0))
        assert [w.start_s for w in test] == [4199.0]
        assert sorted(w.start_s for w in train) == [0.0, 4200.0]

    def test_no_train_window_intersects_interval(self):
        rng = np.random.default_rng(1)
        windows = [cw(s, s + 2.0) for s in rng.uniform(0, 5000, size=500)]
        train, test = holdout_split(windows, (3600.0, 4200.0))
        for w in train:
            assert w.end_s <= 3600.0 or w.start_s >= 4200.0
        for w in test:
            assert 3600.0 <= w.start_s and w.end_s <= 4200.0

    def test_empty_partition_raises(self):
        with pytest.raises(ValueError, match="empty test partition"):
            holdout_split([cw(0.0, 1.0)], (3600.0, 4200.0))
        with pytest.raises(ValueError, match="empty train partition"):
            holdout_split([cw(3700.0, 3701.0)], (3600.0, 4200.0))

    def test_relaxed_mode(self):
        train, test = holdout_split([cw(0.0, 1.0)], (3600.0, 4200.0), require_both=False)
        assert len(train) == 1 and test == []
