import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from topofeat.classify import (EvalReport, FoldReport, LabeledDataset,
                               UndefinedMetricError, kfold_cv, load_features_csv,
                               metrics, predict, save_features_csv,
                               stratified_folds, train_svm, tune_hyperparameters)


def two_clusters(rng, n=40, spread=0.3):
    xa = rng.normal(size=(n, 2)) * spread + [5.0, 5.0]
    xb = rng.normal(size=(n, 2)) * spread - [5.0, 5.0]
    return LabeledDataset(np.vstack([xa, xb]), np.array([1] * n + [0] * n))


def xor_data(rng, reps=10):
    base = np.array([[1.0, 1.0], [-1.0, -1.0], [1.0, -1.0], [-1.0, 1.0]])
    x = np.tile(base, (reps, 1)) + rng.normal(size=(4 * reps, 2)) * 0.05
    y = np.tile([1, 1, 0, 0], reps)
    return LabeledDataset(x, y)


class TestMetrics:
    def test_worked_example(self):
        acc, se, sp = metrics(50, 20, 10, 40)
        assert acc == pytest.approx(0.75)
        assert se == pytest.approx(50 / 70)
        assert sp == pytest.approx(0.8)

    def test_perfect_classifier(self):
        assert metrics(7, 0, 0, 13) == (1.0, 1.0, 1.0)

    def test_zero_denominators(self):
        with pytest.raises(UndefinedMetricError):
            metrics(0, 5, 0, 0)   # no negatives
        with pytest.raises(UndefinedMetricError):
            metrics(0, 0, 3, 2)   # no positives
        with pytest.raises(UndefinedMetricError):
            metrics(0, 0, 0, 0)

    def test_negative_counts(self):
        with pytest.raises(ValueError):
            metrics(-1, 0, 0, 5)

    @given(st.tuples(st.integers(1, 500), st.integers(0, 500),
                     st.integers(0, 500), st.integers(1, 500)))
    def test_prevalence_identity(self, counts):
        tp, fn, fp, tn = counts
        if tp + fn == 0 or fp + tn == 0:
            return
        acc, se, sp = metrics(tp, fn, fp, tn)
        prev = (tp + fn) / (tp + fn + fp + tn)
        assert acc == pytest.approx(se * prev + sp * (1 - prev))
        assert min(se, sp) - 1e-12 <= acc <= max(se, sp) + 1e-12


class TestTrainSvm:
    def test_separable_linear(self, rng):
        data = two_clusters(rng)
        model = train_svm(data, kernel="linear", C=1.0)
        assert np.mean(predict(model, data.features) == data.labels) == 1.0

    def test_xor_linear_fails_rbf_succeeds(self, rng):
        data = xor_data(rng)
        linear = train_svm(data, kernel="linear", C=1.0)
        assert np.mean(predict(linear, data.features) == data.labels) <= 0.75
        rbf = train_svm(data, kernel="rbf", C=10.0, gamma=1.0)
        assert np.mean(predict(rbf, data.features) == data.labels) == 1.0

    def test_duplicated_points_predict_identically(self, rng):
        data = two_clusters(rng, n=25)
        doubled = LabeledDataset(np.vstack([data.features, data.features]),
                                 np.concatenate([data.labels, data.labels]))
        model = train_svm(doubled, kernel="rbf", seed=2)
        preds = predict(model, doubled.features)
        assert np.array_equal(preds[:50], preds[50:])

    def test_single_class_rejected(self, rng):
        with pytest.raises(ValueError):
            train_svm(LabeledDataset(rng.normal(size=(10, 2)), np.ones(10, dtype=int)))

    def test_non_finite_rejected(self):
        bad = np.array([[0.0, np.nan], [1.0, 2.0]])
        with pytest.raises(ValueError):
            LabeledDataset(bad, np.array([0, 1]))

    def test_rescaling_invariance(self, rng):
        data = two_clusters(rng)
        scale = np.array([3.7, 0.04])
        m1 = train_svm(data, kernel="rbf", seed=5)
        m2 = train_svm(LabeledDataset(data.features * scale, data.labels), kernel="rbf", seed=5)
        assert np.array_equal(predict(m1, data.features), predict(m2, data.features * scale))


class TestPredict:
    def test_training_labels_reproduced(self, rng):
        data = two_clusters(rng)
        model = train_svm(data, kernel="rbf")
        assert np.array_equal(predict(model, data.features), data.labels)

    def test_empty_matrix(self, rng):
        model = train_svm(two_clusters(rng), kernel="linear")
        assert predict(model, np.empty((0, 2))).shape == (0,)

    def test_dimension_mismatch(self, rng):
        model = train_svm(two_clusters(rng), kernel="linear")
        with pytest.raises(ValueError, match="dimension"):
            model.decision_function(rng.normal(size=(3, 5)))


class TestStratifiedFolds:
    def test_each_fold_has_both_classes(self, rng):
        labels = np.array([1] * 30 + [0] * 50)
        folds = stratified_folds(labels, 10, seed=1)
        assert sorted(np.concatenate(folds).tolist()) == list(range(80))
        for f in folds:
            assert set(labels[f]) == {0, 1}

    def test_class_too_small(self):
        labels = np.array([1] * 3 + [0] * 50)
        with pytest.raises(ValueError, match="class"):
            stratified_folds(labels, 10, seed=0)


class TestKfoldCv:
    def test_separable_perfect(self, rng):
        report = kfold_cv(two_clusters(rng), k=10, seed=1)
        assert (report.acc, report.se, report.sp) == (1.0, 1.0, 1.0)
        assert len(report.per_fold) == 10
        assert report.tp + report.fn + report.fp + report.tn == 80

    def test_permuted_labels_near_chance(self, rng):
        x = rng.normal(size=(200, 8))
        y = rng.integers(0, 2, size=200)
        report = kfold_cv(LabeledDataset(x, y), k=10, seed=3)
        assert 0.35 <= report.acc <= 0.65

    def test_bit_reproducible(self, rng):
        data = two_clusters(rng, n=20)
        r1 = kfold_cv(data, k=5, seed=9)
        r2 = kfold_cv(data, k=5, seed=9)
        assert r1.to_json() == r2.to_json()

    def test_fold_means_available(self, rng):
        report = kfold_cv(two_clusters(rng, n=20), k=5, seed=0)
        acc, se, sp = report.fold_means()
        assert acc == se == sp == 1.0


class TestEvalReport:
    def test_paper_row_roundtrip(self):
        row = EvalReport(acc=0.8560, se=0.8361, sp=0.8833)
        parsed = EvalReport.from_json(row.to_json())
        assert (parsed.acc, parsed.se, parsed.sp) == (0.8560, 0.8361, 0.8833)
        assert parsed.tp is None

    def test_counts_roundtrip(self, tmp_path):
        report = EvalReport.from_counts(5, 1, 2, 8, [FoldReport(5, 1, 2, 8)])
        report.save(tmp_path / "r.json")
        loaded = EvalReport.load(tmp_path / "r.json")
        assert loaded.acc == report.acc
        assert loaded.per_fold[0].tp == 5

    def test_from_counts_consistency(self):
        report = EvalReport.from_counts(50, 20, 10, 40)
        assert report.acc == pytest.approx(0.75)
        assert report.se == pytest.approx(50 / 70, abs=1e-4)
        assert report.sp == pytest.approx(0.8)


class TestFeaturesCsv:
    def test_roundtrip(self, tmp_path, rng):
        feats = rng.normal(size=(6, 4))
        labels = np.array([0, 1, 0, 1, 1, 0])
        ids = [f"s{i}" for i in range(6)]
        save_features_csv(tmp_path / "f.csv", ids, feats, labels)
        data = load_features_csv(tmp_path / "f.csv")
        assert np.allclose(data.features, feats)
        assert np.array_equal(data.labels, labels)
        assert data.subject_ids == ids


class TestGridSearch:
    def test_returns_grid_member(self, rng):
        data = two_clusters(rng, n=15)
        c, gamma = tune_hyperparameters(data, seed=0)
        assert c in (0.1, 1.0, 10.0)
        assert gamma in (0.1 / 2, 1.0 / 2, 10.0 / 2)
