"""Per-kind training contracts, determinism, and model-file round-trips."""

import numpy as np
import pytest

from limbsense.errors import (
    DimensionMismatchError,
    NonFiniteFeatureError,
    SingleClassTrainingError,
)
from limbsense.models import (
    MODEL_KINDS,
    ModelSpec,
    load_model,
    model_to_json,
    save_model,
    score,
    standardize_apply,
    standardize_fit,
    train_model,
)
from limbsense.models.boosting import GradientBoostingModel
from limbsense.models.knn import KnnModel
from limbsense.models.logistic import LogisticModel, loss_and_gradient
from limbsense.models.naive_bayes import NaiveBayesModel
from limbsense.metrics import roc_curve


def separable_data(n_per_class: int = 50, d: int = 4, seed: int = 0, gap: float = 6.0):
    rng = np.random.default_rng(seed)
    X0 = rng.normal(0.0, 1.0, (n_per_class, d))
    X1 = rng.normal(gap, 1.0, (n_per_class, d))
    X = np.vstack([X0, X1])
    y = np.concatenate([np.zeros(n_per_class), np.ones(n_per_class)]).astype(np.int64)
    return X, y


def overlapping_data(n: int = 120, d: int = 5, seed: int = 1):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, d))
    y = (X[:, 0] + 0.8 * rng.normal(size=n) > 0).astype(np.int64)
    if y.min() == y.max():
        y[0] = 1 - y[0]
    return X, y


class TestStandardizer:
    def test_two_point_column(self):
        std = standardize_fit(np.array([[1.0], [3.0]]))
        assert std.mean[0] == 2.0
        assert std.sd[0] == 1.0
        assert np.array_equal(std.apply(np.array([[1.0], [3.0]])), [[-1.0], [1.0]])

    def test_constant_column_maps_to_zero(self):
        std = standardize_fit(np.array([[5.0, 1.0], [5.0, 3.0]]))
        out = std.apply(np.array([[5.0, 2.0]]))
        assert out[0, 0] == 0.0
        assert std.sd[0] == 1.0

    def test_training_statistics_used_for_unseen_rows(self):
        train = np.array([[0.0], [2.0]])  # mean 1, sd 1
        std = standardize_fit(train)
        assert standardize_apply(std, np.array([[11.0]]))[0, 0] == 10.0

    def test_transformed_train_moments(self):
        rng = np.random.default_rng(2)
        X = rng.normal(5.0, 3.0, (200, 6))
        out = standardize_fit(X).apply(X)
        assert np.max(np.abs(out.mean(axis=0))) < 1e-9
        assert np.max(np.abs(out.var(axis=0) - 1.0)) < 1e-9


class TestLogisticRegression:
    def test_separable_training_auc(self):
        rng = np.random.default_rng(3)
        X = np.concatenate([-1.0 - rng.random(50), 1.0 + rng.random(50)])[:, None]
        y = np.concatenate([np.zeros(50), np.ones(50)]).astype(np.int64)
        model = train_model(ModelSpec("logistic_regression"), X, y, seed=0)
        assert roc_curve(model.score_rows(X), y).auc == 1.0

    def test_convergence_flagged(self):
        X, y = overlapping_data()
        model = train_model(
            ModelSpec("logistic_regression", {"reg": 0.1}), X, y, seed=0
        )
        assert model.model.converged
        assert model.model.grad_max_norm < 1e-6

    def test_zero_weights_score_half(self):
        core = LogisticModel(
            w=np.zeros(3), b=0.0, reg=0.1, converged=True,
            n_iterations=0, grad_max_norm=0.0,
        )
        assert np.all(core.raw_score(np.random.default_rng(0).normal(size=(5, 3))) == 0.5)

    def test_monotone_in_1d_feature(self):
        X, y = overlapping_data(seed=4)
        X = X[:, :1]
        y = (X[:, 0] > 0).astype(np.int64)
        model = train_model(ModelSpec("logistic_regression"), X, y, seed=0)
        grid = np.linspace(-3, 3, 50)[:, None]
        assert np.all(np.diff(model.score_rows(grid)) > 0)

    def test_gradient_matches_finite_differences(self):
        rng = np.random.default_rng(5)
        X, y = overlapping_data(seed=6)
        reg = 0.3
        for _ in range(20):
            w = rng.normal(size=X.shape[1])
            b = float(rng.normal())
            _, grad_w, grad_b = loss_and_gradient(w, b, X, y.astype(float), reg)
            h = 1e-6
            for j in range(len(w)):
                e = np.zeros_like(w)
                e[j] = h
                up, *_ = loss_and_gradient(w + e, b, X, y.astype(float), reg)
                dn, *_ = loss_and_gradient(w - e, b, X, y.astype(float), reg)
                fd = (up - dn) / (2 * h)
                assert grad_w[j] == pytest.approx(fd, rel=1e-5, abs=1e-9)
            up, *_ = loss_and_gradient(w, b + h, X, y.astype(float), reg)
            dn, *_ = loss_and_gradient(w, b - h, X, y.astype(float), reg)
            assert grad_b == pytest.approx((up - dn) / (2 * h), rel=1e-5, abs=1e-9)


class TestNaiveBayes:
    def test_closed_form_midpoint(self):
        # Class 0 ~ N(0,1) from {-1,1}; class 1 ~ N(3,1) from {2,4}.
        X = np.array([[-1.0], [1.0], [2.0], [4.0]])
        y = np.array([0, 0, 1, 1])
        core = NaiveBayesModel.fit(X, y, seed=0)
        assert core.raw_score(np.array([[1.5]]))[0] == pytest.approx(0.5, abs=1e-6)

    def test_prior_shifts_posterior(self):
        X = np.array([[-1.0], [1.0], [0.5], [2.0], [4.0], [3.5]])
        y = np.array([0, 0, 0, 1, 1, 1])
        balanced = NaiveBayesModel.fit(X, y, seed=0)
        # Duplicating class-0 rows doubles its prior, leaving both Gaussians
        # untouched, so the severe posterior must drop everywhere.
        skewed = NaiveBayesModel.fit(
            np.vstack([X, X[y == 0]]), np.append(y, y[y == 0]), seed=0
        )
        x = np.array([[1.75]])
        assert skewed.raw_score(x)[0] < balanced.raw_score(x)[0]


class TestKnn:
    def test_self_nearest_with_k1(self):
        X, y = overlapping_data(seed=7)
        model = train_model(ModelSpec("knn", {"k": 1}), X, y, seed=0)
        assert np.array_equal(model.score_rows(X), y.astype(float))

    def test_distance_ties_break_by_row_index(self):
        X = np.array([[0.0], [2.0], [-2.0], [2.0]])
        y = np.array([0, 1, 0, 1])
        core = KnnModel.fit(X, y, seed=0, k=2)
        # Query 0: ties between rows 1 and 2 at distance 2; row 1 wins a slot,
        # row 0 (distance 0) the other.
        assert core.raw_score(np.array([[0.0]]))[0] == pytest.approx(0.5)

    def test_k_equal_n_scores_base_rate(self):
        X, y = overlapping_data(seed=8)
        core = KnnModel.fit(X, y, seed=0, k=len(X))
        scores = core.raw_score(X[:10])
        assert np.all(scores == y.mean())


class TestRandomForest:
    def test_single_unbootstrapped_tree_memorizes(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(200, 8))
        y = rng.integers(0, 2, 200)
        y[0], y[1] = 0, 1
        spec = ModelSpec(
            "random_forest", {"n_trees": 1, "max_depth": None, "bootstrap": False}
        )
        model = train_model(spec, X, y, seed=0)
        assert np.array_equal(model.score_rows(X), y.astype(float))

    def test_memorizes_even_with_sparse_informative_feature(self):
        # Only one feature varies; sampled subsets must widen when stuck.
        rng = np.random.default_rng(10)
        X = np.zeros((40, 8))
        X[:, 5] = rng.permutation(40)
        y = (X[:, 5] % 3 == 0).astype(np.int64)
        spec = ModelSpec(
            "random_forest", {"n_trees": 1, "max_depth": None, "bootstrap": False}
        )
        model = train_model(spec, X, y, seed=0)
        assert np.array_equal(model.score_rows(X), y.astype(float))

    def test_depth_cap_respected(self):
        X, y = overlapping_data(seed=11)
        model = train_model(
            ModelSpec("random_forest", {"n_trees": 5, "max_depth": 2}), X, y, seed=0
        )

        def max_depth(nodes, slot=0):
            node = nodes[slot]
            if "value" in node:
                return 0
            return 1 + max(
                max_depth(nodes, node["left"]), max_depth(nodes, node["right"])
            )

        assert all(max_depth(t) <= 2 for t in model.model.trees)

    def test_bootstrap_depends_only_on_seed_and_n(self):
        # With max_depth=0 every tree is its bootstrap sample's base rate, so
        # feature values must not influence the draw: same labels, different
        # features, same (seed, n) -> identical leaf values.
        X1, y1 = overlapping_data(seed=12)
        X2 = np.random.default_rng(13).normal(size=X1.shape)
        spec = ModelSpec("random_forest", {"n_trees": 7, "max_depth": 0})
        a = train_model(spec, X1, y1, seed=42)
        b = train_model(spec, X2, y1, seed=42)
        leaves_a = [tree[0]["value"] for tree in a.model.trees]
        leaves_b = [tree[0]["value"] for tree in b.model.trees]
        assert leaves_a == leaves_b


class TestGradientBoosting:
    def test_loss_non_increasing(self):
        for seed in range(5):
            X, y = overlapping_data(seed=seed)
            for depth in (1, 2):
                core = GradientBoostingModel.fit(
                    X, y, seed=0, n_rounds=80, learning_rate=0.1, depth=depth
                )
                losses = np.array(core.train_log_loss)
                assert np.all(np.diff(losses) <= 1e-12)

    def test_starts_at_base_rate_log_odds(self):
        X, y = overlapping_data(seed=14)
        core = GradientBoostingModel.fit(X, y, seed=0, n_rounds=1)
        p = y.mean()
        assert core.base_log_odds == pytest.approx(np.log(p / (1 - p)))

    def test_improves_over_base(self):
        X, y = overlapping_data(seed=15)
        core = GradientBoostingModel.fit(X, y, seed=0, n_rounds=50)
        assert core.train_log_loss[-1] < core.train_log_loss[0]


class TestLinearSvm:
    def test_positive_side_scores_positive(self):
        X, y = separable_data(seed=16)
        model = train_model(ModelSpec("linear_svm", {"reg": 0.1}), X, y, seed=0)
        scores = model.score_rows(X)
        assert np.all(scores[y == 1] > 0)
        assert np.all(scores[y == 0] < 0)

    def test_separable_auc(self):
        X, y = separable_data(seed=17)
        model = train_model(ModelSpec("linear_svm"), X, y, seed=0)
        assert roc_curve(model.score_rows(X), y).auc == 1.0


class TestTrainModelContracts:
    def test_single_class_raises_except_knn(self):
        X = np.random.default_rng(18).normal(size=(10, 3))
        y = np.zeros(10, dtype=np.int64)
        for kind in MODEL_KINDS:
            if kind == "knn":
                model = train_model(ModelSpec("knn", {"k": 3}), X, y, seed=0)
                assert np.all(model.score_rows(X) == 0.0)
            else:
                with pytest.raises(SingleClassTrainingError):
                    train_model(ModelSpec(kind), X, y, seed=0)

    def test_non_finite_features_rejected(self):
        X, y = overlapping_data(seed=19)
        X[3, 2] = np.nan
        with pytest.raises(NonFiniteFeatureError):
            train_model(ModelSpec("logistic_regression"), X, y, seed=0)

    def test_dimension_mismatch(self):
        X, y = overlapping_data(seed=20)
        model = train_model(ModelSpec("naive_bayes"), X, y, seed=0)
        with pytest.raises(DimensionMismatchError):
            score(model, np.zeros(X.shape[1] + 1))

    def test_unknown_kind_and_hyperparameters_rejected(self):
        with pytest.raises(ValueError):
            ModelSpec("perceptron")
        with pytest.raises(ValueError):
            ModelSpec("knn", {"neighbours": 3})

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_deterministic_retraining(self, kind):
        X, y = overlapping_data(seed=21)
        a = train_model(ModelSpec(kind), X, y, seed=5)
        b = train_model(ModelSpec(kind), X, y, seed=5)
        probe = np.random.default_rng(22).normal(size=(40, X.shape[1]))
        assert np.array_equal(a.score_rows(probe), b.score_rows(probe))

    @pytest.mark.parametrize("kind", ["logistic_regression", "naive_bayes", "knn", "gradient_boosting"])
    def test_row_order_invariance(self, kind):
        X, y = overlapping_data(seed=23)
        perm = np.random.default_rng(24).permutation(len(X))
        a = train_model(ModelSpec(kind), X, y, seed=5)
        b = train_model(ModelSpec(kind), X[perm], y[perm], seed=5)
        probe = np.random.default_rng(25).normal(size=(40, X.shape[1]))
        assert a.score_rows(probe) == pytest.approx(b.score_rows(probe), abs=1e-6)

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_composition_consistency(self, kind):
        X, y = overlapping_data(seed=26)
        probe = np.random.default_rng(27).normal(size=(30, X.shape[1]))
        pipeline_model = train_model(ModelSpec(kind), X, y, seed=5)
        if pipeline_model.standardizer is None:
            return
        std = standardize_fit(X)
        core_cls = type(pipeline_model.model)
        core = core_cls.fit(std.apply(X), y, 5)
        assert np.array_equal(
            pipeline_model.score_rows(probe),
            core.raw_score(standardize_apply(std, probe)),
        )

    @pytest.mark.parametrize("kind", MODEL_KINDS)
    def test_model_file_round_trip_exact(self, kind, tmp_path):
        X, y = overlapping_data(seed=28)
        model = train_model(ModelSpec(kind), X, y, seed=5)
        model.metadata.update(cv_mean_auc=0.9, fold_aucs=[0.8, 1.0])
        path = tmp_path / f"{kind}.json"
        save_model(model, path)
        loaded = load_model(path)
        probe = np.random.default_rng(29).normal(size=(40, X.shape[1]))
        assert np.array_equal(model.score_rows(probe), loaded.score_rows(probe))
        assert model_to_json(loaded) == model_to_json(model)
        assert loaded.spec == model.spec
        assert loaded.seed == model.seed
