"""
Unit tests for the five classifiers, their registry and model files
"""

from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import norm

from srs_weakness.classifiers import (
    ALGORITHMS,
    ClassifierSettings,
    FeatureKind,
    FeatureMatrix,
    MlpConfig,
    load_model,
    model_filename,
    predict,
    save_model,
    train_classifier,
    train_decision_tree,
    train_gaussian_nb,
    train_linear_svm,
    train_mlp,
    train_multinomial_nb,
    validate_algorithms,
)
from srs_weakness.classifiers.decision_tree import best_split, gini
from srs_weakness.classifiers.mlp import mlp_loss_and_gradients
from srs_weakness.errors import (
    ArtifactIoError,
    DegenerateLabelsError,
    DimensionMismatchError,
    LengthMismatchError,
    NegativeOrNonCountFeaturesError,
    NonFiniteFeaturesError,
    TooFewExamplesError,
    UnknownAlgorithmError,
    VersionMismatchError,
)


def blobs(seed: int = 0, per_class: int = 15, labels=(3, 7, 11)) -> tuple[np.ndarray, np.ndarray]:
    """Well separated Gaussian clusters in four dimensions"""
    rng = np.random.default_rng(seed)
    X = []
    y = []
    for i, label in enumerate(labels):
        center = np.zeros(4)
        center[i % 4] = 6.0
        X.append(center + rng.normal(scale=0.5, size=(per_class, 4)))
        y += [label] * per_class
    return np.vstack(X), np.array(y)


def count_data() -> tuple[np.ndarray, np.ndarray]:
    X = np.array([[3, 0, 1], [2, 0, 0], [4, 1, 0], [0, 3, 1], [0, 2, 2], [1, 4, 0]], dtype=np.int64)
    return X, np.array([1, 1, 1, 2, 2, 2])


def assert_in_ties(prediction: int, scores: np.ndarray, class_set: np.ndarray) -> None:
    """prediction must be a top scorer, allowing for floating near-ties"""
    top = scores.max()
    tied = class_set[scores >= top - 1e-9]
    assert prediction in tied


@pytest.mark.unit
class TestFeatureContainers:
    """Test cases for FeatureMatrix validation"""

    def test_non_finite_rejected(self):
        with pytest.raises(NonFiniteFeaturesError):
            FeatureMatrix(np.array([[1.0, np.nan]]), FeatureKind.LATENT)

    def test_must_be_two_dimensional(self):
        with pytest.raises(DimensionMismatchError):
            FeatureMatrix(np.ones(3), FeatureKind.LATENT)

    def test_length_mismatch(self):
        with pytest.raises(LengthMismatchError):
            train_gaussian_nb(np.ones((3, 2)), [1, 2])

    def test_single_label_degenerate(self):
        with pytest.raises(DegenerateLabelsError):
            train_gaussian_nb(np.random.default_rng(0).normal(size=(4, 2)), [5, 5, 5, 5])

    def test_too_few_examples(self):
        with pytest.raises(TooFewExamplesError):
            train_linear_svm(np.ones((1, 2)), [1])


@pytest.mark.unit
class TestGaussianNaiveBayes:
    """Test cases for Gaussian naive Bayes"""

    def test_matches_independent_likelihood(self):
        X, y = blobs(seed=1)
        model = train_gaussian_nb(X, y)
        queries = np.random.default_rng(2).normal(loc=2.0, scale=3.0, size=(25, 4))

        predictions = model.predict_many(queries)

        epsilon = 1e-9 * X.var(axis=0).max()
        for query, prediction in zip(queries, predictions, strict=True):
            scores = []
            for label in model.class_set:
                members = X[y == label]
                prior = np.log(len(members) / len(X))
                scores.append(
                    prior + norm.logpdf(query, members.mean(axis=0), np.sqrt(members.var(axis=0) + epsilon)).sum()
                )
            assert_in_ties(prediction, np.array(scores), model.class_set)

    def test_separable_clusters(self):
        X, y = blobs(seed=4)
        model = train_gaussian_nb(X, y)
        assert np.mean(model.predict_many(X) == y) == 1.0

    def test_predictions_within_class_set(self):
        X, y = blobs(seed=5)
        model = train_gaussian_nb(X, y)
        far = np.random.default_rng(6).normal(scale=100.0, size=(50, 4))
        assert set(model.predict_many(far)) <= set(y)


@pytest.mark.unit
class TestMultinomialNaiveBayes:
    """Test cases for multinomial naive Bayes"""

    def test_matches_hand_computation(self):
        X, y = count_data()
        model = train_multinomial_nb(X, y)
        query = np.array([1, 1, 3])

        counts_1 = X[y == 1].sum(axis=0) + 1.0
        counts_2 = X[y == 2].sum(axis=0) + 1.0
        score_1 = np.log(0.5) + query @ np.log(counts_1 / counts_1.sum())
        score_2 = np.log(0.5) + query @ np.log(counts_2 / counts_2.sum())

        np.testing.assert_allclose(model.joint_log_likelihood(query[None, :].astype(float))[0], [score_1, score_2])
        assert_in_ties(predict(model, query), np.array([score_1, score_2]), model.class_set)

    def test_rejects_latent_features(self):
        with pytest.raises(NegativeOrNonCountFeaturesError):
            train_multinomial_nb(np.array([[0.5, -0.2], [0.1, 0.3]]), [1, 2])

    def test_rejects_negative_counts(self):
        X = FeatureMatrix(np.array([[1, -1], [0, 2]]), FeatureKind.COUNTS)
        with pytest.raises(NegativeOrNonCountFeaturesError):
            train_multinomial_nb(X, [1, 2])

    def test_rejects_fractional_counts(self):
        X = FeatureMatrix(np.array([[1.5, 0.0], [0.0, 2.0]]), FeatureKind.COUNTS)
        with pytest.raises(NegativeOrNonCountFeaturesError):
            train_multinomial_nb(X, [1, 2])


@pytest.mark.unit
class TestLinearSvm:
    """Test cases for the one-vs-rest linear SVM"""

    def test_separable_clusters(self):
        X, y = blobs(seed=7)
        model = train_linear_svm(X, y, epochs=30, seed=0)
        assert np.mean(model.predict_many(X) == y) == 1.0

    def test_prediction_is_decision_argmax(self):
        X, y = blobs(seed=8)
        model = train_linear_svm(X, y, epochs=5, seed=1)
        queries = np.random.default_rng(9).normal(scale=4.0, size=(20, 4))

        scores = model.decision_function(queries)
        for row, prediction in zip(scores, model.predict_many(queries), strict=True):
            assert_in_ties(prediction, row, model.class_set)

    def test_seed_determinism(self):
        X, y = blobs(seed=10)
        first = train_linear_svm(X, y, epochs=3, seed=5)
        second = train_linear_svm(X, y, epochs=3, seed=5)
        assert np.array_equal(first.weights, second.weights)

    def test_invalid_hyperparameters(self):
        X, y = blobs()
        with pytest.raises(ValueError):
            train_linear_svm(X, y, epochs=0)


@pytest.mark.unit
class TestDecisionTree:
    """Test cases for the CART decision tree"""

    def brute_force_split(self, X, y_idx, n_classes):
        """Score every midpoint of every feature with the same Gini formula"""
        n = len(y_idx)
        best = None
        for f in range(X.shape[1]):
            values = np.unique(X[:, f])
            for low, high in zip(values[:-1], values[1:], strict=True):
                threshold = (low + high) / 2.0
                mask = X[:, f] <= threshold
                left = np.bincount(y_idx[mask], minlength=n_classes).astype(float)
                right = np.bincount(y_idx[~mask], minlength=n_classes).astype(float)
                n_l, n_r = left.sum(), right.sum()
                impurity = (n_l * (1 - (left**2).sum() / n_l**2) + n_r * (1 - (right**2).sum() / n_r**2)) / n
                if best is None or impurity < best[0] - 1e-12:
                    best = (impurity, f, threshold)
        return best

    @pytest.mark.parametrize("seed", range(5))
    def test_best_split_matches_brute_force(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.integers(0, 5, size=(30, 3)).astype(float)
        y_idx = rng.integers(0, 3, size=30)

        split = best_split(X, y_idx, 3, min_leaf=1)
        impurity, feature, threshold = self.brute_force_split(X, y_idx, 3)

        assert split.impurity == pytest.approx(impurity, abs=1e-12)
        assert split.feature == feature
        assert split.threshold == pytest.approx(threshold)

    def test_gini(self):
        assert gini(np.array([5, 5])) == pytest.approx(0.5)
        assert gini(np.array([4, 0])) == 0.0

    def test_fits_training_data(self):
        X, y = blobs(seed=12)
        tree = train_decision_tree(X, y)
        assert np.mean(tree.predict_many(X) == y) == 1.0

    def test_depth_limit(self):
        rng = np.random.default_rng(13)
        X = rng.normal(size=(60, 3))
        y = rng.integers(0, 4, size=60)

        tree = train_decision_tree(X, y, max_depth=2)

        assert tree.depth <= 2
        assert tree.n_leaves <= 4

    def test_depth_zero_is_majority_vote(self):
        X = np.arange(10, dtype=float).reshape(-1, 1)
        y = np.array([4, 4, 4, 9, 9, 9, 2, 2, 2, 2])

        tree = train_decision_tree(X, y, max_depth=0)

        assert set(tree.predict_many(X)) == {2}

    def test_majority_tie_goes_to_smaller_label(self):
        X = np.zeros((4, 1))
        tree = train_decision_tree(X, np.array([8, 3, 8, 3]))
        assert predict(tree, [0.0]) == 3

    def test_single_class_allowed(self):
        tree = train_decision_tree(np.ones((3, 2)), [6, 6, 6])
        assert list(tree.predict_many(np.zeros((2, 2)))) == [6, 6]


@pytest.mark.unit
class TestMultilayerPerceptron:
    """Test cases for the feedforward network"""

    def test_gradients_match_finite_differences(self):
        rng = np.random.default_rng(14)
        weights = [rng.normal(scale=0.5, size=(4, 5)), rng.normal(scale=0.5, size=(5, 3))]
        biases = [rng.normal(scale=0.1, size=5), rng.normal(scale=0.1, size=3)]
        X = rng.normal(size=(6, 4))
        targets = np.eye(3)[rng.integers(0, 3, size=6)]

        _, grad_w, grad_b = mlp_loss_and_gradients(weights, biases, X, targets)

        step = 1e-6
        for params, grads in ((weights, grad_w), (biases, grad_b)):
            for layer, param in enumerate(params):
                for index in np.ndindex(param.shape):
                    original = param[index]
                    param[index] = original + step
                    plus, _, _ = mlp_loss_and_gradients(weights, biases, X, targets)
                    param[index] = original - step
                    minus, _, _ = mlp_loss_and_gradients(weights, biases, X, targets)
                    param[index] = original
                    assert grads[layer][index] == pytest.approx((plus - minus) / (2 * step), abs=1e-6)

    def test_learns_separable_clusters(self):
        X, y = blobs(seed=15)
        model = train_mlp(X, y, MlpConfig(epochs=50, hidden_sizes=(16,), seed=0))

        assert np.mean(model.predict_many(X) == y) == 1.0
        assert model.loss_history[-1] < model.loss_history[0]
        assert len(model.loss_history) == 50

    def test_seed_determinism(self):
        X, y = blobs(seed=16)
        cfg = MlpConfig(epochs=3, hidden_sizes=(8, 4), seed=2)

        first = train_mlp(X, y, cfg)
        second = train_mlp(X, y, cfg)

        for a, b in zip(first.weights, second.weights, strict=True):
            assert np.array_equal(a, b)

    def test_probabilities_sum_to_one(self):
        X, y = blobs(seed=17)
        model = train_mlp(X, y, MlpConfig(epochs=2, hidden_sizes=(8,)))
        np.testing.assert_allclose(model.predict_proba(X).sum(axis=1), 1.0)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            MlpConfig(batch_size=0)
        with pytest.raises(ValueError):
            MlpConfig(momentum=1.0)


@pytest.mark.unit
class TestRegistryAndModelFiles:
    """Test cases for the algorithm registry and model persistence"""

    def test_algorithm_names(self):
        assert ALGORITHMS == ("gaussian_nb", "multinomial_nb", "linear_svm", "decision_tree", "mlp")

    def test_unknown_algorithm_lists_valid_names(self):
        with pytest.raises(UnknownAlgorithmError) as exc_info:
            validate_algorithms(["random_forest"])
        assert "linear_svm" in str(exc_info.value)

    def test_train_classifier_seed_overrides_mlp_seed(self):
        X, y = blobs(seed=18)
        settings = ClassifierSettings(mlp=MlpConfig(epochs=2, hidden_sizes=(8,), seed=0))

        via_seed = train_classifier("mlp", X, y, settings, seed=4)
        direct = train_mlp(X, y, MlpConfig(epochs=2, hidden_sizes=(8,), seed=4))

        assert np.array_equal(via_seed.weights[0], direct.weights[0])

    @pytest.mark.parametrize("algorithm", ALGORITHMS)
    def test_round_trip_predictions(self, tmp_path, algorithm):
        """A reloaded model predicts exactly what the trained one did"""
        if algorithm == "multinomial_nb":
            X, y = count_data()
            X = FeatureMatrix(X, FeatureKind.COUNTS)
            queries = np.array([[1, 1, 3], [0, 5, 0], [2, 0, 0]], dtype=float)
        else:
            X, y = blobs(seed=19)
            queries = np.random.default_rng(20).normal(scale=4.0, size=(10, 4))
        settings = ClassifierSettings(mlp=MlpConfig(epochs=2, hidden_sizes=(8,)))
        model = train_classifier(algorithm, X, y, settings, seed=1)
        path = tmp_path / model_filename(model.kind, 1)

        save_model(model, path)
        loaded = load_model(path)

        assert loaded.kind == model.kind
        assert np.array_equal(loaded.class_set, model.class_set)
        assert np.array_equal(loaded.predict_many(queries), model.predict_many(queries))

    def test_corrupt_model_file(self, tmp_path):
        X, y = blobs()
        path = tmp_path / "m.model"
        save_model(train_gaussian_nb(X, y), path)
        path.write_bytes(b"NOTAMODL" + path.read_bytes()[8:])

        with pytest.raises(VersionMismatchError):
            load_model(path)

    def test_predict_dimension_mismatch(self):
        X, y = blobs()
        model = train_gaussian_nb(X, y)
        with pytest.raises(DimensionMismatchError):
            predict(model, [1.0, 2.0])


def small_dataset(seed: int, integer: bool) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Seeded training set with N <= 20, F <= 4 and every class present twice, plus query rows"""
    rng = np.random.default_rng(seed)
    n_classes = int(rng.integers(2, 4))
    n = int(rng.integers(2 * n_classes, 21))
    f = int(rng.integers(1, 5))
    labels = np.array([2, 5, 9])[:n_classes]
    y = rng.permutation(labels[np.arange(n) % n_classes])
    if integer:
        X = rng.integers(0, 5, size=(n, f))
        queries = np.vstack([X, rng.integers(0, 5, size=(15, f))])
    else:
        X = rng.normal(size=(n, f)) + y[:, None] * 0.3
        queries = np.vstack([X, rng.normal(scale=2.0, size=(15, f)) + 1.5])
    return X, y, queries


def gaussian_nb_oracle(X: np.ndarray, y: np.ndarray, query: np.ndarray) -> int:
    variances = X.var(axis=0)
    epsilon = 1e-9 * variances.max() if variances.max() > 0 else 1e-9
    best_label, best_score = None, -np.inf
    for label in np.unique(y):
        members = X[y == label]
        score = np.log(len(members) / len(X))
        for j in range(X.shape[1]):
            score += norm.logpdf(query[j], members[:, j].mean(), np.sqrt(members[:, j].var() + epsilon))
        if score > best_score:
            best_label, best_score = label, score
    return int(best_label)


def multinomial_nb_oracle(X: np.ndarray, y: np.ndarray, query: np.ndarray) -> int:
    """Exact rational posterior numerators, Laplace alpha = 1"""
    best_label, best_score = None, None
    for label in np.unique(y):
        members = X[y == label]
        totals = members.sum(axis=0)
        denominator = int(totals.sum()) + X.shape[1]
        score = Fraction(len(members), len(X))
        for j in range(X.shape[1]):
            score *= Fraction(int(totals[j]) + 1, denominator) ** int(query[j])
        if best_score is None or score > best_score:
            best_label, best_score = label, score
    return int(best_label)


def cart_oracle(X: np.ndarray, y: np.ndarray, max_depth: int = 16):
    """Recursive exhaustive-split CART; returns a predict function"""

    def majority(labels):
        values, counts = np.unique(labels, return_counts=True)
        return int(values[np.argmax(counts)])

    def weighted_gini(parts):
        total = sum(len(part) for part in parts)
        result = 0.0
        for part in parts:
            _, counts = np.unique(part, return_counts=True)
            result += len(part) * (1.0 - np.sum((counts / len(part)) ** 2))
        return result / total

    def grow(rows, depth):
        labels = y[rows]
        if depth >= max_depth or len(np.unique(labels)) < 2:
            return majority(labels)
        best = None
        for j in range(X.shape[1]):
            values = np.unique(X[rows, j])
            for low, high in zip(values[:-1], values[1:], strict=True):
                threshold = (low + high) / 2.0
                mask = X[rows, j] <= threshold
                score = weighted_gini([labels[mask], labels[~mask]])
                if best is None or score < best[0] - 1e-12:
                    best = (score, j, threshold)
        if best is None:
            return majority(labels)
        _, j, threshold = best
        mask = X[rows, j] <= threshold
        return (j, threshold, grow(rows[mask], depth + 1), grow(rows[~mask], depth + 1))

    root = grow(np.arange(len(y)), 0)

    def predict_row(row):
        node = root
        while isinstance(node, tuple):
            j, threshold, left, right = node
            node = left if row[j] <= threshold else right
        return node

    return predict_row


@pytest.mark.unit
class TestOracleEquivalence:
    """Naive Bayes and tree predictions agree exactly with direct implementations"""

    @pytest.mark.parametrize("seed", range(50))
    def test_gaussian_nb(self, seed):
        X, y, queries = small_dataset(seed, integer=False)

        predictions = train_gaussian_nb(X, y).predict_many(queries)

        assert list(predictions) == [gaussian_nb_oracle(X, y, q) for q in queries]

    @pytest.mark.parametrize("seed", range(50))
    def test_multinomial_nb(self, seed):
        X, y, queries = small_dataset(seed, integer=True)

        predictions = train_multinomial_nb(X, y).predict_many(queries.astype(float))

        assert list(predictions) == [multinomial_nb_oracle(X, y, q) for q in queries]

    @pytest.mark.parametrize("seed", range(50))
    def test_decision_tree(self, seed):
        X, y, _ = small_dataset(seed, integer=True)
        X = X.astype(float)
        queries = np.vstack([X, np.random.default_rng(1000 + seed).uniform(-1.0, 5.0, size=(15, X.shape[1]))])
        oracle = cart_oracle(X, y)

        predictions = train_decision_tree(X, y).predict_many(queries)

        assert list(predictions) == [oracle(q) for q in queries]


@pytest.mark.unit
class TestWorkedExamples:
    """Small hand-checkable cases for every trainer and the model files"""

    def test_gaussian_nb_one_feature(self):
        model = train_gaussian_nb(np.array([[1.0], [1.2], [3.0], [3.2]]), [1, 1, 2, 2])
        assert predict(model, [2.9]) == 2

    def test_multinomial_nb_two_terms(self):
        model = train_multinomial_nb(np.array([[3, 0], [0, 3]]), [1, 2])

        assert predict(model, [2, 0]) == 1
        assert predict(model, [0, 2]) == 2

    def test_multinomial_nb_symmetric_tie_goes_to_smaller_label(self):
        model = train_multinomial_nb(np.array([[3, 0], [0, 3]]), [1, 2])
        assert predict(model, [1, 1]) == 1

    def test_linear_svm_cannot_fit_xor(self):
        X = np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]])
        y = np.array([1, 1, 2, 2])

        model = train_linear_svm(X, y, seed=0)

        assert np.mean(model.predict_many(X) == y) <= 0.75

    def test_linear_svm_separable_blobs(self):
        rng = np.random.default_rng(21)
        X = np.vstack([rng.normal(loc=-2.0, scale=0.3, size=(10, 2)), rng.normal(loc=2.0, scale=0.3, size=(10, 2))])
        y = np.repeat([1, 2], 10)

        model = train_linear_svm(X, y, seed=0)

        assert np.mean(model.predict_many(X) == y) == 1.0

    def test_decision_tree_three_clusters(self):
        X = np.array([[1.0], [2.0], [10.0], [11.0], [20.0], [21.0]])
        y = np.array([1, 1, 2, 2, 3, 3])

        tree = train_decision_tree(X, y)

        assert np.mean(tree.predict_many(X) == y) == 1.0
        assert tree.depth <= 2

    def test_decision_tree_single_threshold(self):
        rng = np.random.default_rng(22)
        X = np.column_stack([np.arange(11, dtype=float), rng.normal(size=11)])
        y = np.where(X[:, 0] > 5, 2, 1)

        tree = train_decision_tree(X, y)

        assert tree.depth == 1
        assert np.mean(tree.predict_many(X) == y) == 1.0

    def test_mlp_default_config_two_blobs(self):
        rng = np.random.default_rng(23)
        X = np.vstack([rng.normal(loc=-2.0, scale=0.5, size=(50, 2)), rng.normal(loc=2.0, scale=0.5, size=(50, 2))])
        y = np.repeat([4, 8], 50)

        model = train_mlp(X, y, MlpConfig())

        assert len(model.loss_history) == 10
        assert np.mean(model.predict_many(X) == y) >= 0.95

    def test_mlp_file_keeps_weights_bit_exact(self, tmp_path):
        X, y = blobs(seed=24)
        model = train_mlp(X, y, MlpConfig(epochs=2, hidden_sizes=(8, 5)))
        path = tmp_path / "mlp.model"

        save_model(model, path)
        loaded = load_model(path)

        for original, restored in zip(model.weights + model.biases, loaded.weights + loaded.biases, strict=True):
            assert restored.dtype == original.dtype
            assert restored.tobytes() == original.tobytes()
        assert loaded.mean.tobytes() == model.mean.tobytes()
        assert loaded.scale.tobytes() == model.scale.tobytes()

    @pytest.mark.parametrize("keep", [5, 40, -1])
    def test_truncated_model_file(self, tmp_path, keep):
        X, y = blobs()
        path = tmp_path / "m.model"
        save_model(train_gaussian_nb(X, y), path)
        path.write_bytes(path.read_bytes()[:keep])

        with pytest.raises(ArtifactIoError):
            load_model(path)
