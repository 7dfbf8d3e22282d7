import math

import numpy as np
import pytest

from cart_oracle import oracle_fit, trees_equal
from pabsa.classifier import (
    DecisionTree,
    LeafNode,
    ModelError,
    ModelVersionError,
    NaiveBayesModel,
    SplitNode,
    TreeParams,
    best_split,
    fit_nb,
    fit_tree,
    gini,
    load_model,
    predict,
    predict_batch,
    predict_nb,
    save_model,
)
from pabsa.corpus import Polarity
from pabsa.rng import SplitMix64

SEPARABLE_X = [[1.0], [2.0], [10.0], [11.0]]
SEPARABLE_Y = [0, 0, 2, 2]


class TestGini:
    def test_two_equal_classes(self):
        assert gini((5, 5, 0)) == 0.5

    def test_pure_node(self):
        assert gini((10, 0, 0)) == 0.0

    def test_all_zero_rejected(self):
        with pytest.raises(ValueError):
            gini((0, 0, 0))

    def test_published_class_distribution(self):
        # frozen from an independent computation of 1 - sum((c/n)^2)
        # over counts (5114, 1827, 3061)
        assert gini((5114, 1827, 3061)) == pytest.approx(0.6115489359636572, abs=1e-12)

    def test_range_for_three_classes(self):
        # one ulp of float slack around the mathematical 2/3 upper bound
        assert 0.0 <= gini((3, 3, 3)) <= 2 / 3 + 1e-15
        assert gini((3, 3, 3)) == pytest.approx(2 / 3)


class TestBestSplit:
    def test_separable_1d(self):
        choice = best_split(SEPARABLE_X, SEPARABLE_Y)
        assert choice.feature == 0
        assert choice.threshold == 6.0
        assert choice.decrease == pytest.approx(0.5)

    def test_constant_feature_gives_nothing(self):
        assert best_split([[1.0], [1.0], [1.0]], [0, 1, 2]) is None

    def test_pure_node_gives_nothing(self):
        assert best_split(SEPARABLE_X, [1, 1, 1, 1]) is None

    def test_min_samples_leaf_respected(self):
        X = [[1.0], [2.0], [3.0], [4.0]]
        y = [0, 2, 2, 2]
        choice = best_split(X, y, min_samples_leaf=2)
        assert choice is None or min(choice.threshold, 4 - choice.threshold) >= 0
        # with leaf minimum 2 the only admissible cut is between 2 and 3
        assert choice.threshold == 2.5

    def test_feature_tie_breaks_to_lower_index(self):
        X = [[1.0, 1.0], [2.0, 2.0], [10.0, 10.0], [11.0, 11.0]]
        choice = best_split(X, SEPARABLE_Y)
        assert choice.feature == 0

    def test_min_impurity_decrease_is_strict(self):
        choice = best_split(SEPARABLE_X, SEPARABLE_Y, min_impurity_decrease=0.5)
        assert choice is None  # decrease of exactly 0.5 is not "more than"
        assert best_split(SEPARABLE_X, SEPARABLE_Y, min_impurity_decrease=0.49) is not None


class TestFitTree:
    def test_single_sample_is_leaf(self):
        tree = fit_tree([[3.0]], [1])
        assert len(tree.nodes) == 1
        assert isinstance(tree.nodes[0], LeafNode)
        assert tree.nodes[0].label is Polarity.NEUTRAL

    def test_perfect_training_accuracy_on_separable_data(self):
        tree = fit_tree(SEPARABLE_X, SEPARABLE_Y)
        assert [int(p) for p in predict_batch(tree, SEPARABLE_X)] == SEPARABLE_Y

    def test_depth_one_stump(self):
        tree = fit_tree(SEPARABLE_X, SEPARABLE_Y, TreeParams(max_depth=1))
        root = tree.nodes[0]
        assert isinstance(root, SplitNode)
        assert root.threshold == 6.0
        assert isinstance(tree.nodes[root.left], LeafNode)
        assert isinstance(tree.nodes[root.right], LeafNode)
        assert tree.depth() == 1

    def test_stump_prediction(self):
        tree = fit_tree(SEPARABLE_X, SEPARABLE_Y, TreeParams(max_depth=1))
        assert predict(tree, [3.0]) is Polarity.POSITIVE
        assert predict(tree, [10.5]) is Polarity.NEGATIVE

    def test_leaf_tie_breaks_to_lowest_encoding(self):
        tree = fit_tree([[1.0], [1.0]], [2, 1])  # unsplittable, tied counts
        assert tree.nodes[0].label is Polarity.NEUTRAL

    def test_permuting_samples_does_not_change_tree(self):
        rng = SplitMix64(5)
        X = [[rng.below(20) / 2, rng.below(10) / 3] for _ in range(60)]
        y = [rng.below(3) for _ in range(60)]
        tree_a = fit_tree(X, y)
        order = list(range(60))[::-1]
        tree_b = fit_tree([X[i] for i in order], [y[i] for i in order])
        assert tree_a.nodes == tree_b.nodes

    def test_training_accuracy_monotone_in_depth(self):
        rng = SplitMix64(9)
        X = [[rng.below(50) / 7, rng.below(50) / 3] for _ in range(80)]
        y = [rng.below(3) for _ in range(80)]
        prev = 0.0
        for depth in (1, 2, 3, 5, 8, None):
            tree = fit_tree(X, y, TreeParams(max_depth=depth))
            acc = sum(
                int(p) == t for p, t in zip(predict_batch(tree, X), y)
            ) / len(y)
            assert acc >= prev - 1e-12
            prev = acc

    def test_input_validation(self):
        with pytest.raises(ValueError):
            fit_tree([], [])
        with pytest.raises(ValueError):
            fit_tree([[1.0]], [0, 1])
        with pytest.raises(ValueError):
            fit_tree([[float("nan")]], [0])
        with pytest.raises(ValueError):
            fit_tree([[1.0], [2.0, 3.0]], [0, 1])
        with pytest.raises(ValueError):
            fit_tree([[1.0]], [5])

    def test_numpy_input_accepted(self):
        tree = fit_tree(np.asarray(SEPARABLE_X), np.asarray(SEPARABLE_Y))
        assert tree.n_features == 1


def _random_problem(seed, max_n=60, max_d=4):
    rng = SplitMix64(seed)
    n = 2 + rng.below(max_n - 1)
    d = 1 + rng.below(max_d)
    # small integer grids provoke ties and duplicated values on purpose
    X = [[float(rng.below(8)) / (1 + rng.below(3)) for _ in range(d)] for _ in range(n)]
    y = [rng.below(3) for _ in range(n)]
    return X, y


class TestOracleEquivalence:
    @pytest.mark.parametrize("seed", range(12))
    def test_unlimited_depth(self, seed):
        X, y = _random_problem(seed)
        tree = fit_tree(X, y)
        oracle = oracle_fit(X, y)
        assert trees_equal(tree, 0, oracle)

    @pytest.mark.parametrize("seed", range(12, 18))
    def test_with_params(self, seed):
        X, y = _random_problem(seed)
        params = TreeParams(max_depth=3, min_samples_split=4, min_samples_leaf=2,
                            min_impurity_decrease=0.01)
        tree = fit_tree(X, y, params)
        oracle = oracle_fit(X, y, max_depth=3, min_samples_split=4,
                            min_samples_leaf=2, min_impurity_decrease=0.01)
        assert trees_equal(tree, 0, oracle)


class TestPredict:
    def test_single_leaf_constant(self):
        tree = fit_tree([[1.0]], [2])
        for x in ([0.0], [5.0], [-3.0]):
            assert predict(tree, x) is Polarity.NEGATIVE

    def test_batch_matches_elementwise(self):
        X, y = _random_problem(3)
        tree = fit_tree(X, y)
        assert predict_batch(tree, X) == [predict(tree, row) for row in X]

    def test_dimension_mismatch(self):
        tree = fit_tree(SEPARABLE_X, SEPARABLE_Y)
        with pytest.raises(ValueError, match="features"):
            predict(tree, [1.0, 2.0])


class TestNaiveBayes:
    def test_degenerate_prior(self):
        model = fit_nb([[1.0, 0.0], [0.0, 2.0]], [0, 0])
        assert predict_nb(model, [0.0, 5.0]) is Polarity.POSITIVE

    def test_hand_computed_posterior(self):
        # two docs: class 0 has counts [2, 0], class 2 has [0, 1]
        model = fit_nb([[2.0, 0.0], [0.0, 1.0]], [0, 2])
        # priors ln(1/2) each; smoothed likelihoods:
        #   class0: ln(3/4), ln(1/4);  class2: ln(1/3), ln(2/3)
        assert model.log_priors[0] == pytest.approx(math.log(0.5))
        assert model.log_likelihoods[0][0] == pytest.approx(math.log(3 / 4))
        assert model.log_likelihoods[0][1] == pytest.approx(math.log(1 / 4))
        assert model.log_likelihoods[2][0] == pytest.approx(math.log(1 / 3))
        assert model.log_likelihoods[2][1] == pytest.approx(math.log(2 / 3))
        # x=[1,0]: ln(3/8) vs ln(1/6) -> class 0; x=[0,2]: ln(1/32) vs ln(2/9) -> class 2
        assert predict_nb(model, [1.0, 0.0]) is Polarity.POSITIVE
        assert predict_nb(model, [0.0, 2.0]) is Polarity.NEGATIVE

    def test_uniform_everything_ties_to_positive(self):
        model = fit_nb([[1.0], [1.0], [1.0]], [0, 1, 2])
        assert predict_nb(model, [1.0]) is Polarity.POSITIVE

    def test_priors_form_distribution(self):
        model = fit_nb([[1.0]] * 4, [0, 0, 1, 2])
        total = sum(math.exp(p) for p in model.log_priors)
        assert total == pytest.approx(1.0, abs=1e-9)

    def test_negative_features_rejected(self):
        with pytest.raises(ValueError):
            fit_nb([[-1.0]], [0])
        model = fit_nb([[1.0]], [0])
        with pytest.raises(ValueError):
            predict_nb(model, [-2.0])

    def test_empty_rejected(self):
        with pytest.raises(ValueError):
            fit_nb(np.zeros((0, 2)), [])


class TestSerialization:
    def test_tree_round_trip(self, tmp_path):
        X, y = _random_problem(21)
        tree = fit_tree(X, y)
        path = tmp_path / "model.json"
        save_model(tree, path)
        again = load_model(path)
        assert isinstance(again, DecisionTree)
        assert again == tree
        assert predict_batch(again, X) == predict_batch(tree, X)

    def test_nb_round_trip(self, tmp_path):
        model = fit_nb([[2.0, 0.0], [0.0, 1.0]], [0, 2])
        path = tmp_path / "model.json"
        save_model(model, path)
        again = load_model(path)
        assert isinstance(again, NaiveBayesModel)
        assert again == model

    def test_truncated_file(self, tmp_path):
        X, y = _random_problem(22)
        path = tmp_path / "model.json"
        save_model(fit_tree(X, y), path)
        blob = path.read_text(encoding="utf-8")
        path.write_text(blob[: len(blob) // 2], encoding="utf-8")
        with pytest.raises(ModelError, match="corrupt"):
            load_model(path)

    def test_future_version(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"format": "pabsa-model", "version": 99}', encoding="utf-8")
        with pytest.raises(ModelVersionError, match="99"):
            load_model(path)

    def test_wrong_format(self, tmp_path):
        path = tmp_path / "model.json"
        path.write_text('{"format": "other"}', encoding="utf-8")
        with pytest.raises(ModelError, match="not a"):
            load_model(path)
