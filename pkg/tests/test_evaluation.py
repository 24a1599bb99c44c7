from __future__ import annotations

import csv

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from pstfault.evaluation import (DEFAULT_ERT_GRID, EvalReport, SplitSpec, grid_search,
                                 misclassification_table, score, stratified_split)
from pstfault.learners import fit_ensemble

label_lists = st.integers(1, 60).flatmap(
    lambda n: st.tuples(st.lists(st.sampled_from("ABCD"), min_size=n, max_size=n),
                        st.lists(st.sampled_from("ABCD"), min_size=n, max_size=n)))


class TestSplit:
    def test_paper_sized_class(self):
        labels = np.repeat(["x", "y"], 960)
        train, test = stratified_split(labels)
        assert train.size == 1280 and test.size == 640
        assert np.sum(labels[train] == "x") == 640

    def test_half_split(self):
        labels = np.repeat(["a", "b", "c"], 10)
        train, test = stratified_split(labels, SplitSpec(0.5, 3))
        for c in "abc":
            assert np.sum(labels[train] == c) == 5 and np.sum(labels[test] == c) == 5

    def test_seed_controls_split(self):
        labels = np.repeat(["a", "b"], 30)
        a = stratified_split(labels, SplitSpec(seed=1))
        b = stratified_split(labels, SplitSpec(seed=1))
        c = stratified_split(labels, SplitSpec(seed=2))
        assert np.array_equal(a[0], b[0]) and not np.array_equal(a[0], c[0])

    def test_tiny_class_rejected(self):
        with pytest.raises(ValueError):
            stratified_split(["a", "a", "a", "b"])

    def test_fraction_range(self):
        with pytest.raises(ValueError):
            SplitSpec(1.0)

    @given(st.lists(st.integers(3, 40), min_size=1, max_size=6), st.integers(0, 2 ** 31),
           st.floats(0.34, 0.66))
    @settings(max_examples=60, deadline=None)
    def test_disjoint_exhaustive_stratified(self, sizes, seed, frac):
        labels = np.concatenate([[f"k{i}"] * s for i, s in enumerate(sizes)])
        train, test = stratified_split(labels, SplitSpec(frac, seed))
        assert not set(train) & set(test)
        assert sorted(np.r_[train, test]) == list(range(labels.size))
        for i, s in enumerate(sizes):
            assert np.sum(labels[train] == f"k{i}") == int(np.floor(s * frac + 1e-9))


class TestScore:
    def test_worked_example(self):
        report = score(["A", "B", "B", "B"], ["A", "A", "B", "B"])
        assert report.accuracy == 0.75
        b = report.per_class["B"]
        assert b.precision == pytest.approx(2 / 3) and b.recall == 1.0 and b.f1 == pytest.approx(0.8)
        assert report.per_class["A"].recall == 0.5

    def test_misclassification_table_example(self):
        truths = ["A", "A", "A", "B"]
        preds = ["B", "B", "C", "B"]
        assert misclassification_table(preds, truths) == [("A", "B", 2), ("A", "C", 1)]

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            score(["A"], ["A", "B"])

    def test_never_predicted_class(self):
        report = score(["A", "A"], ["A", "B"])
        assert report.per_class["B"].precision == 0.0 and report.per_class["B"].f1 == 0.0

    @given(label_lists)
    @settings(max_examples=150, deadline=None)
    def test_matches_recount(self, pair):
        preds, truths = pair
        report = score(preds, truths)
        acc, per, confusions = oracles.recount(preds, truths)
        assert report.accuracy == pytest.approx(acc)
        for c, (p, r, f) in per.items():
            got = report.per_class[c]
            assert (got.precision, got.recall, got.f1) == pytest.approx((p, r, f))
        assert {(a, b): n for a, b, n in report.confusions} == dict(confusions)
        assert report.accuracy == pytest.approx(1 - report.n_errors / len(truths))
        counts = [n for _, _, n in report.confusions]
        assert counts == sorted(counts, reverse=True)

    @given(st.integers(1, 15), st.integers(0, 2 ** 31))
    @settings(max_examples=50, deadline=None)
    def test_balanced_macro_recall_is_accuracy(self, per, seed):
        rng = np.random.default_rng(seed)
        truths = np.repeat(list("ABC"), per).tolist()
        preds = rng.choice(list("ABC"), size=len(truths)).tolist()
        report = score(preds, truths)
        recalls = [report.per_class[c].recall for c in "ABC"]
        assert np.mean(recalls) == pytest.approx(report.accuracy)

    def test_report_roundtrip(self, tmp_path):
        report = score(["A", "C", "B"], ["A", "B", "B"], {"n": 3}, "ERT")
        report.save(tmp_path / "r.json", tmp_path / "m.csv")
        back = EvalReport.from_dict(__import__("json").loads((tmp_path / "r.json").read_text()))
        assert back.to_dict() == report.to_dict()
        rows = list(csv.reader(open(tmp_path / "m.csv")))
        assert rows == [["actual", "predicted", "count"], ["B", "C", "1"]]


def toy_sets(seed=0):
    rng = np.random.default_rng(seed)
    y = np.repeat(["a", "b", "c"], 40)
    X = rng.normal(size=(120, 5))
    X[:, 0] += np.repeat([0.0, 1.5, 3.0], 40)
    train, test = stratified_split(y, SplitSpec(seed=seed))
    return (X[train], y[train]), (X[test], y[test])


class TestGridSearch:
    def test_default_grid_has_200_cells(self):
        g = DEFAULT_ERT_GRID
        assert len(g["n_estimators"]) * len(g["max_features"]) * len(g["max_depth"]) == 200
        assert g["n_estimators"][0] == 40 and g["n_estimators"][-1] == 400

    def test_single_cell_equals_direct_fit(self):
        train, test = toy_sets()
        grid = {"n_estimators": [7], "max_features": [0.4], "max_depth": [5]}
        result = grid_search(train, test, "ERT", grid, seed=3)
        model = fit_ensemble(*train, "ERT", 7, 0.4, 5, seed=3)
        acc = np.mean(np.array(model.predict(test[0])) == test[1])
        assert result.best == {"n_estimators": 7, "max_features": 0.4, "max_depth": 5}
        assert result.best_accuracy == pytest.approx(acc)

    def test_best_is_argmax_with_tie_break(self):
        train, test = toy_sets(1)
        grid = {"n_estimators": [2, 6, 10], "max_features": [0.2, 0.6], "max_depth": [2, None]}
        result = grid_search(train, test, "RFC", grid, seed=0)
        assert len(result.cells) == 12
        top = max(c["accuracy"] for c in result.cells)
        assert result.best_accuracy == top
        winners = [c for c in result.cells if c["accuracy"] == top]
        fewest = min(c["n_estimators"] for c in winners)
        assert result.best["n_estimators"] == fewest

    def test_cells_match_independent_fits(self):
        train, test = toy_sets(2)
        grid = {"n_estimators": [3, 5], "max_features": [0.5], "max_depth": [3]}
        result = grid_search(train, test, "ERT", grid, seed=4)
        for cell in result.cells:
            model = fit_ensemble(*train, "ERT", cell["n_estimators"], 0.5, 3, seed=4)
            assert cell["accuracy"] == pytest.approx(np.mean(np.array(model.predict(test[0])) == test[1]))

    def test_empty_grid(self):
        train, test = toy_sets()
        with pytest.raises(ValueError):
            grid_search(train, test, "ERT", {"n_estimators": [], "max_features": [0.5], "max_depth": [3]})
