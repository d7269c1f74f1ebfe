from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from botalign.corpus import CorpusSet, Label, split
from botalign.evaluation import (
    ExperimentError, ModelFamily, PipelineSpec, Splits, confusion, cross_matrix, cross_markdown,
    evaluate, grid_search, macro_f1, per_class_f1, reports_csv, reports_json, run_experiment,
    train_pipeline,
)
from botalign.features import Featurizer
from botalign.models import BaselineKind, ForestConfig, LogRegConfig
from botalign.synth import benchmark_configs, make_detection_benchmark

HH, HB = Label.HUMAN_HUMAN, Label.HUMAN_BOT


def test_macro_f1_worked_examples():
    assert per_class_f1([HH, HH, HB, HB], [HH, HB, HB, HB]) == pytest.approx({HH: 2 / 3, HB: 0.8})
    assert abs(macro_f1([HH, HH, HB, HB], [HH, HB, HB, HB]) - 11 / 15) <= 1e-9
    assert macro_f1([HH, HB, HB], [HH, HB, HB]) == 1.0
    assert abs(macro_f1([HH, HH, HB, HB], [HB] * 4) - 1 / 3) <= 1e-9


def test_macro_f1_accepts_strings_and_ints():
    assert macro_f1(["human-human", "human-bot"], [HH, HB]) == 1.0
    assert abs(macro_f1([0, 0, 1, 1], [0, 1, 1, 1]) - 11 / 15) <= 1e-9


def test_macro_f1_errors():
    with pytest.raises(ValueError):
        macro_f1([HH], [HH, HB])
    with pytest.raises(ValueError):
        macro_f1([], [])


labels = st.lists(st.sampled_from([0, 1]), min_size=1, max_size=30)


@given(labels, st.randoms(use_true_random=False))
def test_macro_f1_invariant_to_class_relabeling(gold, rnd):
    pred = [rnd.choice([0, 1]) for _ in gold]
    flip = lambda xs: [1 - x for x in xs]  # noqa: E731
    assert macro_f1(gold, pred) == pytest.approx(macro_f1(flip(gold), flip(pred)))
    assert 0.0 <= macro_f1(gold, pred) <= 1.0


@given(labels, st.randoms(use_true_random=False))
def test_confusion_counts_sum_to_size(gold, rnd):
    pred = [rnd.choice([0, 1]) for _ in gold]
    table = confusion(gold, pred)
    assert sum(n for row in table.values() for n in row.values()) == len(gold)


def test_pipeline_pairing_rule():
    with pytest.raises(ExperimentError, match="allow_mismatch"):
        PipelineSpec("x", "liwc", "human", "logreg", [LogRegConfig()])
    PipelineSpec("x", "liwc", "human", "logreg", [LogRegConfig()], allow_mismatch=True)
    with pytest.raises(ExperimentError, match="empty"):
        PipelineSpec("x", "bag_of_words", "human", "logreg", [])


# -- small synthetic fixtures -------------------------------------------------


@pytest.fixture(scope="module")
def bench(lex):
    hh, hb = benchmark_configs(lex, n_per_class=60, n_utterances=12, seed=1)
    return make_detection_benchmark(hh, hb)


@pytest.fixture(scope="module")
def splits(bench):
    return Splits("S", *split(bench, 0))


def _fm(splits, lex, family="accommodation"):
    fz = Featurizer(family, "human", lexicon=lex).fit(splits.train)
    return fz.transform(splits.train), fz.transform(splits.val)


def test_grid_search_single_and_ties(splits, lex):
    tr, va = _fm(splits, lex)
    one = PipelineSpec("a", "accommodation", "human", "forest", [ForestConfig(n_trees=5, seed=3)])
    assert grid_search(tr, va, one).chosen_index == 0
    same = ForestConfig(n_trees=5, seed=3)
    tied = PipelineSpec("a", "accommodation", "human", "forest", [same, replace(same, bootstrap=True)])
    res = grid_search(tr, va, tied)
    assert res.scores[0] == res.scores[1] and res.chosen_index == 0


def test_grid_search_tie_across_distinct_configs(splits, lex):
    tr, va = _fm(splits, lex, "bag_of_words")
    tiny = [LogRegConfig(c_value=1e-8, normalization="unit_normalize"), LogRegConfig(c_value=1e-9)]
    res = grid_search(tr, va, PipelineSpec("b", "bag_of_words", "human", "logreg", tiny))
    assert res.scores[0] == res.scores[1]
    assert res.chosen is tiny[0]


def test_grid_search_prefers_higher_score(splits, lex):
    tr, va = _fm(splits, lex)
    weak = ForestConfig(n_trees=1, max_features="sqrt", seed=0)
    strong = ForestConfig(n_trees=25, seed=0)
    res = grid_search(tr, va, PipelineSpec("a", "accommodation", "human", "forest", [weak, strong]))
    assert res.chosen_index == int(np.argmax(res.scores))


def test_grid_search_needs_validation_rows(splits, lex):
    tr, va = _fm(splits, lex)
    empty = replace(va, rows=va.rows[:0], labels=[], dialogue_ids=[])
    spec = PipelineSpec("a", "accommodation", "human", "forest", [ForestConfig(n_trees=2)] * 2)
    with pytest.raises(ExperimentError, match="validation split is empty"):
        grid_search(tr, empty, spec)


def test_baseline_on_balanced_target(splits):
    spec = PipelineSpec("mf", None, "human", "baseline", [BaselineKind.MOST_FREQUENT])
    balanced = CorpusSet("t", tuple(d for d in splits.test.dialogues))
    hh = [d for d in balanced if d.label is HH][:5]
    hb = [d for d in balanced if d.label is HB][:5]
    target = Splits("T", CorpusSet("tt"), CorpusSet("tv"), CorpusSet("te", tuple(hh + hb)))
    rep = run_experiment(splits, target, spec)
    assert abs(rep.macro_f1 - 1 / 3) <= 1e-9
    assert rep.per_class_f1["human-bot"] + rep.per_class_f1["human-human"] == pytest.approx(2 / 3)


def test_accommodation_beats_bag_of_words(splits, lex):
    acc = PipelineSpec("acc", "accommodation", "human", "forest", [ForestConfig(n_trees=100, seed=0)])
    bow = PipelineSpec("bow", "bag_of_words", "human", "logreg", [LogRegConfig()])
    a = run_experiment(splits, splits, acc, lexicon=lex)
    b = run_experiment(splits, splits, bow, lexicon=lex)
    assert a.macro_f1 >= 0.9 and b.macro_f1 <= 0.75
    assert sum(n for row in a.confusion.values() for n in row.values()) == a.n_test


def test_no_target_leakage(splits, lex):
    spec = PipelineSpec("bow", "bag_of_words", "human", "logreg", [LogRegConfig(c_value=c) for c in (0.1, 1.0)])
    flipped = CorpusSet(splits.test.name, tuple(
        replace(d, label=HB if d.label is HH else HH) for d in splits.test))
    altered = replace(splits, test=flipped)
    assert train_pipeline(splits, spec, lex).digest() == train_pipeline(altered, spec, lex).digest()


def test_cross_matrix_and_reports(bench, lex):
    a = Splits("A", *split(bench, 0))
    b = Splits("B", *split(bench, 1))
    specs = [
        PipelineSpec("Most Frequent", None, "human", ModelFamily.BASELINE, [BaselineKind.MOST_FREQUENT]),
        PipelineSpec("Human Accommodation", "accommodation", "human", "forest", [ForestConfig(n_trees=10)]),
    ]
    res = cross_matrix({"A": a, "B": b}, specs, lexicon=lex)
    assert res.pairs == [("A", "A"), ("A", "B"), ("B", "A"), ("B", "B")]
    assert len(res.cells) == 8
    off = [res.cell("Human Accommodation", "A", "B").macro_f1, res.cell("Human Accommodation", "B", "A").macro_f1]
    assert res.averages["Human Accommodation"] == pytest.approx(np.mean(off))
    md = cross_markdown(res)
    assert md.splitlines()[0] == "| Pipeline | A → A | A → B | B → A | B → B | AVG |"
    assert len(reports_csv(res.cells).splitlines()) == 9
    assert '"averages"' in reports_json(res.cells, res.averages)


def test_cross_matrix_unknown_pair(splits):
    spec = PipelineSpec("mf", None, "human", "baseline", [BaselineKind.MOST_FREQUENT])
    with pytest.raises(ExperimentError):
        cross_matrix({"S": splits}, [spec], pairs=[("S", "X")])


def test_embedding_pipeline_needs_sidecar(splits):
    spec = PipelineSpec("bert", "embedding", "human", "logreg", [LogRegConfig()])
    with pytest.raises(ExperimentError, match="sidecar"):
        train_pipeline(splits, spec)


def test_evaluate_report_fields(splits, lex):
    spec = PipelineSpec("acc", "accommodation", "human", "forest", [ForestConfig(n_trees=3, seed=2)])
    rep = evaluate(train_pipeline(splits, spec, lex, seed=4), "S", splits.test)
    d = rep.to_dict()
    assert d["chosen_config"]["n_trees"] == 3 and d["seeds"] == {"experiment": 4}
    assert d["macro_f1"] == pytest.approx(np.mean(list(d["per_class_f1"].values())))
