import random

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvtgkit.gate import AttentionError, AttentionMap
from cvtgkit.layout import BoundingBox, box_mask
from cvtgkit.metrics import (
    Counts,
    MetricsReport,
    acr,
    aggregate_overall,
    clipscore_aggregate,
    closest_word,
    denoise,
    effective_attention_efficiency,
    evaluate_record,
    macro_average,
    ned,
    ned_similarity,
    recall,
    span_accuracy,
    word_accuracy,
)
from cvtgkit.ocr import OcrOutput

from oracles import lev_table

words = st.text(alphabet="abcde", max_size=8)


def test_word_accuracy_across_lines():
    assert word_accuracy(["buy 2 get 1 free"], OcrOutput.from_texts("buy 2 get", "1 free")) == (5, 5)


def test_word_accuracy_case_insensitive():
    assert word_accuracy(["Open Now"], OcrOutput.from_texts("OPEN")) == (1, 2)


def test_ned_examples():
    assert ned_similarity("sale", "sale") == 1.0
    assert ned_similarity("sale", "sole") == pytest.approx(1 - 1 / (4 + 1e-5), abs=1e-15)
    assert ned_similarity("sale", "sole") == pytest.approx(0.75, abs=1e-5)


@given(words, words)
def test_ned_matches_formula(a, b):
    if not (a or b):
        return
    expect = 1 - lev_table(a, b) / (max(len(a), len(b)) + 1e-5)
    assert abs(ned_similarity(a, b) - expect) <= 1e-12


def test_closest_word_rules():
    assert closest_word("sale", ["sole", "sold", "sale"]) == "sale"
    assert closest_word("ab", ["ax", "xb"]) == "ax"
    assert closest_word("ab", []) == ""


def test_ned_sums_per_word():
    total, n = ned(["sale now"], OcrOutput.from_texts("sole"))
    assert n == 2
    assert total == pytest.approx(ned_similarity("sale", "sole") + ned_similarity("now", "sole"), abs=1e-15)
    total, n = ned(["abc"], OcrOutput())
    assert (total, n) == (pytest.approx(1 - 3 / (3 + 1e-5)), 1)


def test_span_accuracy_joins_consecutive_lines():
    ocr = OcrOutput.from_texts("Grand", "Opening", "today")
    assert span_accuracy(["Grand Opening", "Opening today", "Grand today"], ocr) == (2, 3)


def test_recall_inclusive_threshold():
    assert recall(["hello"], OcrOutput.from_texts("hallo")) == 1.0
    assert recall(["hello"], OcrOutput.from_texts("hxllx")) == 0.0
    with pytest.raises(ValueError):
        recall(["a"], OcrOutput(), threshold=0.0)


def test_denoise_keeps_above_one_std():
    vals = np.array([[0.0, 0.0, 0.0, 10.0]])
    assert np.array_equal(denoise(vals), vals)
    assert np.array_equal(denoise(np.full((3, 3), 0.7)), np.zeros((3, 3)))


def test_eta_spike_inside():
    arr = np.zeros((8, 8))
    arr[1, 1] = 5.0
    box = BoundingBox(0.0, 0.0, 0.5, 0.5)
    assert effective_attention_efficiency(AttentionMap(arr), box) == 5.0 / 1e-6


def test_eta_spike_outside_and_uniform():
    arr = np.zeros((8, 8))
    arr[6, 6] = 5.0
    box = BoundingBox(0.0, 0.0, 0.5, 0.5)
    assert effective_attention_efficiency(AttentionMap(arr), box) == 0.0
    assert effective_attention_efficiency(AttentionMap(np.full((8, 8), 0.3)), box) == 0.0


def test_acr_uniform_is_one():
    maps = [AttentionMap(np.full((6, 6), 0.37)) for _ in range(3)]
    mask = box_mask(BoundingBox(0.0, 0.0, 0.5, 0.5), 6, 6)
    assert acr(maps, mask) == 1.0


@pytest.mark.parametrize("cells", [1, 3, 9, 20])
def test_acr_concentrated_mass(cells):
    rng = np.random.default_rng(cells)
    n = 64
    mask = np.zeros(n)
    mask[rng.choice(n, cells, replace=False)] = 1
    arr = np.where(mask > 0, rng.random(n) + 0.1, 0.0).reshape(8, 8)
    value = acr([AttentionMap(arr)], mask.reshape(8, 8))
    assert value == pytest.approx(n / cells, rel=1e-9)


def test_acr_errors():
    mask = np.ones((4, 4))
    with pytest.raises(AttentionError):
        acr([AttentionMap(np.zeros((4, 4)))], mask)
    with pytest.raises(ValueError):
        acr([AttentionMap(np.ones((4, 4)))], np.zeros((4, 4)))
    with pytest.raises(ValueError):
        acr([AttentionMap(np.ones((4, 4)))], np.ones((3, 4)))


def test_clipscore():
    assert clipscore_aggregate([0.32]) == pytest.approx(0.8, abs=1e-15)
    assert clipscore_aggregate([0.4, 0.4, 0.4]) == 1.0
    assert clipscore_aggregate([-0.2, 0.4]) == 0.5
    with pytest.raises(ValueError):
        clipscore_aggregate([])


def report(correct, total):
    return MetricsReport.from_counts(Counts(words=total, words_correct=correct, images=1))


def test_micro_versus_macro():
    reports = [report(8, 10), report(1, 2)]
    assert aggregate_overall(reports).word_accuracy == 0.75
    assert macro_average(reports)["word_accuracy"] == pytest.approx(0.65)
    even = [report(8, 10), report(2, 10)]
    assert aggregate_overall(even).word_accuracy == 0.5


def test_aggregate_requires_words():
    with pytest.raises(ValueError):
        aggregate_overall([MetricsReport.from_counts(Counts())])


@given(st.lists(st.tuples(st.integers(0, 20), st.integers(1, 20)), min_size=1, max_size=6))
def test_micro_is_pooled_ratio(pairs):
    pairs = [(min(c, t), t) for c, t in pairs]
    overall = aggregate_overall([report(c, t) for c, t in pairs])
    assert overall.word_accuracy == sum(c for c, _ in pairs) / sum(t for _, t in pairs)


def test_counts_addition_is_associative():
    rng = random.Random(0)
    cs = [Counts(*(rng.randint(0, 9) for _ in range(8))) for _ in range(3)]
    assert (cs[0] + cs[1]) + cs[2] == cs[0] + (cs[1] + cs[2])


def test_evaluate_record():
    counts = evaluate_record(["Grand Opening", "Sale"], OcrOutput.from_texts("GRAND", "OPENING", "sole"))
    assert (counts.words, counts.words_correct) == (3, 2)
    assert (counts.spans, counts.spans_matched) == (2, 1)
    assert (counts.targets, counts.targets_recalled) == (2, 1)
    assert counts.images == 1


def test_report_json_has_counts():
    body = report(3, 4).to_json()
    assert body["word_accuracy"] == 0.75
    assert body["counts"]["words"] == 4
