import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cvtgkit.matching import best_window, instance_scores, levenshtein, normalize, ocr_stream, partial_ratio
from cvtgkit.ocr import OcrOutput

from oracles import lev_table, partial_ratio_brute

small_text = st.text(alphabet="abcd ", max_size=12)
nonempty = st.text(alphabet="abcd", min_size=1, max_size=8)


def test_normalize_example():
    assert normalize("Buy 2, Get-1 FREE") == "buy 2 get 1 free"


def test_normalize_edges():
    assert normalize("") == ""
    assert normalize("  --  ") == ""
    assert normalize("Ünïcode Straße") == "ünïcode straße"
    assert normalize("价格:100元") == "价格 100元"


@given(st.text(max_size=30))
def test_normalize_idempotent(s):
    once = normalize(s)
    assert normalize(once) == once
    assert "  " not in once
    assert once == once.strip()


@pytest.mark.parametrize("a,b,d", [("kitten", "sitting", 3), ("sale", "sole", 1), ("", "abc", 3), ("abc", "abc", 0)])
def test_levenshtein_examples(a, b, d):
    assert levenshtein(a, b) == d
    assert lev_table(a, b) == d


@given(small_text, small_text)
def test_levenshtein_matches_table(a, b):
    assert levenshtein(a, b) == lev_table(a, b)


@given(small_text, small_text)
def test_levenshtein_symmetric(a, b):
    assert levenshtein(a, b) == levenshtein(b, a)


@given(small_text, small_text, small_text)
def test_levenshtein_triangle(a, b, c):
    assert levenshtein(a, c) <= levenshtein(a, b) + levenshtein(b, c)


@given(small_text, small_text)
def test_levenshtein_bounds(a, b):
    d = levenshtein(a, b)
    assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))


def test_partial_ratio_examples():
    assert partial_ratio("sale", "sole sign") == 0.75
    assert partial_ratio("textcrafter", "text") == pytest.approx(1 - 7 / 11, abs=1e-15)
    assert best_window("sale", "sole sign") == (0.75, 0)
    assert best_window("textcrafter", "text")[1] == -1


def test_partial_ratio_exact_substring():
    assert best_window("sign", "sole sign") == (1.0, 5)


def test_ties_choose_smallest_offset():
    assert best_window("ab", "abab") == (1.0, 0)
    assert best_window("ax", "ab ab")[1] == 0


def test_empty_target_rejected():
    with pytest.raises(ValueError):
        best_window("", "abc")


@settings(max_examples=300)
@given(nonempty, st.text(alphabet="abcd ", max_size=20))
def test_partial_ratio_matches_bruteforce(target, stream):
    assert partial_ratio(target, stream) == partial_ratio_brute(target, stream)


@given(nonempty, st.text(alphabet="abcd ", max_size=20))
def test_partial_ratio_in_unit_interval(target, stream):
    assert 0.0 <= partial_ratio(target, stream) <= 1.0


@given(nonempty, st.text(alphabet="abcd", max_size=6), st.text(alphabet="abcd", max_size=6))
def test_substring_scores_one(target, pre, post):
    assert partial_ratio(target, pre + target + post) == 1.0


def test_offset_points_at_best_window():
    rng = random.Random(3)
    for _ in range(200):
        t = "".join(rng.choice("xyz") for _ in range(rng.randint(1, 5)))
        s = "".join(rng.choice("xyz ") for _ in range(rng.randint(len(t), 15)))
        score, off = best_window(t, s)
        assert 1 - lev_table(t, s[off : off + len(t)]) / len(t) == score
        for k in range(off):
            assert lev_table(t, s[k : k + len(t)]) > lev_table(t, s[off : off + len(t)])


def test_ocr_stream_joins_lines():
    assert ocr_stream(OcrOutput.from_texts("Buy 2", "GET-1")) == "buy 2 get 1"
    assert ocr_stream(OcrOutput()) == ""


def test_instance_scores_open_closed():
    scores = instance_scores(["Open", "Closed"], OcrOutput.from_texts("open"))
    assert scores[0].score == 1.0 and scores[0].best_window_offset == 0
    assert scores[1].score == pytest.approx(1 - 4 / 6, abs=1e-15)
    assert scores[1].best_window_offset == -1


def test_instance_scores_empty_target():
    (s,) = instance_scores(["--"], OcrOutput.from_texts("abc"))
    assert (s.score, s.best_window_offset) == (0.0, -1)
    with pytest.raises(ValueError):
        instance_scores([], OcrOutput())
