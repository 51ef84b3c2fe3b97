import json
from pathlib import Path

import pytest
from hypothesis import given
from hypothesis import strategies as st

from cvtgkit.corpus import CorpusError, corpus_stats, extract_targets, load_corpus, parse_record, record_to_json

FIXTURES = Path(__file__).parent / "fixtures" / "corpus"


def test_extract_targets_example():
    assert extract_targets("a sign 'Buy 2 Get 1 Free' above a tag 'Sale'") == ["Buy 2 Get 1 Free", "Sale"]


def test_extract_ignores_apostrophes():
    assert extract_targets("the baker's sign 'Don't Stop' and 'Go'") == ["Don't Stop", "Go"]


def test_extract_typographic_quotes():
    assert extract_targets("a sign ‘Open’ and a tag ‘Closed’") == ["Open", "Closed"]


def test_extract_unbalanced():
    assert extract_targets("a sign 'Open") == []
    assert extract_targets("no quotes at all") == []


@given(st.lists(st.text(alphabet="abc XYZ12", min_size=1, max_size=8).filter(lambda s: s.strip() == s), max_size=4))
def test_extract_roundtrip(contents):
    prompt = " and ".join(f"a sign '{c}'" for c in contents)
    assert extract_targets(prompt) == contents


def minimal(**over):
    rec = {"id": "x", "prompt": "a 'A' and a 'B'", "targets": [{"content": "A"}, {"content": "B"}]}
    rec.update(over)
    return rec


def test_parse_record_defaults():
    rec = parse_record(minimal())
    assert rec.language == "EN" and rec.region_count == 2 and rec.contents == ["A", "B"]
    assert parse_record(record_to_json(rec)) == rec


@pytest.mark.parametrize(
    "over,field",
    [
        ({"id": ""}, "id"),
        ({"language": "FR"}, "language"),
        ({"targets": [{"content": "A"}]}, "targets"),
        ({"targets": [{"content": "A"}, {"content": "C"}]}, "targets"),
        ({"targets": [{"content": "A"}, {"content": "B", "attributes": {"size": "huge"}}]}, "size"),
        ({"targets": [{"content": "A"}, {"content": "B", "attributes": {"weight": 3}}]}, "attributes"),
        ({"targets": [{"content": "A"}, {"content": "  "}]}, "content"),
    ],
)
def test_parse_record_errors_name_the_field(over, field):
    with pytest.raises(CorpusError) as info:
        parse_record(minimal(**over))
    assert field in str(info.value)


def test_duplicate_ids(tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps([minimal(), minimal()]))
    with pytest.raises(CorpusError, match="duplicate"):
        load_corpus(path)


def test_bad_json(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{not json")
    with pytest.raises(CorpusError):
        load_corpus(path)


def test_tiny_stats():
    stats = corpus_stats(load_corpus(FIXTURES / "tiny.json"))
    assert stats.num_prompts == 1
    assert stats.avg_words == 2.0
    assert stats.avg_chars == 5.0
    assert stats.region_histogram == {2: 1.0}
    assert stats.attributed_fraction == 0.0


def test_mixed_stats_use_english_only():
    stats = corpus_stats(load_corpus(FIXTURES / "mixed.json"))
    assert stats.num_prompts == 2
    assert stats.avg_words == 6.0  # "Buy 2 Get 1 Free Sale"
    assert stats.avg_chars == len("Buy 2 Get 1 Free Sale")
    assert stats.region_histogram == {2: 0.5, 3: 0.5}
    assert stats.attributed_fraction == 0.5
    assert json.loads(json.dumps(stats.to_json()))["region_histogram"] == {"2": 0.5, "3": 0.5}


def test_empty_corpus_stats():
    with pytest.raises(CorpusError):
        corpus_stats([])
