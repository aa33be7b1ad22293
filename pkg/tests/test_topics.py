from pathlib import Path

import pytest

from fieldlens import topics
from fieldlens.communities import Partition
from fieldlens.errors import BadMapFile, NoLabelsFound
from fieldlens.topics import TopicLabel

from conftest import corpus_from

DATA = Path(__file__).parent / "data"

PAPERS = [
    {"doi": "10.1/a", "title": "Token  voting\nin DAOs", "abstract": "Votes are  cast on chain.", "fields": ["BE"]},
    {"doi": "10.1/b", "title": "Smart contract audits", "abstract": None, "fields": ["CS"]},
    {"doi": "10.1/c", "title": "Treasury rules", "abstract": "   ", "fields": ["BE"]},
]
PARTITION = Partition({"10.1/c": 0, "10.1/a": 0, "10.1/b": 1, "10.9/x": 1}, 0.1, seed=0)


def bundles():
    return topics.build_bundles(PARTITION, corpus_from(PAPERS))


def test_line_format_golden():
    text = topics.render_bundle_file(bundles(), header="Label each community.\n")
    assert text.encode("utf-8") == (DATA / "topics_golden.txt").read_bytes()


def test_single_entry_has_two_separators():
    line = topics.render_entry("T", "A", 0)
    assert line == "T --- A --- 0" and line.count(" --- ") == 2


def test_missing_abstract():
    assert topics.render_entry("T", None, 3) == "T --- Not found --- 3"
    assert topics.render_entry("T", "", 3).endswith("--- Not found --- 3")


def test_empty_community_still_emitted():
    p = Partition({"10.1/a": 0, "10.1/b": 2}, 0.0, seed=0)
    bs = topics.build_bundles(p, corpus_from(PAPERS))
    assert [b.community_id for b in bs] == [0, 1, 2] and bs[1].entries == ()


def test_default_header_present():
    text = topics.render_bundle_file(bundles())
    assert text.startswith(topics.default_header().rstrip("\n") + "\n\n")
    assert "Community number: 0 --- Description:" in topics.default_header()


def test_parse_single():
    [lab] = topics.parse_labels("Community number: 0 --- Description: DAO governance and security")
    assert (lab.community_id, lab.description) == (0, "DAO governance and security")


def test_parse_tolerant_and_ordered():
    text = "  Community number: 0 --- Description: Token voting schemes ,\n" \
           "noise\n**Community Number: 1 --- Description: *Contract security audits***\n"
    labs = topics.parse_labels(text)
    assert [(l.community_id, l.description) for l in labs] == [(0, "Token voting schemes"), (1, "Contract security audits")]


def test_parse_duplicate_last_wins(caplog):
    labs = topics.parse_labels("Community number: 0 --- Description: first one here\n"
                               "Community number: 0 --- Description: second one here\n")
    assert [l.description for l in labs] == ["second one here"]
    assert "twice" in caplog.text


def test_parse_garbage():
    with pytest.raises(NoLabelsFound):
        topics.parse_labels("nothing useful\n")


def test_roundtrip_ids():
    bs = bundles()
    answer = "".join(f"Community number: {b.community_id} --- Description: words for {b.community_id}\n" for b in bs)
    assert {l.community_id for l in topics.parse_labels(answer)} == {b.community_id for b in bs}
    assert topics.parse_labels(topics.render_labels(topics.parse_labels(answer))) == topics.parse_labels(answer)


def write_map(tmp_path, text):
    p = tmp_path / "map.csv"
    p.write_text(text)
    return p


def test_normalize_exact_and_pattern(tmp_path):
    m = write_map(tmp_path, "pattern,canonical\nblockchain governance models,Blockchain governance\n"
                            "on-chain governance.*,Blockchain governance\n")
    labs = [TopicLabel(0, "Blockchain Governance Models"), TopicLabel(1, "On-chain governance design"),
            TopicLabel(2, "Token economics")]
    out = topics.normalize_labels(labs, m)
    assert [l.normalized for l in out] == ["Blockchain governance", "Blockchain governance", "Token economics"]


def test_normalize_empty_map(tmp_path):
    m = write_map(tmp_path, "pattern,canonical\n")
    out = topics.normalize_labels([TopicLabel(0, "Token economics")], m)
    assert out[0].normalized == "Token economics"


def test_bad_map(tmp_path):
    with pytest.raises(BadMapFile):
        topics.normalize_labels([], write_map(tmp_path, "raw,label\nx,y\n"))
    with pytest.raises(BadMapFile):
        topics.normalize_labels([], write_map(tmp_path, "pattern,canonical\n(unclosed,y\n"))
    with pytest.raises(BadMapFile):
        topics.normalize_labels([], tmp_path / "absent.csv")


def test_rendering_deterministic():
    assert topics.render_bundle_file(bundles()) == topics.render_bundle_file(bundles())
