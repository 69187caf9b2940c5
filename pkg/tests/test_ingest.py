import json

import pytest

from src.corpus.ingest import ingest, load_label_lookup
from src.validators import ValidationError


def _write_lines(path, lines):
    path.write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return path


def test_jsonl_record_fields(tmp_path):
    line = json.dumps({"user_id": "u1", "text": "hi", "timestamp_utc": "2010-03-01T13:00:00Z",
                       "latitude": 0.0, "longitude": 0.0, "label": "A"})
    records, rejects = ingest(str(_write_lines(tmp_path / "t.jsonl", [line])))

    assert rejects == []
    assert len(records) == 1
    assert records[0].user_id == "u1"
    assert records[0].hour == 13
    assert records[0].label == "A"


def test_empty_file(tmp_path):
    path = tmp_path / "empty.jsonl"
    path.write_text("", encoding="utf-8")
    assert ingest(str(path)) == ([], [])


def test_half_coordinates_rejected(tmp_path):
    good = json.dumps({"user_id": "u1", "text": "a", "timestamp_utc": "2010-03-01T13:00:00Z"})
    bad = json.dumps({"user_id": "u2", "text": "b", "timestamp_utc": "2010-03-01T13:00:00Z", "latitude": 1.0})
    records, rejects = ingest(str(_write_lines(tmp_path / "t.jsonl", [good, bad])))

    assert [r.user_id for r in records] == ["u1"]
    assert [r.line_number for r in rejects] == [2]


def test_malformed_lines_rejected_with_line_numbers(tmp_path):
    lines = [
        "{not json",
        json.dumps({"user_id": "u1", "text": "x", "timestamp_utc": "yesterday"}),
        json.dumps({"user_id": "u1", "text": "x", "timestamp_utc": "2010-03-01T01:00:00+02:00"}),
    ]
    records, rejects = ingest(str(_write_lines(tmp_path / "t.jsonl", lines)))

    assert [r.line_number for r in rejects] == [1, 2]
    # offsets are normalized to UTC
    assert records[0].hour == 23


def test_missing_file_names_the_path(tmp_path):
    missing = tmp_path / "nope.jsonl"
    with pytest.raises(ValidationError, match="nope.jsonl"):
        ingest(str(missing))


def test_geotext_with_label_lookup(tmp_path):
    tsv = _write_lines(tmp_path / "geo.tsv", [
        "u1\t2010-03-01T13:00:00\t40.7\t-74.0\thello\tworld with a tab",
        "u2\t2010-03-01T14:00:00\t34.0\t-118.2\thi there",
        "u3\tbroken line",
    ])
    labels_path = _write_lines(tmp_path / "labels.tsv", ["u1\tNY", "u2\tCA"])
    records, rejects = ingest(str(tsv), "geotext_tsv", load_label_lookup(str(labels_path)))

    assert [r.label for r in records] == ["NY", "CA"]
    assert records[0].text == "hello\tworld with a tab"
    assert records[0].latitude == 40.7
    assert [r.line_number for r in rejects] == [3]


def test_label_lookup_malformed(tmp_path):
    path = _write_lines(tmp_path / "labels.tsv", ["u1\tNY", "u2"])
    with pytest.raises(ValidationError, match="line 2"):
        load_label_lookup(str(path))
