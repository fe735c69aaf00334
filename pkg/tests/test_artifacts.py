import csv

import pytest

from artifacts import ARTIFACT_SCHEMA_VERSION, ArtifactError, ArtifactWriter, read_json


def test_csv_has_header_and_exact_numbers(tmp_path):
    writer = ArtifactWriter(tmp_path / "out")
    path = writer.write_csv(
        "metrics.csv",
        ["seed", "rate", "stable", "note"],
        [{"seed": 0, "rate": 0.1, "stable": True, "note": "ok"}, {"seed": 1, "rate": 1 / 3}],
    )
    with open(path, encoding="utf-8") as f:
        rows = list(csv.reader(f))
    assert rows[0] == ["seed", "rate", "stable", "note"]
    assert rows[1] == ["0", "0.1", "1", "ok"]
    assert float(rows[2][1]) == 1 / 3
    assert rows[2][3] == ""
    assert not list((tmp_path / "out").glob("*.tmp"))


def test_json_carries_schema_version(tmp_path):
    writer = ArtifactWriter(tmp_path)
    path = writer.write_json("summary.json", {"name": "x", "value": 1.5})
    data = read_json(path)
    assert data == {"schema_version": ARTIFACT_SCHEMA_VERSION, "name": "x", "value": 1.5}
    assert writer.written == [path]


def test_rewrite_replaces_file(tmp_path):
    writer = ArtifactWriter(tmp_path)
    writer.write_json("summary.json", {"n": 1})
    writer.write_json("summary.json", {"n": 2})
    assert read_json(tmp_path / "summary.json")["n"] == 2


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("not a directory")
    with pytest.raises(ArtifactError):
        ArtifactWriter(blocker)


def test_read_json_errors(tmp_path):
    with pytest.raises(ArtifactError):
        read_json(tmp_path / "missing.json")
    broken = tmp_path / "broken.json"
    broken.write_text("{")
    with pytest.raises(ArtifactError):
        read_json(broken)
