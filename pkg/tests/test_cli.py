import json
import subprocess
import sys

import pytest

from qualimeta.cli import main, parse_clock
from qualimeta.synth import simulate_responses, designed_truth, write_responses
from qualimeta.analytics import truth_to_dict
from conftest import write_csv

CLOCK = "2024-05-01T12:00:00Z"


def sights(tmp_path, name, n=5):
    return write_csv(
        tmp_path / f"{name}.csv",
        ["spot", "lat", "lon", "opened"],
        [[f"s{i}", f"35.{i}", f"139.{i}", f"2020-01-0{i + 1}"] for i in range(n)],
    )


def write_config(tmp_path, datasets, **extra):
    cfg = {"run_id": "t", "field_label": "sightseeing", "datasets": datasets, **extra}
    path = tmp_path / "run.json"
    path.write_text(json.dumps(cfg), encoding="utf-8")
    return path


def test_profile_one_dataset(tmp_path):
    sights(tmp_path, "a")
    cfg = write_config(tmp_path, [{"path": "a.csv", "id": "A"}])
    assert main(["profile", "--config", str(cfg), "--out", str(tmp_path / "o"), "--clock", CLOCK]) == 0
    files = list((tmp_path / "o").iterdir())
    assert [f.name for f in files] == ["A.profile.json"]
    doc = json.loads(files[0].read_text())
    assert doc["generated_at"] == "2024-05-01T12:00:00+00:00"
    assert doc["profile"]["quantity"]["rows"] == 5


def test_profile_missing_file(tmp_path, capsys):
    cfg = write_config(tmp_path, [{"path": "ghost.csv", "id": "G"}])
    assert main(["profile", "--config", str(cfg)]) == 1
    assert "ghost.csv" in capsys.readouterr().err


def test_profile_duplicate_ids(tmp_path):
    sights(tmp_path, "a")
    cfg = write_config(tmp_path, [{"path": "a.csv", "id": "A"}, {"path": "a.csv", "id": "A"}])
    assert main(["profile", "--config", str(cfg)]) == 2


def test_bad_config_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    assert main(["profile", "--config", str(path)]) == 2


def test_compare_three_datasets(tmp_path):
    for n in "abc":
        sights(tmp_path, n, n=4 + "abc".index(n))
    cfg = write_config(tmp_path, [{"path": f"{n}.csv", "id": n.upper()} for n in "abc"])
    out = tmp_path / "out"
    assert main(["compare", "--config", str(cfg), "--out", str(out), "--clock", CLOCK]) == 0
    assert sorted(p.name for p in out.iterdir()) == ["t.quality.json", "t.report.html"]
    doc = json.loads((out / "t.quality.json").read_text())
    assert doc["comparison"]["quantity"]["ranking"] == [["C"], ["B"], ["A"]]


def test_compare_rerun_byte_identical(tmp_path):
    for n in "ab":
        sights(tmp_path, n)
    cfg = write_config(tmp_path, [{"path": f"{n}.csv", "id": n.upper()} for n in "ab"])
    outs = []
    for run in ("r1", "r2"):
        out = tmp_path / run
        assert main(["compare", "--config", str(cfg), "--out", str(out), "--clock", CLOCK, "--seed", "7"]) == 0
        outs.append([(out / f).read_bytes() for f in ("t.quality.json", "t.report.html")])
    assert outs[0] == outs[1]


def test_compare_needs_two(tmp_path):
    sights(tmp_path, "a")
    cfg = write_config(tmp_path, [{"path": "a.csv", "id": "A"}])
    assert main(["compare", "--config", str(cfg)]) == 2


def _survey_files(tmp_path):
    truth = designed_truth()
    responses = tmp_path / "responses.csv"
    per_cat = {"experienced": 2, "semi_experienced": 1, "inexperienced": 1}
    write_responses(simulate_responses(truth, per_cat, seed=0), responses)
    truth_path = tmp_path / "truth.json"
    truth_path.write_text(json.dumps(truth_to_dict(truth)), encoding="utf-8")
    return responses, truth_path


def test_survey_ok(tmp_path):
    responses, truth = _survey_files(tmp_path)
    out = tmp_path / "a" / "analytics.json"
    assert main(["survey", "--responses", str(responses), "--truth", str(truth), "--out", str(out)]) == 0
    assert json.loads(out.read_text())["records"]


def test_survey_rating_six(tmp_path, capsys):
    responses, truth = _survey_files(tmp_path)
    lines = responses.read_text().splitlines()
    parts = lines[3].split(",")
    parts[5] = "6"
    lines[3] = ",".join(parts)
    responses.write_text("\n".join(lines) + "\n")
    code = main(["survey", "--responses", str(responses), "--truth", str(truth), "--out", str(tmp_path / "x.json")])
    assert code == 1
    assert "line 4" in capsys.readouterr().err


def test_survey_header_only(tmp_path):
    responses, truth = _survey_files(tmp_path)
    responses.write_text(responses.read_text().splitlines()[0] + "\n")
    code = main(["survey", "--responses", str(responses), "--truth", str(truth), "--out", str(tmp_path / "x.json")])
    assert code == 1


def test_unknown_flag_exits_two():
    with pytest.raises(SystemExit) as exc:
        main(["compare", "--config", "x.json", "--frobnicate"])
    assert exc.value.code == 2


def test_help_lists_every_flag():
    out = subprocess.run([sys.executable, "-m", "qualimeta", "compare", "--help"],
                         capture_output=True, text=True, check=True).stdout
    for flag in ("--config", "--out", "--seed", "--clock"):
        assert flag in out
    out = subprocess.run([sys.executable, "-m", "qualimeta", "survey", "--help"],
                         capture_output=True, text=True, check=True).stdout
    for flag in ("--responses", "--truth", "--out"):
        assert flag in out


def test_missing_config_is_config_error(tmp_path):
    assert main(["profile", "--config", str(tmp_path / "nope.json")]) == 2


def test_no_color_env(monkeypatch):
    from qualimeta import cli

    class Tty:
        def isatty(self):
            return True

    monkeypatch.setattr(cli.sys, "stderr", Tty())
    monkeypatch.delenv("QUALIMETA_NO_COLOR", raising=False)
    assert "\033[" in cli._color("31", "x")
    monkeypatch.setenv("QUALIMETA_NO_COLOR", "1")
    assert cli._color("31", "x") == "x"


def test_parse_clock():
    assert parse_clock("2024-01-01T00:00:00Z").isoformat() == "2024-01-01T00:00:00+00:00"
    assert parse_clock("2024-01-01T09:00:00").tzinfo is not None
