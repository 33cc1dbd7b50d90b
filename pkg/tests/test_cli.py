import json

import pytest

from spinbethe.cli import main, parse_roots


def test_parse_roots():
    assert parse_roots("1i, 0, -1i") == [1j, 0, -1j]
    assert parse_roots("0.5+0.2i,i,-i,3") == [0.5 + 0.2j, 1j, -1j, 3]


def test_expected(capsys):
    assert main(["expected", "--spin", "3/2", "--sites", "8", "--magnons", "12"]) == 0
    assert capsys.readouterr().out.strip() == "364"


def test_verify(capsys):
    assert main(["verify", "--spin", "1", "--sites", "4", "--roots", "1i,0,0,-1i"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["verdict"] == "physical"
    assert out["singular"] and not out["distinct"]
    assert abs(out["energy"] + 2.5) < 1e-9


def test_census_and_classify(tmp_path, capsys):
    out = tmp_path / "run"
    assert main(["census", "--spin", "1", "--sites", "2..3", "--out", str(out)]) == 0
    text = capsys.readouterr().out
    assert "(1,1,1,0; 1)" in text
    for name in ("report.json", "report.csv", "report.txt", "archive_s2_N3_M3.json"):
        assert (out / name).exists()
    assert main(["classify", "--archive", str(out / "archive_s2_N3_M3.json")]) == 0
    assert "(1,1,1,0; 1) expected 1 -> match" in capsys.readouterr().out


def test_bad_input_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["classify", "--archive", str(bad)]) == 2
    assert "VersionMismatch" in capsys.readouterr().err


def test_bad_spin(capsys):
    assert main(["expected", "--spin", "x", "--sites", "3", "--magnons", "1"]) == 2
    assert main(["verify", "--spin", "1", "--sites", "4", "--roots", "1i,zz"]) == 2
    with pytest.raises(SystemExit):
        main(["census"])
