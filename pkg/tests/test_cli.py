"""End-to-end checks of the experiment drivers."""

from __future__ import annotations

import json

import pytest

from kdesign import cli
from kdesign.commutant import load_weingarten_table
from kdesign.errors import InternalConsistencyError


def run(argv):
    return cli.main(argv)


def test_vandermonde_artifacts(tmp_path, capsys):
    assert run(["vandermonde", "--k", "6", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "all bounds satisfied" in out
    lines = (tmp_path / "vandermonde_k6.csv").read_text().strip().split("\n")
    assert lines[0] == "i,row_sum,bound,ratio"
    assert len(lines) == 7
    for line in lines[1:]:
        ratio = float(line.split(",")[3])
        assert 0 < ratio <= 1


def test_commutant_archive_round_trip(tmp_path, capsys):
    assert run(["commutant", "--k", "2", "--n", "1", "--out", str(tmp_path)]) == 0
    assert "2 monomials" in capsys.readouterr().out
    table = load_weingarten_table(str(tmp_path / "commutant_k2_n1.json"))
    assert table.k == 2 and table.n == 1


def test_frame_potential_csv(tmp_path, capsys):
    rc = run(
        [
            "frame-potential",
            "--ensemble",
            "haar",
            "--n",
            "1",
            "--k",
            "1",
            "--samples",
            "500",
            "--seed",
            "3",
            "--out",
            str(tmp_path),
        ]
    )
    assert rc == 0
    lines = (
        (tmp_path / "frame_potential_haar_n1_k1_seed3.csv").read_text().strip().split("\n")
    )
    assert lines[0] == "ensemble,n,k,samples,estimate,stderr,seed"
    fields = lines[1].split(",")
    assert fields[0] == "haar"
    assert float(fields[4]) == pytest.approx(1.0, abs=0.2)


def test_decay_csv_byte_identical_across_runs(tmp_path):
    argv = ["decay", "--n", "2", "--k", "1", "--t", "1..2", "--samples", "2000", "--seed", "7"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert run(argv + ["--out", str(a)]) == 0
    assert run(argv + ["--out", str(b)]) == 0
    csv_a = (a / "decay_n2_k1_seed7.csv").read_bytes()
    csv_b = (b / "decay_n2_k1_seed7.csv").read_bytes()
    assert csv_a == csv_b
    header = csv_a.decode().split("\n")[0]
    assert header == "t,distance,stderr,floor,samples,seed"


def test_distinguish_outputs_and_determinism(tmp_path, capsys):
    argv = ["distinguish", "--n", "3", "--t", "0", "--trials", "25", "--seed", "5"]
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert run(argv + ["--out", str(a)]) == 0
    assert "advantage=" in capsys.readouterr().out
    assert run(argv + ["--out", str(b)]) == 0
    for name in (
        "distinguish_n3_t0_seed5_source.csv",
        "distinguish_n3_t0_seed5_haar.csv",
        "distinguish_n3_t0_seed5.json",
    ):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    doc = json.loads((a / "distinguish_n3_t0_seed5.json").read_text())
    assert doc["rows"][0]["l"] == 2
    assert doc["rows"][0]["copies"] == 10
    assert doc["rows"][0]["advantage"] > 0.5


def test_twirl_check_flags_three_design(tmp_path, capsys):
    rc = run(
        ["twirl-check", "--n", "1", "--k", "2", "--inputs", "2", "--seed", "1", "--out", str(tmp_path)]
    )
    assert rc == 0
    out = capsys.readouterr().out
    assert "max clifford-vs-haar gap" in out
    lines = (tmp_path / "twirl_check_n1_k2_seed1.csv").read_text().strip().split("\n")
    assert lines[0] == "input,clifford_vs_haar,idempotence_error"
    for line in lines[1:]:
        assert float(line.split(",")[1]) < 1e-10


def test_manifest_contents(tmp_path):
    assert run(["vandermonde", "--k", "3", "--out", str(tmp_path)]) == 0
    doc = json.loads((tmp_path / "vandermonde_k3.manifest.json").read_text())
    assert doc["schema_version"] == 1
    assert doc["subcommand"] == "vandermonde"
    assert doc["seed"] is None
    assert doc["spec"] == {"k": 3}
    assert doc["artifacts"] == ["vandermonde_k3.csv"]
    assert doc["wall_time_seconds"] >= 0
    assert isinstance(doc["tool_version"], str)


def test_output_dir_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path))
    assert run(["vandermonde", "--k", "2"]) == 0
    assert (tmp_path / "vandermonde_k2.csv").exists()


def test_validation_failure_exits_2(tmp_path, capsys):
    rc = run(["commutant", "--k", "9", "--n", "1", "--out", str(tmp_path)])
    assert rc == 2
    assert "error:" in capsys.readouterr().err


def test_internal_error_exits_3(tmp_path, monkeypatch, capsys):
    def boom(k):
        raise InternalConsistencyError("synthetic")

    monkeypatch.setattr(cli, "vandermonde_bound_check", boom)
    rc = run(["vandermonde", "--k", "2", "--out", str(tmp_path)])
    assert rc == 3
    assert "internal consistency" in capsys.readouterr().err


def test_missing_seed_is_usage_error(tmp_path):
    with pytest.raises(SystemExit) as exc:
        run(["decay", "--n", "2", "--k", "1", "--t", "1..2", "--samples", "100"])
    assert exc.value.code == 2


def test_unknown_flag_is_usage_error():
    with pytest.raises(SystemExit) as exc:
        run(["vandermonde", "--k", "2", "--frobnicate"])
    assert exc.value.code == 2


def test_t_range_parsing():
    assert cli._parse_t_range("1..4") == [1, 2, 3, 4]
    assert cli._parse_t_range("2,5,3") == [2, 5, 3]
    assert cli._parse_t_range("3") == [3]


def test_homeopathy_frame_potential_needs_t(tmp_path, capsys):
    rc = run(
        [
            "frame-potential",
            "--ensemble",
            "homeopathy",
            "--n",
            "2",
            "--k",
            "1",
            "--samples",
            "100",
            "--seed",
            "2",
            "--out",
            str(tmp_path),
        ]
    )
    assert rc == 2
    assert "needs --t" in capsys.readouterr().err
