"""CLI dispatch, file formats, exit codes, cache behavior."""

import json
import os
from pathlib import Path

import pytest

from gkmgw import presets
from gkmgw.cache import ResultCache, cache_key
from gkmgw.cli import run_command
from gkmgw.io import load_target, save_target


@pytest.fixture()
def specs(tmp_path):
    paths = {}
    for name in ("p1", "p2", "f0", "f2"):
        t = presets.preset(name)
        p = tmp_path / f"{name}.json"
        save_target(t, p)
        paths[name] = str(p)
    ins = tmp_path / "pts.json"
    ins.write_text(json.dumps({"insertions": [{"class": "H^2"}, {"class": "H^2"}]}))
    paths["pts"] = str(ins)
    bad = tmp_path / "bad.json"
    save_target(presets.paper_p2_action(), bad)
    paths["bad"] = str(bad)
    paths["cache"] = str(tmp_path / "cache")
    return paths


def test_target_validate_ok(specs, capsys):
    assert run_command(["target", "validate", specs["f0"]]) == 0
    out = capsys.readouterr().out
    assert "4 fixed points" in out and "ok" in out


def test_target_validate_rejects_collinear(specs, capsys):
    assert run_command(["target", "validate", specs["bad"]]) == 1
    assert "collinear" in capsys.readouterr().out


def test_target_preset_roundtrip(tmp_path):
    out = tmp_path / "f2.json"
    assert run_command(["target", "preset", "--name", "f2", "-o", str(out)]) == 0
    t = load_target(out)
    assert len(t.points) == 4
    assert t.validate().ok


def test_invariant_and_cache_equality(specs, capsys):
    argv = [
        "invariant",
        "--target", specs["p2"],
        "--class", "1",
        "--insertions", specs["pts"],
        "--cache-dir", specs["cache"],
    ]
    assert run_command(argv) == 0
    first = capsys.readouterr().out
    assert run_command(argv) == 0
    second = capsys.readouterr().out
    assert "cache hit" in second
    # identical canonical value and identical JSON record
    strip = lambda text: [l for l in text.splitlines() if not l.startswith("#")]
    assert strip(first) == strip(second)
    # cache bypass agrees too
    assert run_command(argv + ["--no-cache"]) == 0
    third = capsys.readouterr().out
    assert strip(first) == strip(third)
    assert "1" in first


def test_invariant_malformed_class_is_input_error(specs):
    assert (
        run_command(
            ["invariant", "--target", specs["p2"], "--class", "1,2,3",
             "--insertions", specs["pts"], "--no-cache"]
        )
        == 2
    )


def test_invariant_invalid_target_is_input_error(specs):
    assert (
        run_command(
            ["invariant", "--target", specs["bad"], "--class", "1",
             "--insertions", specs["pts"], "--no-cache"]
        )
        == 2
    )


def test_record_reproducibility(specs, tmp_path):
    rec1, rec2 = str(tmp_path / "a.json"), str(tmp_path / "b.json")
    base = [
        "invariant", "--target", specs["p1"], "--class", "1",
        "--mode", "evaluated", "--no-cache",
    ]
    ins = tmp_path / "ins.json"
    ins.write_text(json.dumps({"insertions": [{"class": "delta:p0"}, {"class": "delta:p1"}]}))
    assert run_command(base + ["--insertions", str(ins), "--out", rec1]) == 0
    assert run_command(base + ["--insertions", str(ins), "--out", rec2]) == 0
    assert Path(rec1).read_bytes() == Path(rec2).read_bytes()
    record = json.loads(Path(rec1).read_text())
    assert record["value"] == "1"
    assert record["graphs"] == 4
    assert "inputs_hash" in record and "seed" in record


def test_jfun_verify_ok_and_fault(specs):
    assert run_command(["jfun", "verify", "--target", specs["p1"], "--degree", "2"]) == 0
    assert (
        run_command(
            ["jfun", "verify", "--target", specs["p1"], "--degree", "1", "--selftest-fault"]
        )
        == 1
    )


def test_jfun_compute_prints_series(specs, capsys):
    assert run_command(
        ["jfun", "compute", "--target", specs["p1"], "--degree", "1", "--point", "p0"]
    ) == 0
    out = capsys.readouterr().out
    assert "Q^0: 1" in out and "Q^(1):" in out


def test_oracle_commands(capsys):
    assert run_command(["oracle", "wdvv-p2", "--dmax", "3"]) == 0
    assert "N_3 = 12" in capsys.readouterr().out
    assert run_command(["oracle", "wdvv-f0", "--bound", "2,2"]) == 0
    assert "N_(2, 2) = 12" in capsys.readouterr().out
    assert run_command(["oracle", "psi", "--n", "5"]) == 0
    capsys.readouterr()


def test_compare_cli_small(specs, capsys):
    code = run_command(
        [
            "compare",
            "--source", specs["f0"],
            "--target", specs["f2"],
            "--mode", "nonequivariant",
            "--bound", "4",
            "--cache-dir", specs["cache"],
        ]
    )
    out = capsys.readouterr().out
    assert code == 0
    assert "comparisons equal" in out


def test_cache_ls_and_clear(specs, capsys):
    cache = ResultCache(specs["cache"])
    cache.put({"k": 1}, {"value": "7"})
    assert run_command(["cache", "ls", "--cache-dir", specs["cache"]]) == 0
    assert capsys.readouterr().out.strip()
    assert run_command(["cache", "clear", "--cache-dir", specs["cache"]]) == 0
    assert cache.get({"k": 1}) is None


def test_cache_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("GKMGW_CACHE_DIR", str(tmp_path / "envcache"))
    cache = ResultCache()
    cache.put({"a": 2}, {"value": "3"})
    assert (tmp_path / "envcache").exists()
    assert cache.get({"a": 2}) == {"value": "3"}


def test_cache_key_stable():
    assert cache_key({"b": 1, "a": 2}) == cache_key({"a": 2, "b": 1})


def test_usage_error_exit_code():
    assert run_command(["invariant"]) == 2
    assert run_command([]) == 2
