from __future__ import annotations

import json

import pytest

from treecoh import cli
from treecoh.cli import CHECKS, Check, Config, exit_code, main, run
from treecoh.dl import dl_graph, edge_list_csv
from treecoh.errors import ConfigError, TruncationDepthError


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_checks_listing(capsys):
    assert main(["checks"]) == 0
    assert capsys.readouterr().out.split() == list(CHECKS)


def test_empty_check_list(tmp_path):
    out = tmp_path / "r.json"
    assert main(["run", "--config", write(tmp_path, {"d": 2, "q": 2, "N": 3}), "--out", str(out)]) == 0
    rep = json.loads(out.read_text())
    assert rep["records"] == [] and rep["schema"] == 1 and len(rep["config_hash"]) == 64


@pytest.mark.parametrize("obj,kind", [
    ({"d": 2, "q": 2, "N": 2, "checks": ["zero_chain"]}, "TruncationDepthError"),
    ({"d": 2, "q": 2, "N": 3, "windows": {"death": 4}, "checks": ["horoball_vanishing"]}, "TruncationDepthError"),
    ({"d": 2, "q": 2, "N": 3, "windows": {"stages": [3]}, "checks": ["corner_model"]}, "TruncationDepthError"),
    ({"d": 2, "q": 2, "N": 3, "bogus": 1}, "ConfigError"),
    ({"d": 2, "q": [2], "N": 3}, "ConfigError"),
    ({"d": 2, "q": 1, "N": 3}, "ConfigError"),
    ({"d": 2, "q": 2, "N": 3, "checks": ["nope"]}, "ConfigError"),
    ({"d": 2, "q": 2, "N": 3, "horoballs": [{"ends": ["up"], "r": 0}]}, "ConfigError"),
    ({"d": 2, "q": 2, "N": 3, "horoballs": [{"ends": ["up", "sideways"], "r": 0}]}, "ConfigError"),
])
def test_config_errors_exit_two(tmp_path, capsys, obj, kind):
    code = main(["run", "--config", write(tmp_path, obj), "--out", str(tmp_path / "r.json")])
    assert code == 2
    err = json.loads(capsys.readouterr().err)
    assert err["error"] == "config" and err["type"] == kind
    assert not (tmp_path / "r.json").exists()


def test_depth_error_names_the_requirement():
    with pytest.raises(TruncationDepthError, match="needs depth N >= 3"):
        Config.from_json_obj({"d": 2, "q": 2, "N": 2, "checks": ["zero_chain"]})


def test_missing_config_file(tmp_path, capsys):
    assert main(["run", "--config", str(tmp_path / "absent.json")]) == 2
    assert json.loads(capsys.readouterr().err)["type"] == "FileNotFoundError"


def test_bad_thread_count(tmp_path):
    assert main(["run", "--config", write(tmp_path, {"d": 2}), "--threads", "0"]) == 2


SMALL = {"d": 2, "q": 2, "N": 3, "horoballs": [{"ends": ["up", "up"], "r": 1}],
         "checks": ["exactalg_oracle", "multi_horoball", "zero_chain", "corner_model"],
         "windows": {"stages": [1]}, "samples": 40}


def test_reports_are_byte_identical_without_timing(tmp_path):
    cfg = write(tmp_path, SMALL)
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert main(["run", "--config", cfg, "--out", str(a), "--no-timing"]) == 0
    assert main(["run", "--config", cfg, "--out", str(b), "--no-timing", "--threads", "2"]) == 0
    assert a.read_bytes() == b.read_bytes()
    rep = json.loads(a.read_text())
    assert [r["id"] for r in rep["records"]] == SMALL["checks"]
    assert all(r["ms"] == 0 for r in rep["records"])
    assert [r["result"] for r in rep["records"]] == ["pass", "pass", "pass", "pass"]


def test_config_hash_ignores_key_order():
    a = Config.from_json_obj({"d": 2, "q": 2, "N": 3})
    b = Config.from_json_obj({"N": 3, "q": 2, "d": 2})
    assert a.hash() == b.hash()
    assert a.hash() != Config.from_json_obj({"d": 2, "q": 2, "N": 4}).hash()


def test_horoball_checks_without_horoballs_are_not_applicable():
    cfg = Config.from_json_obj({"d": 2, "q": 2, "N": 3, "checks": ["multi_horoball"]})
    rep = run(cfg, timing=False)
    assert rep["records"][0]["result"] == "not-applicable"
    assert exit_code(rep) == 0


def test_failing_check_exits_one(tmp_path, monkeypatch):
    def broken(cfg, seed):
        raise ConfigError("deliberately broken")

    monkeypatch.setitem(cli.CHECKS, "exactalg_oracle", Check("exactalg_oracle", broken, lambda c: (1, "")))
    out = tmp_path / "r.json"
    code = main(["run", "--config", write(tmp_path, {"d": 2, "checks": ["exactalg_oracle"]}), "--out", str(out)])
    assert code == 1
    rec = json.loads(out.read_text())["records"][0]
    assert rec["result"] == "fail" and rec["data"]["error"]["type"] == "ConfigError"


def test_dl_graph_export(tmp_path):
    out = tmp_path / "g.csv"
    assert main(["dl-graph", "--q", "2", "--N", "1", "--out", str(out)]) == 0
    assert out.read_text() == edge_list_csv(dl_graph(2, 1))


def test_dl_graph_bad_input(capsys):
    assert main(["dl-graph", "--q", "1", "--N", "1"]) == 2
    assert json.loads(capsys.readouterr().err)["error"] == "input"
