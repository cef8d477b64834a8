import csv
import io
import json

import numpy as np
import pytest

from lcahaar import cli
from lcahaar.analysis import CylinderDistribution
from lcahaar.config import CONFIG_ENV, ConfigError, RunConfig, load_config, parse_window

INI = """\
[automaton]
modulus = 2
terms = 1@(-1) + 1@(1)

[character]
terms = 1@(0)

[measure]
kind = bernoulli
weights = 0.9, 0.1

[run]
horizon = 64
window = 0
jobs = 1
"""


@pytest.fixture(autouse=True)
def no_env_config(monkeypatch):
    monkeypatch.delenv(CONFIG_ENV, raising=False)


def run(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.reader(io.StringIO(text)))


# ---------------------------------------------------------------- config


def test_defaults_validate():
    cfg = RunConfig().validate()
    assert cfg.automaton().m == 2 and cfg.window_sites() == [(0,)]


def test_parse_window():
    assert parse_window("0,1,2", 1) == [(0,), (1,), (2,)]
    assert parse_window("(0,0);(1,0)", 2) == [(0, 0), (1, 0)]
    with pytest.raises(ConfigError):
        parse_window("(0,0)", 1)


def test_load_ini_and_json(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text(INI)
    a = load_config(ini)
    data = {"automaton": {"modulus": 2, "terms": "1@(-1) + 1@(1)"}, "character": {"terms": "1@(0)"},
            "measure": {"kind": "bernoulli", "weights": "0.9, 0.1"},
            "run": {"horizon": 64, "window": "0", "jobs": 1}}
    js = tmp_path / "run.json"
    js.write_text(json.dumps(data))
    b = load_config(js)
    assert a.horizon == b.horizon == 64 and a.measure_spec() == b.measure_spec()
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.ini")


@pytest.mark.parametrize("measure", [
    {"kind": "markov", "transition": "0.9 0.1; 0.2 0.8"},
    {"kind": "conditioned", "transition": "0.9 0.1; 0.2 0.8", "lo": "0", "word": "0 1"},
    {"kind": "nstep", "order": "2", "table": "0.7 0.3; 0.4 0.6; 0.2 0.8; 0.5 0.5"},
    {"kind": "haar"},
    {"kind": "uniform"},
])
def test_measure_kinds(measure):
    RunConfig(measure=measure).validate().measure_spec()


@pytest.mark.parametrize("kw", [
    {"modulus": 1}, {"format": "xml"}, {"jobs": 0}, {"horizon": -1},
    {"measure": {"kind": "poisson"}}, {"measure": {"kind": "bernoulli"}},
    {"automaton_terms": "1@(0,1)"}, {"window": ",".join(map(str, range(13)))},
])
def test_invalid_configs(kw):
    with pytest.raises(ConfigError):
        RunConfig(**kw).validate().measure_spec()


# ---------------------------------------------------------------- commands


def test_rank_trace_schema(capsys):
    code, out, err = run(capsys, "rank-trace", "--horizon", "64", "--jobs", "1")
    table = rows(out)
    assert code == 0 and table[0] == ["n", "rank"] and len(table) == 66
    assert table[1] == ["0", "1"] and table[2] == ["1", "2"]
    assert "density_above" in err


def test_decay_schema_and_json(capsys, tmp_path):
    target = tmp_path / "decay.json"
    code, out, _ = run(capsys, "decay", "--horizon", "8", "--format", "json", "--out", str(target), "--jobs", "1")
    body = json.loads(target.read_text())
    assert code == 0 and out == ""
    assert body["columns"] == ["n", "re", "im", "abs", "cesaro"] and len(body["rows"]) == 9
    assert abs(body["rows"][1][3] - 0.64) < 1e-12
    assert "fraction_below_epsilon" in body["summary"]


def test_cylinder_schema(capsys):
    code, out, err = run(capsys, "cylinder", "--horizon", "1", "--jobs", "1")
    table = rows(out)
    assert code == 0 and table[0] == ["method", "word", "probability"]
    got = {(m, w): float(p) for m, w, p in table[1:]}
    assert abs(got[("inversion", "1")] - 0.18) < 1e-12
    assert abs(got[("brute-force", "1")] - 0.18) < 1e-12
    assert "tv_to_haar: 0.32" in err


def test_certify(capsys):
    code, out, _ = run(capsys, "certify")
    table = dict((r[0], r[1]) for r in rows(out)[1:])
    assert code == 0 and table["status"] == "PASS" and abs(float(table["base"]) - 0.8) < 1e-12


def test_gap_scan(capsys):
    code, out, err = run(capsys, "gap-scan", "--automaton", "1@(0)+1@(1)", "--horizon", "255")
    assert code == 0 and rows(out)[0] == ["N", "position"]
    assert "gamma: 2" in err and "target_frequency: 0.125" in err


def test_env_config(capsys, monkeypatch, tmp_path):
    path = tmp_path / "env.ini"
    path.write_text(INI.replace("horizon = 64", "horizon = 5"))
    monkeypatch.setenv(CONFIG_ENV, str(path))
    code, out, _ = run(capsys, "rank-trace")
    assert code == 0 and len(rows(out)) == 7


def test_config_file_flag_and_override(capsys, tmp_path):
    path = tmp_path / "run.ini"
    path.write_text(INI)
    code, out, _ = run(capsys, "rank-trace", "--config", str(path), "--horizon", "3")
    assert code == 0 and len(rows(out)) == 5


# ---------------------------------------------------------------- exit codes


def test_trivial_character_exit_2(capsys):
    code, _, err = run(capsys, "rank-trace", "--character", "")
    assert code == 2 and "trivial" in err


def test_nonprime_gap_scan_exit_2(capsys):
    code, _, err = run(capsys, "gap-scan", "--modulus", "4")
    assert code == 2 and "prime" in err


def test_resource_limit_exit_3(capsys):
    code, _, err = run(capsys, "rank-trace", "--automaton", "1@(0)+1@(1)", "--horizon", "40",
                       "--max-support", "4", "--jobs", "1")
    assert code == 3 and "resource limit" in err


def test_discrepancy_exit_4(capsys, monkeypatch):
    def broken(*args, **kwargs):
        return CylinderDistribution(2, ((0,),), np.array([0.5, 0.5]), "brute-force")

    monkeypatch.setattr(cli, "cylinder_distribution_bruteforce", broken)
    code, _, err = run(capsys, "cylinder", "--horizon", "1", "--jobs", "1")
    assert code == 4 and "differ" in err


def test_trivial_lca_warning(capsys):
    code, _, err = run(capsys, "rank-trace", "--automaton", "1@(3)", "--horizon", "4", "--jobs", "1")
    assert code == 0 and "warning: trivial LCA" in err


def test_selftest_injected_fault(capsys):
    code, out, err = run(capsys, "selftest", "--inject-fault", "lucas", "--only", "1")
    assert code == 4
    assert "[FAIL]  1 Lucas" in out and "criterion 1" in err


def test_selftest_budget(capsys):
    code, _, err = run(capsys, "selftest", "--budget", "0", "--only", "2")
    assert code == 3 and "budget" in err
