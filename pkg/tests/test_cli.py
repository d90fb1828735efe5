import json
import re
import subprocess
import sys

import pytest

from alignppl.cli import DEFAULT_SEED, main


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def strip_wall(text):
    return re.sub(r'"wallMs": [0-9.e+-]+', '"wallMs": 0', text)


def test_analyze_table(capsys):
    code, out, _ = run(["analyze", "--model", "fig4"], capsys)
    assert code == 0
    rows = {line.split()[0]: line.split()[1] for line in out.splitlines()[1:] if line.strip()}
    assert {k for k, v in rows.items() if v == "no"} == {"t2", "t3", "t4", "t5"}
    assert "{λx2.t2, λx3.t3, stoch}" in out


def test_analyze_json_and_constraints(capsys):
    code, out, _ = run(["analyze", "--model", "motivating", "--format", "json",
                        "--dump-constraints"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["schemaVersion"] == 1
    assert {"rate", "n", "wIter"} <= set(obj["aligned"])
    assert obj["constraints"]


def test_analyze_source_file(tmp_path, capsys):
    p = tmp_path / "m.appl"
    p.write_text("let c = assume (Bernoulli 0.5) in if c then let w = weight 2.0 in w else ()")
    code, out, _ = run(["analyze", "--model", str(p), "--format", "json"], capsys)
    assert code == 0 and "w" in json.loads(out)["unaligned"]


@pytest.mark.parametrize("argv", [
    ["smc", "--model", "geometric", "-n", "200"],
    ["smc", "--model", "aircraft", "-n", "100", "--unaligned"],
    ["mcmc", "--model", "motivating", "--steps", "300"],
    ["mcmc", "--model", "geometric", "--steps", "300", "--unaligned"],
    ["oracle", "--model", "fig6b"],
    ["check-align", "--model", "geometric", "--runs", "50"],
])
def test_output_byte_identical_apart_from_wall_time(argv, capsys):
    c1, o1, _ = run(argv, capsys)
    c2, o2, _ = run(argv, capsys)
    assert c1 == c2 == 0
    assert strip_wall(o1) == strip_wall(o2)


def test_seed_flag_and_environment(capsys, monkeypatch):
    argv = ["smc", "--model", "geometric", "-n", "100"]
    _, default, _ = run(argv, capsys)
    assert json.loads(default)["seed"] == DEFAULT_SEED
    monkeypatch.setenv("ALIGNPPL_SEED", "9")
    _, env, _ = run(argv, capsys)
    assert json.loads(env)["seed"] == 9
    _, flag, _ = run(argv + ["--seed", "9"], capsys)
    assert strip_wall(flag) == strip_wall(env)
    monkeypatch.setenv("ALIGNPPL_SEED", "x")
    assert run(argv, capsys)[0] == 1


def test_threads_identical_output(capsys):
    base = ["smc", "--model", "motivating", "-n", "200", "--seed", "3"]
    _, a, _ = run(base, capsys)
    _, b, _ = run(base + ["--threads", "4"], capsys)
    assert strip_wall(a) == strip_wall(b)


def test_out_file(tmp_path, capsys):
    p = tmp_path / "r.json"
    code, out, _ = run(["oracle", "--model", "fig6a", "--out", str(p)], capsys)
    assert code == 0 and out == ""
    obj = json.loads(p.read_text())
    assert {x["value"]: x["probability"] for x in obj["posterior"]} == \
        pytest.approx({True: 0.5, False: 0.5})


def test_csv_outputs(capsys):
    code, out, _ = run(["smc", "--model", "fig6a", "-n", "100", "--format", "csv"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "component,lo,hi,mass"
    assert sum(float(l.split(",")[-1]) for l in lines[1:]) == pytest.approx(1.0)
    code, out, _ = run(["mcmc", "--model", "aircraft", "--steps", "200", "--format", "csv"],
                       capsys)
    assert code == 0 and len(out.splitlines()) > 2
    code, out, _ = run(["oracle", "--model", "fig6b", "--format", "csv"], capsys)
    assert out.splitlines()[0] == "value,probability"


def test_bench(capsys):
    code, out, _ = run(["bench", "--model", "geometric", "--reps", "2", "--warmup", "0",
                        "-n", "100"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert [r["method"] for r in obj["rows"]] == ["smc-aligned", "smc-unaligned"]
    assert obj["speedup"] > 0
    code, out, _ = run(["bench", "--model", "geometric", "--kind", "mcmc", "--reps", "1",
                        "--warmup", "0", "--steps", "100", "--format", "csv"], capsys)
    assert code == 0 and out.count("\n") >= 3


@pytest.mark.parametrize("argv", [
    [],
    ["frobnicate"],
    ["smc"],
    ["smc", "--model", "nope"],
    ["smc", "--model", "geometric", "-n", "0"],
    ["smc", "--model", "geometric", "-n", "1"],
    ["mcmc", "--model", "geometric", "--g", "0"],
    ["mcmc", "--model", "geometric", "--burn", "1.5"],
    ["check-align", "--model", "geometric", "--runs", "1"],
    ["analyze", "--model", "fig4", "--format", "csv"],
])
def test_usage_errors_exit_1(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 1
    assert "usage error" in err


def test_runtime_errors_exit_2(tmp_path, capsys):
    bad = tmp_path / "bad.appl"
    bad.write_text("let x = in x")
    assert run(["analyze", "--model", str(bad)], capsys)[0] == 2
    assert run(["oracle", "--model", "aircraft"], capsys)[0] == 2
    assert run(["oracle", "--model", "geometric", "--max-trace-len", "5"], capsys)[0] == 2
    zero = tmp_path / "zero.appl"
    zero.write_text("let w = weight 0 in 1")
    assert run(["smc", "--model", str(zero), "-n", "10"], capsys)[0] == 2


def test_alignment_violation_exit_3(capsys):
    code, out, _ = run(["check-align", "--model", "geometric", "--names", "x",
                        "--runs", "200"], capsys)
    assert code == 3
    obj = json.loads(out)
    assert obj["verdict"] == "violation" and len(obj["witnessSeeds"]) == 2


def test_console_script_entry_point():
    r = subprocess.run([sys.executable, "-m", "alignppl.cli", "analyze", "--model", "fig6a",
                        "--format", "json"], capture_output=True, text=True)
    assert r.returncode == 0
    assert json.loads(r.stdout)["aligned"]
    r = subprocess.run([sys.executable, "-m", "alignppl.cli", "smc"], capture_output=True,
                       text=True)
    assert r.returncode == 1
