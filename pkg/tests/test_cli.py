import json
import os
import socket
import subprocess
import sys
import time

import pytest

from extractorlab import __version__, cli
from extractorlab.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def body(text):
    # drop the timestamp line, keep everything reproducible
    return text.split("\n", 1)[1]


@pytest.mark.parametrize("argv,want", [
    (["eval", "ip", "--p", "3", "--x", "1,2", "--y", "2,2"], "0"),
    (["eval", "mac", "--m", "4", "--poly", "0x13", "--key", "0x3,0x5", "--msg", "0x7"], "0xC"),
    (["eval", "nmext", "--p", "3", "--n", "2", "--x", "1,2", "--y", "2"], "1"),
    (["eval", "nmext", "--p", "3", "--n", "4", "--x", "1,1,1,1", "--y", "1,2"], "1"),
    (["eval", "tre", "--x", "000", "--seed", "101010101", "--l", "2", "--t", "3"], "00"),
])
def test_eval(capsys, argv, want):
    code, out, err = run(capsys, *argv)
    assert code == 0 and out.strip() == want and err == ""


@pytest.mark.parametrize("argv", [
    ["eval", "ip", "--p", "4", "--x", "1", "--y", "1"],
    ["eval", "ip", "--p", "3", "--x", "1,a", "--y", "1,1"],
    ["eval", "mac", "--m", "4", "--key", "0x3", "--msg", "0x7"],
    ["eval", "mac", "--m", "4", "--key", "0x3,0x5", "--msg", "0x17"],
])
def test_eval_parse_errors(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 1 and out == "" and "error" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["verify", "bogus"])
    assert exc.value.code == 1
    assert capsys.readouterr().out == ""


def test_verify_twowise(capsys):
    code, out, _ = run(capsys, "verify", "twowise", "--p", "3", "--n", "2")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# generated ")
    assert lines[1] == f"# profile=desk seed=0 suite=twowise version={__version__}"
    assert lines[2] == "p,n,expected,min_collisions,max_collisions,in_force,holds"
    assert lines[3] == "3,2,3,3,3,1,1"


def test_verify_thm31_rows(capsys):
    code, out, _ = run(capsys, "verify", "thm31", "--instances", "100", "--seed", "7")
    assert code == 0
    rows = [l for l in out.splitlines() if not l.startswith("#")][1:]
    assert len(rows) == 100
    assert all(r.endswith(",1,1") for r in rows)


def test_verify_mac(capsys):
    code, out, _ = run(capsys, "verify", "mac", "--m", "4")
    assert code == 0
    last = out.splitlines()[-1].split(",")
    assert last[:3] == ["4", "0x13", "0.0625"]


@pytest.mark.parametrize("suite", ["twowise", "ext-sweep", "nm-sweep", "mac", "renner", "thm31"])
def test_reports_reproducible(capsys, suite):
    extra = ["--instances", "5"] if suite in ("renner", "thm31") else []
    first = run(capsys, "verify", suite, "--seed", "3", *extra)
    second = run(capsys, "verify", suite, "--seed", "3", *extra)
    assert first[0] == second[0] == 0
    assert body(first[1]) == body(second[1])
    assert "in_force" in first[1]


def test_json_report(capsys, tmp_path):
    path = tmp_path / "r.jsonl"
    code, out, _ = run(capsys, "verify", "nm-sweep", "--format", "json", "--output", str(path))
    assert code == 0 and out == ""
    lines = [json.loads(l) for l in path.read_text().splitlines()]
    assert "generated" in lines[0]
    assert lines[1]["suite"] == "nm-sweep" and "note" in lines[1]
    assert lines[-1]["in_force"] == 1 and lines[-1]["bruteforce_agrees"] == 1


def test_seed_env_override(capsys, monkeypatch):
    monkeypatch.setenv("EXTRACTORLAB_SEED", "42")
    code, out, _ = run(capsys, "verify", "renner", "--instances", "2", "--seed", "1")
    assert code == 0 and "seed=42" in out.splitlines()[1]


def test_violation_exit_code(capsys, monkeypatch):
    monkeypatch.setattr(cli, "two_source_bound", lambda *a: 0.01)
    code, _, err = run(capsys, "verify", "ext-sweep")
    assert code == 2 and "bound violated" in err


def test_regime_exit_code(capsys):
    code, _, err = run(capsys, "verify", "mac", "--m", "6")
    assert code == 2 and "regime" in err


def test_pa_local_identity(capsys):
    code, out, err = run(capsys, "pa", "local", "--profile", "desk32", "--sessions", "1000", "--adv", "identity")
    assert code == 0
    recs = [json.loads(l) for l in out.splitlines()]
    assert len(recs) == 1000 and all(r["correct"] for r in recs)
    summary = json.loads(err.strip().splitlines()[-1])
    assert summary["correct"] == 1000 and summary["seed"] == 0


def test_pa_local_flip(capsys):
    code, out, _ = run(capsys, "pa", "local", "--adv", "flip-msg2-bit0", "--sessions", "10000", "--seed", "9")
    recs = [json.loads(l) for l in out.splitlines()]
    rate = sum(r["rejected"] for r in recs) / len(recs)
    p0 = 1 - 2 ** -9
    assert code == 0 and rate >= p0 - 3 * (p0 * (1 - p0) / len(recs)) ** 0.5


def test_pa_unknown_adversary(capsys):
    code, _, err = run(capsys, "pa", "local", "--adv", "nobody", "--sessions", "1")
    assert code == 1 and "unknown adversary" in err


def _free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def _wait_port(port, timeout=10.0):
    end = time.time() + timeout
    while time.time() < end:
        try:
            socket.create_connection(("127.0.0.1", port), timeout=0.2).close()
            return
        except OSError:
            time.sleep(0.05)
    raise RuntimeError(f"port {port} never opened")


def test_cli_loopback_replays_local(tmp_path):
    exe = [sys.executable, "-m", "extractorlab.cli"]
    env = dict(os.environ)
    env.pop("EXTRACTORLAB_SEED", None)
    n, seed = 30, 5
    pb, pm = _free_port(), _free_port()
    common = ["--sessions", str(n), "--seed", str(seed)]
    bob = subprocess.Popen(exe + ["pa", "bob", "--listen", f"127.0.0.1:{pb}", "--output", str(tmp_path / "b"), *common], env=env)
    # the readiness probe consumes one connection; Bob logs it as a transport error and moves on
    mitm_cmd = exe + ["pa", "mitm", "--listen", f"127.0.0.1:{pm}", "--upstream", f"127.0.0.1:{pb}",
                      "--adv", "identity", "--output", str(tmp_path / "m"), *common]
    try:
        time.sleep(0.5)
        mitm = subprocess.Popen(mitm_cmd, env=env)
        time.sleep(0.5)
        subprocess.run(exe + ["pa", "alice", "--connect", f"127.0.0.1:{pm}", "--output", str(tmp_path / "a"), *common],
                       env=env, check=True, timeout=60)
        mitm.wait(30)
        bob.wait(30)
    finally:
        for p in (bob,):
            if p.poll() is None:
                p.kill()
    local = subprocess.run(exe + ["pa", "local", *common], env=env, capture_output=True, text=True, check=True).stdout
    local = [json.loads(l) for l in local.splitlines()]
    alice = [json.loads(l) for l in (tmp_path / "a").read_text().splitlines()]
    bobr = [json.loads(l) for l in (tmp_path / "b").read_text().splitlines()]
    from extractorlab.pa.net import merge_records

    assert len(alice) == len(bobr) == n
    for a, b, l in zip(alice, bobr, local):
        merged = merge_records(a, b, l["seed"]).to_dict()
        assert all(merged[k] == l[k] for k in merged)
