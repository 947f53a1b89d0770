"""CLI subcommands driven in-process, plus one live serve subprocess."""

import json
import os
import subprocess
import sys
import urllib.request
from pathlib import Path

import pytest

from mindcap.cli import EXIT_CHAIN, EXIT_OK, EXIT_VALIDATION, main

SCENARIO_TEXT = """
agent = quiz
episodes = 2
seed = 42
"""

SRC_DIR = str(Path(__file__).resolve().parent.parent / "src")


@pytest.fixture
def scenario_file(tmp_path):
    path = tmp_path / "drill.scenario"
    path.write_text(SCENARIO_TEXT, encoding="utf-8")
    return path


def _run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_run_reports_and_dumps(scenario_file, tmp_path, capsys):
    log = tmp_path / "audit.log"
    snapshot = tmp_path / "store.bin"
    code, out, err = _run_cli(
        capsys,
        "run",
        "--scenario",
        str(scenario_file),
        "--log",
        str(log),
        "--dump-store",
        str(snapshot),
    )
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "ep001: reward=1.0 steps=1"
    assert lines[1] == "ep002: reward=1.0 steps=1"
    assert lines[2].startswith("totals: ops=28 ")
    assert any(line.startswith("head_hash: ") for line in lines)
    assert log.exists() and snapshot.exists()


def test_run_seed_override_changes_the_head(scenario_file, capsys):
    def head(*argv):
        _, out, _ = _run_cli(capsys, *argv)
        return next(l for l in out.splitlines() if l.startswith("head_hash: "))

    base = ("run", "--scenario", str(scenario_file))
    assert head(*base) == head(*base)  # bit-identical reruns
    assert head(*base) != head(*base, "--seed", "43")


def test_report_matches_run_output(scenario_file, tmp_path, capsys):
    log = tmp_path / "audit.log"
    code, run_out, _ = _run_cli(
        capsys, "run", "--scenario", str(scenario_file), "--log", str(log)
    )
    assert code == EXIT_OK
    code, report_out, _ = _run_cli(capsys, "report", str(log))
    assert code == EXIT_OK
    run_lines = {l for l in run_out.splitlines() if l.startswith(("totals:", "head_hash:", "records:"))}
    report_lines = {l for l in report_out.splitlines() if l.startswith(("totals:", "head_hash:", "records:"))}
    assert run_lines == report_lines
    assert "ep001: reward=1.0 steps=1" in report_out


def _tamper(log: Path, needle: str, replacement: str) -> None:
    log.write_text(log.read_text().replace(needle, replacement, 1), encoding="utf-8")


def test_audit_verify_clean_and_tampered(scenario_file, tmp_path, capsys):
    log = tmp_path / "audit.log"
    _run_cli(capsys, "run", "--scenario", str(scenario_file), "--log", str(log))
    code, out, _ = _run_cli(capsys, "audit", "verify", str(log))
    assert code == EXIT_OK
    records = len(log.read_text().splitlines())
    assert out.strip() == f"ok records={records}"

    _tamper(log, "chosen=ans:", "chosen=ans!")
    code, out, err = _run_cli(capsys, "audit", "verify", str(log))
    assert code == EXIT_CHAIN
    assert err.startswith("FAILED first_bad_seq=")
    code, _, err = _run_cli(capsys, "report", str(log))
    assert code == EXIT_CHAIN
    assert "chain verification FAILED" in err


def test_audit_verify_unparseable(tmp_path, capsys):
    log = tmp_path / "audit.log"
    log.write_text("this is not a log\n", encoding="utf-8")
    code, _, err = _run_cli(capsys, "audit", "verify", str(log))
    assert code == EXIT_CHAIN
    assert err.strip() == "FAILED unparseable"


def test_validation_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.scenario"
    bad.write_text(SCENARIO_TEXT + "colour = red\n", encoding="utf-8")
    code, _, err = _run_cli(capsys, "run", "--scenario", str(bad))
    assert code == EXIT_VALIDATION
    assert err.startswith("error: ")
    code, _, err = _run_cli(capsys, "run", "--scenario", str(tmp_path / "absent"))
    assert code == EXIT_VALIDATION


def test_seal_show_is_deterministic(scenario_file, capsys):
    code, first, _ = _run_cli(capsys, "seal", "show", "--scenario", str(scenario_file))
    assert code == EXIT_OK
    code, second, _ = _run_cli(capsys, "seal", "show", "--scenario", str(scenario_file))
    assert first == second
    lines = first.splitlines()
    assert lines[0].startswith("policy_digest: ") and len(lines[0].split(": ")[1]) == 64
    assert lines[1].startswith("budget_digest: ") and len(lines[1].split(": ")[1]) == 64


def test_baseline_show(capsys):
    code, out, _ = _run_cli(capsys, "baseline", "show", "turing-minimal")
    assert code == EXIT_OK
    assert "storage_bits = 10000000" in out
    assert "valid: yes" in out
    code, out, _ = _run_cli(capsys, "baseline", "show", "brain-reference")
    assert code == EXIT_OK
    assert "valid: no" in out
    assert "violation: storage_bits:" in out
    code, _, err = _run_cli(capsys, "baseline", "show", "galaxy-brain")
    assert code == EXIT_VALIDATION


def test_store_restore(scenario_file, tmp_path, capsys):
    snapshot = tmp_path / "store.bin"
    _run_cli(
        capsys, "run", "--scenario", str(scenario_file), "--dump-store", str(snapshot)
    )
    code, out, _ = _run_cli(
        capsys, "store", "restore", str(snapshot), "--capacity-bits", "10000000"
    )
    assert code == EXIT_OK
    assert out.startswith("ok chunks=2 used_bits=")
    code, _, err = _run_cli(
        capsys, "store", "restore", str(snapshot), "--capacity-bits", "8"
    )
    assert code == EXIT_VALIDATION
    data = bytearray(snapshot.read_bytes())
    data[0] ^= 0xFF
    snapshot.write_bytes(bytes(data))
    code, _, err = _run_cli(
        capsys, "store", "restore", str(snapshot), "--capacity-bits", "10000000"
    )
    assert code == EXIT_VALIDATION
    assert "bad magic" in err


def test_serve_subprocess_round_trip(scenario_file):
    env = dict(os.environ, PYTHONPATH=SRC_DIR)
    process = subprocess.Popen(
        [
            sys.executable,
            "-m",
            "mindcap.cli",
            "serve",
            "--scenario",
            str(scenario_file),
            "--supervisor-token",
            "cli-token",
            "--pace",
            "0.01",
        ],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        text=True,
        env=env,
    )
    try:
        banner = process.stdout.readline().strip()
        assert banner.startswith("supervisor listening on http://127.0.0.1:")
        port = int(banner.rsplit(":", 1)[1])
        request = urllib.request.Request(f"http://127.0.0.1:{port}/verify")
        request.add_header("X-Supervisor-Token", "cli-token")
        with urllib.request.urlopen(request, timeout=5.0) as response:
            verdict = json.loads(response.read())
        assert verdict["ok"] is True
        kill = urllib.request.Request(f"http://127.0.0.1:{port}/kill", method="POST")
        kill.add_header("X-Supervisor-Token", "cli-token")
        with urllib.request.urlopen(kill, data=b"", timeout=5.0) as response:
            assert json.loads(response.read())["ok"] is True
    finally:
        process.terminate()
        process.wait(timeout=10)
