"""End-to-end CLI flows through subprocesses."""

from __future__ import annotations

import json
import subprocess
import sys

from conftest import agent_users


def run_cli(*args, timeout=240):
    return subprocess.run([sys.executable, "-m", "skyql.cli", *args],
                          capture_output=True, text=True, timeout=timeout)


def test_generate_load_export_query_roundtrip(tmp_path):
    csv_dir = tmp_path / "csv"
    fed_dir = tmp_path / "fed"
    out = run_cli("generate", "--objects", "800", "--seed", "5", "--out", str(csv_dir))
    assert out.returncode == 0, out.stderr
    counts = json.loads(out.stdout)
    assert counts["photoobj"] == 800

    out = run_cli("load", "--csv-dir", str(csv_dir), "--out", str(fed_dir),
                  "--partitions", "2", "--databases", "4")
    assert out.returncode == 0, out.stderr
    loaded = json.loads(out.stdout)
    assert loaded["class_counts"]["PhotoObj"] == 800

    out = run_cli("export", "--federation", str(fed_dir), "--out",
                  str(tmp_path / "export"))
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "export" / "photoobj.csv").read_bytes() == \
        (csv_dir / "photoobj.csv").read_bytes()


def test_serve_and_query_cli(tmp_path, tiny_paths):
    config = {
        "federation": str(tiny_paths["fed"]),
        "listen": {"tcp": 0},
        "users": agent_users(),
        "output_root": str(tmp_path),
    }
    cfg = tmp_path / "agent.json"
    cfg.write_text(json.dumps(config))
    proc = subprocess.Popen([sys.executable, "-m", "skyql.cli", "serve",
                             "--config", str(cfg)],
                            stdout=subprocess.PIPE, text=True)
    try:
        line = proc.stdout.readline()
        assert "tcp port" in line
        port = int(line.split("tcp port")[1].split(",")[0].strip())
        out = run_cli("query", "--server", f"127.0.0.1:{port}",
                      "--user", "astro", "--password", "orion", "--count-only",
                      "SELECT objID FROM Galaxy WHERE r < 22")
        assert out.returncode == 0, out.stderr
        assert int(out.stdout.strip()) > 0
        assert "estimate:" in out.stderr

        sxql_file = tmp_path / "q.sxql"
        sxql_file.write_text("SELECT objID, RA(), DEC() FROM Galaxy WHERE r < 15\n")
        out = run_cli("query", "--server", f"127.0.0.1:{port}",
                      "--user", "astro", "--password", "orion",
                      "--output", str(tmp_path / "rows.csv"), str(sxql_file))
        assert out.returncode == 0, out.stderr
        text = (tmp_path / "rows.csv").read_text()
        assert text.startswith("objID,ra,dec")
    finally:
        proc.terminate()
        proc.wait(timeout=10)


def test_bench_cli_small(tmp_path, tiny_paths):
    out = run_cli("bench", "--federation", str(tiny_paths["fed"]),
                  "--csv-dir", str(tiny_paths["csv"]),
                  "--repetitions", "1", "--queries", "Q3,Q30",
                  "--out", str(tmp_path / "report.json"), timeout=600)
    assert out.returncode == 0, out.stderr + out.stdout
    report = json.loads((tmp_path / "report.json").read_text())
    assert not report["failed"]
    assert "tag scan" in out.stdout
