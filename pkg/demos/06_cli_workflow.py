"""The file-driven workflow: gen -> solve -> verify -> report.

Game files, profiles, and reports are JSON with rationals as "p/q" strings,
so everything round-trips exactly and reports can be re-verified bit for
bit.  Exit codes: 0 ok, 1 certification failure, 2 input error, 3 guard.
"""

import json
import subprocess
import sys
import tempfile
from pathlib import Path


def run(*args):
    cmd = [sys.executable, "-m", "stopgame.cli", *args]
    print("$", " ".join(args))
    proc = subprocess.run(cmd, capture_output=True, text=True)
    if proc.stdout:
        print(proc.stdout, end="")
    if proc.stderr:
        print(proc.stderr, end="", file=sys.stderr)
    print(f"(exit {proc.returncode})\n")
    return proc.returncode


with tempfile.TemporaryDirectory() as tmp:
    game = Path(tmp) / "game.json"
    report = Path(tmp) / "report.json"
    check = Path(tmp) / "check.json"

    run("gen", "--seed", "7", "--outcomes", "3", "--times", "4",
        "--modulus", "1", "--out", str(game))
    doc = json.loads(game.read_text())
    print("grid:", doc["grid"], " weights:", [o["weight"] for o in doc["outcomes"]])
    print()

    run("solve", "--game", str(game), "--out", str(report))
    rep = json.loads(report.read_text())
    print("certified max gap:", rep["max_gap"], "bound:", rep["bound"], "\n")

    # the report carries the profile; verify recomputes its gaps exactly
    run("verify", "--game", str(game), "--profile", str(report), "--out", str(check))
    chk = json.loads(check.read_text())
    print("solve and verify agree:", rep["max_gap"] == chk["max_gap"], "\n")

    run("report", "--in", str(report))
