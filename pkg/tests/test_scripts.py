import json
import subprocess
import sys
from pathlib import Path

SCRIPTS = Path(__file__).resolve().parents[1] / "scripts"


def test_case_study_script(tmp_path):
    subprocess.run([sys.executable, str(SCRIPTS / "run_case_study.py"), "--cases", "shallow",
                    "--out", str(tmp_path), "--repeats", "1"], check=True, capture_output=True)
    (row,) = json.loads((tmp_path / "summary.json").read_text())
    assert row["subgroups"][0] == "Subgroup 1: --"
    assert row["mape_proposed_pct"] <= row["mape_traditional_pct"]


def test_boundary_script(tmp_path):
    subprocess.run([sys.executable, str(SCRIPTS / "boundary_figure.py"), "--out", str(tmp_path), "--points", "11"],
                   check=True, capture_output=True)
    assert len((tmp_path / "boundary.csv").read_text().splitlines()) == 12
