"""The demo scripts must keep running as the API evolves."""

import pathlib
import subprocess
import sys

import pytest

_DEMOS = sorted(
    (pathlib.Path(__file__).resolve().parent.parent / "demos").glob("*.py")
)


def test_demo_scripts_exist():
    names = {path.stem for path in _DEMOS}
    assert names == {"detection_tradeoff", "power_window", "spectrum_hopping"}


@pytest.mark.parametrize("script", _DEMOS, ids=lambda p: p.stem)
def test_demo_runs_clean(script):
    proc = subprocess.run(
        [sys.executable, str(script)],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0, proc.stderr
    assert len(proc.stdout.splitlines()) > 5
    assert proc.stderr == ""
