"""Shared fixtures.

The expensive {3,5,7} sweep row at M = 11025 is computed once per session and
shared by every test that needs its counts or its violating candidates.
"""

from __future__ import annotations

import time

import pytest

from steptile import run_sweep, sweep_config


ACCEPTANCE_LINES: list[str] = []


def pytest_configure(config):
    config.addinivalue_line(
        "markers",
        "extended: long non-gating runs, enabled by STEPTILE_EXTENDED_SWEEP=1",
    )


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sweep_row_357(tmp_path_factory):
    """Full sweep of the prime-power row (3, 5, 7) at M = 11025.

    Returns a dict with the SweepRow, the rendered CSV/JSONL text and the
    wall-clock time of the run.  Single-process, float prescreen + exact
    confirmation; roughly half an hour on one core.
    """
    out_dir = tmp_path_factory.mktemp("sweep357")
    cfg = sweep_config(
        M=11025,
        rows=((3, 5, 7),),
        output_path=str(out_dir / "row357.csv"),
        checkpoint_path=str(out_dir / "row357.ckpt"),
    )
    t0 = time.monotonic()
    rows = run_sweep(cfg, jobs=1)
    elapsed = time.monotonic() - t0
    assert len(rows) == 1
    csv_text = (out_dir / "row357.csv").read_text()
    violators_text = (out_dir / "row357.csv.violators.jsonl").read_text()
    return {
        "row": rows[0],
        "csv": csv_text,
        "violators": violators_text,
        "elapsed": elapsed,
    }
