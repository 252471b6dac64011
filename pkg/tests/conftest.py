"""Shared fixtures: the long scenario records used by the acceptance tests.

The three scenario fixtures are session scoped because each one costs
minutes of simulation; every acceptance test that needs the same record
reuses it.  Criterion results are collected as one line each and printed
in the terminal summary.
"""

import time

import pytest

from fringelock import default_config, run_scenario

_criterion_lines = []


@pytest.fixture(scope="session")
def criterion_report():
    """Record one `criterion N: PASS/FAIL (...)` line for the summary."""

    def record(label, passed, detail):
        _criterion_lines.append(
            f"criterion {label}: {'PASS' if passed else 'FAIL'} ({detail})"
        )

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _criterion_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in _criterion_lines:
        terminalreporter.write_line(line)


def _sweep(scenario, seeds):
    results = []
    for seed in seeds:
        cfg = default_config(scenario)
        cfg.seed = seed
        results.append(run_scenario(cfg))
    return results


@pytest.fixture(scope="session")
def pol_on_results():
    """Five full control-on records plus the wall time of the first run."""
    cfg = default_config("pol_on")
    cfg.seed = 1
    t0 = time.perf_counter()
    first = run_scenario(cfg)
    runtime_s = time.perf_counter() - t0
    return [first] + _sweep("pol_on", range(2, 6)), runtime_s


@pytest.fixture(scope="session")
def pol_off_results():
    """Five full records with the polarisation controller frozen."""
    return _sweep("pol_off", range(1, 6))


@pytest.fixture(scope="session")
def phase_off_result():
    """One full record with no phase control at perfect overlap."""
    return _sweep("phase_off", [1])[0]
