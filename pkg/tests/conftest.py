import dataclasses
import time

import numpy as np
import pytest

from bubblefocus.experiments import ExperimentConfig, build_cloud, run_forward, run_time_reversal
from bubblefocus.physics import MediaParams

# criterion id -> (passed, detail), filled by tests/test_acceptance.py
ACCEPTANCE: dict[str, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE, key=lambda k: int(k.split()[0])):
        passed, detail = ACCEPTANCE[key]
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'}  criterion {key}: {detail}")


@pytest.fixture(scope="session")
def media():
    return MediaParams()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(scope="session")
def default_pipeline():
    """Forward and time-reversal runs of the default configuration, with and without bubbles."""
    cfg = ExperimentConfig()
    t = time.perf_counter()
    cloud = build_cloud(cfg)
    rec = run_forward(cfg, cloud)
    tr = run_time_reversal(cfg, rec, cloud)
    elapsed = time.perf_counter() - t

    free_cfg = dataclasses.replace(cfg, volume_fraction=0.0)
    free_cloud = build_cloud(free_cfg)
    free_rec = run_forward(free_cfg, free_cloud)
    free_tr = run_time_reversal(free_cfg, free_rec, free_cloud)
    return {
        "cfg": cfg,
        "cloud": cloud,
        "recordings": rec,
        "reversal": tr,
        "elapsed": elapsed,
        "free_cfg": free_cfg,
        "free_recordings": free_rec,
        "free_reversal": free_tr,
    }
