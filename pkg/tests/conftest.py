import pathlib

import pytest

from apfnav.config import load_config
from apfnav.simulator import compute_metrics, run

SCENARIO_DIR = pathlib.Path(__file__).parent.parent / "scenarios"


@pytest.fixture(scope="session")
def scenario_run():
    """Memoized (config, trace, metrics, wall seconds) per (scenario, mode)."""
    import time

    cache = {}

    def get(name: str, mode: str):
        key = (name, mode)
        if key not in cache:
            config = load_config(SCENARIO_DIR / f"{name}.yaml", mode_override=mode)
            t0 = time.perf_counter()
            trace = run(config)
            wall = time.perf_counter() - t0
            cache[key] = (config, trace, compute_metrics(trace, config), wall)
        return cache[key]

    return get


@pytest.fixture(scope="session")
def scenario_dir():
    return SCENARIO_DIR
