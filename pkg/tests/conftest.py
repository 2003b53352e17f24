import time

import pytest

from cldsim.cli import DEFAULT_SCENARIO, load_scenario
from cldsim.scenario import run_mission


@pytest.fixture(scope="session")
def table1():
    """The shipped default scenario, loaded once."""
    return load_scenario(DEFAULT_SCENARIO)


@pytest.fixture(scope="session")
def table1_run(table1):
    """One full mission run of the shipped scenario, plus its wall time."""
    start = time.perf_counter()
    run = run_mission(table1.constellation, table1.spec, link_configs=table1.link_configs)
    elapsed = time.perf_counter() - start
    return run, elapsed
