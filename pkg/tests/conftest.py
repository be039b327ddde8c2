import pytest

from actusim import ActuatorParams, ziegler_nichols_tune


@pytest.fixture(scope="session")
def zn_result():
    """One Ziegler-Nichols tune of the default plant, shared across tests."""
    return ziegler_nichols_tune(ActuatorParams())


@pytest.fixture(scope="session")
def artifacts(tmp_path_factory):
    """Scenario artifact directories, produced once per session."""
    import time

    from actusim.experiments import run

    root = tmp_path_factory.mktemp("artifacts")
    out = {}
    timings = {}
    for scenario in ("staircase", "trajectory", "beam-step", "beam-trajectory", "disturbance"):
        t0 = time.perf_counter()
        results = run(scenario, out_dir=str(root / scenario))
        timings[scenario] = time.perf_counter() - t0
        out[scenario] = {r.name: r for r in results}
    return {"root": root, "results": out, "timings": timings}
