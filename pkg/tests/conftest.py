import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from labelboot.montecarlo import SimConfig, simulate_dataset

settings.register_profile("ci", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


@pytest.fixture(scope="session")
def sim_small():
    """A small draw from the interactions design plus its external sample."""
    cfg = SimConfig(n=1500, kappa=1.0, p_bar=0.5, reps=1, B=99, seed=11)
    data, ext = simulate_dataset(cfg, 0)
    return cfg, data, ext


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def acceptance_report(request):
    """Record one pass/fail line per acceptance criterion for the terminal summary."""
    lines = request.config.__dict__.setdefault("_acceptance_lines", [])

    def report(number: int, ok: bool, detail: str):
        line = f"criterion {number:>2}: {'PASS' if ok else 'FAIL'}  {detail}"
        lines.append(line)
        print(line)
        return ok

    return report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.__dict__.get("_acceptance_lines")
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
