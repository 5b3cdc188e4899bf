import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

# criterion number -> (passed, detail); filled by test_acceptance.py
ACCEPTANCE = {}


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[num]
        terminalreporter.write_line(f"criterion {num:2d}: {'PASS' if ok else 'FAIL'}  {detail}")


CONFIGS = __import__("pathlib").Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="session")
def bed_dns():
    """Regenerated pore-resolved bed profile and its run report (about two minutes)."""
    from porelbm.config import parse_config
    from porelbm.runner import run_scenario

    res = run_scenario(parse_config(CONFIGS / "bed_dns.ini"))
    assert res.converged
    return res.profiles["profile"], res.report
