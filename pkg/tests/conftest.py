import pytest

from windowingress import cli, nav, simworld


@pytest.fixture(scope="session")
def world():
    return simworld.WorldModel()


@pytest.fixture(scope="session")
def camera():
    return simworld.Camera()


@pytest.fixture(scope="session")
def reference(world, camera):
    return simworld.reference_histogram(world, camera)


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    """``windowingress simulate`` with the default config: exit status and CSV text."""
    out = tmp_path_factory.mktemp("default_run") / "mission.csv"
    status = cli.main(["simulate", "--output", str(out)])
    return status, out.read_text()


@pytest.fixture(scope="session")
def default_log(default_run):
    """Columns of the default mission CSV."""
    return nav.parse_log_csv(default_run[1])


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'} - {detail}")
