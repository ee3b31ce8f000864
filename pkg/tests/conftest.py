import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from eigenratio import gen_cube_surface, gen_icosphere, gen_torus


def random_rotation(seed):
    return Rotation.random(random_state=seed).as_matrix()


@pytest.fixture(scope="session")
def ico3():
    return gen_icosphere(1.0, 3)


@pytest.fixture(scope="session")
def ico4():
    return gen_icosphere(1.0, 4)


@pytest.fixture(scope="session")
def cube8():
    return gen_cube_surface(1.0, 8)


@pytest.fixture(scope="session")
def torus32():
    return gen_torus(2.0, 1.0, 32, 16)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion after the run

_acceptance = {}


def pytest_runtest_logreport(report):
    props = dict(report.user_properties)
    if "criterion" not in props:
        return
    entry = _acceptance.setdefault(props["criterion"], {"outcome": "passed", "detail": ""})
    if report.failed:
        entry["outcome"] = "failed"
    if props.get("detail"):
        entry["detail"] = props["detail"]
    entry["title"] = props.get("title", "")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for n in sorted(_acceptance):
        e = _acceptance[n]
        verdict = "PASS" if e["outcome"] == "passed" else "FAIL"
        terminalreporter.write_line(f"{verdict} criterion {n:2d} {e['title']}: {e['detail']}")
