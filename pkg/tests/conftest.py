import math

import pytest
from hypothesis import HealthCheck, settings

from dirac_selberg.spin import SpinStructure
from dirac_selberg.surfaces import enumerate_length_spectrum, punctured_torus, thrice_punctured_sphere

settings.register_profile("default", max_examples=60, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture(scope="session")
def modular_torus():
    return punctured_torus(3, 3, 3)


@pytest.fixture(scope="session")
def modular_spectrum(modular_torus):
    # r_max 6 needs word cap 14 for the watermark to clear 6
    return enumerate_length_spectrum(modular_torus, 6.0, 14)


@pytest.fixture(scope="session")
def small_spectrum(modular_torus):
    return enumerate_length_spectrum(modular_torus, 4.0, 10)


@pytest.fixture(scope="session")
def sphere():
    return thrice_punctured_sphere()


@pytest.fixture
def plus():
    return SpinStructure((1, 1))


AREA = 2 * math.pi


_ACCEPTANCE: list[str] = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(_ACCEPTANCE):
            terminalreporter.write_line(line)
