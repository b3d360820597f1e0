import numpy as np
import pytest

from growthbound import (
    DecayFunction,
    RadialWeight,
    build_envelope,
    build_growth_pair,
    build_vmoa_pair,
    nu_coefficients,
    remove_common_zeros,
)

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def inverse_log():
    return DecayFunction.inverse_log()


@pytest.fixture(scope="session")
def vmoa_pair():
    return build_vmoa_pair(J=8)


@pytest.fixture(scope="session")
def growth_power1(inverse_log):
    """power(1) envelope reaching delta = 1e-100 with its inverse-log pair."""
    weight = RadialWeight.power(1.0)
    env = build_envelope(weight, 8.0, -0.1, delta_max=1e-100)
    nu = nu_coefficients(inverse_log, x_seq=env.x)
    pair, report = remove_common_zeros(build_growth_pair(env, nu))
    return {"weight": weight, "env": env, "nu": nu, "pair": pair, "zeros": report}


@pytest.fixture(scope="session")
def envelopes_1e6():
    """The three reference weights at r_max = 1 - 1e-6."""
    out = {}
    for w in (RadialWeight.power(1.0), RadialWeight.power(2.0), RadialWeight.exponential(1.0, 1.0)):
        out[w.describe()] = (w, build_envelope(w, 8.0, -0.1, r_max=1 - 1e-6, K_max=1000))
    return out


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
