# -*- coding: utf-8 -*-
import random

import numpy as np
import pytest
from hypothesis import HealthCheck, settings as hypothesis_settings

from kernex.global_side import standard_geometric_functions

hypothesis_settings.register_profile(
    "fast", max_examples=20, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
hypothesis_settings.register_profile("ci", max_examples=100, deadline=None)
hypothesis_settings.load_profile("fast")


def pytest_configure(config):
    config.addinivalue_line("markers", "integration: long-running acceptance runs")


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def np_rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def settings_env():
    return {
        "KERNEX_EXACT_BUDGET": "4096",
        "KERNEX_FLOAT_BUDGET": "0x10000",
        "KERNEX_BLOCK_SIZE": "1_000",
        "KERNEX_IS_NORMALIZATION": "0.5",
        "KERNEX_USE_CACHE": "on",
        "KERNEX_PRIMES": "2, 3,'5'",
        "KERNEX_SHIFT": "1+2i",
    }


@pytest.fixture(scope="session")
def standard_functions():
    return standard_geometric_functions()
