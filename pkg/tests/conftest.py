import random

import mpmath as mp
import pytest

from rollwave.elliptic import frame_from_decimal


@pytest.fixture(scope="session")
def frames():
    return {
        "0.5": frame_from_decimal("0.5"),
        "0.9": frame_from_decimal("0.9"),
        "0.99": frame_from_decimal("0.99"),
    }


@pytest.fixture(scope="session")
def frame99(frames):
    return frames["0.99"]


@pytest.fixture()
def rng():
    return random.Random(20260809)


@pytest.fixture(scope="session", autouse=True)
def _mp_precision():
    old = mp.mp.dps
    mp.mp.dps = 50
    yield
    mp.mp.dps = old
