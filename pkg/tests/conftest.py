from pathlib import Path

import numpy as np
import pytest

import repmarket
from repmarket.h2curve import PiecewiseConcaveCurve, SampledHydrogenCurve
from repmarket.scenario import load_scenario

SIX_BUS_CONFIG = Path(repmarket.__file__).parent / "data" / "six_bus" / "scenario.yaml"


@pytest.fixture(scope="session")
def six_bus_config():
    return SIX_BUS_CONFIG


@pytest.fixture(scope="session")
def six_bus():
    """Bundled weekly fixture; treat as read-only (replace() for variants)."""
    return load_scenario(SIX_BUS_CONFIG)


@pytest.fixture
def two_piece_curve():
    """20/16 kg/MWh curve with 250 MW pieces, used by the worked examples."""
    return PiecewiseConcaveCurve(
        slopes=(20.0, 16.0),
        intercepts=(0.0, 1000.0),
        breakpoints=(0.0, 250.0, 500.0),
    )


@pytest.fixture
def quad_sample():
    """Samples of h(p) = -0.01 p^2 + 25 p on [0, 500], concave."""
    powers = np.arange(0.0, 501.0, 10.0)
    h2 = -0.01 * powers**2 + 25.0 * powers
    return SampledHydrogenCurve(tuple(powers), tuple(h2))


def make_concave_sample(rng, capacity=500.0, points=11):
    """Random concave sampled curve through the origin."""
    powers = np.linspace(0.0, capacity, points)
    slopes = np.sort(rng.uniform(5.0, 25.0, points - 1))[::-1]
    h2 = np.concatenate([[0.0], np.cumsum(slopes * np.diff(powers))])
    return SampledHydrogenCurve(tuple(powers), tuple(h2))


@pytest.fixture
def concave_sample_factory():
    return make_concave_sample
