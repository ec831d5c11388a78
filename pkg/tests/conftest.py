import numpy as np
import pytest

from nomad_flag_dt_plugin.geometry.flaggeom import StructureParams

SEED = 1729


@pytest.fixture
def rng():
    return np.random.default_rng(SEED)


@pytest.fixture
def random_params(rng):
    """Factory for float structures with A drawn from [low, high]."""

    def make(eps=(1.0, 1.0, 1.0), low=0.5, high=2.0):
        A = tuple(float(a) for a in rng.uniform(low, high, 3))  # noqa: N806
        return StructureParams(A, tuple(float(e) for e in eps))

    return make


@pytest.fixture
def random_signs(rng):
    """Factory for real eps triples bounded away from zero, either sign."""

    def make():
        values = rng.uniform(0.3, 2.0, 3) * rng.choice((1.0, -1.0), 3)
        return tuple(float(v) for v in values)

    return make
