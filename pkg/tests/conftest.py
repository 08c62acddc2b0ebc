import numpy as np
import pytest

from cohdesign import FdtdConfig


@pytest.fixture(scope="session")
def fast_config():
    """Small, quick FDTD configuration for engine unit tests."""
    return FdtdConfig(resolution=8, box_half_extent=1.0, pml_thickness=0.75)


def random_psd(rng, scale=1.0):
    """Random symmetric PSD 3x3 matrix."""
    a = rng.standard_normal((3, 3))
    return scale * (a @ a.T)


def random_pair(rng):
    from cohdesign import DipolePair

    return DipolePair(
        rng.standard_normal(3) + 1j * rng.standard_normal(3),
        rng.standard_normal(3) + 1j * rng.standard_normal(3),
    )
