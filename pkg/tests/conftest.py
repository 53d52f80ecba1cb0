import pytest

from srloc.psf import GaussianPsf, gaussian_constants


@pytest.fixture
def psf():
    """Reference Gaussian beam used throughout the suite."""
    return GaussianPsf(k=1.0, z_r=2.0)


@pytest.fixture
def consts(psf):
    return gaussian_constants(psf)
