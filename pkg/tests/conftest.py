import numpy as np
import pytest

import pxpscars as px


class Bundle:
    """Lattice + cover + bases + PXP Hamiltonian, built once per size."""

    def __init__(self, lattice, cover=None):
        self.lattice = lattice
        self.cover = cover or px.default_cover(lattice)
        self.ryd = px.enumerate_rydberg(lattice)
        self.block = px.block_basis(lattice, self.cover)
        self.H = px.build_pxp(lattice, self.ryd)


@pytest.fixture(scope="session")
def chain4():
    return Bundle(px.build_chain(4))


@pytest.fixture(scope="session")
def chain6():
    return Bundle(px.build_chain(6))


@pytest.fixture(scope="session")
def honeycomb22():
    return Bundle(px.build_honeycomb(2, 2))


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(1234)


def pytest_configure(config):
    config.addinivalue_line(
        "markers", "heavy: large diagonalizations (minutes); deselect with "
                   "-m 'not heavy'")
