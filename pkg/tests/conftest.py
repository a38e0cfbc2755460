"""Shared fixtures: spin systems, refined exceptional points, and the
standard N=4 / N=10 model Hamiltonians used across the suite."""

import numpy as np
import pytest

from kreinspin import (
    DissipativeOAT,
    build_hamiltonian,
    build_spin_system,
    locate_exceptional_points,
)

OMEGA = -5.0
LAM = 1.0


@pytest.fixture(scope="session")
def sys4():
    return build_spin_system(2)


@pytest.fixture(scope="session")
def sys10():
    return build_spin_system(5)


@pytest.fixture(scope="session")
def eps_n4():
    """Bisection-refined exceptional points of the N=4 family in [0, 0.5]."""
    eps = locate_exceptional_points(2, (0.0, 0.5))
    assert len(eps) == 2
    return eps


def oat_hamiltonian(sys, ratio, omega=OMEGA, lam=LAM):
    return build_hamiltonian(sys, DissipativeOAT(omega=omega, lam=lam, kappa=ratio * lam))


@pytest.fixture(scope="session")
def h4_ep1(sys4, eps_n4):
    return oat_hamiltonian(sys4, eps_n4[0].ratio)


@pytest.fixture(scope="session")
def h4_ep2(sys4, eps_n4):
    return oat_hamiltonian(sys4, eps_n4[1].ratio)


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20240817)
