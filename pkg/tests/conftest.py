import numpy as np
import pytest
from scipy.linalg import expm

from switchdwell.prebuilt import DEMO_A, demo_system


@pytest.fixture(scope="session")
def system():
    """Three-mode affine demo system, labels 1, 0, -1."""
    return demo_system()


@pytest.fixture(scope="session")
def eps():
    return 0.05


def exact_affine_state(sub, x0, t):
    """Closed-form solution x(t) = x_u + expm(A t) (x0 - x_u) for an affine mode."""
    A, _ = sub.affine
    return sub.equilibrium + expm(A * t) @ (np.asarray(x0, dtype=float) - sub.equilibrium)


@pytest.fixture(scope="session")
def exact_state():
    return exact_affine_state


@pytest.fixture(scope="session")
def demo_A():
    return DEMO_A
