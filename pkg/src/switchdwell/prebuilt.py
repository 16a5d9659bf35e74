"""Prebuilt demo system: a three-mode affine family with rotating contraction.

All modes share A = [[-1, -1], [1, -1]] with b(u) = (u, 1), so the
equilibria are x_u = ((u - 1)/2, (u + 1)/2) and every mode carries the
identity-quadratic certificate with decay rate 2.
"""

import numpy as np

from .core import SwitchedSystem, make_affine_subsystem

DEMO_A = np.array([[-1.0, -1.0], [1.0, -1.0]])


def demo_subsystem(u: int):
    return make_affine_subsystem(DEMO_A, np.array([float(u), 1.0]), u)


def demo_system(u_values=(1, 0, -1)) -> SwitchedSystem:
    return SwitchedSystem(subsystems=tuple(demo_subsystem(u) for u in u_values))
