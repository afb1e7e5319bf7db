"""Fixed-step RK4 marching and finite-difference helpers."""

from __future__ import annotations

from typing import Callable

import numpy as np

Field = Callable[[np.ndarray], np.ndarray]


class IntegrationError(RuntimeError):
    """Raised when the state stops being finite."""

    def __init__(self, step: int, message: str = "non-finite state"):
        super().__init__(f"{message} at step {step}")
        self.step = step


def rk4_step(f: Field, y: np.ndarray, h: float) -> np.ndarray:
    k1 = f(y)
    k2 = f(y + 0.5 * h * k1)
    k3 = f(y + 0.5 * h * k2)
    k4 = f(y + h * k3)
    return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def fd_divergence(f: Field, z: np.ndarray, h: float = 1e-5) -> float:
    """Divergence of ``f`` at ``z`` by central differences.

    The step in coordinate k is ``h * max(1, |z_k|)``.
    """
    z = np.asarray(z, dtype=float)
    div = 0.0
    for k in range(z.size):
        hk = h * max(1.0, abs(z[k]))
        zp = z.copy()
        zm = z.copy()
        zp[k] += hk
        zm[k] -= hk
        div += (f(zp)[k] - f(zm)[k]) / (2.0 * hk)
    return float(div)


def fd_jacobian(f: Field, z: np.ndarray, h: float = 1e-6) -> np.ndarray:
    z = np.asarray(z, dtype=float)
    cols = []
    for k in range(z.size):
        hk = h * max(1.0, abs(z[k]))
        dz = np.zeros_like(z)
        dz[k] = hk
        cols.append((f(z + dz) - f(z - dz)) / (2.0 * hk))
    return np.column_stack(cols)
