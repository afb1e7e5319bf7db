"""Constrained Suslov dynamics on SO(n) and the reduced flow on S^{n-1} x R^{n-1}.

The full state stores the frame ``g`` (row i is e_i) and the n-1 coefficients
of the angular velocity in the basis ``E_i ^ E_n``; the constraints
<w, E_i ^ E_j> = 0 (i < j < n) therefore hold exactly. The reduced state is
the unit vector ``q = e_n`` together with the momenta ``p = -J w``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Protocol, Union

import numpy as np

from .liealg import (
    InertiaSpec,
    d_matrix,
    frame_with_last_row,
    orthogonality_error,
    reorthonormalize,
)
from .numerics import IntegrationError, fd_divergence, rk4_step
from .potentials import Potential

__all__ = [
    "FullState",
    "ReducedState",
    "Trajectory",
    "FullSystem",
    "ReducedSystem",
    "full_rhs",
    "reduced_rhs",
    "energy",
    "full_to_reduced",
    "reduced_to_full",
    "integrate",
    "flow",
    "divergence_residual",
    "relative_drift",
    "lambda_crossings",
]


@dataclass(frozen=True, eq=False)
class FullState:
    g: np.ndarray
    omega: np.ndarray

    @property
    def n(self) -> int:
        return self.g.shape[0]

    @property
    def axis(self) -> np.ndarray:
        """e_n, the last row of g."""
        return self.g[-1]

    def omega_matrix(self) -> np.ndarray:
        return d_matrix(self.omega)


@dataclass(frozen=True, eq=False)
class ReducedState:
    q: np.ndarray
    p: np.ndarray

    @property
    def n(self) -> int:
        return self.q.size

    @property
    def axis(self) -> np.ndarray:
        return self.q

    @classmethod
    def normalized(cls, q, p) -> "ReducedState":
        q = np.asarray(q, dtype=float)
        norm = np.linalg.norm(q)
        if norm == 0:
            raise ValueError("q must be nonzero")
        return cls(q / norm, np.asarray(p, dtype=float))


State = Union[FullState, ReducedState]


def _check_dims(n: int, inertia: InertiaSpec, pot: Potential) -> None:
    if inertia.n != n or pot.n != n:
        raise ValueError(f"dimension mismatch: state n={n}, inertia n={inertia.n}, potential n={pot.n}")


def _omega_dot(q: np.ndarray, A: np.ndarray, pot: Potential) -> np.ndarray:
    grad = pot.gradient(q)
    return A @ (grad[:-1] * q[-1] - grad[-1] * q[:-1])


def full_rhs(s: FullState, inertia: InertiaSpec, pot: Potential) -> tuple[np.ndarray, np.ndarray]:
    """``(g_dot, omega_dot)`` for the constrained rigid body."""
    _check_dims(s.n, inertia, pot)
    return s.g @ d_matrix(s.omega), _omega_dot(s.g[-1], inertia.A, pot)


def reduced_rhs(s: ReducedState, inertia: InertiaSpec, pot: Potential) -> tuple[np.ndarray, np.ndarray]:
    """``(q_dot, p_dot)`` of the reduced system; smooth across q_n = 0."""
    _check_dims(s.n, inertia, pot)
    return _reduced_field(s.q, s.p, inertia.A, pot)


def _reduced_field(q, p, A, pot):
    grad = pot.gradient(q)
    Ap = A @ p
    qdot = np.empty_like(q)
    qdot[:-1] = q[-1] * Ap
    qdot[-1] = -(Ap @ q[:-1])
    pdot = -q[-1] * grad[:-1] + grad[-1] * q[:-1]
    return qdot, pdot


def full_to_reduced(s: FullState, inertia: InertiaSpec) -> ReducedState:
    return ReducedState(s.g[-1].copy(), -(inertia.J @ s.omega))


def reduced_to_full(s: ReducedState, inertia: InertiaSpec) -> FullState:
    """Some full state over ``s`` (the frame e_1..e_{n-1} is arbitrary)."""
    return FullState(frame_with_last_row(s.q), -(inertia.A @ s.p))


def energy(s: State, inertia: InertiaSpec, pot: Potential) -> float:
    if isinstance(s, FullState):
        w = s.omega
        return 0.5 * float(w @ inertia.J @ w) + pot.value(s.g[-1])
    return 0.5 * float(s.p @ inertia.A @ s.p) + pot.value(s.q)


def divergence_residual(q, omega, inertia: InertiaSpec, pot: Potential, h: float = 1e-5) -> float:
    """|div| of the (q, omega) field on R^{2n-1}, by central differences."""
    q = np.asarray(q, dtype=float)
    n = q.size
    A = inertia.A

    def f(z):
        qq, w = z[:n], z[n:]
        qdot = np.empty(n)
        qdot[:-1] = -w * qq[-1]
        qdot[-1] = w @ qq[:-1]
        return np.concatenate([qdot, _omega_dot(qq, A, pot)])

    return abs(fd_divergence(f, np.concatenate([q, np.asarray(omega, dtype=float)]), h))


# ---------------------------------------------------------------------------
# propagation


class System(Protocol):
    """What :func:`integrate` needs from a vector field."""

    def pack(self, state) -> np.ndarray: ...
    def unpack(self, y: np.ndarray): ...
    def field(self, y: np.ndarray) -> np.ndarray: ...
    def project(self, y: np.ndarray) -> np.ndarray: ...
    def monitors(self, state) -> dict[str, float]: ...


class FullSystem:
    def __init__(self, inertia: InertiaSpec, pot: Potential):
        _check_dims(inertia.n, inertia, pot)
        self.inertia = inertia
        self.pot = pot
        self.n = inertia.n
        self._A = inertia.A

    def pack(self, s: FullState) -> np.ndarray:
        return np.concatenate([np.asarray(s.g, dtype=float).ravel(), s.omega])

    def unpack(self, y: np.ndarray) -> FullState:
        n = self.n
        return FullState(y[: n * n].reshape(n, n).copy(), y[n * n:].copy())

    def field(self, y: np.ndarray) -> np.ndarray:
        n = self.n
        g = y[: n * n].reshape(n, n)
        w = y[n * n:]
        gdot = g @ d_matrix(w)
        return np.concatenate([gdot.ravel(), _omega_dot(g[-1], self._A, self.pot)])

    def project(self, y: np.ndarray) -> np.ndarray:
        n = self.n
        g = reorthonormalize(y[: n * n].reshape(n, n))
        return np.concatenate([g.ravel(), y[n * n:]])

    def monitors(self, s: FullState) -> dict[str, float]:
        return {
            "energy": energy(s, self.inertia, self.pot),
            "q_n": float(s.g[-1, -1]),
            "orthogonality": orthogonality_error(s.g),
        }


class ReducedSystem:
    def __init__(self, inertia: InertiaSpec, pot: Potential):
        _check_dims(inertia.n, inertia, pot)
        self.inertia = inertia
        self.pot = pot
        self.n = inertia.n
        self._A = inertia.A

    def pack(self, s: ReducedState) -> np.ndarray:
        return np.concatenate([s.q, s.p])

    def unpack(self, y: np.ndarray) -> ReducedState:
        return ReducedState(y[: self.n].copy(), y[self.n:].copy())

    def field(self, y: np.ndarray) -> np.ndarray:
        qdot, pdot = _reduced_field(y[: self.n], y[self.n:], self._A, self.pot)
        return np.concatenate([qdot, pdot])

    def project(self, y: np.ndarray) -> np.ndarray:
        y = y.copy()
        y[: self.n] /= np.linalg.norm(y[: self.n])
        return y

    def monitors(self, s: ReducedState) -> dict[str, float]:
        return {
            "energy": energy(s, self.inertia, self.pot),
            "q_n": float(s.q[-1]),
            "norm_error": abs(float(np.linalg.norm(s.q)) - 1.0),
        }


@dataclass
class Trajectory:
    """Sampled solution. ``tau`` is filled for runs in rescaled time."""

    times: np.ndarray
    states: list
    monitors: dict[str, np.ndarray] = field(default_factory=dict)
    tau: Optional[np.ndarray] = None

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.states) != self.times.size:
            raise ValueError("times and states differ in length")
        for name, vals in self.monitors.items():
            if len(vals) != self.times.size:
                raise ValueError(f"monitor {name!r} has wrong length")
        if self.times.size > 1:
            steps = np.diff(self.times)
            if not (np.all(steps > 0) or np.all(steps < 0)):
                raise ValueError("time stamps must be strictly monotone")

    def __len__(self) -> int:
        return self.times.size

    def axes(self) -> np.ndarray:
        """q = e_n at every sample, shape (samples, n)."""
        return np.array([s.axis for s in self.states])


def _march(system: System, s0, h: float, steps: int, record_every: int, reproject: bool,
           t0: float = 0.0) -> Trajectory:
    y = system.pack(s0)
    times = [t0]
    states = [s0]
    for k in range(1, steps + 1):
        y = rk4_step(system.field, y, h)
        if not np.all(np.isfinite(y)):
            raise IntegrationError(k)
        if reproject:
            try:
                y = system.project(y)
            except ValueError as exc:
                raise IntegrationError(k, str(exc)) from exc
        if k % record_every == 0 or k == steps:
            times.append(t0 + k * h)
            states.append(system.unpack(y))
    monitors: dict[str, list] = {}
    for s in states:
        for name, val in system.monitors(s).items():
            monitors.setdefault(name, []).append(val)
    return Trajectory(np.array(times), states, {k: np.array(v) for k, v in monitors.items()})


def integrate(system: System, s0, dt: float, steps: int, record_every: int = 1,
              reproject: bool = True, t0: float = 0.0) -> Trajectory:
    """Classical RK4 with fixed step ``dt``; projection after every step.

    Samples are taken every ``record_every`` steps, plus the final step.
    """
    if not (dt > 0 and math.isfinite(dt)):
        raise ValueError(f"dt must be positive, got {dt}")
    if steps < 0 or record_every < 1:
        raise ValueError("steps must be >= 0 and record_every >= 1")
    return _march(system, s0, dt, int(steps), int(record_every), reproject, t0)


def flow(system: System, s0, duration: float, max_dt: float, reproject: bool = True):
    """State after ``duration`` (either sign), using RK4 steps no longer than ``max_dt``."""
    if duration == 0:
        return s0
    m = max(1, math.ceil(abs(duration) / max_dt - 1e-12))
    h = duration / m
    y = system.pack(s0)
    for k in range(m):
        y = rk4_step(system.field, y, h)
        if reproject:
            y = system.project(y)
    if not np.all(np.isfinite(y)):
        raise IntegrationError(m)
    return system.unpack(y)


def relative_drift(values) -> float:
    """max |v - v_0| / |v_0| (absolute when v_0 = 0)."""
    values = np.asarray(values, dtype=float)
    dev = float(np.abs(values - values[0]).max())
    scale = abs(values[0])
    return dev / scale if scale > 0 else dev


def lambda_crossings(system: System, traj: Trajectory, dt: float, tol: float = 1e-10) -> list[dict]:
    """Times where q_n changes sign, refined by bisection to ``tol`` in t.

    Each entry carries the crossing time and |(Ap, q)| there (distance to Sigma
    in the momentum direction).
    """
    out = []
    qn = np.array([s.axis[-1] for s in traj.states])
    A = system.inertia.A
    for k in range(len(traj) - 1):
        if qn[k] == 0.0:
            continue
        if qn[k] * qn[k + 1] > 0:
            continue
        lo, hi = 0.0, traj.times[k + 1] - traj.times[k]
        base = traj.states[k]
        sign0 = math.copysign(1.0, qn[k])
        mid_state = base
        while hi - lo > tol:
            mid = 0.5 * (lo + hi)
            mid_state = flow(system, base, mid, dt)
            if math.copysign(1.0, mid_state.axis[-1]) == sign0 and mid_state.axis[-1] != 0.0:
                lo = mid
            else:
                hi = mid
        s = flow(system, base, 0.5 * (lo + hi), dt)
        red = s if isinstance(s, ReducedState) else full_to_reduced(s, system.inertia)
        out.append({
            "t": float(traj.times[k] + 0.5 * (lo + hi)),
            "ap_dot_q": float(abs((A @ red.p) @ red.q[:-1])),
        })
    return out
