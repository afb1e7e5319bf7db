"""Chaplygin reduction of the Suslov problem and its Hamiltonization.

Away from {e_nn = 0} the reduced flow lives on two copies of T*B, one per
hemisphere sign ``sigma``. In the rescaled time d tau = q_n dt and with
momenta p = q_n P the flow is the natural system J q'' = -dV_sigma/dq.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.integrate import cumulative_simpson

from .dynamics import (
    ReducedState,
    ReducedSystem,
    Trajectory,
    _march,
    flow,
    integrate,
)
from .liealg import InertiaSpec, h_basis, orthogonality_error, wedge
from .numerics import fd_divergence
from .potentials import Potential

__all__ = [
    "OnBoundary",
    "Chart",
    "CanonicalState",
    "HamiltonizedSystem",
    "span_rank",
    "to_chart",
    "from_chart",
    "v_sigma",
    "grad_v_sigma",
    "h_pm",
    "h_star_sigma",
    "el1_rhs",
    "hamiltonize",
    "el2_rhs",
    "propagate_el2",
    "time_reparametrize",
    "measure_density",
    "weighted_divergence_residual",
    "unweighted_divergence",
    "hamiltonized_oracle",
]

CHART_THRESHOLD = 1e-8


class OnBoundary(ValueError):
    """The point lies on (or within the chart threshold of) Lambda = {q_n = 0}."""


def span_rank(g, rtol: float = 1e-10) -> int:
    """Rank of D + g^{-1} so(n-1) g inside so(n).

    Equals n(n-1)/2 exactly when D is a connection at g, i.e. when e_nn != 0.
    """
    g = np.asarray(g, dtype=float)
    n = g.shape[0]
    if orthogonality_error(g) > 1e-9 or np.linalg.det(g) <= 0:
        raise ValueError("g is not a rotation")
    iu = np.triu_indices(n, 1)
    gens = [(g.T @ xi @ g)[iu] for xi in h_basis(n)]
    gens += [wedge(i, n - 1, n)[iu] for i in range(n - 1)]
    sv = np.linalg.svd(np.array(gens), compute_uv=False)
    return int(np.sum(sv > rtol * sv[0]))


@dataclass(frozen=True, eq=False)
class Chart:
    """A point of T*B on hemisphere ``sigma``; ``p = q_n P``."""

    sigma: int
    q: np.ndarray
    P: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        if self.sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        if float(self.q @ self.q) >= 1.0:
            raise OnBoundary("chart coordinates must satisfy (q, q) < 1")

    @property
    def qn(self) -> float:
        return self.sigma * math.sqrt(1.0 - float(self.q @ self.q))

    @classmethod
    def from_qP(cls, q, P, sigma: int) -> "Chart":
        q = np.asarray(q, dtype=float)
        P = np.asarray(P, dtype=float)
        qn = sigma * math.sqrt(1.0 - float(q @ q))
        return cls(sigma, q, P, qn * P)

    @classmethod
    def from_qp(cls, q, p, sigma: int) -> "Chart":
        q = np.asarray(q, dtype=float)
        p = np.asarray(p, dtype=float)
        qn = sigma * math.sqrt(1.0 - float(q @ q))
        if abs(qn) <= CHART_THRESHOLD:
            raise OnBoundary(f"|q_n| = {abs(qn):.3g} is on Lambda")
        return cls(sigma, q, p / qn, p)


def to_chart(s: ReducedState, threshold: float = CHART_THRESHOLD) -> Chart:
    qn = float(s.q[-1])
    if abs(qn) <= threshold:
        raise OnBoundary(f"|q_n| = {abs(qn):.3g} is on Lambda")
    return Chart(1 if qn > 0 else -1, s.q[:-1].copy(), s.p / qn, s.p.copy())


def from_chart(c: Chart) -> ReducedState:
    return ReducedState(np.append(c.q, c.qn), c.p.copy())


def _qn(q, sigma) -> float:
    r = 1.0 - float(q @ q)
    if r <= 0:
        raise OnBoundary("(q, q) >= 1 leaves the ball B")
    return sigma * math.sqrt(r)


def v_sigma(q, sigma: int, pot: Potential) -> float:
    q = np.asarray(q, dtype=float)
    return pot.value(np.append(q, _qn(q, sigma)))


def grad_v_sigma(q, sigma: int, pot: Potential) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    qn = _qn(q, sigma)
    grad = pot.gradient(np.append(q, qn))
    return grad[:-1] - grad[-1] * q / qn


def h_pm(c: Chart, inertia: InertiaSpec, pot: Potential) -> float:
    """(1 - (q,q)) (AP, P) / 2 + V_sigma(q)."""
    return 0.5 * (1.0 - float(c.q @ c.q)) * float(c.P @ inertia.A @ c.P) + v_sigma(c.q, c.sigma, pot)


def h_star_sigma(q, p, sigma: int, inertia: InertiaSpec, pot: Potential) -> float:
    p = np.asarray(p, dtype=float)
    return 0.5 * float(p @ inertia.A @ p) + v_sigma(q, sigma, pot)


def el1_rhs(c: Chart, inertia: InertiaSpec, pot: Potential) -> tuple[np.ndarray, np.ndarray]:
    """``(q_dot, P_dot)`` of the reduced system in original time on a chart."""
    return _el1(c.q, c.P, c.sigma, inertia.A, pot)


def _el1(q, P, sigma, A, pot):
    AP = A @ P
    PAP = float(P @ AP)
    qdot = (1.0 - float(q @ q)) * AP
    dH_dq = -PAP * q + grad_v_sigma(q, sigma, pot)
    Pdot = -dH_dq + float(AP @ q) * P - PAP * q
    return qdot, Pdot


def hamiltonize(c: Chart) -> tuple[np.ndarray, np.ndarray]:
    return c.q.copy(), c.qn * c.P


def el2_rhs(q, p, sigma: int, inertia: InertiaSpec, pot: Potential) -> tuple[np.ndarray, np.ndarray]:
    """``(dq/dtau, dp/dtau) = (Ap, -dV_sigma/dq)``."""
    return inertia.A @ np.asarray(p, dtype=float), -grad_v_sigma(q, sigma, pot)


@dataclass(frozen=True, eq=False)
class CanonicalState:
    q: np.ndarray
    p: np.ndarray
    sigma: int

    @property
    def axis(self) -> np.ndarray:
        return np.append(self.q, _qn(self.q, self.sigma))


class HamiltonizedSystem:
    """Flow of H*_sigma in the rescaled time, for :func:`integrate`."""

    def __init__(self, inertia: InertiaSpec, pot: Potential, sigma: int):
        if sigma not in (1, -1):
            raise ValueError("sigma must be +1 or -1")
        self.inertia = inertia
        self.pot = pot
        self.sigma = sigma
        self.m = inertia.n - 1
        self._A = inertia.A

    def pack(self, s: CanonicalState) -> np.ndarray:
        return np.concatenate([s.q, s.p])

    def unpack(self, y: np.ndarray) -> CanonicalState:
        return CanonicalState(y[: self.m].copy(), y[self.m:].copy(), self.sigma)

    def field(self, y: np.ndarray) -> np.ndarray:
        q, p = y[: self.m], y[self.m:]
        return np.concatenate([self._A @ p, -grad_v_sigma(q, self.sigma, self.pot)])

    def project(self, y: np.ndarray) -> np.ndarray:
        return y

    def monitors(self, s: CanonicalState) -> dict[str, float]:
        return {
            "h_star": h_star_sigma(s.q, s.p, self.sigma, self.inertia, self.pot),
            "q_n": _qn(s.q, self.sigma),
        }


def _leapfrog(system: HamiltonizedSystem, s0: CanonicalState, h: float, steps: int,
              record_every: int) -> Trajectory:
    q, p = s0.q.copy(), s0.p.copy()
    A, sigma, pot = system._A, system.sigma, system.pot
    times, states = [0.0], [s0]
    force = -grad_v_sigma(q, sigma, pot)
    for k in range(1, steps + 1):
        p = p + 0.5 * h * force
        q = q + h * (A @ p)
        force = -grad_v_sigma(q, sigma, pot)
        p = p + 0.5 * h * force
        if k % record_every == 0 or k == steps:
            times.append(k * h)
            states.append(CanonicalState(q.copy(), p.copy(), sigma))
    monitors: dict[str, list] = {}
    for s in states:
        for name, val in system.monitors(s).items():
            monitors.setdefault(name, []).append(val)
    return Trajectory(np.array(times), states, {k: np.array(v) for k, v in monitors.items()})


def propagate_el2(q, p, sigma: int, inertia: InertiaSpec, pot: Potential, dtau: float, steps: int,
                  direction: int = 1, record_every: int = 1, method: str = "rk4") -> Trajectory:
    """Integrate the Hamiltonized flow; ``direction=-1`` runs tau backwards.

    ``method="leapfrog"`` uses Stormer-Verlet, H*_sigma being separable.
    The returned trajectory has ``times`` and ``tau`` both equal to tau.
    """
    if not dtau > 0:
        raise ValueError("dtau must be positive")
    system = HamiltonizedSystem(inertia, pot, sigma)
    s0 = CanonicalState(np.asarray(q, dtype=float), np.asarray(p, dtype=float), sigma)
    h = math.copysign(dtau, direction)
    if method == "rk4":
        traj = _march(system, s0, h, steps, record_every, reproject=False)
    elif method == "leapfrog":
        traj = _leapfrog(system, s0, h, steps, record_every)
    else:
        raise ValueError(f"unknown method {method!r}")
    traj.tau = traj.times.copy()
    return traj


def time_reparametrize(tau, q, sigma: int, t0: float = 0.0) -> np.ndarray:
    """Original time along a tau-sampled chart trajectory.

    t - t0 = integral of sigma / sqrt(1 - (q, q)) d tau, by cumulative
    composite Simpson on the given tau grid. ``q`` has shape (samples, n-1).
    """
    tau = np.asarray(tau, dtype=float)
    q = np.atleast_2d(np.asarray(q, dtype=float))
    r = 1.0 - np.einsum("ij,ij->i", q, q)
    if np.any(r <= 1e-12):
        raise ValueError("integrand singular: trajectory reaches (q, q) = 1")
    integrand = sigma / np.sqrt(r)
    if tau.size == 1:
        return np.array([t0])
    if tau.size == 2:
        return t0 + np.array([0.0, 0.5 * (integrand[0] + integrand[1]) * (tau[1] - tau[0])])
    if tau[-1] < tau[0]:
        # scipy wants increasing abscissae; flip the variable of integration
        return t0 + cumulative_simpson(-integrand, x=-tau, initial=0.0)
    return t0 + cumulative_simpson(integrand, x=tau, initial=0.0)


def measure_density(q, sigma: int) -> float:
    """|q_n|^(n-2), the invariant density of the reduced flow in (q, P)."""
    q = np.asarray(q, dtype=float)
    return abs(_qn(q, sigma)) ** (q.size - 1)


def _el1_vector(sigma, A, pot, m, weighted):
    def f(z):
        q, P = z[:m], z[m:]
        qdot, Pdot = _el1(q, P, sigma, A, pot)
        out = np.concatenate([qdot, Pdot])
        return measure_density(q, sigma) * out if weighted else out
    return f


def weighted_divergence_residual(c: Chart, inertia: InertiaSpec, pot: Potential, h: float = 1e-5) -> float:
    """|div(rho X)| for the original-time chart field X and rho = |q_n|^(n-2)."""
    f = _el1_vector(c.sigma, inertia.A, pot, c.q.size, weighted=True)
    return abs(fd_divergence(f, np.concatenate([c.q, c.P]), h))


def unweighted_divergence(c: Chart, inertia: InertiaSpec, pot: Potential, h: float = 1e-5) -> float:
    f = _el1_vector(c.sigma, inertia.A, pot, c.q.size, weighted=False)
    return abs(fd_divergence(f, np.concatenate([c.q, c.P]), h))


def hamiltonized_oracle(inertia: InertiaSpec, pot: Potential, s0: ReducedState, dt: float, steps: int,
                        window: float = 0.1, reduced: Optional[Trajectory] = None, refine: int = 4) -> dict:
    """Compare the tau-flow of H*_sigma, mapped back to t, with the reduced flow in t.

    The comparison window runs from t = 0 while |q_n| > ``window``. Returns the
    sup-norm discrepancy in (q, q_n, p) and the window end. The tau-flow takes
    ``refine`` steps per reduced step.
    """
    if abs(s0.q[-1]) <= window:
        raise OnBoundary(f"initial |q_n| = {abs(s0.q[-1]):.3g} not above window {window}")
    system = ReducedSystem(inertia, pot)
    if reduced is None:
        reduced = integrate(system, s0, dt, steps)
    qn = np.array([s.q[-1] for s in reduced.states])
    outside = np.nonzero(np.abs(qn) <= window)[0]
    end = int(outside[0]) if outside.size else len(reduced)
    if end < 3:
        raise ValueError("window too short for comparison")
    t = reduced.times[:end]
    tau = cumulative_simpson(qn[:end], x=t, initial=0.0)
    chart = to_chart(s0)
    q, p = hamiltonize(chart)
    m = (end - 1) * refine
    ham = propagate_el2(q, p, chart.sigma, inertia, pot, abs(tau[-1]) / m, m, direction=chart.sigma)
    # 1/|q_n| is steep near the window edge, so the time quadrature runs on the fine grid
    t_of_tau = time_reparametrize(ham.tau, np.array([s.q for s in ham.states]), chart.sigma,
                                  t0=float(t[0]))[::refine]
    err = 0.0
    for tk, s in zip(t_of_tau, ham.states[::refine]):
        j = int(np.clip(np.searchsorted(t, tk) - 1, 0, end - 1))
        ref = flow(system, reduced.states[j], tk - t[j], dt)
        mine = np.concatenate([s.axis, s.p])
        err = max(err, float(np.abs(mine - np.concatenate([ref.q, ref.p])).max()))
    return {
        "sup_error": err,
        "window_end_t": float(t[-1]),
        "window_end_tau": float(tau[-1]),
        "samples": int(end),
        "t_of_tau_end": float(t_of_tau[-1]),
    }
