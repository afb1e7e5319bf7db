"""Integrable cases: Kharlamova, Klebsh-Tisserand and Lagrange.

First integrals come with analytic gradients so that Poisson brackets are
evaluated without finite differences. Topology classification of the
Klebsh-Tisserand level sets is a pure function of the ratios c_i / kappa_i.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy.optimize import minimize_scalar
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.special import ellipk

from .dynamics import ReducedState, ReducedSystem, Trajectory, flow
from .liealg import InertiaSpec
from .numerics import rk4_step
from .potentials import Potential

__all__ = [
    "PhaseFunction",
    "IntegralReport",
    "TopologyClass",
    "KTAngles",
    "h_star",
    "integrals_fi",
    "fi_gradients",
    "fi_function",
    "h_star_function",
    "coordinate_function",
    "momentum_function",
    "poisson_bracket",
    "kappa",
    "kt_frequencies",
    "kt_angles",
    "angle_periods",
    "classify_topology",
    "count_level_set_components",
    "sigma_residual",
    "integrals_fij",
    "planarity_distance",
    "spherical_pendulum_residual",
    "pendulum_period",
    "kharlamova_exit_points",
    "closure_return",
]

Gradient = tuple[np.ndarray, np.ndarray]


def _require_physical(inertia: InertiaSpec) -> None:
    if inertia.kind != "physical":
        raise ValueError("this operation needs a physical (diagonal mass tensor) inertia")


def _split_qp(q, p):
    q = np.asarray(q, dtype=float)
    p = np.asarray(p, dtype=float)
    if q.size == p.size + 1:
        q = q[:-1]
    return q, p


def h_star(q, p, inertia: InertiaSpec, pot: Potential) -> float:
    """H* for the combined linear + quadratic potential (same on both hemispheres)."""
    _require_physical(inertia)
    if pot.kind == "lagrange_top":
        raise ValueError("H* of this form needs a potential without the eps q_n term")
    q, p = _split_qp(q, p)
    m = np.diag(inertia.J)
    dB = pot.B[:-1] - pot.B[-1]
    return float(0.5 * np.sum(p * p / m) + pot.C @ q + 0.5 * np.sum(dB * q * q))


def _fi_coefficients(inertia: InertiaSpec, pot: Potential):
    _require_physical(inertia)
    if pot.kind == "lagrange_top":
        raise ValueError(f"integrals f_i are not defined for potential kind {pot.kind!r}")
    m = np.diag(inertia.J)
    return m, pot.C, pot.B[:-1] - pot.B[-1]


def integrals_fi(q, p, inertia: InertiaSpec, pot: Potential) -> np.ndarray:
    """f_i = p_i^2 + 2 C_i (I_i+I_n) q_i + (I_i+I_n)(B_i-B_n) q_i^2."""
    m, C, dB = _fi_coefficients(inertia, pot)
    q, p = _split_qp(q, p)
    return p * p + 2.0 * C * m * q + m * dB * q * q


def fi_gradients(q, p, inertia: InertiaSpec, pot: Potential) -> tuple[np.ndarray, np.ndarray]:
    """Jacobians (df_i/dq_j, df_i/dp_j); both diagonal."""
    m, C, dB = _fi_coefficients(inertia, pot)
    q, p = _split_qp(q, p)
    return np.diag(2.0 * C * m + 2.0 * m * dB * q), np.diag(2.0 * p)


@dataclass(frozen=True)
class PhaseFunction:
    """A function on R^{n-1}{q} x R^{n-1}{p} with its exact gradient."""

    name: str
    value: Callable[[np.ndarray, np.ndarray], float]
    grad: Callable[[np.ndarray, np.ndarray], Gradient]

    def __call__(self, q, p) -> float:
        return self.value(q, p)


def fi_function(i: int, inertia: InertiaSpec, pot: Potential) -> PhaseFunction:
    def value(q, p):
        return float(integrals_fi(q, p, inertia, pot)[i])

    def grad(q, p):
        dq, dp = fi_gradients(q, p, inertia, pot)
        return dq[i], dp[i]

    return PhaseFunction(f"f_{i + 1}", value, grad)


def h_star_function(inertia: InertiaSpec, pot: Potential) -> PhaseFunction:
    m, C, dB = _fi_coefficients(inertia, pot)

    def grad(q, p):
        q, p = _split_qp(q, p)
        return C + dB * q, p / m

    return PhaseFunction("H*", lambda q, p: h_star(q, p, inertia, pot), grad)


def coordinate_function(i: int, m: int) -> PhaseFunction:
    e = np.eye(m)[i]
    return PhaseFunction(f"q_{i + 1}", lambda q, p: float(q[i]), lambda q, p: (e, np.zeros(m)))


def momentum_function(i: int, m: int) -> PhaseFunction:
    e = np.eye(m)[i]
    return PhaseFunction(f"p_{i + 1}", lambda q, p: float(p[i]), lambda q, p: (np.zeros(m), e))


def poisson_bracket(F: PhaseFunction, G: PhaseFunction, q, p) -> float:
    """{F, G} = sum dF/dq_i dG/dp_i - dF/dp_i dG/dq_i."""
    Fq, Fp = F.grad(q, p)
    Gq, Gp = G.grad(q, p)
    return float(Fq @ Gp - Fp @ Gq)


def kappa(inertia: InertiaSpec, B) -> np.ndarray:
    """kappa_i = (I_i + I_n)(B_i - B_n)."""
    _require_physical(inertia)
    B = np.asarray(B, dtype=float)
    return np.diag(inertia.J) * (B[:-1] - B[-1])


def kt_frequencies(inertia: InertiaSpec, B) -> np.ndarray:
    """Omega_i = sqrt((B_i - B_n) / (I_i + I_n))."""
    k = kappa(inertia, B)
    if np.any(k <= 0):
        raise ValueError("frequencies need B_i > B_n for all i < n")
    B = np.asarray(B, dtype=float)
    return np.sqrt((B[:-1] - B[-1]) / np.diag(inertia.J))


@dataclass
class IntegralReport:
    values: np.ndarray
    kappa: Optional[np.ndarray] = None
    drift: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {"values": np.asarray(self.values).tolist()}
        if self.kappa is not None:
            out["kappa"] = self.kappa.tolist()
        if self.drift is not None:
            out["drift"] = self.drift.tolist()
        return out


class KTAngles(NamedTuple):
    phi: np.ndarray
    omega: np.ndarray
    c: np.ndarray
    degenerate: np.ndarray


def kt_angles(q, p, inertia: InertiaSpec, pot: Potential, tol: float = 1e-14) -> KTAngles:
    """Angles on the invariant torus, phi_i = atan2(sqrt(kappa_i) q_i, p_i).

    Components with c_i = 0 have no angle; they are flagged in ``degenerate``.
    """
    k = kappa(inertia, pot.B)
    if np.any(k <= 0):
        raise ValueError("angle variables need B_i > B_n for all i < n")
    q, p = _split_qp(q, p)
    c = integrals_fi(q, p, inertia, pot)
    degenerate = c <= tol * np.maximum(1.0, k)
    phi = np.arctan2(np.sqrt(k) * q, p)
    return KTAngles(phi, kt_frequencies(inertia, pot.B), c, degenerate)


def angle_periods(times, phi) -> np.ndarray:
    """Periods of each angle from zero crossings of sin(phi), linearly interpolated.

    ``phi`` has shape (samples, k). A component with fewer than two
    crossings gets ``nan``.
    """
    times = np.asarray(times, dtype=float)
    s = np.sin(np.atleast_2d(np.asarray(phi, dtype=float)))
    out = np.full(s.shape[1], np.nan)
    for i in range(s.shape[1]):
        y = s[:, i]
        idx = np.nonzero(y[:-1] * y[1:] < 0)[0]
        if idx.size < 2:
            continue
        t0, t1 = times[idx], times[idx + 1]
        y0, y1 = y[idx], y[idx + 1]
        cross = t0 - y0 * (t1 - t0) / (y1 - y0)
        # consecutive zeros of sin(phi) are half a period apart
        out[i] = 2.0 * (cross[-1] - cross[0]) / (cross.size - 1)
    return out


# ---------------------------------------------------------------------------
# topology of the Klebsh-Tisserand level sets

NOTES = {
    "InteriorTori": "disjoint union of two {l}-dimensional tori; q_n never vanishes on the level set",
    "HandledSurfaceCase_i": ("torus with 2^{m} open balls removed, doubled along the boundary"
                             "{extra}"),
    "SpheresDisjoint": "disjoint union of {count} spheres S^{m}",
    "CylinderToriCase_iii": "disjoint union of two {dim}-dimensional tori (double cover of 2 T^{d2} x [0,1])",
    "Degenerate": "non-generic level: {reason}",
}


@dataclass(frozen=True)
class TopologyClass:
    tag: str
    certificate: dict
    l: Optional[int] = None
    count: Optional[int] = None
    torus_dim: Optional[int] = None
    reason: Optional[str] = None
    note: str = ""

    def to_dict(self) -> dict:
        out = {"tag": self.tag}
        for key in ("l", "count", "torus_dim", "reason"):
            val = getattr(self, key)
            if val is not None:
                out[key] = val
        out["certificate"] = self.certificate
        out["note"] = self.note
        return out


def classify_topology(c, kappa_values, tol: float = 1e-9) -> TopologyClass:
    """Classify M_c for the Klebsh-Tisserand case from c_i and kappa_i.

    Comparisons are made on c_i / kappa_i with relative tolerance ``tol``;
    ties and patterns outside the known cases come back as ``Degenerate``.
    """
    c = np.asarray(c, dtype=float)
    k = np.asarray(kappa_values, dtype=float)
    if c.shape != k.shape or c.ndim != 1:
        raise ValueError("c and kappa must be vectors of equal length")
    if np.any(k <= 0):
        raise ValueError("kappa_i must be positive (B_i > B_n)")
    m = c.size
    r = c / k
    total = float(r.sum())
    zero = [i for i in range(m) if abs(r[i]) <= tol]
    above = [i for i in range(m) if r[i] > 1 + tol]
    below = [i for i in range(m) if tol < r[i] < 1 - tol]
    ties = [i for i in range(m) if abs(r[i] - 1) <= tol]
    negative = [i for i in range(m) if r[i] < -tol]
    cert = {
        "ratios": r.tolist(),
        "sum_ratios": total,
        "sum_vs_1": "<" if total < 1 - tol else ("=" if abs(total - 1) <= tol else ">"),
        "above_kappa": above,
        "below_kappa": below,
        "equal_kappa": ties,
        "zero": zero,
    }

    def degenerate(reason):
        return TopologyClass("Degenerate", cert, reason=reason, note=NOTES["Degenerate"].format(reason=reason))

    if negative:
        return degenerate(f"negative c at indices {negative}")
    if total < 1 - tol:
        l = m - len(zero)
        return TopologyClass("InteriorTori", cert, l=l, note=NOTES["InteriorTori"].format(l=l))
    if abs(total - 1) <= tol:
        return degenerate("sum of c_i/kappa_i equals 1")
    if ties:
        return degenerate(f"c_i equals kappa_i at indices {ties}")
    if zero:
        return degenerate(f"vanishing c_i at indices {zero} with boundary present")
    if len(below) == m:
        extra = "; for n = 3 a sphere with five handles" if m == 2 else ""
        return TopologyClass("HandledSurfaceCase_i", cert,
                             note=NOTES["HandledSurfaceCase_i"].format(m=m, extra=extra))
    if len(above) == m:
        count = 2 ** m
        return TopologyClass("SpheresDisjoint", cert, count=count,
                             note=NOTES["SpheresDisjoint"].format(count=count, m=m))
    if len(above) == 1:
        return TopologyClass("CylinderToriCase_iii", cert, torus_dim=m,
                             note=NOTES["CylinderToriCase_iii"].format(dim=m, d2=m - 1))
    return degenerate(f"unmatched pattern: {len(above)} components above kappa, {len(below)} below")


def count_level_set_components(c, kappa_values, samples: int = 40000, eps: float = 0.3,
                               rng: Optional[np.random.Generator] = None) -> int:
    """Brute-force number of connected components of M_c (Klebsh-Tisserand).

    Points of the torus {f_i = c_i} are drawn uniformly in the angles, those with
    (q, q) <= 1 are lifted to both hemispheres, and components of the eps-graph
    are counted. Coordinates are scaled by sqrt(kappa) so all axes are comparable.
    """
    rng = np.random.default_rng(0) if rng is None else rng
    r = np.asarray(c, dtype=float) / np.asarray(kappa_values, dtype=float)
    phi = rng.uniform(0.0, 2.0 * np.pi, size=(samples, r.size))
    x = np.sqrt(r) * np.sin(phi)  # q_i
    y = np.sqrt(r) * np.cos(phi)  # p_i / sqrt(kappa_i)
    s = np.sum(x * x, axis=1)
    keep = s <= 1.0
    x, y, s = x[keep], y[keep], s[keep]
    if x.shape[0] == 0:
        return 0
    qn = np.sqrt(1.0 - s)[:, None]
    pts = np.vstack([np.hstack([x, qn, y]), np.hstack([x, -qn, y])])
    pairs = cKDTree(pts).query_pairs(eps, output_type="ndarray")
    npts = pts.shape[0]
    adj = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(npts, npts))
    ncomp, _ = connected_components(adj, directed=False)
    return int(ncomp)


# ---------------------------------------------------------------------------
# Sigma, Lagrange case, spherical pendulum


def sigma_residual(q_full, p, inertia: InertiaSpec, pot: Potential) -> tuple[float, float, float]:
    """(|q_n|, |(Ap, q)|, |dv/dq_n at (q, 0)|); all zero on Sigma."""
    q_full = np.asarray(q_full, dtype=float)
    p = np.asarray(p, dtype=float)
    q = q_full[:-1]
    r3 = abs(float(pot.gradient(np.append(q, 0.0))[-1]))
    return abs(float(q_full[-1])), abs(float((inertia.A @ p) @ q)), r3


def integrals_fij(q, p) -> np.ndarray:
    """Antisymmetric matrix q_i p_j - q_j p_i."""
    q, p = _split_qp(q, p)
    return np.outer(q, p) - np.outer(p, q)


def planarity_distance(qs, q0, v0) -> float:
    """Max distance of the rows of ``qs`` from span{q0, v0}."""
    basis, _ = np.linalg.qr(np.column_stack([q0, v0]))
    qs = np.atleast_2d(qs)
    resid = qs - (qs @ basis) @ basis.T
    return float(np.linalg.norm(resid, axis=1).max())


def spherical_pendulum_residual(traj: Trajectory, inertia: InertiaSpec, eps: float) -> float:
    """Sup of the tangential part of (I_1+I_n) u'' + eps E_n along the body axis column.

    ``u`` is the last column of g (the body axis E_n seen in space) and u'' is
    taken by second differences; ``traj`` must be a uniformly sampled full run.
    """
    if not inertia.is_symmetric_top():
        raise ValueError("spherical pendulum reduction needs I_1 = ... = I_{n-1}")
    h = np.diff(traj.times)
    if h.size < 2 or np.abs(h - h[0]).max() > 1e-9 * abs(h[0]):
        raise ValueError("trajectory must be uniformly sampled with at least 3 samples")
    h = h[0]
    u = np.array([s.g[:, -1] for s in traj.states])
    acc = (u[2:] - 2.0 * u[1:-1] + u[:-2]) / (h * h)
    r = inertia.J[0, 0] * acc
    r[:, -1] += eps
    mid = u[1:-1]
    tangential = r - np.sum(r * mid, axis=1)[:, None] * mid
    return float(np.linalg.norm(tangential, axis=1).max())


def pendulum_period(amplitude: float, eps: float, mass: float) -> float:
    """Period of the planar pendulum m theta'' = -eps sin(theta) released at rest from ``amplitude``."""
    k2 = math.sin(0.5 * amplitude) ** 2
    return 4.0 * float(ellipk(k2)) / math.sqrt(eps / mass)


# ---------------------------------------------------------------------------
# Kharlamova case


def kharlamova_exit_points(q_full, p, inertia: InertiaSpec, pot: Potential) -> list[dict]:
    """Where the tau-parabola through (q, p) leaves the ball, forward and backward.

    In the Kharlamova case q(tau) = q0 + tau A p0 - tau^2 A C / 2 exactly.
    Returns one dict per direction with tau, q, p and (Ap, q) at the exit.
    """
    if np.any(pot.B != 0) or pot.eps != 0:
        raise ValueError("exit points are closed form only for the Kharlamova potential")
    q0 = np.asarray(q_full, dtype=float)[:-1]
    p0 = np.asarray(p, dtype=float)
    A = inertia.A
    a, b, cc = q0, A @ p0, -0.5 * (A @ pot.C)
    # |a + b t + cc t^2|^2 - 1 as a quartic in t
    coeffs = [cc @ cc, 2 * b @ cc, b @ b + 2 * a @ cc, 2 * a @ b, a @ a - 1.0]
    roots = np.roots(coeffs)
    real = np.sort(roots[np.abs(roots.imag) < 1e-9].real)
    out = []
    for direction, pick in ((1, real[real > 0]), (-1, real[real < 0][::-1])):
        if pick.size == 0:
            continue
        tau = float(pick[0])
        q = a + b * tau + cc * tau * tau
        pp = p0 - tau * pot.C
        out.append({"direction": direction, "tau": tau, "q": q, "p": pp, "ap_dot_q": float((A @ pp) @ q)})
    return out


def closure_return(inertia: InertiaSpec, pot: Potential, s0: ReducedState, dt: float, t_max: float,
                   tol: float = 1e-3, leave: float = 0.05) -> dict:
    """First return of the reduced flow to ``s0``.

    Steps the flow with RK4, and at every grid-local minimum of the phase-space
    distance below ``leave`` (after first moving further than ``leave``) refines
    the minimum on the continuous flow. Returns the return time and distance;
    ``returned`` is False if no minimum below ``tol`` occurs before ``t_max``.
    """
    system = ReducedSystem(inertia, pot)
    y0 = system.pack(s0)
    y = y0.copy()
    dist = lambda v: float(np.linalg.norm(v - y0))
    left = False
    prev2 = prev = None
    best = (math.inf, None)
    steps = int(math.ceil(t_max / dt))
    for k in range(1, steps + 1):
        y = system.project(rk4_step(system.field, y, dt))
        d = dist(y)
        if not left:
            left = d > leave
        elif prev is not None and prev2 is not None and prev[0] < prev2[0] and prev[0] <= d and prev[0] < leave:
            base = system.unpack(prev2[1])
            t_base = (k - 2) * dt

            def objective(s):
                return dist(system.pack(flow(system, base, s, dt / 4)))

            res = minimize_scalar(objective, bounds=(0.0, 2 * dt), method="bounded",
                                  options={"xatol": 1e-12})
            if res.fun < best[0]:
                best = (float(res.fun), t_base + float(res.x))
            if res.fun < tol:
                return {"returned": True, "t_return": t_base + float(res.x), "distance": float(res.fun)}
        prev2, prev = prev, (d, y.copy())
    return {"returned": False, "t_return": best[1], "distance": best[0]}
