"""Seeded verification suites.

Every check draws its randomness from ``default_rng(SeedSequence([seed, crc32(name)]))``
so results depend only on (check, seed), not on which suite runs it. A check
passes when its measured value is strictly below ``tolerance * tolerance_scale``.
"""

from __future__ import annotations

import math
import time
import zlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from ..dynamics import (
    FullState,
    FullSystem,
    ReducedState,
    ReducedSystem,
    divergence_residual,
    full_to_reduced,
    integrate,
    reduced_rhs,
    reduced_to_full,
    relative_drift,
)
from ..integrable import (
    angle_periods,
    classify_topology,
    closure_return,
    count_level_set_components,
    fi_function,
    h_star_function,
    integrals_fi,
    integrals_fij,
    kappa,
    kharlamova_exit_points,
    kt_angles,
    pendulum_period,
    planarity_distance,
    poisson_bracket,
    sigma_residual,
    spherical_pendulum_residual,
)
from ..liealg import (
    InertiaSpec,
    commutator,
    embed,
    frame_with_last_row,
    inertia_apply,
    killing_inner,
    orthogonality_error,
    random_rotation,
    reorthonormalize,
    skew,
    split,
    wedge,
)
from ..potentials import Potential
from ..reduction import (
    Chart,
    el1_rhs,
    from_chart,
    hamiltonized_oracle,
    propagate_el2,
    span_rank,
    unweighted_divergence,
    weighted_divergence_residual,
)
from .io import read_csv, trajectory_table, write_csv

__all__ = ["Check", "CheckResult", "SUITES", "CHECKS", "run_check", "run_suite", "report_dict"]


@dataclass
class Measurement:
    value: float
    tolerance: float
    detail: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Check:
    name: str
    suite: str
    func: Callable[[np.random.Generator], Measurement]
    criterion: Optional[str] = None
    description: str = ""


@dataclass
class CheckResult:
    name: str
    suite: str
    criterion: Optional[str]
    passed: bool
    value: float
    tolerance: float
    runtime: float
    detail: dict

    def to_dict(self, timings: bool = False) -> dict:
        out = {
            "name": self.name,
            "suite": self.suite,
            "criterion": self.criterion,
            "status": "pass" if self.passed else "fail",
            "value": self.value,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }
        if timings:
            out["runtime"] = self.runtime
        return out


def _unit(rng, n):
    v = rng.normal(size=n)
    return v / np.linalg.norm(v)


def _builtin_potentials(n: int, rng) -> dict[str, Potential]:
    C = rng.uniform(-2.0, 2.0, size=n - 1)
    B = np.sort(rng.uniform(0.5, 6.0, size=n))[::-1]
    return {
        "zero": Potential.zero(n),
        "kharlamova": Potential.kharlamova(C),
        "klebsh_tisserand": Potential.klebsh_tisserand(B),
        "combined": Potential.combined(C, B),
        "lagrange_top": Potential.lagrange_top(rng.uniform(0.5, 2.0), n),
    }


# ---------------------------------------------------------------------------
# liealg


def check_wedge_orthonormal(rng) -> Measurement:
    worst = 0.0
    for n in range(2, 7):
        basis = [wedge(i, j, n) for i in range(n) for j in range(i + 1, n)]
        gram = np.array([[killing_inner(a, b) for b in basis] for a in basis])
        worst = max(worst, float(np.abs(gram - np.eye(len(basis))).max()))
    return Measurement(worst, 1e-15, {"dimensions": [2, 3, 4, 5, 6]})


def check_ad_invariance(rng) -> Measurement:
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 7))
        X, Y, Z = (skew(rng.normal(size=(n, n))) for _ in range(3))
        worst = max(worst, abs(killing_inner(commutator(X, Y), Z) + killing_inner(Y, commutator(X, Z))))
    return Measurement(worst, 1e-12)


def check_symmetric_pair(rng) -> Measurement:
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 7))
        A = embed(np.zeros((n, n)), rng.normal(size=n - 1))
        B = embed(np.zeros((n, n)), rng.normal(size=n - 1))
        worst = max(worst, float(np.abs(split(commutator(A, B))[1]).max()))
    return Measurement(worst, 1e-15)


def check_inertia_operator(rng) -> Measurement:
    sa = inv = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 7))
        spec = InertiaSpec.physical(rng.uniform(0.5, 3.0, size=n))
        X, Y = skew(rng.normal(size=(n, n))), skew(rng.normal(size=(n, n)))
        sa = max(sa, abs(killing_inner(inertia_apply(spec, X), Y) - killing_inner(X, inertia_apply(spec, Y))))
        D = embed(np.zeros((n, n)), rng.normal(size=n - 1))
        H = split(X)[0]
        inv = max(inv, float(np.abs(split(inertia_apply(spec, D))[0]).max()),
                  float(np.abs(split(inertia_apply(spec, H))[1]).max()))
    return Measurement(max(sa, inv), 1e-12, {"self_adjointness": sa, "invariant_subspaces": inv})


def check_reorthonormalize(rng) -> Measurement:
    worst = 0.0
    for _ in range(50):
        n = int(rng.integers(3, 7))
        R = random_rotation(n, rng)
        g = R + 1e-3 * rng.normal(size=(n, n))
        once = reorthonormalize(g)
        worst = max(worst, orthogonality_error(once),
                    float(np.abs(reorthonormalize(once) - once).max()),
                    float(np.abs(reorthonormalize(1.001 * R) - R).max()))
    return Measurement(worst, 1e-12)


# ---------------------------------------------------------------------------
# dynamics

AC1_INERTIA = (1.0, 2.0, 3.0, 4.0)
AC1_B = (5.0, 4.0, 3.0, 1.0)


def check_energy_conservation(rng) -> Measurement:
    inertia = InertiaSpec.physical(AC1_INERTIA)
    pot = Potential.klebsh_tisserand(AC1_B)
    s0 = ReducedState(_unit(rng, 4), rng.normal(size=3))
    red = integrate(ReducedSystem(inertia, pot), s0, 1e-3, 20000, record_every=10)
    full = integrate(FullSystem(inertia, pot), reduced_to_full(s0, inertia), 1e-3, 20000, record_every=10)
    d_red = relative_drift(red.monitors["energy"])
    d_full = relative_drift(full.monitors["energy"])
    return Measurement(max(d_red, d_full), 1e-6, {
        "reduced_drift": d_red,
        "full_drift": d_full,
        "max_orthogonality_error": float(full.monitors["orthogonality"].max()),
        "max_norm_error": float(red.monitors["norm_error"].max()),
    })


def check_projection_invariants(rng) -> Measurement:
    inertia = InertiaSpec.physical(rng.uniform(0.5, 3.0, size=5))
    pot = _builtin_potentials(5, rng)["combined"]
    s0 = ReducedState(_unit(rng, 5), rng.normal(size=4))
    red = integrate(ReducedSystem(inertia, pot), s0, 1e-3, 3000, record_every=10)
    full = integrate(FullSystem(inertia, pot), reduced_to_full(s0, inertia), 1e-3, 3000, record_every=10)
    ortho = float(full.monitors["orthogonality"].max())
    norm = float(red.monitors["norm_error"].max())
    # the stored omega has no so(n-1) part, so its assembled constraint residual is exactly zero
    constraint = max(float(np.abs(split(s.omega_matrix())[0]).max()) for s in full.states)
    return Measurement(max(ortho / 1e-9, norm / 1e-10, constraint), 1.0,
                       {"orthogonality": ortho, "norm_error": norm, "constraint_residual": constraint})


def check_measure_preservation(rng) -> Measurement:
    worst = {}
    for n in (3, 4):
        inertia = InertiaSpec.physical(rng.uniform(0.5, 3.0, size=n))
        for name, pot in _builtin_potentials(n, rng).items():
            w = 0.0
            for _ in range(1000):
                w = max(w, divergence_residual(_unit(rng, n), rng.normal(size=n - 1), inertia, pot))
            worst[f"n{n}_{name}"] = w
    return Measurement(max(worst.values()), 1e-6, worst)


def check_full_reduced(rng) -> Measurement:
    worst = {}
    for name, masses, pot in (
        ("klebsh_tisserand", AC1_INERTIA, Potential.klebsh_tisserand(AC1_B)),
        ("combined_n3", (1.0, 2.0, 3.0), Potential.combined(rng.uniform(-1, 1, 2), (4.0, 2.5, 1.0))),
    ):
        inertia = InertiaSpec.physical(masses)
        n = inertia.n
        s0 = ReducedState(_unit(rng, n), rng.normal(size=n - 1))
        full0 = reduced_to_full(s0, inertia)
        red = integrate(ReducedSystem(inertia, pot), full_to_reduced(full0, inertia), 1e-3, 5000)
        full = integrate(FullSystem(inertia, pot), full0, 1e-3, 5000)
        worst[name] = float(np.linalg.norm(full.axes() - red.axes(), axis=1).max())
    return Measurement(max(worst.values()), 1e-6, worst)


def rk4_order_ratio(rng, reproject: bool = True) -> tuple[float, float, float]:
    inertia = InertiaSpec.physical(AC1_INERTIA)
    pot = Potential.klebsh_tisserand(AC1_B)
    system = ReducedSystem(inertia, pot)
    s0 = ReducedState(_unit(rng, 4), rng.normal(size=3))
    T, dt = 4.0, 0.04

    def end(h):
        traj = integrate(system, s0, h, int(round(T / h)), record_every=10 ** 9, reproject=reproject)
        return system.pack(traj.states[-1])

    ref = end(dt / 16)
    e1 = float(np.abs(end(dt) - ref).max())
    e2 = float(np.abs(end(dt / 2) - ref).max())
    return e1 / e2, e1, e2


def check_rk4_order(rng) -> Measurement:
    ratio, e1, e2 = rk4_order_ratio(rng)
    return Measurement(abs(ratio - 16.0), 2.0, {"ratio": ratio, "error_dt": e1, "error_dt_half": e2})


def check_csv_roundtrip(rng) -> Measurement:
    inertia = InertiaSpec.physical(AC1_INERTIA)
    pot = Potential.combined(rng.normal(size=3), AC1_B)
    s0 = ReducedState(_unit(rng, 4), rng.normal(size=3))
    traj = integrate(FullSystem(inertia, pot), reduced_to_full(s0, inertia), 1e-2, 200)
    table = trajectory_table(traj, inertia, pot)
    back = read_csv(write_csv(table))
    worst = 0.0
    for name, col in table.items():
        same_nan = np.array_equal(np.isnan(col), np.isnan(back[name]))
        if not same_nan:
            worst = math.inf
            continue
        mask = ~np.isnan(col)
        if mask.any():
            worst = max(worst, float(np.abs(col[mask] - back[name][mask]).max()))
    return Measurement(worst, 1e-15, {"rows": len(traj), "columns": len(table)})


# ---------------------------------------------------------------------------
# reduction


def _chart_point(rng, n, radius=0.9):
    m = n - 1
    q = _unit(rng, m) * radius * rng.uniform() ** (1.0 / m)
    sigma = 1 if rng.uniform() < 0.5 else -1
    return Chart.from_qP(q, rng.normal(size=m), sigma)


def check_weighted_divergence(rng) -> Measurement:
    worst = {}
    contrast = {}
    for n in (3, 4):
        inertia = InertiaSpec.physical(rng.uniform(0.5, 3.0, size=n))
        for name, pot in _builtin_potentials(n, rng).items():
            w = 0.0
            u = []
            for _ in range(1000):
                c = _chart_point(rng, n)
                w = max(w, weighted_divergence_residual(c, inertia, pot))
                if len(u) < 20:
                    u.append(unweighted_divergence(c, inertia, pot))
            worst[f"n{n}_{name}"] = w
            contrast[f"n{n}_{name}"] = float(np.median(u))
    return Measurement(max(worst.values()), 1e-6, {"weighted": worst, "unweighted_median": contrast})


def _rotation_on_lambda(n, rng):
    x = _unit(rng, n - 1)
    g = frame_with_last_row(np.append(x, 0.0))
    R = np.eye(n)
    R[:-1, :-1] = random_rotation(n - 1, rng)
    g = R @ g
    g[-1, -1] = 0.0
    return g


def check_rank_law(rng) -> Measurement:
    violations = 0
    deficiency = {}
    for n in (3, 4, 5):
        full = n * (n - 1) // 2
        for _ in range(100):
            g = random_rotation(n, rng)
            while abs(g[-1, -1]) <= 0.1:
                g = random_rotation(n, rng)
            violations += span_rank(g) != full
        found = set()
        for _ in range(100):
            r = span_rank(_rotation_on_lambda(n, rng))
            violations += r >= full
            found.add(full - r)
        if len(found) != 1:
            violations += 1
        deficiency[str(n)] = sorted(found)
    return Measurement(float(violations), 1.0, {"deficiency_on_enn_zero": deficiency})


def check_el1_pushforward(rng) -> Measurement:
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(3, 6))
        inertia = InertiaSpec.physical(rng.uniform(0.5, 3.0, size=n))
        pot = _builtin_potentials(n, rng)["combined"]
        c = _chart_point(rng, n)
        s = from_chart(c)
        qdot, pdot = reduced_rhs(s, inertia, pot)
        qn = s.q[-1]
        Pdot = pdot / qn - s.p * qdot[-1] / qn ** 2
        a, b = el1_rhs(c, inertia, pot)
        worst = max(worst, float(np.abs(a - qdot[:-1]).max()), float(np.abs(b - Pdot).max()))
    return Measurement(worst, 1e-10)


def check_hamiltonization(rng) -> Measurement:
    worst = {}
    inertia = InertiaSpec.physical(AC1_INERTIA)
    for name, pot, sigma in (
        ("klebsh_tisserand_upper", Potential.klebsh_tisserand(AC1_B), 1),
        ("combined_lower", Potential.combined(rng.uniform(-1, 1, 3), AC1_B), -1),
        ("lagrange_upper", Potential.lagrange_top(1.2, 4), 1),
    ):
        q = _unit(rng, 3) * rng.uniform(0.0, 0.5)
        s0 = ReducedState(np.append(q, sigma * math.sqrt(1 - q @ q)), 0.5 * rng.normal(size=3))
        out = hamiltonized_oracle(inertia, pot, s0, 1e-3, 5000)
        worst[name] = out["sup_error"]
    return Measurement(max(worst.values()), 1e-6, worst)


def check_kharlamova_parabola(rng) -> Measurement:
    inertia = InertiaSpec.physical(AC1_INERTIA)
    C = rng.uniform(-1.0, 1.0, size=3)
    pot = Potential.kharlamova(C)
    q0 = _unit(rng, 3) * 0.2
    p0 = 0.3 * rng.normal(size=3)
    dtau, steps = 1e-3, 500
    traj = propagate_el2(q0, p0, 1, inertia, pot, dtau, steps)
    A = inertia.A
    worst = 0.0
    for tau, s in zip(traj.tau, traj.states):
        exact = q0 + tau * (A @ p0) - 0.5 * tau * tau * (A @ C)
        worst = max(worst, float(np.abs(s.q - exact).max()))
    return Measurement(worst, 1e-10, {"tau_end": float(traj.tau[-1])})


def check_h_star_el2(rng) -> Measurement:
    inertia = InertiaSpec.physical(AC1_INERTIA)
    pot = Potential.klebsh_tisserand(AC1_B)
    k = kappa(inertia, AC1_B)
    r = 0.6 * rng.dirichlet(np.ones(3))
    phi = rng.uniform(0, 2 * np.pi, 3)
    c = r * k
    q, p = np.sqrt(r) * np.sin(phi), np.sqrt(c) * np.cos(phi)
    traj = propagate_el2(q, p, 1, inertia, pot, 1e-3, 10000, record_every=10)
    return Measurement(relative_drift(traj.monitors["h_star"]), 1e-8)


# ---------------------------------------------------------------------------
# integrable


def check_poisson(rng) -> Measurement:
    worst_ff = worst_fh = 0.0
    for n in (3, 4, 5):
        inertia = InertiaSpec.physical(rng.uniform(0.5, 3.0, size=n))
        pots = _builtin_potentials(n, rng)
        for pot in (pots["kharlamova"], pots["klebsh_tisserand"], pots["combined"]):
            fs = [fi_function(i, inertia, pot) for i in range(n - 1)]
            H = h_star_function(inertia, pot)
            for _ in range(100):
                q, p = rng.uniform(-1, 1, n - 1), rng.normal(size=n - 1)
                for i in range(n - 1):
                    worst_fh = max(worst_fh, abs(poisson_bracket(fs[i], H, q, p)))
                    for j in range(n - 1):
                        worst_ff = max(worst_ff, abs(poisson_bracket(fs[i], fs[j], q, p)))
    return Measurement(max(worst_ff, worst_fh), 1e-12, {"f_i_f_j": worst_ff, "f_i_H": worst_fh})


def check_fi_drift(rng) -> Measurement:
    inertia = InertiaSpec.physical(AC1_INERTIA)
    pot = Potential.combined(rng.uniform(-1, 1, 3), AC1_B)
    s0 = ReducedState(_unit(rng, 4), rng.normal(size=3))
    traj = integrate(ReducedSystem(inertia, pot), s0, 1e-3, 20000, record_every=10)
    f = np.array([integrals_fi(s.q, s.p, inertia, pot) for s in traj.states])
    drifts = [relative_drift(f[:, i]) for i in range(3)]
    return Measurement(max(drifts), 1e-6, {"drifts": drifts, "f0": f[0].tolist()})


def check_frequencies(rng) -> Measurement:
    errors = {}
    for masses, B in (((1.0, 2.0, 3.0), (5.0, 3.0, 1.0)),
                      ((1.0, 2.0, 3.0, 4.0, 5.0), (9.0, 7.0, 5.0, 3.0, 1.0))):
        inertia = InertiaSpec.physical(masses)
        pot = Potential.klebsh_tisserand(B)
        m = inertia.n - 1
        k = kappa(inertia, B)
        r = 0.6 * rng.dirichlet(np.ones(m))
        phi0 = rng.uniform(0, 2 * np.pi, m)
        q, p = np.sqrt(r) * np.sin(phi0), np.sqrt(r * k) * np.cos(phi0)
        Omega = kt_angles(q, p, inertia, pot).omega
        dtau = 1e-2
        steps = int(12 * 2 * np.pi / Omega.min() / dtau)
        traj = propagate_el2(q, p, 1, inertia, pot, dtau, steps)
        phis = np.array([kt_angles(s.q, s.p, inertia, pot).phi for s in traj.states])
        T = angle_periods(traj.tau, phis)
        errors[f"n{inertia.n}"] = (np.abs(2 * np.pi / T - Omega) / Omega).tolist()
    return Measurement(max(max(v) for v in errors.values()), 1e-4, errors)


def kharlamova_seeds(rng, inertia, pot, count, margin=0.05):
    seeds = []
    n = inertia.n
    while len(seeds) < count:
        q, p = _unit(rng, n), rng.normal(size=n - 1)
        if abs(q[-1]) < 0.1:
            continue
        exits = kharlamova_exit_points(q, p, inertia, pot)
        if len(exits) == 2 and min(abs(e["ap_dot_q"]) for e in exits) >= margin:
            seeds.append(ReducedState(q, p))
    return seeds


def check_kharlamova_closure(rng) -> Measurement:
    inertia = InertiaSpec.physical((1.0, 2.0, 3.0))
    pot = Potential.kharlamova(rng.uniform(0.5, 1.5, size=2) * rng.choice([-1, 1], size=2))
    worst, times = 0.0, []
    for s0 in kharlamova_seeds(rng, inertia, pot, 20):
        out = closure_return(inertia, pot, s0, 5e-3, 200.0)
        worst = max(worst, out["distance"] if out["returned"] else math.inf)
        times.append(out["t_return"])
    return Measurement(worst, 1e-3, {"return_times": times, "C": pot.C.tolist()})


def check_sigma_equilibria(rng) -> Measurement:
    worst = 0.0
    resid = 0.0
    for n in (3, 4, 5):
        inertia = InertiaSpec.physical(rng.uniform(0.5, 3.0, size=n))
        pots = _builtin_potentials(n, rng)
        for pot in (pots["kharlamova"], pots["klebsh_tisserand"], pots["combined"]):
            for _ in range(20):
                x = _unit(rng, n - 1)
                p = rng.normal(size=n - 1)
                Ap = inertia.A @ p
                # make Ap orthogonal to x
                p = p - ((Ap @ x) / (x @ inertia.A @ x)) * x
                q = np.append(x, 0.0)
                resid = max(resid, *sigma_residual(q, p, inertia, pot))
                qd, pd = reduced_rhs(ReducedState(q, p), inertia, pot)
                worst = max(worst, float(np.linalg.norm(np.concatenate([qd, pd]))))
    return Measurement(worst, 1e-12, {"max_sigma_residual": resid})


def topology_cases(n: int) -> list[tuple[np.ndarray, np.ndarray, str, dict]]:
    m = n - 1
    k = np.linspace(1.0, 2.0, m) * 3.0
    interior = np.full(m, 0.8 / m)
    case_i = np.full(m, 0.9)
    case_ii = np.full(m, 2.0)
    case_iii = np.full(m, 0.5)
    case_iii[0] = 1.5
    return [
        (interior * k, k, "InteriorTori", {"l": m}),
        (case_i * k, k, "HandledSurfaceCase_i", {}),
        (case_ii * k, k, "SpheresDisjoint", {"count": 2 ** m}),
        (case_iii * k, k, "CylinderToriCase_iii", {"torus_dim": m}),
        (np.roll(case_iii, 1) * k, k, "CylinderToriCase_iii", {"torus_dim": m}),
        (np.full(m, 1.0) * k, k, "Degenerate", {}),
    ]


def check_topology(rng) -> Measurement:
    mismatches = []
    for n in (3, 4):
        for c, k, tag, extra in topology_cases(n):
            for scale in (1.0, float(rng.uniform(0.01, 100.0))):
                got = classify_topology(c * scale, k * scale)
                ok = got.tag == tag and all(getattr(got, key) == val for key, val in extra.items())
                if not ok:
                    mismatches.append({"n": n, "expected": tag, "got": got.tag})
    return Measurement(float(len(mismatches)), 1.0, {"mismatches": mismatches})


def check_case_ii_components(rng) -> Measurement:
    inertia = InertiaSpec.physical((1.0, 2.0, 3.0))
    k = kappa(inertia, (5.0, 3.0, 1.0))
    c = k * rng.uniform(1.5, 3.0, size=2)
    count = count_level_set_components(c, k, rng=rng)
    expected = classify_topology(c, k).count
    return Measurement(float(abs(count - expected)), 1.0, {"components": count, "expected": expected})


LAGRANGE_INERTIA = (1.0, 1.0, 1.0, 2.0)


def _lagrange_run(rng):
    inertia = InertiaSpec.physical(LAGRANGE_INERTIA)
    pot = Potential.lagrange_top(1.5, 4)
    s0 = ReducedState(_unit(rng, 4), rng.normal(size=3))
    traj = integrate(ReducedSystem(inertia, pot), s0, 1e-3, 10000, record_every=10)
    return inertia, pot, s0, traj


def check_lagrange_integrals(rng) -> Measurement:
    inertia, pot, s0, traj = _lagrange_run(rng)
    f = np.array([integrals_fij(s.q, s.p) for s in traj.states])
    fij_drift = float(np.abs(f - f[0]).max() / np.abs(f[0]).max())
    plane = planarity_distance(np.array([s.q[:-1] for s in traj.states]), s0.q[:-1], inertia.A @ s0.p)
    return Measurement(max(fij_drift, plane), 1e-8, {"fij_drift": fij_drift, "planarity": plane})


def check_spherical_pendulum(rng) -> Measurement:
    inertia = InertiaSpec.physical(LAGRANGE_INERTIA)
    eps = 1.5
    pot = Potential.lagrange_top(eps, 4)
    s0 = ReducedState(_unit(rng, 4), rng.normal(size=3))
    traj = integrate(FullSystem(inertia, pot), reduced_to_full(s0, inertia), 1e-3, 5000)
    return Measurement(spherical_pendulum_residual(traj, inertia, eps), 1e-5)


def planar_pendulum_period(amplitude: float = 1.0, eps: float = 1.5, dt: float = 1e-3):
    inertia = InertiaSpec.physical(LAGRANGE_INERTIA)
    n = inertia.n
    pot = Potential.lagrange_top(eps, n)
    a = math.pi - amplitude
    g = np.eye(n)
    g[0, 0] = g[-1, -1] = math.cos(a)
    g[0, -1] = math.sin(a)
    g[-1, 0] = -math.sin(a)
    mass = inertia.J[0, 0]
    expected = pendulum_period(amplitude, eps, mass)
    steps = int(3.3 * expected / dt)
    traj = integrate(FullSystem(inertia, pot), FullState(g, np.zeros(n - 1)), dt, steps)
    u1 = np.array([s.g[0, -1] for s in traj.states])
    measured = angle_periods(traj.times, np.arcsin(np.clip(u1, -1, 1))[:, None])[0]
    return measured, expected


def check_pendulum_period(rng) -> Measurement:
    measured, expected = planar_pendulum_period()
    return Measurement(abs(measured - expected) / expected, 1e-4, {"measured": measured, "expected": expected})


# ---------------------------------------------------------------------------

CHECKS: list[Check] = [
    Check("wedge_orthonormality", "liealg", check_wedge_orthonormal),
    Check("ad_invariance", "liealg", check_ad_invariance),
    Check("symmetric_pair", "liealg", check_symmetric_pair),
    Check("inertia_operator", "liealg", check_inertia_operator),
    Check("reorthonormalize", "liealg", check_reorthonormalize),
    Check("energy_conservation", "dynamics", check_energy_conservation, "1"),
    Check("measure_preservation", "dynamics", check_measure_preservation, "2a"),
    Check("full_reduced_agreement", "dynamics", check_full_reduced, "6"),
    Check("projection_invariants", "dynamics", check_projection_invariants),
    Check("rk4_order", "dynamics", check_rk4_order, "11a"),
    Check("csv_roundtrip", "dynamics", check_csv_roundtrip, "11b"),
    Check("weighted_divergence", "reduction", check_weighted_divergence, "2b"),
    Check("span_rank_law", "reduction", check_rank_law, "3"),
    Check("el1_pushforward", "reduction", check_el1_pushforward),
    Check("hamiltonization_oracle", "reduction", check_hamiltonization, "7a"),
    Check("kharlamova_parabola", "reduction", check_kharlamova_parabola, "7b"),
    Check("h_star_conservation", "reduction", check_h_star_el2),
    Check("poisson_commutation", "integrable", check_poisson, "4a"),
    Check("fi_drift", "integrable", check_fi_drift, "4b"),
    Check("kt_frequencies", "integrable", check_frequencies, "5"),
    Check("kharlamova_closure", "integrable", check_kharlamova_closure, "8a"),
    Check("sigma_equilibria", "integrable", check_sigma_equilibria, "8b"),
    Check("topology_classification", "integrable", check_topology, "9a"),
    Check("case_ii_components", "integrable", check_case_ii_components, "9b"),
    Check("lagrange_integrals", "integrable", check_lagrange_integrals, "10ab"),
    Check("spherical_pendulum", "integrable", check_spherical_pendulum, "10c"),
    Check("pendulum_period", "integrable", check_pendulum_period, "10d"),
]

SUITES = ("liealg", "dynamics", "reduction", "integrable", "all")


def check_rng(name: str, seed: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([int(seed), zlib.crc32(name.encode())]))


def run_check(check: Check, seed: int, tolerance_scale: float = 1.0) -> CheckResult:
    start = time.perf_counter()
    try:
        m = check.func(check_rng(check.name, seed))
        value, tol, detail = float(m.value), float(m.tolerance), m.detail
    except Exception as exc:  # a crashing check is a failing check
        value, tol, detail = math.inf, math.nan, {"error": f"{type(exc).__name__}: {exc}"}
    runtime = time.perf_counter() - start
    passed = bool(value < tol * tolerance_scale)
    return CheckResult(check.name, check.suite, check.criterion, passed, value, tol, runtime, detail)


def _determinism_result(seed: int, tolerance_scale: float) -> CheckResult:
    start = time.perf_counter()
    from .io import dumps_json

    a = dumps_json(report_dict(run_suite("liealg", seed), seed, "liealg"))
    b = dumps_json(report_dict(run_suite("liealg", seed), seed, "liealg"))
    value = 0.0 if a == b else 1.0
    return CheckResult("verify_determinism", "all", "11c", bool(value < 1.0 * tolerance_scale), value, 1.0,
                       time.perf_counter() - start, {"suite": "liealg", "bytes": len(a)})


def run_suite(suite: str, seed: int, tolerance_scale: float = 1.0,
              progress: Optional[Callable[[CheckResult], None]] = None) -> list[CheckResult]:
    if suite not in SUITES:
        raise ValueError(f"unknown suite {suite!r}; choose from {', '.join(SUITES)}")
    results = []
    for check in CHECKS:
        if suite == "all" or check.suite == suite:
            res = run_check(check, seed, tolerance_scale)
            results.append(res)
            if progress:
                progress(res)
    if suite == "all":
        res = _determinism_result(seed, tolerance_scale)
        results.append(res)
        if progress:
            progress(res)
    return results


def report_dict(results: list[CheckResult], seed: int, suite: str, timings: bool = False) -> dict:
    return {
        "suite": suite,
        "seed": int(seed),
        "passed": all(r.passed for r in results),
        "checks": [r.to_dict(timings) for r in results],
    }
