"""Linear algebra on so(n) and SO(n).

Skew matrices are plain ``numpy`` arrays. Indices are zero based, so the
distinguished body axis ``E_n`` has index ``n - 1``. The splitting
so(n) = so(n-1) + D uses the wedge basis ``E_i ^ E_n`` (i < n-1) for D.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

__all__ = [
    "InertiaSpec",
    "wedge",
    "skew",
    "killing_inner",
    "split",
    "embed",
    "d_matrix",
    "inertia_apply",
    "commutator",
    "reorthonormalize",
    "orthogonality_error",
    "frame_with_last_row",
    "h_basis",
    "random_rotation",
]


def wedge(i: int, j: int, n: int) -> np.ndarray:
    """Basis bivector ``E_i ^ E_j`` as an n x n matrix (entry (i, j) = 1)."""
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"wedge indices ({i}, {j}) out of range for n={n}")
    if i == j:
        raise ValueError("wedge requires i != j")
    m = np.zeros((n, n))
    m[i, j] = 1.0
    m[j, i] = -1.0
    return m


def skew(m) -> np.ndarray:
    """Antisymmetric part of ``m``; the result is exactly skew."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {m.shape}")
    return 0.5 * (m - m.T)


def _check_same(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape} vs {y.shape}")


def killing_inner(x, y) -> float:
    """Metric <X, Y> = tr(X Y^T) / 2; the wedge basis is orthonormal."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same(x, y)
    return 0.5 * float(np.sum(x * y))


def split(x) -> tuple[np.ndarray, np.ndarray]:
    """Split ``x`` into its so(n-1) block and its D coefficients.

    Returns ``(h_part, d_part)`` where ``h_part`` is ``x`` with last row and
    column zeroed and ``d_part[i] = x[i, n-1]``.
    """
    x = np.asarray(x, dtype=float)
    h = x.copy()
    h[-1, :] = 0.0
    h[:, -1] = 0.0
    d = x[:-1, -1].copy()
    return h, d


def d_matrix(d) -> np.ndarray:
    """Assemble ``sum_i d[i] E_i ^ E_n``."""
    d = np.asarray(d, dtype=float)
    n = d.shape[0] + 1
    m = np.zeros((n, n))
    m[:-1, -1] = d
    m[-1, :-1] = -d
    return m


def embed(h_part, d_part) -> np.ndarray:
    """Inverse of :func:`split`."""
    h = np.array(h_part, dtype=float)
    return h + d_matrix(d_part)


def commutator(x, y) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same(x, y)
    return x @ y - y @ x


def h_basis(n: int) -> list[np.ndarray]:
    """Wedge basis of so(n-1) embedded in so(n), ordered (i, j) with i < j < n-1."""
    return [wedge(i, j, n) for i in range(n - 1) for j in range(i + 1, n - 1)]


@dataclass(frozen=True)
class InertiaSpec:
    """Inertia operator that preserves so(n) = so(n-1) + D.

    ``physical`` bodies carry a diagonal mass tensor ``I`` and act by
    ``I w + w I``. ``block`` bodies carry ``J`` on D and ``K`` on so(n-1)
    (``K`` acts on wedge coordinates ordered as :func:`h_basis`).
    """

    kind: str
    I: Optional[np.ndarray] = None
    J: np.ndarray = field(default=None)
    K: Optional[np.ndarray] = None

    @classmethod
    def physical(cls, masses) -> "InertiaSpec":
        masses = np.asarray(masses, dtype=float)
        if masses.ndim != 1 or masses.size < 3:
            raise ValueError("mass tensor needs at least 3 diagonal entries")
        if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
            raise ValueError(f"mass tensor entries must be positive, got {masses.tolist()}")
        J = np.diag(masses[:-1] + masses[-1])
        masses.setflags(write=False)
        J.setflags(write=False)
        return cls(kind="physical", I=masses, J=J)

    @classmethod
    def block(cls, J, K=None) -> "InertiaSpec":
        J = np.array(J, dtype=float)
        if J.ndim != 2 or J.shape[0] != J.shape[1] or J.shape[0] < 2:
            raise ValueError("J must be a square matrix of size n-1 >= 2")
        if not np.allclose(J, J.T, rtol=0, atol=1e-14 * max(1.0, np.abs(J).max())):
            raise ValueError("J must be symmetric")
        J = 0.5 * (J + J.T)
        if np.linalg.eigvalsh(J).min() <= 0:
            raise ValueError("J must be positive definite")
        m = J.shape[0]
        dim_h = m * (m - 1) // 2
        K = np.eye(dim_h) if K is None else np.array(K, dtype=float)
        if K.shape != (dim_h, dim_h):
            raise ValueError(f"K must be {dim_h}x{dim_h} for n={m + 1}")
        J.setflags(write=False)
        K.setflags(write=False)
        return cls(kind="block", J=J, K=K)

    @property
    def n(self) -> int:
        return self.J.shape[0] + 1

    @property
    def A(self) -> np.ndarray:
        """Inverse metric on D."""
        if self.kind == "physical":
            return np.diag(1.0 / np.diag(self.J))
        return np.linalg.inv(self.J)

    def is_symmetric_top(self, rtol: float = 1e-12) -> bool:
        """True for physical bodies with I_1 = ... = I_{n-1}."""
        if self.kind != "physical":
            return False
        head = self.I[:-1]
        return bool(np.all(np.abs(head - head[0]) <= rtol * abs(head[0])))

    def to_dict(self) -> dict:
        if self.kind == "physical":
            return {"kind": "physical", "I": self.I.tolist()}
        return {"kind": "block", "J": self.J.tolist(), "K": self.K.tolist()}


def inertia_apply(spec: InertiaSpec, omega) -> np.ndarray:
    """Apply the inertia operator to a skew matrix."""
    omega = np.asarray(omega, dtype=float)
    if omega.shape != (spec.n, spec.n):
        raise ValueError(f"dimension mismatch: inertia n={spec.n}, omega {omega.shape}")
    if spec.kind == "physical":
        I = spec.I
        return I[:, None] * omega + omega * I[None, :]
    h, d = split(omega)
    n = spec.n
    idx = [(i, j) for i in range(n - 1) for j in range(i + 1, n - 1)]
    coords = np.array([h[i, j] for i, j in idx])
    out = d_matrix(spec.J @ d)
    for c, (i, j) in zip(spec.K @ coords, idx):
        out[i, j] += c
        out[j, i] -= c
    return out


def orthogonality_error(g) -> float:
    g = np.asarray(g, dtype=float)
    return float(np.abs(g @ g.T - np.eye(g.shape[0])).max())


def reorthonormalize(g, max_defect: float = 0.1) -> np.ndarray:
    """Nearest rotation to ``g`` in the Frobenius norm (polar factor)."""
    g = np.asarray(g, dtype=float)
    defect = np.abs(g.T @ g - np.eye(g.shape[0])).max()
    if not np.isfinite(defect) or defect >= max_defect:
        raise ValueError(f"matrix too far from SO(n): |g^T g - Id| = {defect:.3g}")
    if np.linalg.det(g) <= 0:
        raise ValueError("matrix has non-positive determinant")
    u, _, vt = np.linalg.svd(g)
    return u @ vt


def frame_with_last_row(q) -> np.ndarray:
    """A rotation whose last row is the unit vector ``q``."""
    q = np.asarray(q, dtype=float)
    q = q / np.linalg.norm(q)
    n = q.size
    # complete q to an orthonormal basis; drop the axis q leans on most
    keep = [k for k in range(n) if k != int(np.argmax(np.abs(q)))]
    Q, _ = np.linalg.qr(np.column_stack([q, np.eye(n)[:, keep]]))
    if Q[:, 0] @ q < 0:
        Q = -Q
    g = np.vstack([Q[:, 1:].T, q])
    if np.linalg.det(g) < 0:
        g[0] = -g[0]
    return g


def random_rotation(n: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of SO(n)."""
    Q, R = np.linalg.qr(rng.normal(size=(n, n)))
    Q = Q * np.sign(np.diag(R))
    if np.linalg.det(Q) < 0:
        Q[0] = -Q[0]
    return Q
