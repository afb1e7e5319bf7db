"""Built-in potentials v(q) on the unit sphere in R^n.

Every built-in variant is a special case of

    v(q) = C_1 q_1 + ... + C_{n-1} q_{n-1} + (B_1 q_1^2 + ... + B_n q_n^2) / 2 + eps q_n

so one class covers them; ``kind`` records which family was asked for.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["Potential", "KINDS"]

KINDS = ("zero", "kharlamova", "klebsh_tisserand", "combined", "lagrange_top")


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise ValueError("potential coefficients must be finite")
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Potential:
    kind: str
    C: np.ndarray
    B: np.ndarray
    eps: float = 0.0

    @property
    def n(self) -> int:
        return self.B.size

    @classmethod
    def zero(cls, n: int) -> "Potential":
        return cls("zero", _frozen(np.zeros(n - 1)), _frozen(np.zeros(n)))

    @classmethod
    def kharlamova(cls, C) -> "Potential":
        C = _frozen(C)
        return cls("kharlamova", C, _frozen(np.zeros(C.size + 1)))

    @classmethod
    def klebsh_tisserand(cls, B) -> "Potential":
        B = _frozen(B)
        return cls("klebsh_tisserand", _frozen(np.zeros(B.size - 1)), B)

    @classmethod
    def combined(cls, C, B) -> "Potential":
        C, B = _frozen(C), _frozen(B)
        if B.size != C.size + 1:
            raise ValueError("combined potential needs len(B) == len(C) + 1")
        return cls("combined", C, B)

    @classmethod
    def lagrange_top(cls, eps: float, n: int) -> "Potential":
        return cls("lagrange_top", _frozen(np.zeros(n - 1)), _frozen(np.zeros(n)), float(eps))

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown potential kind {self.kind!r}")
        if self.n < 3 or self.C.size != self.n - 1:
            raise ValueError("potential dimension must be n >= 3 with len(C) == n - 1")

    def value(self, q) -> float:
        q = np.asarray(q, dtype=float)
        return float(self.C @ q[:-1] + 0.5 * (self.B @ (q * q)) + self.eps * q[-1])

    def gradient(self, q) -> np.ndarray:
        q = np.asarray(q, dtype=float)
        grad = self.B * q
        grad[:-1] += self.C
        grad[-1] += self.eps
        return grad

    @property
    def time_symmetric(self) -> bool:
        """True when dv/dq_n vanishes on {q_n = 0}, i.e. V_+ = V_-."""
        return self.eps == 0.0

    def check_gradient(self, q, h: float = 1e-6) -> float:
        """Max deviation of :meth:`gradient` from central differences of :meth:`value`."""
        q = np.asarray(q, dtype=float)
        fd = np.empty_like(q)
        for k in range(q.size):
            dq = np.zeros_like(q)
            dq[k] = h
            fd[k] = (self.value(q + dq) - self.value(q - dq)) / (2 * h)
        return float(np.abs(fd - self.gradient(q)).max())

    def to_dict(self) -> dict:
        out = {"kind": self.kind}
        if self.kind in ("kharlamova", "combined"):
            out["C"] = self.C.tolist()
        if self.kind in ("klebsh_tisserand", "combined"):
            out["B"] = self.B.tolist()
        if self.kind == "lagrange_top":
            out["eps"] = self.eps
        if self.kind in ("zero", "lagrange_top"):
            out["n"] = self.n
        return out

    def __repr__(self) -> str:
        return f"Potential({self.to_dict()})"
