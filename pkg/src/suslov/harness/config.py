"""Run configuration: one JSON document validated with pydantic."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..dynamics import FullState, ReducedState
from ..liealg import InertiaSpec, random_rotation, reorthonormalize
from ..potentials import Potential
from .io import trajectory_columns

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid configuration; the message names the offending field."""


class _Model(BaseModel):
    model_config = ConfigDict(extra="forbid")


class InertiaModel(_Model):
    kind: Literal["physical", "block"]
    I: Optional[list[float]] = None
    J: Optional[list[list[float]]] = None
    K: Optional[list[list[float]]] = None

    @model_validator(mode="after")
    def _fields_for_kind(self):
        if self.kind == "physical" and self.I is None:
            raise ValueError("physical inertia needs field 'I'")
        if self.kind == "block" and self.J is None:
            raise ValueError("block inertia needs field 'J'")
        return self

    def build(self) -> InertiaSpec:
        if self.kind == "physical":
            return InertiaSpec.physical(self.I)
        return InertiaSpec.block(self.J, self.K)


class PotentialModel(_Model):
    kind: Literal["zero", "kharlamova", "klebsh_tisserand", "combined", "lagrange_top"]
    C: Optional[list[float]] = None
    B: Optional[list[float]] = None
    eps: Optional[float] = None

    def build(self, n: int) -> Potential:
        need = {"kharlamova": ["C"], "klebsh_tisserand": ["B"], "combined": ["C", "B"],
                "lagrange_top": ["eps"], "zero": []}[self.kind]
        for name in need:
            if getattr(self, name) is None:
                raise ValueError(f"potential.{name} is required for kind {self.kind!r}")
        if self.kind == "zero":
            return Potential.zero(n)
        if self.kind == "kharlamova":
            return Potential.kharlamova(self.C)
        if self.kind == "klebsh_tisserand":
            return Potential.klebsh_tisserand(self.B)
        if self.kind == "combined":
            return Potential.combined(self.C, self.B)
        return Potential.lagrange_top(self.eps, n)


class InitialModel(_Model):
    """Full (``g``, ``omega``) or reduced (``q``, ``p``) initial data.

    Omitted values are drawn from the run seed.
    """

    type: Literal["full", "reduced"]
    g: Optional[Union[Literal["identity"], list[list[float]]]] = None
    omega: Optional[list[float]] = None
    q: Optional[list[float]] = None
    p: Optional[list[float]] = None


class IntegratorModel(_Model):
    dt: float = Field(gt=0)
    steps: int = Field(ge=1)
    record_every: int = Field(default=1, ge=1)
    reproject: bool = True


class OutputsModel(_Model):
    trajectory_csv: Optional[str] = None
    monitors_csv: Optional[str] = None
    report_json: Optional[str] = None
    plot_svg: Optional[str] = None
    plot_columns: list[str] = Field(default_factory=lambda: ["energy", "q_n"])


class RunConfig(_Model):
    n: int = Field(ge=3)
    inertia: InertiaModel
    potential: PotentialModel
    initial: InitialModel
    integrator: IntegratorModel
    seed: int = Field(default=0, ge=0)
    outputs: OutputsModel = Field(default_factory=OutputsModel)

    @model_validator(mode="after")
    def _consistent(self):
        n = self.n
        try:
            inertia = self.inertia.build()
        except ValueError as exc:
            raise ValueError(f"inertia: {exc}") from exc
        if inertia.n != n:
            raise ValueError(f"inertia: dimension {inertia.n} does not match n={n}")
        try:
            pot = self.potential.build(n)
        except ValueError as exc:
            raise ValueError(f"potential: {exc}") from exc
        if pot.n != n:
            raise ValueError(f"potential: dimension {pot.n} does not match n={n}")
        unknown = [c for c in self.outputs.plot_columns if c != "q_n" and c not in trajectory_columns(n)]
        if unknown:
            raise ValueError(f"outputs.plot_columns: unknown columns {unknown}")
        self.initial_state()
        return self

    def build_inertia(self) -> InertiaSpec:
        return self.inertia.build()

    def build_potential(self) -> Potential:
        return self.potential.build(self.n)

    def initial_state(self):
        """The normalized initial state (FullState or ReducedState)."""
        n = self.n
        ini = self.initial
        rng = np.random.default_rng(self.seed)
        if ini.type == "full":
            if ini.g is None:
                g = random_rotation(n, rng)
            elif ini.g == "identity":
                g = np.eye(n)
            else:
                g = np.asarray(ini.g, dtype=float)
                if g.shape != (n, n):
                    raise ValueError(f"initial.g: expected {n}x{n} matrix")
                try:
                    g = reorthonormalize(g)
                except ValueError as exc:
                    raise ValueError(f"initial.g: {exc}") from exc
            omega = rng.normal(size=n - 1) if ini.omega is None else np.asarray(ini.omega, dtype=float)
            if omega.shape != (n - 1,):
                raise ValueError(f"initial.omega: expected {n - 1} coefficients")
            return FullState(g, omega)
        q = rng.normal(size=n) if ini.q is None else np.asarray(ini.q, dtype=float)
        p = rng.normal(size=n - 1) if ini.p is None else np.asarray(ini.p, dtype=float)
        if q.shape != (n,) or not np.linalg.norm(q) > 0:
            raise ValueError(f"initial.q: expected a nonzero vector of length {n}")
        if p.shape != (n - 1,):
            raise ValueError(f"initial.p: expected {n - 1} momenta")
        return ReducedState.normalized(q, p)


def _format_error(exc: ValidationError) -> str:
    parts = []
    for err in exc.errors():
        loc = ".".join(str(x) for x in err["loc"])
        msg = err["msg"]
        if err["type"] == "missing":
            parts.append(f"missing required field '{loc}'")
        else:
            parts.append(f"{loc}: {msg}" if loc else msg)
    return "; ".join(parts)


def parse_config(data: dict) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(_format_error(exc)) from None


def load_config(path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError("config must be a JSON object")
    return parse_config(data)
