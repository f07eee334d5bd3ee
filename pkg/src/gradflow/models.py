"""Reaction terms g = -G', their potentials G and the discrete energies."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import kernels
from .specop import FLOAT_FMT, SpectralOperator

FH_CLIP = 1.0 - 1e-11


class DoubleWell:
    """Ginzburg-Landau potential G(u) = (u^2 - 1)^2 / 4, g(u) = u - u^3."""

    name = "double-well"
    lipschitz_hint = 2.0

    def __init__(self):
        self.clipped = 0

    def G(self, u):
        return 0.25 * (np.asarray(u) ** 2 - 1.0) ** 2

    def g(self, u):
        return self.g_kappa(0.0, u)

    def g_kappa(self, kappa, u):
        u = np.ascontiguousarray(u, dtype=float)
        return kernels.double_well(u, float(kappa))

    def params(self) -> dict:
        return {"model": "double-well"}


class FloryHuggins:
    """Logarithmic potential with temperatures 0 < theta < theta_c.

    Arguments are clipped to |u| <= 1 - 1e-11 before the logarithms;
    ``clipped`` accumulates how many nodes were saturated.
    """

    name = "flory-huggins"

    def __init__(self, theta: float = 0.8, theta_c: float = 1.0, lipschitz_hint: float | None = None):
        if not 0 < theta < theta_c:
            raise ValueError(f"need 0 < theta < theta_c, got theta={theta}, theta_c={theta_c}")
        self.theta = float(theta)
        self.theta_c = float(theta_c)
        self.lipschitz_hint = lipschitz_hint
        self.clipped = 0

    def G(self, u):
        v = np.clip(np.asarray(u, dtype=float), -FH_CLIP, FH_CLIP)
        ent = (1 + v) * np.log1p(v) + (1 - v) * np.log1p(-v)
        return 0.5 * self.theta * ent - 0.5 * self.theta_c * v ** 2

    def g(self, u):
        return self.g_kappa(0.0, u)

    def g_kappa(self, kappa, u):
        u = np.ascontiguousarray(u, dtype=float)
        out, n = kernels.flory_huggins(u, self.theta, self.theta_c, float(kappa), FH_CLIP)
        self.clipped += int(n)
        return out

    def params(self) -> dict:
        return {"model": "flory-huggins", "theta": self.theta, "theta_c": self.theta_c}


def make_model(name: str, **params):
    key = name.strip().lower().replace("_", "-")
    if key in ("double-well", "doublewell", "dw"):
        return DoubleWell()
    if key in ("flory-huggins", "floryhuggins", "fh"):
        return FloryHuggins(**params)
    raise ValueError(f"unknown model {name!r}; use double-well or flory-huggins")


def g_eval(m, u):
    return m.g(u)


def g_kappa(m, kappa, u):
    return m.g_kappa(kappa, u)


def energy(op: SpectralOperator, m, u: np.ndarray) -> float:
    """E[u] = h^d [ 1/2 sum u (L_h u) + sum G(u) ]."""
    Lu = op.apply_linear(0.0, u)
    return op.grid.cell_volume * (0.5 * float(np.vdot(u, Lu)) + float(np.sum(m.G(u))))


def _beta(z):
    # e^{-z} + z - 1 >= 0, with a series where cancellation bites
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-3
    series = z * z * (0.5 - z / 6 + z * z / 24 - z ** 3 / 120)
    return np.where(small, series, np.expm1(-z) + z)


def modified_energy_if1(op: SpectralOperator, m, tau: float, kappa: float, u: np.ndarray) -> float:
    """E[u] + (1/2tau) <(e^{tau L_k} - tau L_k - I) u, u>."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    bu = op.apply_fn(_beta, tau, kappa, u)
    return energy(op, m, u) + op.inner(bu, u) / (2 * tau)


@dataclass
class EnergyTrace:
    tau: float
    t: list = field(default_factory=list)
    E: list = field(default_factory=list)
    E_modified: list = field(default_factory=list)
    max_norm: list = field(default_factory=list)

    def append(self, t, E, max_norm, E_modified=None):
        if self.t and not t > self.t[-1]:
            raise ValueError("trace times must increase strictly")
        self.t.append(float(t))
        self.E.append(float(E))
        self.max_norm.append(float(max_norm))
        self.E_modified.append(np.nan if E_modified is None else float(E_modified))

    def __len__(self):
        return len(self.t)

    def as_arrays(self):
        return {k: np.asarray(getattr(self, k)) for k in ("t", "E", "E_modified", "max_norm")}

    def increases(self, tol: float = 0.0, column: str = "E") -> np.ndarray:
        """Step indices n with value[n] - value[n-1] > tol."""
        v = np.asarray(getattr(self, column))
        return np.flatnonzero(np.diff(v) > tol) + 1

    def to_csv_text(self) -> str:
        lines = ["t,E,E_modified,max_norm"]
        for row in zip(self.t, self.E, self.E_modified, self.max_norm):
            lines.append(",".join(FLOAT_FMT % x for x in row))
        return "\n".join(lines) + "\n"

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv_text())
