"""Differentiation matrices D(z) = A_hat(z)^{-1} E_s + z E_s - (z/2) I and their certification.

A corrected scheme dissipates the original energy at every stage when the
symmetric part of D(z) is positive (semi-)definite for all z <= 0.  ``certify``
checks this numerically through the leading principal minors on a z scan.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from . import scalarfun
from ._kernels import kernels
from .scalarfun import CorrectionKind
from .specop import FLOAT_FMT
from .tableau import ButcherTableau

VERDICT_TOL = 1e-9


class SingularCoefficientError(ArithmeticError):
    pass


class Verdict(enum.Enum):
    POSITIVE_DEFINITE = "PositiveDefinite"
    POSITIVE_SEMIDEFINITE = "PositiveSemiDefinite"
    INDEFINITE = "Indefinite"


def _require_corrected(kind):
    kind = CorrectionKind.parse(kind)
    if kind is CorrectionKind.RAW:
        raise ValueError("raw IF schemes are not steady-state preserving; no differentiation matrix")
    return kind


def diff_matrices(t: ButcherTableau, kind, z) -> np.ndarray:
    """D(z) for an array of z, shape ``z.shape + (s, s)``."""
    kind = _require_corrected(kind)
    za = np.asarray(z, dtype=float)
    flat = za.ravel()
    ahat, _ = scalarfun.coefficient_arrays(t, kind, flat)
    diag = np.diagonal(ahat, axis1=1, axis2=2)
    if np.any(diag == 0.0) or not np.all(np.isfinite(ahat)):
        p, i = np.argwhere((diag == 0.0) | ~np.isfinite(diag))[0]
        raise SingularCoefficientError(f"{t.name}/{kind.value}: A_hat[{i + 1},{i + 1}] singular at z={flat[p]:.17g}")
    D = kernels.diff_matrices(np.ascontiguousarray(ahat), np.ascontiguousarray(flat))
    return D.reshape(za.shape + (t.s, t.s))


def diff_matrix(t: ButcherTableau, kind, z: float) -> np.ndarray:
    return diff_matrices(t, kind, np.array([float(z)]))[0]


def symmetric_part(D: np.ndarray) -> np.ndarray:
    return 0.5 * (D + np.swapaxes(D, -1, -2))


def sym_minors(D: np.ndarray) -> np.ndarray:
    """Leading principal minors of (D + D^T)/2; accepts one matrix or a stack."""
    D = np.asarray(D, dtype=float)
    single = D.ndim == 2
    S = np.ascontiguousarray(symmetric_part(D if not single else D[None]))
    out = kernels.leading_minors(S)
    return out[0] if single else out


def scan_grid(z_min: float = -50.0, n_points: int = 10_000, n_log: int = 12) -> np.ndarray:
    """Uniform points on [z_min, 0] plus -10^-k, k = 1..n_log; sorted ascending."""
    if n_points < 2:
        raise ValueError("n_points must be at least 2")
    if not z_min < 0:
        raise ValueError("z_min must be negative")
    z = np.concatenate([np.linspace(z_min, 0.0, n_points), -10.0 ** -np.arange(1, n_log + 1)])
    return np.unique(z)


@dataclass
class DiffMatrixReport:
    scheme: str
    kind: CorrectionKind
    z: np.ndarray
    minors: np.ndarray
    tol: float = VERDICT_TOL

    @property
    def s(self) -> int:
        return self.minors.shape[1]

    @property
    def minima(self) -> np.ndarray:
        return self.minors.min(axis=0)

    @property
    def argmin(self) -> np.ndarray:
        # ties resolve to the smaller |z|
        out = np.empty(self.s)
        for k in range(self.s):
            col = self.minors[:, k]
            hits = np.flatnonzero(col == col.min())
            out[k] = self.z[hits[np.argmin(np.abs(self.z[hits]))]]
        return out

    @property
    def verdict(self) -> Verdict:
        lo = self.minima.min()
        if lo < -self.tol:
            return Verdict.INDEFINITE
        if lo <= self.tol:
            return Verdict.POSITIVE_SEMIDEFINITE
        return Verdict.POSITIVE_DEFINITE

    def negative_region(self, k=None) -> np.ndarray:
        """z samples where minor k (1-based; any minor if None) is below -tol."""
        m = self.minors if k is None else self.minors[:, [k - 1]]
        return self.z[np.any(m < -self.tol, axis=1)]

    def to_csv_text(self) -> str:
        head = "z," + ",".join(f"minor_{k + 1}" for k in range(self.s))
        rows = [head]
        for z, row in zip(self.z, self.minors):
            rows.append(",".join(FLOAT_FMT % x for x in (z, *row)))
        return "\n".join(rows) + "\n"

    def summary(self) -> str:
        lines = [f"scheme: {self.scheme}",
                 f"kind: {self.kind.value}",
                 f"z-range: [{self.z.min():g}, {self.z.max():g}] ({self.z.size} samples)"]
        for k, (lo, at) in enumerate(zip(self.minima, self.argmin), start=1):
            lines.append(f"minor_{k}: min {lo:.12g} at z = {at:.6g}")
        neg = self.negative_region()
        if neg.size:
            lines.append(f"negative minors on z in [{neg.min():.6g}, {neg.max():.6g}]")
        lines.append(f"verdict: {self.verdict.value}")
        return "\n".join(lines)


def certify(t: ButcherTableau, kind, z_min: float = -50.0, n_points: int = 10_000,
            tol: float = VERDICT_TOL, label: str | None = None) -> DiffMatrixReport:
    kind = _require_corrected(kind)
    z = scan_grid(z_min, n_points)
    minors = sym_minors(diff_matrices(t, kind, z))
    return DiffMatrixReport(label or t.name, kind, z, minors, tol)


# ----------------------------------------------------------- auxiliary functions

def _g_n2r(z):
    e = np.exp
    a = 1 - e(2 * z / 3)
    return (-e(2 * z) * z ** 2 + 16 * a * (1 - e(2 * z))
            + 8 * a * e(2 * z) * (z + 2 * (e(-4 * z / 3) - 1)))


def _g_n3h(z):
    e = np.exp
    return (e(2 * z) * z ** 2 * (-2 * e(z / 3) + e(2 * z / 3) - e(z) - 2)
            - 8 * e(2 * z) * z * (-e(z / 3) + 3 * e(2 * z / 3) - 2)
            + 16 * (e(z / 3) - 2 * e(4 * z / 3) - 3 * e(2 * z) - e(7 * z / 3) + 4 * e(8 * z / 3) + 1))


def _g_n3r(z):
    e = np.exp
    return (e(z) * z ** 2 * (-21 * e(z / 2) - 20 * e(z) + 12 * e(5 * z / 4) - 8 * e(3 * z / 2)
                             + 8 * e(7 * z / 4) - 4 * e(2 * z) - 9)
            - 18 * z * e(3 * z / 2) * (-7 * e(z / 2) + 6 * e(3 * z / 4) - 2 * e(z) + 6 * e(5 * z / 4) - 3)
            + 81 * (e(z / 2) - 2 * e(3 * z / 2) - 3 * e(2 * z) - e(5 * z / 2) + 4 * e(11 * z / 4) + 1))


AUXILIARY = {"N2R": _g_n2r, "N3H": _g_n3h, "N3R": _g_n3r}


def auxiliary_g(name: str, z):
    """Auxiliary functions whose sign fixes the last minor of the N-corrected matrices."""
    try:
        f = AUXILIARY[name.upper()]
    except KeyError:
        raise KeyError(f"unknown auxiliary function {name!r}; valid: {', '.join(AUXILIARY)}") from None
    za = np.asarray(z, dtype=float)
    val = f(za)
    return float(val) if np.ndim(z) == 0 else val


# ----------------------------------------------------------- stage energy law

@dataclass
class StageEnergyReport:
    lhs: np.ndarray
    rhs: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        """LHS - RHS per stage; nonpositive when the stage energy law holds."""
        return self.lhs - self.rhs


class StageEnergyChecker:
    """Evaluates E[U^{j+1}] - E[U^1] <= -(1/tau) <dU, D_j(-tau L_k) dU> on stored stages.

    The entries d_kl are evaluated once per distinct spectral argument and cached.
    """

    def __init__(self, spec, op, model):
        if spec.kind is CorrectionKind.RAW:
            raise ValueError("stage energy law applies to corrected schemes only")
        self.spec, self.op, self.model = spec, op, model
        z = op.z_values(spec.tau, spec.kappa)
        zu, inv = np.unique(z.ravel(), return_inverse=True)
        D = diff_matrices(spec.tableau, spec.kind, zu)
        self._d = D[inv].reshape(z.shape + D.shape[1:])

    def check(self, step) -> StageEnergyReport:
        from .models import energy

        stages = step.stages
        s = self.spec.tableau.s
        if len(stages) != s + 1:
            raise ValueError("stage values were discarded (lean mode); rerun with keep_stages")
        op, m, tau = self.op, self.model, self.spec.tau
        E1 = energy(op, m, stages[0])
        dhat = [op.forward(stages[k + 1] - stages[k]) for k in range(s)]
        dU = [stages[k + 1] - stages[k] for k in range(s)]
        lhs = np.empty(s)
        rhs = np.empty(s)
        quad = 0.0
        for j in range(s):
            # add the new row/column j of the quadratic form sum_{k,l<=j} <dU_k, d_kl dU_l>
            pairs = [(j, j)] + [(j, x) for x in range(j)] + [(x, j) for x in range(j)]
            for k, l in pairs:
                quad += op.inner(dU[k], op.inverse(self._d[..., k, l] * dhat[l]))
            lhs[j] = energy(op, m, stages[j + 1]) - E1
            rhs[j] = -quad / tau
        return StageEnergyReport(lhs, rhs)


def stage_energy_check(spec, op, model, step) -> StageEnergyReport:
    return StageEnergyChecker(spec, op, model).check(step)
