"""Scalar coefficient functions of z = -tau*(lambda + kappa) <= 0.

Everything here accepts a float or an ndarray of z values and broadcasts.
Stage indices are one-based as in the tableau layout: ``i`` in 1..s labels the
stage being produced (stage i+1), ``j`` in 1..i the nonlinear term it uses.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .tableau import ButcherTableau

SERIES_THRESHOLD = 1e-4

# 1, 1/2!, 1/3!, ..., 1/7!  (Taylor coefficients of (e^z - 1)/z through z^6)
_PHI1_TAYLOR = np.array([1.0, 1 / 2, 1 / 6, 1 / 24, 1 / 120, 1 / 720, 1 / 5040])


class CorrectionKind(enum.Enum):
    RAW = "raw"
    TELESCOPIC = "T"
    NONLINEAR = "N"

    @classmethod
    def parse(cls, text) -> "CorrectionKind":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower()
        aliases = {
            "raw": cls.RAW, "if": cls.RAW, "none": cls.RAW,
            "t": cls.TELESCOPIC, "telescopic": cls.TELESCOPIC,
            "n": cls.NONLINEAR, "nonlinear": cls.NONLINEAR,
            "nonlineartranslation": cls.NONLINEAR, "nonlinear-translation": cls.NONLINEAR,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown correction kind {text!r}; use raw, T or N") from None


def _out(z, val):
    return float(val) if np.ndim(z) == 0 else val


def phi1(z):
    """(e^z - 1)/z, with a degree-6 Taylor polynomial for |z| < 1e-4."""
    za = np.asarray(z, dtype=float)
    small = np.abs(za) < SERIES_THRESHOLD
    safe = np.where(small, 1.0, za)
    direct = np.expm1(safe) / safe
    series = np.polynomial.polynomial.polyval(za, _PHI1_TAYLOR)
    return _out(z, np.where(small, series, direct))


def _check_ij(t, i, j):
    if not (1 <= j <= i <= t.s):
        raise IndexError(f"({i}, {j}) outside 1 <= j <= i <= {t.s} for {t.name}")


def raw_if_coeff(t: ButcherTableau, i: int, j: int, z):
    """a_{i+1,j}(0) * exp((c_{i+1} - c_j) z)."""
    _check_ij(t, i, j)
    za = np.asarray(z, dtype=float)
    return _out(z, t.a0[i, j - 1] * np.exp((t.c[i] - t.c[j - 1]) * za))


def chi(t: ButcherTableau, kind, i: int, z):
    kind = CorrectionKind.parse(kind)
    if kind is CorrectionKind.RAW:
        raise NotImplementedError("raw IF coefficients carry no correction factor")
    _check_ij(t, i, 1)
    za = np.asarray(z, dtype=float)
    ci = t.c[i]
    if kind is CorrectionKind.TELESCOPIC:
        acc = sum(raw_if_coeff(t, i, j, za) for j in range(1, i + 1))
        val = np.exp(ci * za) - za * acc
    else:
        val = ci * phi1(ci * za)
        for j in range(1, i):
            val = val - raw_if_coeff(t, i, j, za)
    return _out(z, val)


def corrected_coeff(t: ButcherTableau, kind, i: int, j: int, z):
    """Entry (i, j) of the corrected coefficient matrix A_hat(z)."""
    kind = CorrectionKind.parse(kind)
    if kind is CorrectionKind.RAW:
        raise NotImplementedError("raw IF schemes have no corrected coefficients")
    _check_ij(t, i, j)
    za = np.asarray(z, dtype=float)
    if kind is CorrectionKind.TELESCOPIC:
        x = chi(t, kind, i, za)
        if np.any(x == 0.0):
            bad = za[x == 0.0] if za.ndim else za
            raise ZeroDivisionError(f"telescopic factor vanishes for {t.name} stage {i} at z={bad}")
        val = raw_if_coeff(t, i, j, za) / x
    elif j < i:
        val = raw_if_coeff(t, i, j, za)
    else:
        val = chi(t, kind, i, za)
    return _out(z, val)


@dataclass(frozen=True)
class StageCoefficients:
    z: float
    ahat: np.ndarray
    chi: np.ndarray


def coefficient_arrays(t: ButcherTableau, kind, z):
    """Batched A_hat and chi: shapes ``z.shape + (s, s)`` and ``z.shape + (s,)``."""
    kind = CorrectionKind.parse(kind)
    za = np.asarray(z, dtype=float)
    s = t.s
    ahat = np.zeros(za.shape + (s, s))
    x = np.zeros(za.shape + (s,))
    for i in range(1, s + 1):
        x[..., i - 1] = chi(t, kind, i, za)
        for j in range(1, i + 1):
            ahat[..., i - 1, j - 1] = corrected_coeff(t, kind, i, j, za)
    return ahat, x


def stage_coefficients(t: ButcherTableau, kind, z: float) -> StageCoefficients:
    ahat, x = coefficient_arrays(t, kind, float(z))
    return StageCoefficients(float(z), ahat, x)


def raw_coefficient_arrays(t: ButcherTableau, z):
    """Raw IF coefficients a_{i+1,j}(z) batched like :func:`coefficient_arrays`."""
    za = np.asarray(z, dtype=float)
    s = t.s
    a = np.zeros(za.shape + (s, s))
    for i in range(1, s + 1):
        for j in range(1, i + 1):
            a[..., i - 1, j - 1] = raw_if_coeff(t, i, j, za)
    return a
