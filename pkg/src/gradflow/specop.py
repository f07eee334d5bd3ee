"""Periodic central-difference Laplacian diagonalized by the discrete Fourier transform.

``L_h = -eps^2 * Delta_h`` is circulant in 1D and a separable tensor sum of
circulants in 2D, so any matrix function ``f(-tau * (L_h + kappa I))`` is a
Fourier multiplier.  Grid functions are plain ndarrays of shape ``grid.shape``
(2D arrays are row-major, first axis = x).
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

FLOAT_FMT = "%.17g"


@dataclass(frozen=True)
class Grid:
    dim: int
    M: int
    length: float = 1.0
    origin: float = 0.0

    def __post_init__(self):
        if self.dim not in (1, 2):
            raise ValueError(f"dim must be 1 or 2, got {self.dim}")
        if int(self.M) != self.M or self.M < 2:
            raise ValueError(f"need an integer M >= 2 points per axis, got {self.M}")
        if not self.length > 0:
            raise ValueError("domain length must be positive")

    @classmethod
    def from_spacing(cls, dim: int, h: float, length: float, origin: float = 0.0) -> "Grid":
        m = length / h
        M = int(round(m))
        if abs(m - M) > 1e-9 * max(1.0, m):
            raise ValueError(f"spacing {h} does not divide the domain length {length}")
        return cls(dim, M, length, origin)

    @property
    def h(self) -> float:
        return self.length / self.M

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.M,) * self.dim

    @property
    def cell_volume(self) -> float:
        return self.h ** self.dim

    def nodes(self) -> np.ndarray:
        return self.origin + self.h * np.arange(self.M)

    def mesh(self):
        x = self.nodes()
        if self.dim == 1:
            return (x,)
        return tuple(np.meshgrid(x, x, indexing="ij"))


def circulant_eigenvalues(M: int, eps2: float, h: float) -> np.ndarray:
    """Eigenvalues (eps^2/h^2)(2 - 2 cos(2 pi m / M)) of the periodic second difference."""
    m = np.arange(M)
    m = np.minimum(m, M - m)  # exact lambda_m = lambda_{M-m}
    return (4.0 * eps2 / h ** 2) * np.sin(np.pi * m / M) ** 2


class SpectralOperator:
    """L_h stored as Fourier-mode eigenvalues; applies scalar functions spectrally."""

    def __init__(self, grid: Grid, eps2: float):
        if eps2 < 0:
            raise ValueError("eps2 must be nonnegative")
        self.grid = grid
        self.eps2 = float(eps2)
        lam1 = circulant_eigenvalues(grid.M, self.eps2, grid.h)
        half = grid.M // 2 + 1
        if grid.dim == 1:
            self.lam = lam1
            self.lam_r = lam1[:half].copy()
        else:
            self.lam = lam1[:, None] + lam1[None, :]
            self.lam_r = lam1[:, None] + lam1[None, :half]
        self.lam.setflags(write=False)
        self.lam_r.setflags(write=False)

    def __repr__(self):
        return f"SpectralOperator(dim={self.grid.dim}, M={self.grid.M}, h={self.grid.h:g}, eps2={self.eps2:g})"

    # transforms on the real-FFT half spectrum
    def forward(self, v: np.ndarray) -> np.ndarray:
        self._check(v)
        return np.fft.rfftn(v)

    def inverse(self, vhat: np.ndarray) -> np.ndarray:
        return np.fft.irfftn(vhat, s=self.grid.shape, axes=tuple(range(self.grid.dim)))

    def z_values(self, tau: float, kappa: float) -> np.ndarray:
        """Spectral arguments z = -tau (lambda + kappa) on the half spectrum."""
        return -tau * (self.lam_r + kappa)

    def multiplier(self, f, tau: float, kappa: float) -> np.ndarray:
        return np.broadcast_to(np.asarray(f(self.z_values(tau, kappa)), dtype=float),
                               self.lam_r.shape)

    def apply_multiplier(self, mult: np.ndarray, v: np.ndarray) -> np.ndarray:
        return self.inverse(mult * self.forward(v))

    def apply_fn(self, f, tau: float, kappa: float, v: np.ndarray) -> np.ndarray:
        """Apply f(-tau L_kappa) to v."""
        return self.apply_multiplier(self.multiplier(f, tau, kappa), v)

    def apply_linear(self, kappa: float, v: np.ndarray) -> np.ndarray:
        """L_kappa v by the three-point stencil (not spectrally)."""
        self._check(v)
        scale = self.eps2 / self.grid.h ** 2
        out = 2 * self.grid.dim * v
        for ax in range(self.grid.dim):
            out = out - np.roll(v, 1, axis=ax) - np.roll(v, -1, axis=ax)
        return scale * out + kappa * v

    def inner(self, u: np.ndarray, v: np.ndarray) -> float:
        """Quadrature-weighted inner product h^dim * sum(u v)."""
        return self.grid.cell_volume * float(np.vdot(u, v))

    def _check(self, v):
        if np.shape(v) != self.grid.shape:
            raise ValueError(f"grid function has shape {np.shape(v)}, operator expects {self.grid.shape}")


def build_operator(grid: Grid, eps2: float) -> SpectralOperator:
    return SpectralOperator(grid, eps2)


def write_grid_csv(path, u: np.ndarray) -> None:
    """One row per node: index columns then value, row-major order."""
    u = np.asarray(u)
    names = ["i", "j"][:u.ndim] + ["value"]
    with open(path, "w", newline="") as fh:
        fh.write(grid_csv_text(u, names))


def grid_csv_text(u: np.ndarray, names=None) -> str:
    u = np.asarray(u)
    names = names or ["i", "j"][:u.ndim] + ["value"]
    buf = io.StringIO()
    buf.write(",".join(names) + "\n")
    for idx in np.ndindex(u.shape):
        buf.write(",".join(str(k) for k in idx) + "," + FLOAT_FMT % u[idx] + "\n")
    return buf.getvalue()


def read_grid_csv(path) -> np.ndarray:
    with open(Path(path), newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    nidx = len(header) - 1
    idx = np.array([[int(r[k]) for k in range(nidx)] for r in body])
    shape = tuple(idx.max(axis=0) + 1)
    u = np.empty(shape)
    for r, ix in zip(body, idx):
        u[tuple(ix)] = float(r[-1])
    return u
