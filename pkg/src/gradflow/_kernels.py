"""Hot kernels with a numba path and a pure-numpy path.

Set ``GRADFLOW_DISABLE_NUMBA=1`` to force the numpy path (also used
automatically when numba is not importable).  Both paths are kept importable
as ``numpy_kernels`` / ``numba_kernels`` so tests and the benchmark can compare
them directly.
"""

import os
from types import SimpleNamespace

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover
    numba = None


# ---------------------------------------------------------------- numpy path

def _np_diff_matrices(ahat, z):
    n, s, _ = ahat.shape
    E = np.tril(np.ones((s, s)))
    D = np.linalg.solve(ahat, np.broadcast_to(E, (n, s, s)))
    D += z[:, None, None] * (E - 0.5 * np.eye(s))
    return D


def _np_leading_minors(S):
    n, s, _ = S.shape
    out = np.empty((n, s))
    for k in range(1, s + 1):
        out[:, k - 1] = np.linalg.det(S[:, :k, :k])
    return out


def _np_double_well(u, kappa):
    return kappa * u + u - u * u * u


def _np_flory_huggins(u, theta, theta_c, kappa, clip):
    v = np.clip(u, -clip, clip)
    nclip = int(np.count_nonzero(v != u))
    out = 0.5 * theta * np.log((1.0 - v) / (1.0 + v)) + theta_c * v + kappa * u
    return out, nclip


numpy_kernels = SimpleNamespace(
    name="numpy",
    diff_matrices=_np_diff_matrices,
    leading_minors=_np_leading_minors,
    double_well=_np_double_well,
    flory_huggins=_np_flory_huggins,
)


# ---------------------------------------------------------------- numba path

def _nb_diff_matrices(ahat, z):
    n, s, _ = ahat.shape
    D = np.zeros((n, s, s))
    col = np.empty(s)
    for p in range(n):
        # forward substitution for each column of the lower ones matrix
        for c in range(s):
            for i in range(s):
                acc = 1.0 if i >= c else 0.0
                for j in range(i):
                    acc -= ahat[p, i, j] * col[j]
                col[i] = acc / ahat[p, i, i]
            for i in range(s):
                D[p, i, c] = col[i]
        zp = z[p]
        for i in range(s):
            for j in range(i + 1):
                D[p, i, j] += zp
            D[p, i, i] -= 0.5 * zp
    return D


def _nb_leading_minors(S):
    n, s, _ = S.shape
    out = np.empty((n, s))
    W = np.empty((s, s))
    for p in range(n):
        for k in range(1, s + 1):
            for i in range(k):
                for j in range(k):
                    W[i, j] = S[p, i, j]
            det = 1.0
            for col in range(k):
                piv = col
                big = abs(W[col, col])
                for r in range(col + 1, k):
                    if abs(W[r, col]) > big:
                        big = abs(W[r, col])
                        piv = r
                if big == 0.0:
                    det = 0.0
                    break
                if piv != col:
                    for j in range(k):
                        tmp = W[col, j]
                        W[col, j] = W[piv, j]
                        W[piv, j] = tmp
                    det = -det
                det *= W[col, col]
                for r in range(col + 1, k):
                    f = W[r, col] / W[col, col]
                    for j in range(col, k):
                        W[r, j] -= f * W[col, j]
            out[p, k - 1] = det
    return out


def _nb_double_well(u, kappa):
    flat = u.ravel()
    out = np.empty_like(flat)
    for i in range(flat.size):
        x = flat[i]
        out[i] = kappa * x + x - x * x * x
    return out.reshape(u.shape)


def _nb_flory_huggins(u, theta, theta_c, kappa, clip):
    flat = u.ravel()
    out = np.empty_like(flat)
    nclip = 0
    for i in range(flat.size):
        x = flat[i]
        v = x
        if v > clip:
            v = clip
            nclip += 1
        elif v < -clip:
            v = -clip
            nclip += 1
        out[i] = 0.5 * theta * np.log((1.0 - v) / (1.0 + v)) + theta_c * v + kappa * x
    return out.reshape(u.shape), nclip


if numba is not None:
    _jit = numba.njit(cache=True, nogil=True)
    numba_kernels = SimpleNamespace(
        name="numba",
        diff_matrices=_jit(_nb_diff_matrices),
        leading_minors=_jit(_nb_leading_minors),
        double_well=_jit(_nb_double_well),
        flory_huggins=_jit(_nb_flory_huggins),
    )
else:  # pragma: no cover
    numba_kernels = None


def _select():
    disabled = os.environ.get("GRADFLOW_DISABLE_NUMBA", "").strip().lower() not in ("", "0", "false", "no")
    if disabled or numba_kernels is None:
        return numpy_kernels
    return numba_kernels


kernels = _select()
