"""Butcher tableaus of the underlying explicit Runge-Kutta methods.

The coefficient array is stored as an (s+1) x (s+1) strictly lower-triangular
matrix ``a0`` with ``a0[i, j] = a_{i+1, j+1}(0)`` in zero-based indexing, so row
``i`` produces stage ``i + 1`` and the last row carries the weights ``b``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

TOL = 1e-14


@dataclass(frozen=True)
class ButcherTableau:
    name: str
    c: np.ndarray
    a0: np.ndarray
    order: int = 0

    def __post_init__(self):
        c = np.array(self.c, dtype=float)
        a0 = np.tril(np.array(self.a0, dtype=float), k=-1)
        if a0.ndim != 2 or a0.shape[0] != a0.shape[1] or a0.shape[0] != c.size:
            raise ValueError(f"{self.name}: c has {c.size} entries but a0 is {a0.shape}")
        if c.size < 2:
            raise ValueError(f"{self.name}: need at least one stage")
        c.setflags(write=False)
        a0.setflags(write=False)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a0", a0)

    @property
    def s(self) -> int:
        return self.c.size - 1

    @property
    def b(self) -> np.ndarray:
        return self.a0[-1, :-1]

    def coefficient(self, i: int, j: int) -> float:
        """a_{i+1,j}(0) with the one-based stage indices used throughout (1 <= j <= i <= s)."""
        if not 1 <= j <= i <= self.s:
            raise IndexError(f"({i}, {j}) outside 1 <= j <= i <= {self.s}")
        return float(self.a0[i, j - 1])

    def __str__(self) -> str:
        return format_tableau(self)

    def __eq__(self, other):
        if not isinstance(other, ButcherTableau):
            return NotImplemented
        return (self.name == other.name and np.array_equal(self.c, other.c)
                and np.array_equal(self.a0, other.a0))

    def __hash__(self):
        return hash((self.name, self.c.tobytes(), self.a0.tobytes()))


@dataclass
class ValidationReport:
    name: str
    failures: list[tuple[str, int]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures

    def __bool__(self) -> bool:
        return self.ok

    def __str__(self) -> str:
        if self.ok:
            return f"{self.name}: ok"
        lines = [f"{self.name}: FAILED"]
        lines += [f"  row {row}: {what}" for what, row in self.failures]
        return "\n".join(lines)


def validate(t: ButcherTableau, tol: float = TOL) -> ValidationReport:
    """Check c_1 = 0, c_{s+1} = 1, row sums equal abscissas and nonzero sub-diagonal.

    Rows are reported one-based, matching the tableau layout (row ``i + 1``
    holds the coefficients producing stage ``i + 1``).
    """
    rep = ValidationReport(t.name)
    if t.c[0] != 0.0:
        rep.failures.append(("c_1 must be 0", 1))
    if t.c[-1] != 1.0:
        rep.failures.append(("c_{s+1} must be 1", t.s + 1))
    for i in range(1, t.s + 1):
        row = t.a0[i, :i]
        if abs(row.sum() - t.c[i]) > tol:
            rep.failures.append((f"row sum {row.sum():.17g} != c = {t.c[i]:.17g}", i + 1))
        if row[i - 1] == 0.0:
            rep.failures.append(("sub-diagonal coefficient is zero", i + 1))
    return rep


def _build(name, c, rows, order):
    n = len(c)
    a0 = np.zeros((n, n))
    for i, row in enumerate(rows, start=1):
        a0[i, :len(row)] = [float(Fraction(x)) for x in row]
    return ButcherTableau(name, np.array([float(Fraction(x)) for x in c]), a0, order)


REGISTRY: dict[str, ButcherTableau] = {
    t.name: t
    for t in (
        _build("IF1", ["0", "1"], [["1"]], 1),
        _build("Heun2", ["0", "1", "1"], [["1"], ["1/2", "1/2"]], 2),
        _build("Ralston2", ["0", "2/3", "1"], [["2/3"], ["1/4", "3/4"]], 2),
        _build("Heun3", ["0", "1/3", "2/3", "1"],
               [["1/3"], ["0", "2/3"], ["1/4", "0", "3/4"]], 3),
        _build("Ralston3", ["0", "1/2", "3/4", "1"],
               [["1/2"], ["0", "3/4"], ["2/9", "1/3", "4/9"]], 3),
        _build("Kutta4", ["0", "1/2", "1/2", "1", "1"],
               [["1/2"], ["0", "1/2"], ["0", "0", "1"], ["1/6", "1/3", "1/3", "1/6"]], 4),
    )
}


def registry_get(name: str) -> ButcherTableau:
    """Look up a registry tableau; matching is case-insensitive."""
    for key, t in REGISTRY.items():
        if key.lower() == name.lower():
            return t
    raise KeyError(f"unknown tableau {name!r}; valid options: {', '.join(REGISTRY)}")


def format_tableau(t: ButcherTableau) -> str:
    def frac(x):
        if x == 0:
            return "0"
        return str(Fraction(x).limit_denominator(1000))

    s = t.s
    cells = [[frac(t.c[i])] + [frac(t.a0[i, j]) for j in range(i)] for i in range(s)]
    cells.append([""] + [frac(x) for x in t.b])
    width = max(len(x) for row in cells for x in row)
    lines = [f"{t.name} (s={s})"]
    for i, row in enumerate(cells):
        if i == s:
            lines.append("-" * (width + 1) + "+" + "-" * ((width + 1) * s + 1))
        body = " ".join(x.rjust(width) for x in row[1:])
        lines.append(f"{row[0].rjust(width)} | {body}")
    return "\n".join(lines)
