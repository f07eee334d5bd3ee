"""One-step maps of stabilized IF schemes and their steady-state preserving corrections.

Raw stabilized IF::

    U^{i+1} = e^{c_{i+1} z} U^1 + tau * sum_j a_{i+1,j}(0) e^{(c_{i+1}-c_j) z} g_k(U^j)

Corrected (T or N)::

    U^{i+1} = U^1 + sum_j ahat_{i+1,j}(z) [tau g_k(U^j) - tau L_k U^1]

with z = -tau L_kappa acting as a Fourier multiplier.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np

from . import scalarfun
from .models import EnergyTrace, energy, modified_energy_if1
from .scalarfun import CorrectionKind
from .specop import SpectralOperator
from .tableau import ButcherTableau, registry_get, validate


class NonFiniteStateError(FloatingPointError):
    """Raised when a stage value contains inf/nan (blow-up)."""

    def __init__(self, msg, step=None, stage=None):
        super().__init__(msg)
        self.step = step
        self.stage = stage


_NAME_RE = re.compile(r"^(?P<kind>[TN]?)IF(?P<order>[1-4])(?:-(?P<family>\w+))?$", re.IGNORECASE)
_FAMILY = {("2", "heun"): "Heun2", ("2", "ralston"): "Ralston2", ("3", "heun"): "Heun3",
           ("3", "ralston"): "Ralston3", ("4", "kutta"): "Kutta4"}


def parse_scheme_name(name: str) -> tuple[ButcherTableau, CorrectionKind]:
    """'NIF3-Heun' -> (Heun3, N); 'IF1' -> (IF1, raw); 'TIF1' -> (IF1, T)."""
    m = _NAME_RE.match(name.strip())
    if not m:
        raise ValueError(f"cannot parse scheme name {name!r} (expected e.g. IF1, TIF2-Heun, NIF3-Ralston)")
    kind = {"": CorrectionKind.RAW, "t": CorrectionKind.TELESCOPIC,
            "n": CorrectionKind.NONLINEAR}[m["kind"].lower()]
    order, family = m["order"], (m["family"] or "").lower()
    if order == "1":
        if family:
            raise ValueError(f"first-order scheme takes no family: {name!r}")
        return registry_get("IF1"), kind
    try:
        return registry_get(_FAMILY[(order, family)]), kind
    except KeyError:
        raise ValueError(f"unknown scheme {name!r}") from None


def scheme_label(t: ButcherTableau, kind: CorrectionKind) -> str:
    prefix = {CorrectionKind.RAW: "", CorrectionKind.TELESCOPIC: "T",
              CorrectionKind.NONLINEAR: "N"}[kind]
    if t.name == "IF1":
        return f"{prefix}IF1"
    family = t.name.rstrip("0123456789")
    return f"{prefix}IF{t.name[-1]}-{family}"


@dataclass(frozen=True)
class SchemeSpec:
    tableau: ButcherTableau
    kind: CorrectionKind
    kappa: float
    tau: float

    def __post_init__(self):
        object.__setattr__(self, "kind", CorrectionKind.parse(self.kind))
        if not self.tau > 0:
            raise ValueError(f"tau must be positive, got {self.tau}")
        if not self.kappa >= 0:
            raise ValueError(f"kappa must be nonnegative, got {self.kappa}")
        rep = validate(self.tableau)
        if not rep:
            raise ValueError(str(rep))

    @classmethod
    def from_name(cls, name: str, kappa: float, tau: float) -> "SchemeSpec":
        t, kind = parse_scheme_name(name)
        return cls(t, kind, kappa, tau)

    @property
    def label(self) -> str:
        return scheme_label(self.tableau, self.kind)


@dataclass
class StepResult:
    stages: list
    next: np.ndarray


class Stepper:
    """Advances one scheme on one operator; caches every Fourier multiplier it needs."""

    def __init__(self, spec: SchemeSpec, op: SpectralOperator, model):
        self.spec = spec
        self.op = op
        self.model = model
        t, tau, kappa = spec.tableau, spec.tau, spec.kappa
        z = op.z_values(tau, kappa)
        s = t.s
        if spec.kind is CorrectionKind.RAW:
            self._decay = [np.exp(t.c[i] * z) for i in range(1, s + 1)]
            a = scalarfun.raw_coefficient_arrays(t, z)
            self._coef = [[tau * a[..., i, j] for j in range(i + 1)] for i in range(s)]
        else:
            ahat, _ = scalarfun.coefficient_arrays(t, spec.kind, z)
            self._coef = [[ahat[..., i, j] for j in range(i + 1)] for i in range(s)]
        self._tau_lam = tau * op.lam_r

    def step(self, u: np.ndarray, keep_stages: bool = True) -> StepResult:
        # overflow is reported by the stage guard, not as a warning
        with np.errstate(over="ignore", invalid="ignore"):
            if self.spec.kind is CorrectionKind.RAW:
                return self._step_raw(u, keep_stages)
            return self._step_corrected(u, keep_stages)

    def _guard(self, U, stage):
        if not np.all(np.isfinite(U)):
            raise NonFiniteStateError(f"non-finite value at stage {stage}", stage=stage)

    def _step_raw(self, u, keep):
        op, kappa, s = self.op, self.spec.kappa, self.spec.tableau.s
        u1hat = op.forward(u)
        U = u
        stages = [u]
        ghat = []
        for i in range(s):
            ghat.append(op.forward(self.model.g_kappa(kappa, U)))
            acc = self._decay[i] * u1hat
            for j in range(i + 1):
                acc = acc + self._coef[i][j] * ghat[j]
            U = op.inverse(acc)
            self._guard(U, i + 2)
            if keep:
                stages.append(U)
        return StepResult(stages if keep else [u, U], U)

    def _step_corrected(self, u, keep):
        op, kappa, tau, s = self.op, self.spec.kappa, self.spec.tau, self.spec.tableau.s
        u1hat = op.forward(u)
        lin = self._tau_lam * u1hat
        U = u
        stages = [u]
        rhat = []
        for i in range(s):
            # tau g_k(U^j) - tau L_k U^1, with the kappa part cancelled in physical space
            r = tau * (self.model.g_kappa(kappa, U) - kappa * u)
            rhat.append(op.forward(r) - lin)
            acc = self._coef[i][0] * rhat[0]
            for j in range(1, i + 1):
                acc = acc + self._coef[i][j] * rhat[j]
            U = u + op.inverse(acc)
            self._guard(U, i + 2)
            if keep:
                stages.append(U)
        return StepResult(stages if keep else [u, U], U)


def step_raw(spec: SchemeSpec, op, m, u) -> StepResult:
    if spec.kind is not CorrectionKind.RAW:
        raise ValueError("step_raw needs a raw scheme")
    return Stepper(spec, op, m).step(u)


def step_corrected(spec: SchemeSpec, op, m, u) -> StepResult:
    if spec.kind is CorrectionKind.RAW:
        raise ValueError("step_corrected needs a T- or N-corrected scheme")
    return Stepper(spec, op, m).step(u)


@dataclass
class IntegrationResult:
    u: np.ndarray
    trace: EnergyTrace
    snapshots: dict = field(default_factory=dict)
    stage_energies: list = field(default_factory=list)
    steps: int = 0


def integrate(spec: SchemeSpec, op: SpectralOperator, m, u0, n_steps: int, *,
              modified_energy: bool = False, stage_energies: bool = False,
              snapshot_stride: int = 0, on_step=None) -> IntegrationResult:
    """Run ``n_steps`` steps from ``u0``.

    ``snapshot_stride > 0`` keeps every stride-th state (step 0 included) in
    ``result.snapshots``.  ``stage_energies`` records E[U^{n,j+1}] for j = 1..s
    per step.  ``on_step(n, step_result)`` is called after each step.
    Raises :class:`NonFiniteStateError` carrying the step index on blow-up.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if modified_energy and spec.tableau.name != "IF1":
        raise ValueError("the modified energy is defined for the first-order schemes only")
    stepper = Stepper(spec, op, m)
    u = np.array(u0, dtype=float)
    op._check(u)
    tau = spec.tau

    def emod(v):
        return modified_energy_if1(op, m, tau, spec.kappa, v) if modified_energy else None

    res = IntegrationResult(u, EnergyTrace(tau))
    res.trace.append(0.0, energy(op, m, u), np.max(np.abs(u)), emod(u))
    if snapshot_stride:
        res.snapshots[0] = u.copy()
    keep = stage_energies or on_step is not None
    for n in range(1, n_steps + 1):
        try:
            out = stepper.step(u, keep_stages=keep)
        except NonFiniteStateError as exc:
            exc.step = n
            raise NonFiniteStateError(f"blow-up at step {n}, stage {exc.stage}", step=n, stage=exc.stage) from None
        if stage_energies:
            res.stage_energies.append([energy(op, m, U) for U in out.stages[1:]])
        if on_step is not None:
            on_step(n, out)
        u = out.next
        res.trace.append(n * tau, energy(op, m, u), np.max(np.abs(u)), emod(u))
        if snapshot_stride and n % snapshot_stride == 0:
            res.snapshots[n] = u.copy()
    res.u = u
    res.steps = n_steps
    return res
