"""Run configuration, experiment presets and closed-form initial data."""

from __future__ import annotations

import dataclasses
import hashlib
import math
from dataclasses import dataclass, fields

import numpy as np

from .models import make_model
from .scalarfun import CorrectionKind
from .specop import Grid, SpectralOperator
from .stepper import SchemeSpec, parse_scheme_name
from .tableau import registry_get


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    scheme: str = "IF1"
    kind: str = "N"
    model: str = "double-well"
    eps: float = 0.1
    theta: float = 0.8
    theta_c: float = 1.0
    dim: int = 1
    M: int = 200
    length: float = 2.0
    origin: float = -1.0
    tau: float = 0.1
    T: float = 1.0
    kappa: float = 4.0
    init: str = "example1"
    snapshot_stride: int = 0
    modified_energy: bool = False
    stage_check: int = 0
    preset: str = ""

    # ------------------------------------------------------------ parsing
    def set(self, key: str, value) -> None:
        key = key.strip()
        if key == "h":
            try:
                h = _parse_float(value)
            except ValueError:
                raise ConfigError(f"bad value for h: {value!r}") from None
            self.M = _spacing_to_M(h, self.length)
            return
        if key == "scheme" and "IF" in str(value).upper():
            t, kind = parse_scheme_name(str(value))
            self.scheme, self.kind = t.name, kind.value
            return
        types = {f.name: f.type for f in fields(self)}
        if key not in types:
            raise ConfigError(f"unknown config key {key!r}")
        typ = types[key]
        try:
            if typ == "bool":
                v = str(value).strip().lower() in ("1", "true", "yes", "on")
            elif typ == "int":
                v = int(float(value))
            elif typ == "float":
                v = _parse_float(value)
            else:
                v = str(value).strip()
        except ValueError:
            raise ConfigError(f"bad value for {key}: {value!r}") from None
        setattr(self, key, v)

    def update(self, pairs) -> "RunConfig":
        for k, v in (pairs.items() if isinstance(pairs, dict) else pairs):
            self.set(k, v)
        return self

    def copy(self, **changes) -> "RunConfig":
        c = dataclasses.replace(self)
        return c.update(changes)

    # ------------------------------------------------------------ derived
    @property
    def h(self) -> float:
        return self.length / self.M

    @property
    def n_steps(self) -> int:
        n = self.T / self.tau
        N = int(round(n))
        if abs(n - N) > 1e-9 * max(1.0, n) or N < 1:
            raise ConfigError(f"T/tau = {n!r} is not a positive integer")
        return N

    @property
    def label(self) -> str:
        from .stepper import scheme_label

        return scheme_label(registry_get(self.scheme), CorrectionKind.parse(self.kind))

    def validate(self) -> "RunConfig":
        for name in ("eps", "tau", "T", "length"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive, got {getattr(self, name)}")
        if self.kappa < 0:
            raise ConfigError("kappa must be nonnegative")
        if self.dim not in (1, 2) or self.M < 2:
            raise ConfigError("need dim in {1, 2} and M >= 2")
        if self.snapshot_stride < 0 or self.stage_check < 0:
            raise ConfigError("snapshot_stride and stage_check must be nonnegative")
        try:
            registry_get(self.scheme)
            CorrectionKind.parse(self.kind)
            self.make_model()
        except (KeyError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        self.n_steps
        return self

    def grid(self) -> Grid:
        return Grid(self.dim, self.M, self.length, self.origin)

    def operator(self) -> SpectralOperator:
        return SpectralOperator(self.grid(), self.eps ** 2)

    def make_model(self):
        if self.model.lower().startswith("f"):
            return make_model(self.model, theta=self.theta, theta_c=self.theta_c)
        return make_model(self.model)

    def spec(self) -> SchemeSpec:
        return SchemeSpec(registry_get(self.scheme), CorrectionKind.parse(self.kind), self.kappa, self.tau)

    def initial(self) -> np.ndarray:
        return initial_data(self.init, self.grid(), self.eps)

    # ------------------------------------------------------------ text form
    def to_text(self) -> str:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if isinstance(v, float):
                v = repr(v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            lines.append(f"{f.name}={v}")
        return "\n".join(lines) + "\n"

    @property
    def run_id(self) -> str:
        return hashlib.sha1(self.to_text().encode()).hexdigest()[:12]


def _parse_float(value) -> float:
    if isinstance(value, (int, float)):
        return float(value)
    text = str(value).strip().replace("pi", repr(math.pi))
    if all(ch in "0123456789.eE+-*/() " for ch in text):
        return float(eval(text, {"__builtins__": {}}, {}))  # arithmetic only, e.g. "1/128"
    return float(text)


def _spacing_to_M(h: float, length: float) -> int:
    m = length / h
    M = int(round(m))
    if abs(m - M) > 1e-9 * max(1.0, m):
        raise ConfigError(f"spacing {h} does not divide the domain length {length}")
    return M


def parse_config_text(text: str) -> list[tuple[str, str]]:
    """Flat ``key=value`` lines; ``#`` starts a comment."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected key=value, got {raw!r}")
        k, v = line.split("=", 1)
        pairs.append((k.strip(), v.strip()))
    return pairs


# ---------------------------------------------------------------- initial data

def initial_data(name: str, grid: Grid, eps: float) -> np.ndarray:
    key, _, arg = name.partition(":")
    key = key.strip().lower()
    X = grid.mesh()
    if key == "example1":
        if grid.dim != 1:
            raise ConfigError("example1 datum is one-dimensional")
        x = X[0]
        return -np.tanh(((x - 0.3) ** 2 - 0.2 ** 2) / eps) * np.tanh(((x + 0.3) ** 2 - 0.2 ** 2) / eps)
    if key == "chebfun":
        if grid.dim != 1:
            raise ConfigError("chebfun datum is one-dimensional")
        x = X[0]
        return (np.tanh(2 * np.sin(x)) / 3 - np.exp(-23.5 * (x - np.pi / 2) ** 2)
                + np.exp(-27 * (x - 4.2) ** 2) + np.exp(-38 * (x - 5.4) ** 2))
    if key == "bubbles":
        if grid.dim != 2:
            raise ConfigError("bubbles datum is two-dimensional")
        x, y = X
        r = 0.2 ** 2
        return -(np.tanh(((x - 0.3) ** 2 + y ** 2 - r) / eps) * np.tanh(((x + 0.3) ** 2 + y ** 2 - r) / eps)
                 * np.tanh((x ** 2 + (y - 0.3) ** 2 - r) / eps) * np.tanh((x ** 2 + (y + 0.3) ** 2 - r) / eps))
    if key == "constant":
        return np.full(grid.shape, float(arg or 0.0))
    if key == "random":
        rng = np.random.default_rng(int(arg or 0))
        return rng.uniform(-0.9, 0.9, grid.shape)
    raise ConfigError(f"unknown initial datum {name!r}; use example1, chebfun, bubbles, constant:<v>, random:<seed>")


# ---------------------------------------------------------------- presets

_EX1 = dict(model="double-well", eps=0.1, dim=1, length=2.0, origin=-1.0, init="example1", kappa=4.0)
_EX3 = dict(model="double-well", eps=0.1, dim=1, length=2 * math.pi, origin=0.0, init="chebfun",
            kappa=4.0, scheme="Heun3", kind="N")
_EX4 = dict(_EX3, model="flory-huggins", theta=0.8, theta_c=1.0)
_BUB = dict(model="double-well", eps=0.05, dim=2, length=2.0, origin=-1.0, init="bubbles",
            kappa=6.0, tau=0.1, scheme="Ralston3", kind="N")

PRESETS: dict[str, dict] = {
    "example1": dict(_EX1, M=200, T=20.0, tau=0.05, scheme="IF1", kind="N"),
    "example1-desk": dict(_EX1, M=256, T=2.0, tau=0.1, scheme="IF1", kind="N"),
    "example3": dict(_EX3, M=640, T=80.0, tau=0.5),
    "example3-desk": dict(_EX3, M=128, T=8.0, tau=0.5),
    "example4": dict(_EX4, M=640, T=40.0, tau=0.1),
    "example4-desk": dict(_EX4, M=128, T=4.0, tau=0.1),
    "bubbles2d": dict(_BUB, M=64, T=60.0, snapshot_stride=50),
    "bubbles2d-desk": dict(_BUB, M=32, T=10.0, snapshot_stride=50),
}


def preset(name: str) -> RunConfig:
    try:
        params = PRESETS[name.lower()]
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; available: {', '.join(PRESETS)}") from None
    cfg = RunConfig(preset=name.lower())
    cfg.update(params)
    return cfg.validate()
