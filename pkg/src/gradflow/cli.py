"""Command-line front end.

Exit codes: 0 ok, 1 usage/config error, 2 numerical failure, 3 certification failure.
"""

from __future__ import annotations

import argparse
import logging
import math
import os
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from ._kernels import kernels
from .analyzer import StageEnergyChecker, Verdict, certify
from .presets import PRESETS, ConfigError, RunConfig, parse_config_text, preset
from .scalarfun import CorrectionKind
from .specop import FLOAT_FMT, write_grid_csv
from .stepper import NonFiniteStateError, integrate, parse_scheme_name
from .tableau import registry_get

log = logging.getLogger("gradflow")

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_CERT = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def output_root(arg: str | None) -> Path:
    return Path(arg or os.environ.get("GRADFLOW_OUT") or "runs")


def build_config(args) -> RunConfig:
    cfg = preset(args.preset) if args.preset else RunConfig()
    if args.config:
        cfg.update(parse_config_text(Path(args.config).read_text()))
    for item in args.set or ():
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        cfg.set(k, v)
    for key in ("scheme", "kind", "tau", "kappa", "T"):
        val = getattr(args, key, None)
        if val is not None:
            cfg.set(key, val)
    return cfg.validate()


# ---------------------------------------------------------------- run

def run(cfg: RunConfig, out_root: Path) -> dict:
    """Integrate ``cfg`` and write energy.csv, snapshots and manifest.txt under out_root/<run-id>."""
    cfg.validate()
    rid = cfg.run_id
    rundir = out_root / rid
    rundir.mkdir(parents=True, exist_ok=True)
    op, model, spec = cfg.operator(), cfg.make_model(), cfg.spec()
    u0 = cfg.initial()

    stage_rows = []
    checker = StageEnergyChecker(spec, op, model) if cfg.stage_check else None

    def on_step(n, out):
        if checker and n % cfg.stage_check == 0:
            rep = checker.check(out)
            for j, (l, r) in enumerate(zip(rep.lhs, rep.rhs), start=1):
                stage_rows.append((n, j, l, r, l - r))

    status, detail = "ok", ""
    t0 = time.perf_counter()
    try:
        res = integrate(spec, op, model, u0, cfg.n_steps, modified_energy=cfg.modified_energy,
                        snapshot_stride=cfg.snapshot_stride, on_step=on_step if checker else None)
    except NonFiniteStateError as exc:
        res, status, detail = None, "blowup", f"step={exc.step} stage={exc.stage}"
    wall = time.perf_counter() - t0

    if res is not None:
        res.trace.to_csv(rundir / "energy.csv")
        for n, u in sorted(res.snapshots.items()):
            write_grid_csv(rundir / f"{rid}_t{n}.csv", u)
    if stage_rows:
        with open(rundir / "stage_check.csv", "w") as fh:
            fh.write("step,stage,lhs,rhs,gap\n")
            for n, j, l, r, g in stage_rows:
                fh.write(f"{n},{j},{FLOAT_FMT % l},{FLOAT_FMT % r},{FLOAT_FMT % g}\n")

    meta = {
        "run_id": rid, "scheme_label": cfg.label, "status": status, "detail": detail,
        "steps": cfg.n_steps, "wall_time_s": f"{wall:.3f}", "backend": kernels.name,
        "version": __version__, "clipped_nodes": getattr(model, "clipped", 0),
    }
    with open(rundir / "manifest.txt", "w") as fh:
        fh.write(cfg.to_text())
        for k, v in meta.items():
            fh.write(f"# {k}: {v}\n")
    return {"dir": rundir, "result": res, **meta}


def _cmd_run(args) -> int:
    cfg = build_config(args)
    info = run(cfg, output_root(args.out))
    print(f"{info['run_id']} {info['scheme_label']} {info['status']} -> {info['dir']}")
    if info["result"] is not None:
        tr = info["result"].trace
        print(f"E: {tr.E[0]:.10g} -> {tr.E[-1]:.10g}; max|u| final {tr.max_norm[-1]:.10g}; "
              f"E increases: {len(tr.increases(1e-10))}")
    return EXIT_OK if info["status"] == "ok" else EXIT_NUMERIC


# ---------------------------------------------------------------- converge

def _trajectory(cfg: RunConfig, stride: int = 1) -> np.ndarray:
    res = integrate(cfg.spec(), cfg.operator(), cfg.make_model(), cfg.initial(), cfg.n_steps,
                    snapshot_stride=stride)
    return np.array([res.snapshots[n] for n in sorted(res.snapshots)])


def _ratio(a: float, b: float) -> int:
    r = a / b
    k = int(round(r))
    if k < 1 or abs(r - k) > 1e-9 * r:
        raise ConfigError(f"time grids do not nest: {a!r}/{b!r} = {r!r}")
    return k


def converge(cfg: RunConfig, taus, reference=None, jobs: int = 1):
    """Max-norm errors e(tau) = max_n |u^n - u_ref(t_n)| and observed orders.

    ``reference`` is ``None`` (same scheme at min(taus)/10) or ``(scheme_name, tau_ref)``.
    Returns a list of (tau, error, order) with order ``nan`` for the first row.
    """
    taus = sorted((float(t) for t in taus), reverse=True)
    if reference is None:
        ref_cfg = cfg.copy(tau=taus[-1] / 10)
    else:
        name, tau_ref = reference
        ref_cfg = cfg.copy(tau=float(tau_ref))
        ref_cfg.set("scheme", name)
    if not ref_cfg.tau <= taus[-1]:
        raise ConfigError("reference tau must not exceed the smallest tau")
    strides = [_ratio(t, ref_cfg.tau) for t in taus]
    cfgs = [cfg.copy(tau=t).validate() for t in taus]
    ref_cfg.validate()

    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            ref_f = pool.submit(_trajectory, ref_cfg)
            futs = [pool.submit(_trajectory, c) for c in cfgs]
            ref = ref_f.result()
            trajs = [f.result() for f in futs]
    else:
        ref = _trajectory(ref_cfg)
        trajs = [_trajectory(c) for c in cfgs]

    rows = []
    for t, k, traj in zip(taus, strides, trajs):
        sampled = ref[::k][: len(traj)]
        err = float(np.max(np.abs(traj[1:] - sampled[1:]))) if len(traj) > 1 else 0.0
        rows.append([t, err, math.nan])
    for a, b in zip(rows, rows[1:]):
        if a[1] > 0 and b[1] > 0:
            b[2] = math.log(a[1] / b[1]) / math.log(a[0] / b[0])
    return [tuple(r) for r in rows]


def _cmd_converge(args) -> int:
    cfg = build_config(args)
    taus = [float(x) for x in args.taus.split(",")] if args.taus else [2.0 ** -k / 10 for k in range(5)]
    reference = None
    if args.ref_scheme or args.ref_tau:
        reference = (args.ref_scheme or cfg.label, args.ref_tau or min(taus) / 10)
    rows = converge(cfg, taus, reference, jobs=args.jobs)
    lines = ["tau,error,order"] + [",".join(FLOAT_FMT % x for x in r) for r in rows]
    print(f"# {cfg.label} on {cfg.preset or 'custom'}")
    print("\n".join(lines))
    if args.csv:
        Path(args.csv).write_text("\n".join(lines) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------- certify

def _cmd_certify(args) -> int:
    try:
        if "IF" in args.scheme.upper():
            t, kind = parse_scheme_name(args.scheme)
            if args.kind:
                kind = CorrectionKind.parse(args.kind)
        else:
            t, kind = registry_get(args.scheme), CorrectionKind.parse(args.kind or "N")
    except (KeyError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if kind is CorrectionKind.RAW:
        print("error: raw IF schemes are not steady-state preserving; certify needs --kind T or N",
              file=sys.stderr)
        return EXIT_USAGE
    rep = certify(t, kind, z_min=args.z_min, n_points=args.points)
    print(rep.summary())
    if args.csv:
        Path(args.csv).write_text(rep.to_csv_text())
    if args.expect_pd and rep.verdict is Verdict.INDEFINITE:
        return EXIT_CERT
    return EXIT_OK


def _cmd_preset(args) -> int:
    if args.list or not args.name:
        for name in PRESETS:
            cfg = preset(name)
            print(f"{name:16s} {cfg.label:14s} dim={cfg.dim} M={cfg.M} tau={cfg.tau:g} T={cfg.T:g} kappa={cfg.kappa:g}")
        return EXIT_OK
    sys.stdout.write(preset(args.name).to_text())
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_config_args(p):
    p.add_argument("--preset", help="start from a named preset (see `preset --list`)")
    p.add_argument("--config", help="flat key=value config file (a run manifest works)")
    p.add_argument("--set", action="append", metavar="KEY=VALUE", help="override one config key")
    p.add_argument("--scheme", help="tableau name or full label, e.g. Heun3 or NIF3-Heun")
    p.add_argument("--kind", help="raw, T or N")
    p.add_argument("--tau")
    p.add_argument("--kappa")
    p.add_argument("--T")


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="gradflow", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("run", help="integrate one configuration and write CSV output")
    _add_config_args(p)
    p.add_argument("--out", help="output root (default $GRADFLOW_OUT or ./runs)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("converge", help="temporal convergence study in the max norm")
    _add_config_args(p)
    p.add_argument("--taus", help="comma-separated step sizes (default 2^-k/10, k=0..4)")
    p.add_argument("--ref-scheme", help="reference scheme label (default: same scheme)")
    p.add_argument("--ref-tau", type=float, help="reference step (default min(taus)/10)")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="write the order table here")
    p.set_defaults(func=_cmd_converge)

    p = sub.add_parser("certify", help="scan the differentiation matrix over z <= 0")
    p.add_argument("scheme", help="tableau (heun3) or label (TIF3-Heun)")
    p.add_argument("--kind", help="T or N (raw is rejected)")
    p.add_argument("--z-min", type=float, default=-50.0)
    p.add_argument("--points", type=int, default=10_000)
    p.add_argument("--expect-pd", action="store_true", help="exit 3 on an Indefinite verdict")
    p.add_argument("--csv", help="write z,minor_1..minor_s here")
    p.set_defaults(func=_cmd_certify)

    p = sub.add_parser("preset", help="list presets or print one as a config file")
    p.add_argument("name", nargs="?")
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=_cmd_preset)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonFiniteStateError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
