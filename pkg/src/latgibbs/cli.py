"""Command-line interface.

Subcommands: reduce, sample, decode, simulate, diagnose. Matrices travel as
plain text (dimension header, one row per line), configs and single records
as JSON, tables as CSV. Every stochastic subcommand takes a mandatory seed
and reproduces its output bit for bit.

Exit codes: 0 success, 2 usage or config-schema error, 3 I/O error,
4 numerical/domain error.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from .decoder import DecodeOutcome, SigmaStrategy, sampler_decode
from .diagnostics import build_sweep_kernel, tv_decay, convergence_rate_report
from .dgauss import GaussianParams
from .errors import LatGibbsError, SchemaError
from .gibbs import ChainConfig, lr_aided_chain, run_chain
from .lattice import (
    Basis,
    babai_nearest_plane,
    read_basis,
    read_vector,
    write_basis,
    write_vector,
)
from .lll import lll_reduce
from .mimo import DETECTORS, MimoConfig, run_ber_experiment

OUTPUT_DIR_ENV = "LATGIBBS_OUTPUT_DIR"

BER_CSV_COLUMNS = (
    "detector",
    "snr_db",
    "frames",
    "bit_errors",
    "ber",
    "skip_rate",
    "wall_seconds",
)


def _out_path(path: str) -> str:
    """Resolve an output path, honoring the output-directory override."""
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not os.path.isabs(path):
        os.makedirs(base, exist_ok=True)
        return os.path.join(base, path)
    return path


# --- config / record serialization ------------------------------------------


def _check_schema(obj: dict, spec: dict, path: str = "config"):
    if not isinstance(obj, dict):
        raise SchemaError(f"{path}: expected an object")
    for key in obj:
        if key not in spec:
            raise SchemaError(f"{path}.{key}: unknown key")
    out = {}
    for key, (types, required, default) in spec.items():
        if key not in obj:
            if required:
                raise SchemaError(f"{path}.{key}: missing required key")
            out[key] = default
            continue
        val = obj[key]
        if types is not None and not isinstance(val, types):
            raise SchemaError(f"{path}.{key}: expected {types}, got {type(val).__name__}")
        out[key] = val
    return out


_STRATEGY_SPEC = {
    "kind": (str, True, None),
    "value": ((int, float), False, None),
    "sigma_w": ((int, float), False, None),
    "snr": ((int, float), False, None),
    "n": (int, False, None),
}

_SIM_SPEC = {
    "n_complex": (int, True, None),
    "qam": (int, True, None),
    "snr_db_list": (list, True, None),
    "frames": (int, True, None),
    "sweeps": (int, True, None),
    "strategy": (dict, True, None),
    "alpha": ((int, float, type(None)), False, 1.0),
    "detector": ((str, list), True, None),
    "seed": (int, True, None),
}


def load_config(path: str) -> MimoConfig:
    """Load and strictly validate a simulate config JSON file."""
    with open(path) as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON ({e})") from None
    cfg = _check_schema(raw, _SIM_SPEC)
    strat = _check_schema(cfg["strategy"], _STRATEGY_SPEC, "config.strategy")
    try:
        strategy = SigmaStrategy(**strat)
        return MimoConfig(
            n_complex=cfg["n_complex"],
            qam=cfg["qam"],
            snr_db_list=tuple(cfg["snr_db_list"]),
            frames=cfg["frames"],
            sweeps=cfg["sweeps"],
            strategy=strategy,
            alpha=cfg["alpha"],
            detector=cfg["detector"],
            seed=cfg["seed"],
        )
    except LatGibbsError:
        raise
    except (TypeError, ValueError) as e:
        raise SchemaError(f"{path}: {e}") from None


def emit_ber_csv(path: str, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(BER_CSV_COLUMNS)
        for r in records:
            w.writerow(
                [
                    r.detector,
                    repr(r.snr_db),
                    r.frames,
                    r.bit_errors,
                    repr(r.ber),
                    repr(r.startup_skip_rate),
                    f"{r.wall_seconds:.3f}",
                ]
            )


def read_ber_csv(path: str) -> list[dict]:
    """Load a table emitted by emit_ber_csv: one typed dict per row, keyed
    by the fixed column names. Float columns round-trip exactly."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != BER_CSV_COLUMNS:
        raise SchemaError(f"{path}: expected header {','.join(BER_CSV_COLUMNS)}")
    types = (str, float, int, int, float, float, float)
    return [
        {name: typ(val) for name, typ, val in zip(BER_CSV_COLUMNS, types, row)}
        for row in rows[1:]
    ]


def outcome_to_json(outcome: DecodeOutcome) -> dict:
    return {
        "estimate": [int(v) for v in outcome.estimate],
        "residual": outcome.residual,
        "sampler_invoked": outcome.sampler_invoked,
        "sweeps_used": outcome.sweeps_used,
        "method": outcome.method,
        "sigma": outcome.sigma,
        "sigma_fallback": outcome.sigma_fallback,
    }


def parse_sigma_spec(spec: str) -> SigmaStrategy:
    """Parse --sigma values: distance | statistic:W | hassibi:SNR | fixed:V."""
    kind, _, arg = spec.partition(":")
    if kind == "distance":
        return SigmaStrategy(kind="distance")
    if kind == "statistic":
        if not arg:
            raise SchemaError("statistic strategy needs a noise level: statistic:W")
        return SigmaStrategy(kind="statistic", sigma_w=float(arg))
    if kind == "hassibi":
        if not arg:
            raise SchemaError("hassibi strategy needs a linear SNR: hassibi:SNR")
        return SigmaStrategy(kind="hassibi", snr=float(arg))
    if kind == "fixed":
        if not arg:
            raise SchemaError("fixed strategy needs a value: fixed:V")
        return SigmaStrategy(kind="fixed", value=float(arg))
    raise SchemaError(f"unknown sigma strategy {spec!r}")


# --- subcommands --------------------------------------------------------------


def _cmd_reduce(args) -> int:
    basis = Basis(read_basis(args.infile))
    red = lll_reduce(basis, args.delta)
    write_basis(_out_path(args.out), red.reduced.columns)
    if args.unimodular:
        with open(_out_path(args.unimodular), "w") as fh:
            n = basis.n
            fh.write(f"{n}\n")
            for row in red.unimodular:
                fh.write(" ".join(str(int(v)) for v in row) + "\n")
    return 0


def _cmd_sample(args) -> int:
    basis = Basis(read_basis(args.basis))
    center = read_vector(args.center) if args.center else np.zeros(basis.n)
    start = (
        np.asarray(read_vector(args.start), dtype=np.int64)
        if args.start
        else babai_nearest_plane(basis, center)
    )
    if args.reduce:
        coords = lr_aided_chain(
            basis,
            args.sigma,
            center,
            start,
            args.sweeps,
            rng=args.seed,
            collect_from=args.burn_in,
        )
        rows = list(enumerate(coords, start=args.burn_in + 1))
    else:
        cfg = ChainConfig(
            params=GaussianParams(basis=basis, sigma=args.sigma, center=center),
            sweeps=args.sweeps,
            collect_from=args.burn_in,
        )
        states = run_chain(cfg, start, args.seed)
        rows = [(s.sweep, s.coords) for s in states]
    with open(_out_path(args.out), "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["sweep"] + [f"x{i + 1}" for i in range(basis.n)])
        for sweep_idx, coords in rows:
            w.writerow([sweep_idx] + [int(v) for v in coords])
    return 0


def _cmd_decode(args) -> int:
    basis = Basis(read_basis(args.basis))
    target = read_vector(args.target)
    alpha = None if args.alpha.lower() == "none" else float(args.alpha)
    outcome = sampler_decode(
        basis,
        target,
        sweeps=args.sweeps,
        strategy=parse_sigma_spec(args.sigma),
        alpha=alpha,
        mode="lattice",
        seed=args.seed,
        initial=args.initial,
    )
    payload = json.dumps(outcome_to_json(outcome), indent=2)
    if args.out:
        with open(_out_path(args.out), "w") as fh:
            fh.write(payload + "\n")
    else:
        print(payload)
    return 0


def _cmd_simulate(args) -> int:
    cfg = load_config(args.config)
    records = run_ber_experiment(cfg, threads=args.threads)
    emit_ber_csv(_out_path(args.out), records)
    return 0


def _cmd_diagnose(args) -> int:
    basis = Basis(read_basis(args.basis))
    center = read_vector(args.center) if args.center else np.zeros(basis.n)
    box = [(-args.box, args.box)] * basis.n
    report = convergence_rate_report(basis, args.sigma, center, box, m=args.split)
    chain = build_sweep_kernel(
        GaussianParams(basis=basis, sigma=args.sigma, center=center), box
    )
    start = np.clip(babai_nearest_plane(basis, center), -args.box, args.box)
    curve = tv_decay(chain, start, args.tmax)
    payload = {
        "gamma": report.gamma,
        "rho_spectral": report.rho_spectral,
        "rho_empirical": report.rho_empirical,
        "block_split": report.block_split,
        "tv_curve": curve,
    }
    with open(_out_path(args.out), "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="latgibbs", description=__doc__)
    p.add_argument("--threads", type=int, default=1, help="worker processes for simulate")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("reduce", help="LLL-reduce a basis file")
    r.add_argument("--delta", type=float, default=0.75)
    r.add_argument("--in", dest="infile", required=True)
    r.add_argument("--out", required=True)
    r.add_argument("--unimodular", default=None)
    r.set_defaults(func=_cmd_reduce)

    s = sub.add_parser("sample", help="run the Gibbs chain and dump samples")
    s.add_argument("--basis", required=True)
    s.add_argument("--sigma", type=float, required=True)
    s.add_argument("--center", default=None)
    s.add_argument("--sweeps", type=int, required=True)
    s.add_argument("--seed", type=int, required=True)
    s.add_argument("--burn-in", type=int, default=0)
    s.add_argument("--start", default=None, help="integer start vector file")
    s.add_argument("--reduce", dest="reduce", action="store_true", default=True)
    s.add_argument("--no-reduce", dest="reduce", action="store_false")
    s.add_argument("--out", required=True)
    s.set_defaults(func=_cmd_sample)

    d = sub.add_parser("decode", help="sampler-decode a CVP instance")
    d.add_argument("--basis", required=True)
    d.add_argument("--target", required=True)
    d.add_argument("--sweeps", type=int, required=True)
    d.add_argument("--sigma", default="distance", help="distance|statistic:W|hassibi:SNR|fixed:V")
    d.add_argument("--alpha", default="1", help="gate relaxation >= 1, or 'none'")
    d.add_argument("--initial", default="sic-lll", choices=["zf", "sic", "sic-lll"])
    d.add_argument("--seed", type=int, required=True)
    d.add_argument("--json", action="store_true", help="emit JSON (always on)")
    d.add_argument("--out", default=None)
    d.set_defaults(func=_cmd_decode)

    m = sub.add_parser("simulate", help=f"MIMO BER sweep; detectors: {', '.join(DETECTORS)}")
    m.add_argument("--config", required=True)
    m.add_argument("--out", required=True)
    m.set_defaults(func=_cmd_simulate)

    g = sub.add_parser("diagnose", help="exact convergence diagnostics on a box")
    g.add_argument("--basis", required=True)
    g.add_argument("--sigma", type=float, required=True)
    g.add_argument("--center", default=None)
    g.add_argument("--box", type=int, required=True, help="box half-width per coordinate")
    g.add_argument("--split", type=int, default=1, help="block split m")
    g.add_argument("--tmax", type=int, default=50)
    g.add_argument("--out", required=True)
    g.set_defaults(func=_cmd_diagnose)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except SchemaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except LatGibbsError as e:
        print(f"error: {e}", file=sys.stderr)
        return e.exit_code
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
