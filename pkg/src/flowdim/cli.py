"""Experiment runner: kernel reports, demos, sweeps, and the full pipeline.

Every subcommand reads a flat key=value config (optional) overridden by
command-line flags, computes its artifacts, and writes CSV/JSON files
named ``<subcommand>-<confighash>``, plus a run manifest.  All
randomness flows from the single ``seed`` key.  Exit codes: 0 when all
internal contract checks pass, 1 on a contract violation (a diagnostic
report is still written), 2 on usage or configuration errors.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import instances
from .bandlimited import Band, periodic_subspace_dim
from .dynamics import RoofFunction, SuspensionPoint, bw_distance
from .embedding import SolenoidEmbedding, solenoid_embed, solenoid_recover
from .dynamics import SolenoidPoint, solenoid_from_time
from .errors import ConfigurationError, FlowdimError
from .io import write_table_csv, load_sample_json, load_system_json
from .kernel import (
    KernelSpec,
    certify_constants,
    interpolation_kernel,
    kernel_band_leakage,
    reverify_constants,
)
from .metric import mdim_table, metric_mdim_table, widim_upper

USAGE_ERROR = 2
CONTRACT_ERROR = 1


def _load_config(path):
    config = {}
    if path:
        for line in Path(path).read_text().splitlines():
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigurationError(f"bad config line: {line!r}")
            key, value = line.split("=", 1)
            config[key.strip()] = value.strip()
    return config


def _merge(config, args, keys):
    """Apply CLI overrides on top of the config, then parse types."""
    out = dict(config)
    for key, caster in keys.items():
        flag = getattr(args, key.replace("-", "_"), None)
        if flag is not None:
            out[key] = flag
        if key in out and isinstance(out[key], str):
            out[key] = caster(out[key])
    return out


def _config_hash(params):
    canon = json.dumps({k: str(v) for k, v in sorted(params.items())})
    return hashlib.sha256(canon.encode()).hexdigest()[:12]


class Runner:
    def __init__(self, out_dir, subcommand, params):
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self.subcommand = subcommand
        self.params = params
        self.hash = _config_hash(params)
        self.files = []

    def path(self, suffix):
        name = f"{self.subcommand}-{self.hash}{suffix}"
        self.files.append(name)
        return self.out_dir / name

    def write_json(self, suffix, payload):
        path = self.path(suffix)
        with path.open("w") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonify)
            fh.write("\n")
        return path

    def finish(self, passed):
        manifest = {
            "subcommand": self.subcommand,
            "config_hash": self.hash,
            "params": {k: str(v) for k, v in sorted(self.params.items())},
            "files": self.files,
            "passed": bool(passed),
        }
        path = self.out_dir / f"{self.subcommand}-{self.hash}-manifest.json"
        with path.open("w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
        return 0 if passed else CONTRACT_ERROR


def _jsonify(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"cannot serialize {type(obj)}")


def cmd_periodic_dim(args):
    params = _merge(_load_config(args.config), args,
                    {"a": float, "r": float})
    if "a" not in params or "r" not in params:
        raise ConfigurationError("periodic-dim requires --a and --r")
    runner = Runner(args.out, "periodic-dim", params)
    formula, cert = periodic_subspace_dim(params["a"], params["r"])
    payload = {"formula": formula, "rank": cert.rank,
               "pass": bool(cert.consistent),
               "n_points": cert.n_points}
    runner.write_json(".json", payload)
    return runner.finish(cert.consistent)


def _kernel_spec(params):
    band = Band(params.get("band-lo", 0.0), params.get("band-hi", 2.0))
    return KernelSpec(band, Fraction(str(params.get("rho", 1))),
                      params.get("tau", 0.5),
                      window=params.get("window", 200.0))


def cmd_kernel_report(args):
    params = _merge(_load_config(args.config), args, {
        "rho": str, "tau": float, "band-lo": float, "band-hi": float,
        "window": float, "delta": float})
    runner = Runner(args.out, "kernel-report", params)
    spec = _kernel_spec(params)
    delta = params.get("delta", 0.1)
    constants = certify_constants(spec, delta)
    leakage = kernel_band_leakage(spec)
    t = np.linspace(-20, 20, 1601)
    phi = interpolation_kernel(t, spec)
    write_table_csv(runner.path(".csv"), zip(t, phi.real, phi.imag),
                    header=("t", "re_phi", "im_phi"))
    phi0 = complex(interpolation_kernel(0.0, spec))
    checks = {
        "phi0_error": abs(phi0 - 1.0),
        "K_dec": constants.K_dec,
        "delta_prime": constants.delta_prime,
        "S_sup": constants.S_sup,
        "leakage": leakage,
        "budget_ok": constants.check(),
        "reverified": reverify_constants(spec, constants),
    }
    runner.write_json(".json", checks)
    passed = (checks["phi0_error"] < 1e-9 and checks["budget_ok"]
              and checks["reverified"] and leakage < 1e-3)
    return runner.finish(passed)


def cmd_solenoid_demo(args):
    params = _merge(_load_config(args.config), args, {
        "depth": int, "T": float, "seed": int, "n-points": int})
    runner = Runner(args.out, "solenoid-demo", params)
    depth = params.get("depth", 4)
    T = params.get("T", 2e4)
    seed = params.get("seed", 0)
    n_points = params.get("n-points", 5)
    rng = np.random.default_rng(seed)
    emb = SolenoidEmbedding(c=1.0, K=depth, window=T + 50.0, grid_step=0.01)
    rows = []
    worst = 0.0
    for _ in range(n_points):
        tau = float(rng.uniform(0, math.factorial(depth)))
        p = solenoid_from_time(tau, depth)
        sig = solenoid_embed(p, emb)
        rec = solenoid_recover(sig, emb, T)
        for n in range(1, depth + 1):
            fact = math.factorial(n)
            gap = abs(rec.coords[n - 1] - p.coords[n - 1]) % fact
            gap = min(gap, fact - gap)
            rows.append((tau, n, gap))
            worst = max(worst, gap / fact)
    write_table_csv(runner.path(".csv"), rows, header=("tau", "n", "coord_error"))
    passed = worst < 1e-2
    runner.write_json(".json", {"worst_relative_error": worst, "pass": passed})
    return runner.finish(passed)


def cmd_widim_sweep(args):
    params = _merge(_load_config(args.config), args, {
        "sample": str, "eps-list": str})
    if "sample" not in params:
        raise ConfigurationError("widim-sweep requires --sample manifest.json")
    runner = Runner(args.out, "widim-sweep", params)
    sample = load_sample_json(params["sample"])
    eps_list = [float(e) for e in str(params.get("eps-list", "0.1,0.2,0.3")).split(",")]
    rows = [(eps, 1, widim_upper(sample, eps)) for eps in sorted(eps_list)]
    write_table_csv(runner.path(".csv"), rows)
    antitone = all(rows[i][2] >= rows[i + 1][2] for i in range(len(rows) - 1))
    runner.write_json(".json", {"antitone": antitone,
                                "note": "values are upper estimates (grid regime)"})
    return runner.finish(True)


def cmd_mdim_table(args):
    params = _merge(_load_config(args.config), args, {
        "family": str, "D": int, "N-max": int, "eps-list": str,
        "metric-mean": str, "system": str})
    runner = Runner(args.out, "mdim-table", params)
    family = params.get("family", "cube")
    eps_list = sorted(float(e) for e in str(params.get("eps-list", "0.3")).split(","))
    n_max = params.get("N-max", 4)
    n_list = list(range(1, n_max + 1))
    if "system" in params:
        sys, _ = load_system_json(params["system"])
    elif family == "cube":
        sys = instances.cube_shift_system(params.get("D", 1), n_max)
    elif family == "binary":
        sys = instances.binary_shift_system()
    else:
        raise ConfigurationError(f"unknown family {family!r}")
    if str(params.get("metric-mean", "no")).lower() in ("yes", "true", "1"):
        table = metric_mdim_table(sys, eps_list, n_list)
    else:
        table = mdim_table(sys, eps_list, n_list)
    write_table_csv(runner.path(".csv"), table.rows)
    runner.write_json(".json", {"diagnostics": table.diagnostics,
                                "kind": table.kind,
                                "note": "entries are upper estimates (grid regime)"})
    return runner.finish(True)


def cmd_bw_metric(args):
    params = _merge(_load_config(args.config), args, {
        "system": str, "height-grid": int, "max-segments": int})
    if "system" not in params:
        raise ConfigurationError("bw-metric requires --system manifest.json")
    runner = Runner(args.out, "bw-metric", params)
    sys, roof = load_system_json(params["system"])
    if roof is None:
        roof = RoofFunction.constant(1.0, len(sys))
    grid = params.get("height-grid", 16)
    segments = params.get("max-segments", 16)
    rows = []
    for i in range(len(sys)):
        for j in range(len(sys)):
            d = bw_distance(SuspensionPoint(i, 0.0), SuspensionPoint(j, 0.0),
                            sys, roof, max_segments=segments, height_grid=grid)
            rows.append((i, j, d))
    write_table_csv(runner.path(".csv"), rows, header=("i", "j", "bw_distance"))
    mat = np.array([r[2] for r in rows]).reshape(len(sys), len(sys))
    symmetric = bool(np.allclose(mat, mat.T, atol=1e-9))
    runner.write_json(".json", {"symmetric": symmetric,
                                "height_grid": grid, "max_segments": segments,
                                "note": "upper bounds of the chain infimum"})
    return runner.finish(symmetric)


def cmd_embed_pipeline(args):
    params = _merge(_load_config(args.config), args, {
        "delta": float, "rho": str, "N": int, "base-size": int,
        "heights": int, "seed": int})
    runner = Runner(args.out, "embed-pipeline", params)
    result = instances.run_embedding_pipeline(
        delta=params.get("delta", 0.2),
        rho=Fraction(str(params.get("rho", 1))),
        N=params.get("N", 2),
        base_size=params.get("base-size", 12),
        n_heights=params.get("heights", 10),
        seed=params.get("seed", 2024),
    )
    payload = {
        "seed": result.run.seed,
        "eps": result.eps,
        "delta": result.run.delta,
        "delta_prime": result.run.delta_prime,
        "constants": {"K_dec": result.constants.K_dec,
                      "S_sup": result.constants.S_sup},
        "search_tries": result.search_report.tries,
        "sup_change": result.sup_change,
        "node_residual": result.node_residual,
        "equivariance_residual": result.equivariance_residual,
        "verdict_passed": result.verdict.passed,
        "n_pairs": result.verdict.n_pairs,
        "matched_pairs": result.verdict.n_matched,
        "worst_pair": result.verdict.worst_pair,
        "min_image_separation": result.verdict.min_image_separation,
        "pass": result.passed,
    }
    runner.write_json(".json", payload)
    return runner.finish(result.passed)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="flowdim",
        description="Mean dimension, suspension, and band-limited embedding experiments")
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--out", default="artifacts", help="output directory")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("periodic-dim", help="periodic-subspace dimension certificate")
    p.add_argument("--a", type=float)
    p.add_argument("--r", type=float)
    p.set_defaults(func=cmd_periodic_dim)

    p = sub.add_parser("kernel-report", help="interpolation kernel constants and samples")
    for flag, typ in (("--rho", str), ("--tau", float), ("--band-lo", float),
                      ("--band-hi", float), ("--window", float), ("--delta", float)):
        p.add_argument(flag, type=typ)
    p.set_defaults(func=cmd_kernel_report)

    p = sub.add_parser("solenoid-demo", help="embed/recover round trip")
    for flag, typ in (("--depth", int), ("--T", float), ("--seed", int),
                      ("--n-points", int)):
        p.add_argument(flag, type=typ)
    p.set_defaults(func=cmd_solenoid_demo)

    p = sub.add_parser("widim-sweep", help="width-dimension estimates over epsilons")
    p.add_argument("--sample")
    p.add_argument("--eps-list")
    p.set_defaults(func=cmd_widim_sweep)

    p = sub.add_parser("mdim-table", help="mean-dimension estimate tables")
    for flag, typ in (("--family", str), ("--D", int), ("--N-max", int),
                      ("--eps-list", str), ("--metric-mean", str), ("--system", str)):
        p.add_argument(flag, type=typ)
    p.set_defaults(func=cmd_mdim_table)

    p = sub.add_parser("bw-metric", help="Bowen-Walters distance table")
    p.add_argument("--system")
    p.add_argument("--height-grid", type=int)
    p.add_argument("--max-segments", type=int)
    p.set_defaults(func=cmd_bw_metric)

    p = sub.add_parser("embed-pipeline", help="end-to-end delta-embedding run")
    for flag, typ in (("--delta", float), ("--rho", str), ("--N", int),
                      ("--base-size", int), ("--heights", int), ("--seed", int)):
        p.add_argument(flag, type=typ)
    p.set_defaults(func=cmd_embed_pipeline)

    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return USAGE_ERROR
    except FlowdimError as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return CONTRACT_ERROR
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
