"""Command-line experiment runner.

Exit codes: 0 success, 1 acceptance-threshold breach, 2 usage error,
3 resource guard.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from importlib import metadata
from pathlib import Path

import numpy as np

EXIT_BREACH = 1
EXIT_USAGE = 2
EXIT_RESOURCE = 3

DEFAULTS = {
    "wall-prob": {"k": 1, "samples": 1_000_000, "seed": None, "exact": False, "out": "wall_prob.csv"},
    "scan": {"n": 50, "p": 0.0, "seed": None, "kmax": 2, "circuit": None, "out": "scan.json"},
    "entropy": {"setup": "localisation", "n": 8, "p": 0.0, "realizations": 100, "tmax": 200,
                "seed": None, "out": "entropy.csv"},
    "sff": {"setup": "transport", "n": 8, "p": 1.0, "realizations": 100, "tmax": 600, "seed": None,
            "dt": 1, "out": "sff.csv"},
}


def version() -> str:
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


class UsageError(Exception):
    pass


def resolve_config(command: str, args: argparse.Namespace) -> dict:
    """Defaults, then a JSON config file, then explicit flags."""
    cfg = dict(DEFAULTS[command])
    if getattr(args, "config", None):
        loaded = json.loads(Path(args.config).read_text())
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise UsageError(f"unknown config fields: {sorted(unknown)}")
        cfg.update(loaded)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None and val is not False:
            cfg[key] = val
    return cfg


def _require_seed(cfg: dict) -> int:
    if cfg.get("seed") is None:
        raise UsageError("--seed is required for stochastic runs")
    return int(cfg["seed"])


def write_csv(path: str, rows: list[dict], manifest: dict) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    Path(path).write_text(buf.getvalue())
    Path(path + ".json").write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def _manifest(command: str, cfg: dict, **extra) -> dict:
    return {"command": command, "version": version(), "parameters": cfg, **extra}


def cmd_wall_prob(cfg: dict) -> int:
    from .enumeration import exact_kwall_probability, montecarlo_wall_prob, two_wall_breakdown
    from .walls import kwall_bounds_exact

    k = int(cfg["k"])
    if k < 1:
        raise UsageError("--k must be at least 1")
    status = 0
    rows = []
    if cfg["exact"]:
        if k > 2:
            raise UsageError("exact census is available for k <= 2 only")
        exact = exact_kwall_probability(k)
        print(f"exact P({k}-wall) = {exact} = {float(exact):.6f}")
        if k == 2:
            for mid, val in two_wall_breakdown().items():
                if val:
                    print(f"  via CZ-{mid}-CZ: {val} = {float(val):.6f}")
    run_mc = cfg["samples"] and int(cfg["samples"]) > 0 and (cfg["seed"] is not None or not cfg["exact"])
    if run_mc:
        seed = _require_seed(cfg)
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(k,)))
        census = montecarlo_wall_prob(k, int(cfg["samples"]), rng)
        rows.append(census.row())
        lo, hi = kwall_bounds_exact(k)
        print(f"estimate {census.estimate:.6f} +- {census.stderr:.6f} ({census.hits}/{census.samples})")
        print(f"bounds [{float(lo):.6f}, {float(hi):.6f}]")
        if census.exact is not None:
            dev = census.sigma_deviation
            print(f"deviation from exact: {dev:+.2f} sigma")
            if abs(dev) > 5:
                status = EXIT_BREACH
        elif not float(lo) - 5 * census.stderr <= census.estimate <= float(hi) + 5 * census.stderr:
            status = EXIT_BREACH
    if rows:
        write_csv(cfg["out"], rows, _manifest("wall-prob", cfg, seed=cfg["seed"]))
    return status


def cmd_scan(cfg: dict) -> int:
    from .circuit import FloquetCircuit, build_floquet
    from .walls import fragment_decomposition, localisation_length, scan_circuit

    if cfg["circuit"]:
        c = FloquetCircuit.from_json(Path(cfg["circuit"]).read_text())
    else:
        c = build_floquet(int(cfg["n"]), float(cfg["p"]), _require_seed(cfg))
    reports = scan_circuit(c, int(cfg["kmax"]))
    frag = fragment_decomposition(c)
    doc = {
        "n": c.n,
        "walls": [json.loads(r.to_json()) for r in reports],
        "unperturbed_walls": sum(r.unperturbed for r in reports),
        "fragments": frag.to_dict(),
        "mean_fragment_size": float(np.mean(frag.sizes)),
        "formula_localisation_length": localisation_length(c.p),
    }
    for r in reports:
        print(r.to_json())
    Path(cfg["out"]).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    print(f"{len(frag.fragments)} fragments, mean size {doc['mean_fragment_size']:.2f}")
    return 0


def cmd_entropy(cfg: dict) -> int:
    from .dense import entropy_experiment

    seed = _require_seed(cfg)
    tr = entropy_experiment(cfg["setup"], int(cfg["n"]), float(cfg["p"]), int(cfg["realizations"]),
                            int(cfg["tmax"]), seed)
    rows = []
    for t in range(tr.traces.shape[1]):
        col = tr.traces[:, t]
        fmt = (lambda x: int(round(x))) if tr.exact_integer else float
        rows.append({"t": t, "mean": float(col.mean()), "std": float(col.std()), "min": fmt(col.min()),
                     "max": fmt(col.max()), "n": tr.n, "p": tr.p, "setup": tr.setup,
                     "realizations": tr.traces.shape[0]})
    write_csv(cfg["out"], rows, _manifest("entropy", cfg, seed=seed, cut=tr.cut,
                                          path="stabilizer" if tr.exact_integer else "dense"))
    mean, std = tr.steady()
    print(f"steady <S> = {mean:.4f}, dS = {std:.4f}, max S = {tr.traces.max():.6f}")
    return 0


def cmd_sff(cfg: dict) -> int:
    from .dense import cue_reference, fragmentation_ansatz, sff_experiment

    seed = _require_seed(cfg)
    tr = sff_experiment(cfg["setup"], int(cfg["n"]), float(cfg["p"]), int(cfg["realizations"]),
                        int(cfg["tmax"]), seed, dt=int(cfg["dt"]))
    kc, dkc = cue_reference(tr.D, int(cfg["tmax"]))
    rows = [{"t": int(t), "K": float(tr.K[t]), "dK": float(tr.dK[t]), "K_smeared": float(tr.K_smeared[t]),
             "K_cue": float(kc[t]), "dK_cue": float(dkc[t]), "ansatz": float(fragmentation_ansatz(t))}
            for t in tr.t]
    write_csv(cfg["out"], rows, _manifest("sff", cfg, **{**tr.metadata, "seed": seed, "D": tr.D}))
    print(f"K(0) = {tr.K[0]:.0f}, D = {tr.D}")
    return 0


COMMANDS = {"wall-prob": cmd_wall_prob, "scan": cmd_scan, "entropy": cmd_entropy, "sff": cmd_sff}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fragmentia", description="Wall and fragmentation experiments.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("wall-prob", help="Monte Carlo / exact k-wall probabilities")
    p.add_argument("--k", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--exact", action="store_true")

    p2 = sub.add_parser("scan", help="walls and fragments of one circuit")
    p2.add_argument("--n", type=int)
    p2.add_argument("--p", type=float)
    p2.add_argument("--kmax", type=int)
    p2.add_argument("--circuit", help="circuit JSON instead of sampling")

    from .dense import SETUPS

    p3 = sub.add_parser("entropy", help="half-chain entanglement traces")
    p4 = sub.add_parser("sff", help="spectral form factor traces")
    for q in (p3, p4):
        q.add_argument("--setup", choices=SETUPS)
        q.add_argument("--n", type=int)
        q.add_argument("--p", type=float)
        q.add_argument("--realizations", type=int)
        q.add_argument("--tmax", type=int)
    p4.add_argument("--dt", type=int, help="smearing half-width")

    for q in (p, p2, p3, p4):
        q.add_argument("--seed", type=int)
        q.add_argument("--out")
        q.add_argument("--config", help="JSON run config; flags override it")
    return ap


def _thread_limit():
    from threadpoolctl import threadpool_limits

    n = os.environ.get("FRAGMENTIA_THREADS")
    return threadpool_limits(int(n)) if n else threadpool_limits(None)


def main(argv=None) -> int:
    from .dense import ResourceGuard

    args = build_parser().parse_args(argv)
    try:
        cfg = resolve_config(args.command, args)
        with _thread_limit():
            return COMMANDS[args.command](cfg)
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except ResourceGuard as e:
        print(f"resource guard: {e}", file=sys.stderr)
        return EXIT_RESOURCE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
