"""Experiment driver: signatures, word recovery, convergence studies, and
the reparametrization-invariant metric, from one reproducible command line.

Every subcommand reads an optional JSON config file (flat keys matching the
flag names; unknown keys rejected), applies explicit flags on top, runs
deterministically for a given seed, and records the resolved configuration
into its JSON outputs so artifacts are self-describing.  Report-style
subcommands render matplotlib figures next to the delimited output.

Exit codes: 0 success, 2 validation or configuration error, 3 computation
error (for example an ambiguous word recovery).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from .frechet import FrechetConfig, frechet_variant, mesh_oscillation
from .gaussian import GaussianModel, sample_path
from .lattice import CubeLattice, save_visit_record
from .paths import PiecewiseLinearPath, load_path, path_signature, save_csv
from .reconstruct import (APPROXIMATION_CONSTANT, ReconstructionConfig,
                          RecoveryError, convergence_study, reconstruct_path)
from .tensor import index_to_word

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_COMPUTE = 3

LEVEL_BUDGET = 20_000_000  # max total stored coefficients for cmd_signature


class ConfigError(Exception):
    pass


DEFAULTS: dict[str, dict] = {
    "signature": {"input": None, "model": None, "hurst": 0.5, "dim": 2,
                  "n_points": 512, "seed": 0, "level": 4, "out_dir": "out",
                  "figures": True},
    "recover": {"input": None, "model": None, "hurst": 0.5, "dim": 2,
                "n_points": 512, "seed": 0, "epsilon": 0.25,
                "delta_ratio": 10.0, "bounds": 3.0, "panels": 8,
                "max_word_length": 2000, "out_dir": "out", "figures": True},
    "converge": {"model": "fbm", "hurst": 0.5, "dim": 2, "n_points": 2048,
                 "seed": 0, "n_list": "4,8,16,32", "trials": 200,
                 "delta_ratio": 10.0, "threads": 1, "check_recovery": False,
                 "out_dir": "out", "figures": True},
    "metric": {"resolution": 512},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathsig",
        description="signature computation, cube-word recovery, convergence "
                    "studies and the reparametrization metric")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_model=True):
        p.add_argument("--config", type=Path, help="JSON config file")
        p.add_argument("--out-dir", dest="out_dir", help="output directory")
        p.add_argument("--seed", type=int)
        p.add_argument("--figures", action=argparse.BooleanOptionalAction,
                       default=None, help="render PNG figures")
        if with_model:
            p.add_argument("--model", choices=["fbm", "ou", "bridge"])
            p.add_argument("--hurst", type=float)
            p.add_argument("--dim", type=int)
            p.add_argument("--n-points", dest="n_points", type=int)

    p = sub.add_parser("signature", help="truncated signature of a path")
    add_common(p)
    p.add_argument("--input", help="path file (.csv or .json)")
    p.add_argument("--level", type=int)

    p = sub.add_parser("recover", help="recover the visited-cube word")
    add_common(p)
    p.add_argument("--input", help="path file (.csv or .json)")
    p.add_argument("--epsilon", type=float, help="lattice spacing")
    p.add_argument("--delta-ratio", dest="delta_ratio", type=float,
                   help="epsilon/delta ratio")
    p.add_argument("--bounds", type=float,
                   help="half-width of the candidate cube box")
    p.add_argument("--panels", type=int)
    p.add_argument("--max-word-length", dest="max_word_length", type=int)

    p = sub.add_parser("converge", help="polygonal approximation error study")
    add_common(p)
    p.add_argument("--n-list", dest="n_list",
                   help="comma-separated lattice refinements")
    p.add_argument("--trials", type=int)
    p.add_argument("--delta-ratio", dest="delta_ratio", type=float)
    p.add_argument("--threads", type=int,
                   help="parallel workers for Monte Carlo trials")
    p.add_argument("--check-recovery", dest="check_recovery",
                   action=argparse.BooleanOptionalAction, default=None)

    p = sub.add_parser("metric", help="Frechet-variant distance of two paths")
    p.add_argument("path_a")
    p.add_argument("path_b")
    p.add_argument("--config", type=Path)
    p.add_argument("--resolution", type=int)
    return parser


def resolve_config(args: argparse.Namespace) -> dict:
    """defaults < config file < explicit flags, with unknown keys rejected."""
    cfg = dict(DEFAULTS[args.command])
    if getattr(args, "config", None):
        try:
            with open(args.config) as fh:
                file_cfg = json.load(fh)
        except (OSError, json.JSONDecodeError) as err:
            raise ConfigError(f"cannot read config file: {err}") from err
        unknown = set(file_cfg) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg.update(file_cfg)
    for key in cfg:
        val = getattr(args, key, None)
        if val is not None:
            cfg[key] = val
    return cfg


def _input_path(cfg: dict) -> tuple[PiecewiseLinearPath, dict]:
    if cfg.get("input"):
        try:
            path, meta = load_path(cfg["input"])
        except (OSError, ValueError) as err:
            raise ConfigError(f"bad input path file: {err}") from err
        return path, {"source": str(cfg["input"]), **meta}
    if cfg.get("model"):
        model = _model_from(cfg)
        return sample_path(model), {"source": "sampled",
                                    "model": model.variant,
                                    "hurst": model.hurst,
                                    "seed": model.seed,
                                    "n_points": model.n_points}
    raise ConfigError("need either --input or --model")


def _model_from(cfg: dict) -> GaussianModel:
    try:
        return GaussianModel(variant=cfg["model"], dim=int(cfg["dim"]),
                             hurst=(float(cfg["hurst"])
                                    if cfg["model"] == "fbm" else None),
                             n_points=int(cfg["n_points"]),
                             seed=int(cfg["seed"]))
    except ValueError as err:
        raise ConfigError(str(err)) from err


def _out_dir(cfg: dict) -> Path:
    out = Path(cfg["out_dir"])
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_json(file: Path, payload: dict) -> None:
    with open(file, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def cmd_signature(cfg: dict) -> int:
    path, provenance = _input_path(cfg)
    level = int(cfg["level"])
    if level < 0:
        raise ConfigError("level must be >= 0")
    total = sum(path.dim**k for k in range(level + 1))
    if total > LEVEL_BUDGET:
        raise ConfigError(f"level {level} needs {total} coefficients, over "
                          f"the {LEVEL_BUDGET} budget")
    sig = path_signature(path, level)
    out = _out_dir(cfg)
    coeffs = {}
    for k in range(level + 1):
        for idx in range(path.dim**k):
            word = index_to_word(idx, k, path.dim)
            coeffs[",".join(map(str, word))] = float(sig.levels[k][idx])
    norms = sig.level_norms()
    _write_json(out / "signature.json", {
        "config": _jsonable(cfg), "provenance": provenance,
        "dim": path.dim, "level": level,
        "level_l2_norms": [float(v) for v in norms],
        "coefficients": coeffs,
    })
    for k, v in enumerate(norms):
        print(f"level {k}: {path.dim**k:5d} coefficients, l2 norm {v:.6g}")
    if cfg["figures"]:
        _figure_signature(sig, out / "signature.png")
    print(f"wrote {out / 'signature.json'}")
    return EXIT_OK


def cmd_recover(cfg: dict) -> int:
    path, provenance = _input_path(cfg)
    eps = float(cfg["epsilon"])
    lattice = CubeLattice(eps, eps / float(cfg["delta_ratio"]))
    rconfig = ReconstructionConfig(
        lattice=lattice, max_word_length=int(cfg["max_word_length"]),
        bounds=(-float(cfg["bounds"]), float(cfg["bounds"])),
        panels=int(cfg["panels"]))
    result = reconstruct_path(path, rconfig)
    out = _out_dir(cfg)
    save_visit_record(result.visit, out / "visit.json")
    save_csv(result.polygonal, out / "polygonal.csv")
    _write_json(out / "recovery.json", {
        "config": _jsonable(cfg), "provenance": provenance,
        "recovered_word": [list(z) for z in result.recovered_word],
        "agreement": result.agreement,
        "ambiguous": result.ambiguous,
        "competing": [[list(z) for z in w] for w in result.competing[:10]],
        "prefix_log10_values": list(result.prefix_log10_values),
        "sup_error": result.sup_error,
        "bound": result.bound,
    })
    if cfg["figures"]:
        _figure_recover(path, result.polygonal, out / "recover.png")
    print(f"visits={result.visit.count} recovered_len={len(result.recovered_word) - 1} "
          f"agreement={result.agreement} sup_error={result.sup_error:.6g} "
          f"bound={result.bound:.6g}")
    if result.ambiguous:
        print(f"AMBIGUOUS recovery: {len(result.competing)} competing "
              f"candidate(s); see recovery.json", file=sys.stderr)
        return EXIT_COMPUTE
    return EXIT_OK


def cmd_converge(cfg: dict) -> int:
    model = _model_from(cfg)
    try:
        n_list = [int(tok) for tok in str(cfg["n_list"]).split(",") if tok]
    except ValueError as err:
        raise ConfigError(f"bad n_list: {cfg['n_list']}") from err
    if not n_list:
        raise ConfigError("n_list is empty")
    result = convergence_study(model, n_list, trials=int(cfg["trials"]),
                               seed=int(cfg["seed"]),
                               delta_ratio=float(cfg["delta_ratio"]),
                               check_recovery=bool(cfg["check_recovery"]),
                               workers=int(cfg["threads"]))
    out = _out_dir(cfg)
    result.to_csv(out / "study.csv")
    summary = result.summary()
    _write_json(out / "summary.json", {"config": _jsonable(cfg),
                                       "per_n": summary})
    for n, row in summary.items():
        print(f"n={n:>4} epsilon={row['epsilon']:.6g} "
              f"median={row['median_sup_error']:.6g} bound={row['bound']:.6g} "
              f"violations={row['violation_fraction']:.1%}")
    if cfg["figures"]:
        _figure_convergence(summary, out / "convergence.png")
    print(f"wrote {out / 'study.csv'}")
    return EXIT_OK


def cmd_metric(cfg: dict, args: argparse.Namespace) -> int:
    try:
        a, _ = load_path(args.path_a)
        b, _ = load_path(args.path_b)
    except (OSError, ValueError) as err:
        raise ConfigError(f"bad input path file: {err}") from err
    if a.dim != b.dim:
        raise ConfigError(f"dimension mismatch: {a.dim} vs {b.dim}")
    resolution = int(cfg["resolution"])
    fc = FrechetConfig(resolution=resolution)
    value = frechet_variant(a, b, fc)
    osc = max(mesh_oscillation(a, resolution), mesh_oscillation(b, resolution))
    print(f"frechet_distance={value:.10g} resolution={resolution} "
          f"mesh_oscillation={osc:.4g}")
    return EXIT_OK


def _jsonable(cfg: dict) -> dict:
    return {k: (str(v) if isinstance(v, Path) else v) for k, v in cfg.items()}


# -- figures -------------------------------------------------------------------

def _figure_signature(sig, file: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6, 4))
    norms = sig.level_norms()
    ax.bar(range(len(norms)), np.maximum(norms, 1e-300))
    ax.set_yscale("log")
    ax.set_xlabel("level")
    ax.set_ylabel("l2 norm of coefficients")
    ax.set_title("signature level magnitudes")
    fig.tight_layout()
    fig.savefig(file, dpi=120)
    plt.close(fig)


def _figure_recover(path, polygonal, file: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    fig, ax = plt.subplots(figsize=(6, 6))
    if path.dim == 2:
        ax.plot(path.points[:, 0], path.points[:, 1], lw=0.7,
                color="steelblue", label="path")
        ax.plot(polygonal.points[:, 0], polygonal.points[:, 1], "o-",
                ms=3, lw=1.2, color="crimson", label="polygonal")
        ax.plot([0], [0], "ks", ms=6)
        ax.set_aspect("equal")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
    else:
        for i in range(path.dim):
            ax.plot(path.times, path.points[:, i], lw=0.7,
                    label=f"x{i + 1}")
            ax.plot(polygonal.times, polygonal.points[:, i], "--", lw=1.2)
        ax.set_xlabel("t")
    ax.legend()
    ax.set_title("path and recovered polygonal approximation")
    fig.tight_layout()
    fig.savefig(file, dpi=120)
    plt.close(fig)


def _figure_convergence(summary: dict, file: Path) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    ns = sorted(int(n) for n in summary)
    eps = [summary[str(n)]["epsilon"] for n in ns]
    med = [summary[str(n)]["median_sup_error"] for n in ns]
    q10 = [summary[str(n)]["q10_sup_error"] for n in ns]
    q90 = [summary[str(n)]["q90_sup_error"] for n in ns]
    bound = [summary[str(n)]["bound"] for n in ns]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.fill_between(eps, q10, q90, alpha=0.25, color="steelblue",
                    label="10-90% range")
    ax.plot(eps, med, "o-", color="steelblue", label="median sup error")
    ax.plot(eps, bound, "k--", label=f"bound {APPROXIMATION_CONSTANT:g} sqrt(d) eps")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("epsilon = 1/n")
    ax.set_ylabel("sup error")
    ax.legend()
    ax.set_title("polygonal approximation error vs lattice refinement")
    fig.tight_layout()
    fig.savefig(file, dpi=120)
    plt.close(fig)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = resolve_config(args)
        if args.command == "signature":
            return cmd_signature(cfg)
        if args.command == "recover":
            return cmd_recover(cfg)
        if args.command == "converge":
            return cmd_converge(cfg)
        return cmd_metric(cfg, args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (RecoveryError, ValueError) as err:
        print(f"computation error: {err}", file=sys.stderr)
        return EXIT_COMPUTE


if __name__ == "__main__":
    sys.exit(main())
