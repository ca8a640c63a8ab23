"""Command-line front end: ``kickedtops <command> [options]``.

Each command resolves a run configuration (defaults < ``--config`` JSON file
< explicit flags), writes its data files into ``--out`` together with
``run.json`` (resolved config, config hash, package version), and exits with
0 on success, 2 on a configuration error and 3 on a numerical failure. A
failed run leaves a ``FAILED`` marker file next to any partial output.

Angles accept decimals or rational multiples of pi: ``pi/2``, ``3pi/2``,
``53*pi/30``. ``--alpha`` also accepts plain fractions such as ``3/2``.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
import traceback
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .export import config_hash, write_csv, write_json, write_pgm

__all__ = ["main", "parse_angle", "parse_grid", "parse_window", "ConfigError", "resolve_config"]

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3


class ConfigError(ValueError):
    """Invalid run configuration; the message names the offending field."""


_ANGLE_RE = re.compile(r"^\s*([+-]?)\s*(\d*\.?\d*)?\s*\*?\s*(pi|π)?\s*(?:/\s*(\d+\.?\d*))?\s*$")


def parse_angle(text, field="angle") -> float:
    """Parse ``pi/2``, ``-3pi/4``, ``53*pi/30``, ``3/2`` or ``1.5``."""
    if isinstance(text, (int, float)):
        return float(text)
    s = str(text).strip().lower()
    m = _ANGLE_RE.match(s)
    if not m or not (m.group(2) or m.group(3)):
        raise ConfigError(f"{field}: cannot parse {text!r}")
    sign, num, pi, den = m.groups()
    value = float(Fraction(num)) if num else 1.0
    if pi:
        value *= np.pi
    if den:
        if float(den) == 0:
            raise ConfigError(f"{field}: division by zero in {text!r}")
        value /= float(den)
    return -value if sign == "-" else value


def parse_grid(text, field="grid") -> tuple[int, int]:
    if isinstance(text, (list, tuple)):
        a, b = text
    else:
        parts = re.split(r"[x×,]", str(text).lower())
        if len(parts) != 2:
            raise ConfigError(f"{field}: expected NxM, got {text!r}")
        a, b = parts
    try:
        a, b = int(a), int(b)
    except ValueError as exc:
        raise ConfigError(f"{field}: expected integers in {text!r}") from exc
    if a < 2 or b < 1:
        raise ConfigError(f"{field}: grid too small ({a}x{b})")
    return a, b


def parse_window(text, field="window") -> tuple[int, int]:
    if isinstance(text, (list, tuple)):
        lo, hi = text
    else:
        parts = str(text).split(":")
        if len(parts) != 2:
            raise ConfigError(f"{field}: expected LO:HI, got {text!r}")
        lo, hi = parts
    try:
        lo, hi = int(lo), int(hi)
    except ValueError as exc:
        raise ConfigError(f"{field}: expected integers in {text!r}") from exc
    if lo < 0 or hi < lo:
        raise ConfigError(f"{field}: empty window {lo}:{hi}")
    return lo, hi


def _parse_state(text, field="initial"):
    """``coherent:DTHETA,DPHI`` | ``basis:M`` | ``eigen:K``."""
    kind, _, rest = str(text).partition(":")
    kind = kind.strip().lower()
    if kind == "coherent":
        parts = rest.split(",")
        if len(parts) != 2:
            raise ConfigError(f"{field}: expected coherent:DTHETA,DPHI")
        return ("coherent", parse_angle(parts[0], field), parse_angle(parts[1], field))
    if kind == "basis":
        try:
            return ("basis", float(Fraction(rest.strip())))
        except ValueError as exc:
            raise ConfigError(f"{field}: bad m_J in {text!r}") from exc
    if kind == "eigen":
        try:
            return ("eigen", int(rest))
        except ValueError as exc:
            raise ConfigError(f"{field}: bad eigenstate index in {text!r}") from exc
    raise ConfigError(f"{field}: unknown state kind {kind!r}")


DEFAULTS = {
    "alpha": "3/2",
    "beta": "pi/2",
    "J": 150,
    "m_f": 0,
    "seed": 0,
    "window": "300:320",
    "threads": None,
    "pgm": False,
}

COMMAND_DEFAULTS = {
    "poincare": {"grid": "10x10", "steps": 1000},
    "lyapunov-map": {"grid": "40x40", "steps": 2000, "threshold": 0.05},
    "eigensystem": {"with_entanglement": False, "spacing": False, "save_matrix": False},
    "husimi": {"grid": "100x100", "state": "eigen:0"},
    "features": {"grid": "100x100", "filter_config": None},
    "ent-history": {"initial": "coherent:pi/2,pi/3", "n_max": 320},
    "ent-map": {"grid": "61x61", "with_labels": False, "steps": 2000, "threshold": 0.05},
    "typical": {"kind": "UE", "d": 301, "d2": None},
    "mc": {"kind": "UE", "d": 301, "samples": 10000, "functional": "entropy", "subspace": "full",
           "filter_config": None},
}


def resolve_config(command: str, args: dict) -> dict:
    """Merge defaults, an optional JSON config file and explicit flags; validate."""
    cfg = dict(DEFAULTS)
    cfg.update(COMMAND_DEFAULTS[command])
    path = args.get("config")
    if path:
        try:
            file_cfg = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"config: cannot read {path}: {exc}") from exc
        unknown = set(file_cfg) - set(cfg) - {"command", "out"}
        if unknown:
            raise ConfigError(f"{sorted(unknown)[0]}: unknown field in config file")
        cfg.update({k: v for k, v in file_cfg.items() if k != "command"})
    for k, v in args.items():
        if v is not None and k not in ("config", "func"):
            cfg[k] = v
    cfg["command"] = command

    out = {"command": command, "out": str(cfg.get("out") or f"out/{command}")}
    out["alpha"] = parse_angle(cfg["alpha"], "alpha")
    out["beta"] = parse_angle(cfg["beta"], "beta")
    try:
        out["J"] = float(Fraction(str(cfg["J"])))
        out["m_f"] = float(Fraction(str(cfg["m_f"])))
    except ValueError as exc:
        raise ConfigError(f"J: {exc}") from exc
    if out["J"] <= 0 or (2 * out["J"]) % 1:
        raise ConfigError(f"J: must be a positive integer or half-integer, got {cfg['J']}")
    if out["J"].is_integer():
        out["J"] = int(out["J"])
    out["seed"] = int(cfg["seed"])
    out["window"] = list(parse_window(cfg["window"]))
    out["threads"] = cfg["threads"]
    out["pgm"] = bool(cfg["pgm"])
    for key in COMMAND_DEFAULTS[command]:
        out[key] = cfg[key]
    if "grid" in out:
        out["grid"] = list(parse_grid(out["grid"]))
    for key in ("steps", "n_max", "samples", "d"):
        if key in out:
            try:
                out[key] = int(out[key])
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"{key}: expected an integer, got {out[key]!r}") from exc
            if out[key] < 1:
                raise ConfigError(f"{key}: must be positive")
    if command == "lyapunov-map" and out["steps"] < 100:
        raise ConfigError("steps: Lyapunov estimates need at least 100 steps")
    if command == "mc" and out["samples"] < 2:
        raise ConfigError("samples: need at least 2")
    if "kind" in out and str(out["kind"]).upper() not in ("UE", "OE"):
        raise ConfigError(f"kind: must be UE or OE, got {out['kind']!r}")
    if "kind" in out:
        out["kind"] = str(out["kind"]).upper()
    if "state" in out:
        _parse_state(out["state"], "state")
    if "initial" in out:
        _parse_state(out["initial"], "initial")
    if command == "ent-history" and out["n_max"] < out["window"][1]:
        out["window"] = [min(out["window"][0], out["n_max"]), out["n_max"]]
    if command == "mc" and out["subspace"] not in ("full", "chaotic"):
        raise ConfigError(f"subspace: must be 'full' or 'chaotic', got {out['subspace']!r}")
    return out


# ---------------------------------------------------------------- commands

def _floquet(cfg):
    from .floquet import floquet_system

    return floquet_system(cfg["J"], cfg["alpha"], cfg["beta"], cfg["m_f"])


def _filter_config(cfg):
    from .filtering import FilterConfig

    return FilterConfig.from_json(cfg["filter_config"]) if cfg.get("filter_config") else FilterConfig()


def cmd_poincare(cfg, out, meta):
    from .classical import ClassicalMapParams, poincare_section, section_grid

    n_fz, n_phi = cfg["grid"]
    fz, phi, _ = section_grid(n_fz, n_phi)
    orbits = poincare_section(ClassicalMapParams(cfg["alpha"], cfg["beta"]), np.column_stack([fz, phi]),
                              cfg["steps"])
    rows = ((i, n, orbits[i, n, 0], orbits[i, n, 1])
            for i in range(orbits.shape[0]) for n in range(orbits.shape[1]))
    write_csv(out / "orbits.csv", ["orbit_id", "step", "delta_fz", "delta_phi"], rows, meta)
    if cfg["pgm"]:
        hist, _, _ = np.histogram2d(orbits[..., 0].ravel(), orbits[..., 1].ravel(), bins=(200, 200),
                                    range=[[-2, 2], [0, 2 * np.pi]])
        write_pgm(out / "orbits.pgm", np.log1p(hist[::-1]))
    return {"n_orbits": orbits.shape[0], "steps": cfg["steps"]}


def cmd_lyapunov_map(cfg, out, meta):
    from .classical import ClassicalMapParams, classify_grid, section_grid

    fz, phi, w = section_grid(*cfg["grid"])
    res = classify_grid(ClassicalMapParams(cfg["alpha"], cfg["beta"]), fz, phi, w,
                        threshold=float(cfg["threshold"]), n_steps=cfg["steps"])
    rows = zip(res.delta_fz, res.delta_phi, res.lyapunov, res.chaotic.astype(int))
    write_csv(out / "lyapunov_grid.csv", ["delta_fz", "delta_phi", "lyapunov", "chaotic"], rows,
              {**meta, "weight_per_point": "%.15g" % w[0]})
    if cfg["pgm"]:
        write_pgm(out / "lyapunov_grid.pgm", res.lyapunov.reshape(cfg["grid"])[::-1].clip(0))
    return {"chaotic_fraction": res.chaotic_fraction}


def cmd_eigensystem(cfg, out, meta):
    from .ensembles import typical_entanglement_oe
    from .entanglement import eigenstate_entanglement
    from .floquet import spacing_diagnostic, time_reversal_residual

    system = _floquet(cfg)
    probs = np.abs(system.eigenvectors) ** 2
    ent = eigenstate_entanglement(system)
    m_labels = [f"p_m{m:g}" for m in system.spec.m_j]
    header = ["k", "phase"] + (["E"] if cfg["with_entanglement"] else []) + m_labels
    rows = ([k, system.eigenphases[k]] + ([ent[k]] if cfg["with_entanglement"] else []) + list(probs[:, k])
            for k in range(system.dimension))
    write_csv(out / "eigensystem.csv", header, rows, meta)
    summary = {
        "dimension": system.dimension,
        "unitarity_residual": system.unitarity_residual(),
        "max_eigen_residual": float(system.eigen_residuals().max()),
        "time_reversal_residual": time_reversal_residual(system),
    }
    if cfg["with_entanglement"]:
        summary["mean_eigenstate_entanglement"] = float(ent.mean())
        summary["oe_reference"] = typical_entanglement_oe(system.dimension)
    if cfg["spacing"]:
        summary["spacing_ks"] = spacing_diagnostic(system)["ks"]
    if cfg["save_matrix"]:
        np.save(out / "floquet_matrix.npy", np.asarray(system.matrix))
    write_json(out / "summary.json", summary)
    return summary


def _state_from(cfg, key, system=None):
    from .angular import SubspaceSpec
    from .states import SubspaceState, projected_coherent

    spec = SubspaceSpec.equal(cfg["J"], cfg["m_f"])
    kind = _parse_state(cfg[key], key)
    if kind[0] == "coherent":
        return projected_coherent(spec, kind[1], kind[2])
    if kind[0] == "basis":
        return SubspaceState.basis(spec, kind[1])
    if system is None:
        system = _floquet(cfg)
    if not 0 <= kind[1] < system.dimension:
        raise ConfigError(f"{key}: eigenstate index {kind[1]} out of range")
    return SubspaceState(spec, system.eigenvectors[:, kind[1]])


def cmd_husimi(cfg, out, meta):
    from .states import PhaseSpaceGrid, husimi, husimi_entropy

    grid = PhaseSpaceGrid.cells(*cfg["grid"])
    state = _state_from(cfg, "state")
    Q = husimi(state, grid)
    write_csv(out / "husimi.csv", ["delta_theta", "delta_phi", "Q"],
              zip(grid.delta_theta, grid.delta_phi, Q), meta)
    if cfg["pgm"]:
        write_pgm(out / "husimi.pgm", Q.reshape(grid.shape)[::-1])
    return {"s_q": husimi_entropy(Q, grid)}


def cmd_features(cfg, out, meta):
    from .filtering import classify_eigenstates, eigenstate_features, label_counts
    from .states import PhaseSpaceGrid

    system = _floquet(cfg)
    feats = classify_eigenstates(eigenstate_features(system, PhaseSpaceGrid.cells(*cfg["grid"])),
                                 _filter_config(cfg))
    write_csv(out / "features.csv", ["k", "phase", "s_q", "jz", "E_eigenstate", "label"],
              ((f.k, f.phase, f.s_q, f.jz, f.entanglement, f.label) for f in feats), meta)
    return {"counts": label_counts(feats)}


def cmd_ent_history(cfg, out, meta):
    from .entanglement import entanglement_history, long_time_average
    from .ensembles import typical_entanglement_ue

    system = _floquet(cfg)
    state = _state_from(cfg, "initial", system)
    hist = entanglement_history(system, state, cfg["n_max"], label=cfg["initial"])
    write_csv(out / "history.csv", ["n", "E"], zip(hist.steps, hist.series), meta)
    summary = {"long_time_average": long_time_average(hist, cfg["window"]),
               "window": cfg["window"], "ue_reference": typical_entanglement_ue(system.dimension)}
    write_json(out / "summary.json", summary)
    return summary


def cmd_ent_map(cfg, out, meta):
    from .classical import ClassicalMapParams, classify_grid
    from .entanglement import entanglement_map
    from .states import PhaseSpaceGrid

    system = _floquet(cfg)
    grid = PhaseSpaceGrid.nodes(*cfg["grid"])
    emap = entanglement_map(system, grid, tuple(cfg["window"]))
    summary = {"weighted_mean": emap.weighted_mean(), "std": float(emap.values.std())}
    header = ["delta_theta", "delta_phi", "E_avg"]
    cols = [grid.delta_theta, grid.delta_phi, emap.values]
    if cfg["with_labels"]:
        labels = classify_grid(ClassicalMapParams(cfg["alpha"], cfg["beta"]), grid.delta_fz, grid.delta_phi,
                               grid.weights, threshold=float(cfg["threshold"]), n_steps=cfg["steps"])
        emap.chaotic = labels.chaotic
        header.append("chaotic")
        cols.append(labels.chaotic.astype(int))
        if labels.chaotic.any():
            summary["chaotic_weighted_mean"] = emap.weighted_mean(labels.chaotic)
        if (~labels.chaotic).any():
            summary["regular_weighted_mean"] = emap.weighted_mean(~labels.chaotic)
        summary["chaotic_fraction"] = labels.chaotic_fraction
    write_csv(out / "ent_map.csv", header, zip(*cols), meta)
    if cfg["pgm"]:
        write_pgm(out / "ent_map.pgm", emap.as_image()[::-1])
    write_json(out / "summary.json", summary)
    return summary


def cmd_typical(cfg, out, meta):
    from .ensembles import (typical_entanglement_full, typical_entanglement_oe, typical_entanglement_ue,
                            typical_linear_entropy)

    d = cfg["d"]
    res = {"kind": cfg["kind"], "d": d,
           "entropy": typical_entanglement_ue(d) if cfg["kind"] == "UE" else typical_entanglement_oe(d),
           "linear_entropy": typical_linear_entropy(cfg["kind"], d)}
    if cfg.get("d2"):
        d2 = int(cfg["d2"])
        if d2 < d:
            raise ConfigError("d2: must be >= d for the full-space average")
        res["full_space_entropy"] = typical_entanglement_full(d, d2)
    write_json(out / "typical.json", res)
    print("%.6f" % res["entropy"])
    return res


def cmd_mc(cfg, out, meta):
    from .ensembles import EnsembleSpec, mc_average
    from .filtering import chaotic_subspace, classify_eigenstates, eigenstate_features

    if cfg["subspace"] == "chaotic":
        system = _floquet(cfg)
        feats = classify_eigenstates(eigenstate_features(system), _filter_config(cfg))
        basis = chaotic_subspace(system, feats)
        spec = EnsembleSpec.from_subspace(cfg["kind"], basis, cfg["seed"],
                                          label=f"chaotic_a{cfg['alpha']:.6g}_b{cfg['beta']:.6g}_J{cfg['J']}")
    else:
        spec = EnsembleSpec(cfg["kind"], cfg["d"], seed=cfg["seed"])
    report = mc_average(spec, cfg["functional"], cfg["samples"])
    res = report.to_json_dict()
    write_json(out / "report.json", res)
    return res


COMMANDS = {
    "poincare": cmd_poincare,
    "lyapunov-map": cmd_lyapunov_map,
    "eigensystem": cmd_eigensystem,
    "husimi": cmd_husimi,
    "features": cmd_features,
    "ent-history": cmd_ent_history,
    "ent-map": cmd_ent_map,
    "typical": cmd_typical,
    "mc": cmd_mc,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="kickedtops", description="Kicked coupled-tops experiments.")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON file with run settings (flags override it)")
        p.add_argument("--out", help="output directory (default out/<command>)")
        p.add_argument("--alpha")
        p.add_argument("--beta")
        p.add_argument("--J", dest="J")
        p.add_argument("--m-f", dest="m_f")
        p.add_argument("--seed", type=int)
        p.add_argument("--window", help="LO:HI averaging window")
        p.add_argument("--threads", type=int, help="cap on BLAS threads")
        p.add_argument("--pgm", action="store_true", default=None, help="also write PGM heatmaps")
        opts = COMMAND_DEFAULTS[name]
        if "grid" in opts:
            p.add_argument("--grid", help="NxM")
        if "steps" in opts:
            p.add_argument("--steps", type=int)
        if "threshold" in opts:
            p.add_argument("--threshold", type=float)
        if "with_entanglement" in opts:
            p.add_argument("--with-entanglement", action="store_true", default=None)
            p.add_argument("--spacing", action="store_true", default=None)
            p.add_argument("--save-matrix", action="store_true", default=None)
        if "with_labels" in opts:
            p.add_argument("--with-labels", action="store_true", default=None)
        if "state" in opts:
            p.add_argument("--state", help="eigen:K | coherent:DTHETA,DPHI | basis:M")
        if "initial" in opts:
            p.add_argument("--initial", help="coherent:DTHETA,DPHI | basis:M | eigen:K")
            p.add_argument("--n-max", dest="n_max", type=int)
        if "filter_config" in opts:
            p.add_argument("--filter-config", dest="filter_config")
        if "kind" in opts:
            p.add_argument("--kind")
            p.add_argument("--d", type=int)
        if "d2" in opts:
            p.add_argument("--d2", type=int)
        if "samples" in opts:
            p.add_argument("--samples", type=int)
            p.add_argument("--functional", choices=["entropy", "linear_entropy"])
            p.add_argument("--subspace", choices=["full", "chaotic"])
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    ns = ap.parse_args(argv)
    args = vars(ns)
    command = args.pop("command")
    out = None
    try:
        cfg = resolve_config(command, args)
        out = Path(cfg["out"])
        out.mkdir(parents=True, exist_ok=True)
        (out / "FAILED").unlink(missing_ok=True)
        digest = config_hash({k: v for k, v in cfg.items() if k not in ("out", "threads")})
        meta = {"config_hash": digest, "command": command}
        write_json(out / "run.json", {"config": cfg, "config_hash": digest, "version": __version__,
                                      "status": "running"})
        if cfg["threads"]:
            from threadpoolctl import threadpool_limits

            with threadpool_limits(limits=int(cfg["threads"])):
                result = COMMANDS[command](cfg, out, meta)
        else:
            result = COMMANDS[command](cfg, out, meta)
        write_json(out / "run.json", {"config": cfg, "config_hash": digest, "version": __version__,
                                      "status": "ok", "result": result})
        return EXIT_OK
    except ConfigError as exc:
        print(f"kickedtops {command}: configuration error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    except (ArithmeticError, np.linalg.LinAlgError, RuntimeError) as exc:
        print(f"kickedtops {command}: numerical failure: {exc}", file=sys.stderr)
        traceback.print_exc(file=sys.stderr)
        code = EXIT_NUMERIC
    except ValueError as exc:
        print(f"kickedtops {command}: configuration error: {exc}", file=sys.stderr)
        code = EXIT_CONFIG
    if out is None and args.get("out"):
        out = Path(args["out"])
        out.mkdir(parents=True, exist_ok=True)
    if out is not None:
        (out / "FAILED").write_text(f"exit code {code}\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
