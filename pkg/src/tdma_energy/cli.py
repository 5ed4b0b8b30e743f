"""Command-line front end.

Every command reads one JSON configuration document. Physical units are
converted here and nowhere else: an SNR in dB becomes the normalized mean
gain ``10**(snr_db / 10)``, a physical mean gain is divided by ``N0 B``, and
rates given in bits/s are divided by the bandwidth.

Exit codes: 0 success, 1 configuration error, 2 infeasible target,
3 solver did not converge.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Sequence

import jsonschema
import numpy as np

from . import __version__, amc, experiments, indiv, wsum
from .channel import RNG_NAME, ChannelModel, Constant, Discrete, FadingState, RayleighPower, sample_states
from .costreward import Infinite, UserProfile, build_envelope, regularize_costs
from .wsum import ConvergenceError, InfeasibleError

log = logging.getLogger(__name__)

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NOT_CONVERGED = 0, 1, 2, 3

_POS = {"type": "number", "exclusiveMinimum": 0}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "users": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "properties": {
                    "w": _POS,
                    "mu": {"type": "number", "minimum": 0},
                    "snr_db": {"type": "number"},
                    "mean_gain": _POS,
                    "fading": {"enum": ["rayleigh", "constant"]},
                    "discrete": {
                        "type": "array",
                        "minItems": 1,
                        "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                    },
                    "codebook": {
                        "oneOf": [
                            {
                                "type": "object",
                                "properties": {"kind": {"const": "infinite"}},
                                "required": ["kind"],
                                "additionalProperties": False,
                            },
                            {
                                "type": "object",
                                "properties": {
                                    "kind": {"const": "amc"},
                                    "modes": {
                                        "type": "array",
                                        "minItems": 1,
                                        "items": {
                                            "type": "object",
                                            "properties": {"rho": _POS, "p": _POS},
                                            "required": ["rho", "p"],
                                            "additionalProperties": False,
                                        },
                                    },
                                },
                                "required": ["kind", "modes"],
                                "additionalProperties": False,
                            },
                            {
                                "type": "object",
                                "properties": {
                                    "kind": {"const": "qam"},
                                    "sizes": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                                    "sep": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
                                },
                                "required": ["kind", "sizes", "sep"],
                                "additionalProperties": False,
                            },
                        ]
                    },
                },
                "oneOf": [
                    {"required": ["snr_db"], "not": {"anyOf": [{"required": ["mean_gain"]}, {"required": ["discrete"]}]}},
                    {"required": ["mean_gain"], "not": {"anyOf": [{"required": ["snr_db"]}, {"required": ["discrete"]}]}},
                    {"required": ["discrete"], "not": {"anyOf": [{"required": ["snr_db"]}, {"required": ["mean_gain"]}]}},
                ],
            },
        },
        "constraint": {
            "type": "object",
            "minProperties": 1,
            "maxProperties": 1,
            "additionalProperties": False,
            "properties": {
                "weighted_sum": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"rate": _POS, "w": {"type": "array", "items": _POS}},
                    "required": ["rate"],
                },
                "individual": {
                    "type": "object",
                    "additionalProperties": False,
                    "properties": {"rates": {"type": "array", "items": _POS, "minItems": 1}},
                    "required": ["rates"],
                },
            },
        },
        "rate_unit": {"enum": ["bits/s/Hz", "bits/s"]},
        "bandwidth_hz": _POS,
        "noise_density": _POS,
        "samples": {"type": "integer", "minimum": 1},
        "seed": {"type": "integer", "minimum": 0},
        "tau0": {"type": "number", "minimum": 0, "maximum": 1},
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "rate": _POS,
                "individual": _POS,
                "max_iter": {"type": "integer", "minimum": 1},
                "max_outer": {"type": "integer", "minimum": 1},
            },
        },
        "order": {"enum": ["gauss-seidel", "jacobi"]},
        "state": {"type": "array", "items": _POS, "minItems": 1},
        "directions": {"type": "integer", "minimum": 2},
        "ratios": {"type": "array", "items": _POS, "minItems": 1},
        "qam": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "sizes": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
                "sep": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            },
            "required": ["sizes", "sep"],
        },
        "out": {"type": "string"},
    },
}

_DEFAULTS = {
    "rate_unit": "bits/s/Hz",
    "samples": 10000,
    "seed": 0,
    "tau0": 0.5,
    "order": "gauss-seidel",
    "directions": 33,
}


class ConfigError(ValueError):
    pass


# --------------------------------------------------------------------------
# configuration


def load_config(path: str | Path | None) -> dict:
    if path is None:
        return {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON ({exc.msg})") from exc
    return validate_config(cfg)


def validate_config(cfg: dict) -> dict:
    try:
        jsonschema.validate(cfg, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise ConfigError(f"config field {where}: {exc.message}") from exc
    out = dict(_DEFAULTS)
    out.update(cfg)
    k_users = len(cfg.get("users", []))
    cons = cfg.get("constraint", {})
    if "individual" in cons and len(cons["individual"]["rates"]) != k_users:
        raise ConfigError("config field constraint/individual/rates: need one rate per user")
    if "weighted_sum" in cons and "w" in cons["weighted_sum"] and len(cons["weighted_sum"]["w"]) != k_users:
        raise ConfigError("config field constraint/weighted_sum/w: need one weight per user")
    if "state" in cfg and len(cfg["state"]) != k_users:
        raise ConfigError("config field state: need one gain per user")
    if out["rate_unit"] == "bits/s" and "bandwidth_hz" not in cfg:
        raise ConfigError("config field bandwidth_hz: required when rates are given in bits/s")
    return out


def _require(cfg: dict, *keys: str) -> None:
    for k in keys:
        if k not in cfg:
            raise ConfigError(f"config field {k}: required by this command")


def _codebook(spec: dict | None):
    if spec is None or spec["kind"] == "infinite":
        return Infinite()
    try:
        if spec["kind"] == "amc":
            return amc.table_from_json(spec["modes"])
        return amc.build_mode_table(amc.QamSpec(tuple(spec["sizes"]), spec["sep"]))
    except ValueError as exc:
        raise ConfigError(f"config field codebook: {exc}") from exc


def build_profiles(cfg: dict) -> list[UserProfile]:
    profiles = []
    for u in cfg["users"]:
        profiles.append(UserProfile(w=u.get("w", 1.0), mu=u.get("mu", 1.0), codebook=_codebook(u.get("codebook"))))
    kinds = {p.codebook.kind for p in profiles}
    if len(kinds) != 1:
        raise ConfigError("config field users: all users must share one codebook kind")
    if kinds == {"infinite"}:
        profiles = regularize_costs(profiles)
    return profiles


def mean_gain(cfg: dict, user: dict) -> float:
    """Noise-normalized mean gain of one user."""
    if "snr_db" in user:
        return 10.0 ** (user["snr_db"] / 10.0)
    g = float(user["mean_gain"])
    if "noise_density" in cfg:
        _require(cfg, "bandwidth_hz")
        g /= cfg["noise_density"] * cfg["bandwidth_hz"]
    return g


def build_model(cfg: dict) -> ChannelModel:
    dists = []
    for u in cfg["users"]:
        try:
            if "discrete" in u:
                dists.append(Discrete(tuple((g, p) for g, p in u["discrete"])))
            elif u.get("fading", "rayleigh") == "constant":
                dists.append(Constant(mean_gain(cfg, u)))
            else:
                dists.append(RayleighPower(mean_gain(cfg, u)))
        except ValueError as exc:
            raise ConfigError(f"config field users: {exc}") from exc
    return ChannelModel(tuple(dists))


def _rate(cfg: dict, r: float) -> float:
    return r / cfg["bandwidth_hz"] if cfg["rate_unit"] == "bits/s" else r


def build_constraint(cfg: dict):
    _require(cfg, "constraint")
    cons = cfg["constraint"]
    if "weighted_sum" in cons:
        ws = cons["weighted_sum"]
        return experiments.WeightedSum(_rate(cfg, ws["rate"]), tuple(ws["w"]) if "w" in ws else None)
    return experiments.Individual(tuple(_rate(cfg, r) for r in cons["individual"]["rates"]))


def _solver_kw(cfg: dict, constraint) -> dict:
    tol = cfg.get("tolerances", {})
    if isinstance(constraint, experiments.WeightedSum):
        kw = {"tau0": cfg["tau0"]}
        if "rate" in tol:
            kw["tol"] = tol["rate"]
        if "max_iter" in tol:
            kw["max_iter"] = tol["max_iter"]
        return kw
    kw = {"order": cfg["order"]}
    if "individual" in tol:
        kw["tol"] = tol["individual"]
    if "max_outer" in tol:
        kw["max_outer"] = tol["max_outer"]
    return kw


# --------------------------------------------------------------------------
# output helpers


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True, default=_json_default) + "\n"


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"cannot serialize {type(x).__name__}")


def _finite(obj):
    """Replace non-finite floats so the payload stays strict JSON."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return "inf" if obj > 0 else ("-inf" if obj < 0 else "nan")
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def _manifest(command: str, cfg: dict, args, started: float) -> dict:
    canon = json.dumps(cfg, sort_keys=True).encode()
    return {
        "command": command,
        "version": __version__,
        "config_sha256": hashlib.sha256(canon).hexdigest(),
        "seed": cfg.get("seed"),
        "samples": cfg.get("samples"),
        "rng": RNG_NAME,
        "tolerances": cfg.get("tolerances", {}),
        "threads": args.threads,
        "wall_time_s": round(time.perf_counter() - started, 3),
    }


def _out_dir(args, cfg: dict) -> Path:
    out = Path(args.out or cfg.get("out") or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _sample(cfg: dict):
    return sample_states(build_model(cfg), cfg["samples"], cfg["seed"])


def _write(path: Path, text: str) -> None:
    path.write_text(text)


# --------------------------------------------------------------------------
# commands


def cmd_envelope(args, cfg: dict) -> int:
    _require(cfg, "users")
    profiles = build_profiles(cfg)
    gains = args.gains if args.gains else cfg.get("state")
    if gains is None:
        raise ConfigError("config field state: envelope needs explicit gains (config 'state' or --gains)")
    if len(gains) != len(profiles):
        raise ConfigError("config field state: need one gain per user")
    try:
        state = FadingState(tuple(float(g) for g in gains))
    except ValueError as exc:
        raise ConfigError(f"config field state: {exc}") from exc
    env = build_envelope(profiles, state)
    if env.kind == "continuous":
        r_max = 2.0 * max([*env.rb, *(profiles[u].w for u in env.users)], default=1.0)
    else:
        r_max = env.R[-1]
    grid = np.linspace(0.0, r_max, 65)
    payload = env.to_dict()
    payload["state"] = list(state.gains)
    payload["samples"] = [{"R": float(r), "J": float(env.eval(float(r)))} for r in grid]
    text = _dump(_finite(payload))
    _write(_out_dir(args, cfg) / "envelope.json", text)
    sys.stdout.write(text)
    return EXIT_OK


def cmd_solve(args, cfg: dict) -> int:
    started = time.perf_counter()
    _require(cfg, "users", "constraint")
    profiles = build_profiles(cfg)
    constraint = build_constraint(cfg)
    sample = _sample(cfg)
    if isinstance(constraint, experiments.WeightedSum):
        profs = profiles
        if constraint.w is not None:
            profs = [UserProfile(w=w, mu=p.mu, codebook=p.codebook) for p, w in zip(profiles, constraint.w)]
        sol = wsum.solve(profs, sample, constraint.rate, **_solver_kw(cfg, constraint))
        payload = {"problem": "weighted_sum", **sol.to_dict()}
        code = EXIT_OK
    else:
        sol = indiv.solve(profiles, sample, constraint.rates, **_solver_kw(cfg, constraint))
        payload = {"problem": "individual", **sol.to_dict()}
        code = EXIT_OK if sol.converged else EXIT_NOT_CONVERGED
    out = _out_dir(args, cfg)
    text = _dump(_finite(payload))
    _write(out / "solution.json", text)
    manifest = _manifest("solve", cfg, args, started)
    _write(out / "manifest.json", _dump(manifest))
    sys.stdout.write(_dump(_finite({"solution": payload, "manifest": manifest})))
    return code


def _map(fn, items, threads: int | None):
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def cmd_region(args, cfg: dict) -> int:
    started = time.perf_counter()
    _require(cfg, "users", "constraint")
    profiles = build_profiles(cfg)
    if len(profiles) != 2:
        raise ConfigError("config field users: region tracing needs exactly two users")
    constraint = build_constraint(cfg)
    sample = _sample(cfg)
    directions = args.directions or cfg["directions"]
    kw = _solver_kw(cfg, constraint)

    def _point(t):
        mu = (float(t), float(1.0 - t))
        profs = [UserProfile(w=p.w, mu=m, codebook=p.codebook) for p, m in zip(profiles, mu)]
        pbar, rates, _ = experiments.solve_optimal(profs, sample, constraint, **kw)
        return experiments.RegionPoint(mu, tuple(map(float, pbar)), tuple(map(float, rates)))

    points = _map(_point, list(experiments.direction_grid(directions)), args.threads)
    points.sort(key=lambda p: (p.pbar[0], p.mu[0]))
    out = _out_dir(args, cfg)
    experiments.write_region_csv(out / "region.csv", points)
    manifest = _manifest("region", cfg, args, started)
    manifest["directions"] = directions
    manifest["convex"] = experiments.region_is_convex(points)
    _write(out / "manifest.json", _dump(manifest))
    sys.stdout.write(_dump(manifest))
    return EXIT_OK


def cmd_compare(args, cfg: dict) -> int:
    started = time.perf_counter()
    _require(cfg, "users", "constraint")
    profiles = build_profiles(cfg)
    if len(profiles) != 2:
        raise ConfigError("config field users: cost-ratio comparisons need exactly two users")
    constraint = build_constraint(cfg)
    sample = _sample(cfg)
    ratios = args.ratios or cfg.get("ratios") or list(np.logspace(-2, 2, 9))
    kw = _solver_kw(cfg, constraint)
    rows = experiments.power_savings(profiles, sample, constraint, ratios, **kw)
    out = _out_dir(args, cfg)
    experiments.write_savings_csv(out / "savings.csv", rows)
    manifest = _manifest("compare", cfg, args, started)
    manifest["ratios"] = [float(r) for r in ratios]
    _write(out / "manifest.json", _dump(manifest))
    sys.stdout.write(_dump(manifest))
    return EXIT_OK


def cmd_modes(args, cfg: dict) -> int:
    qam = dict(cfg.get("qam", {}))
    if args.sizes:
        qam["sizes"] = args.sizes
    if args.sep is not None:
        qam["sep"] = args.sep
    qam.setdefault("sizes", [4, 16, 64])
    qam.setdefault("sep", 1e-3)
    try:
        table = amc.build_mode_table(amc.QamSpec(tuple(qam["sizes"]), float(qam["sep"])))
    except ValueError as exc:
        raise ConfigError(f"config field qam: {exc}") from exc
    text = amc.table_to_json(table) + "\n"
    if args.out or cfg.get("out"):
        _write(_out_dir(args, cfg) / "modes.json", text)
    sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "envelope": cmd_envelope,
    "solve": cmd_solve,
    "region": cmd_region,
    "compare": cmd_compare,
    "modes": cmd_modes,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tdma-energy", description="Energy-minimal TDMA rate and time allocation over block fading."
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON configuration file")
        p.add_argument("--seed", type=int, help="override the sampling seed")
        p.add_argument("--samples", type=int, help="override the number of fading states")
        p.add_argument("--threads", type=int, default=1, help="worker cap for independent solves")
        p.add_argument("--out", help="output directory")
        p.add_argument("-v", "--verbose", action="store_true")
        if name == "envelope":
            p.add_argument("--gains", type=float, nargs="+", help="channel gains of the state to inspect")
        if name == "region":
            p.add_argument("--directions", type=int, help="number of cost directions")
        if name == "compare":
            p.add_argument("--ratios", type=float, nargs="+", help="cost ratios mu1/mu2")
        if name == "modes":
            p.add_argument("--sizes", type=int, nargs="+", help="square QAM constellation sizes")
            p.add_argument("--sep", type=float, help="symbol error probability target")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config) if args.config else dict(_DEFAULTS)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be non-negative")
            cfg["seed"] = args.seed
        if args.samples is not None:
            if args.samples < 1:
                raise ConfigError("--samples must be positive")
            cfg["samples"] = args.samples
        if args.threads is not None and args.threads < 1:
            raise ConfigError("--threads must be positive")
        if args.command != "modes" and not args.config:
            raise ConfigError(f"{args.command} needs --config")
        return COMMANDS[args.command](args, cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except ConvergenceError as exc:
        print(f"not converged: {exc} {json.dumps(_finite(exc.diagnostics), default=_json_default)}", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    except ValueError as exc:
        # invalid parameter combinations surfaced by the library
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
