"""Command-line front end.

Usage:
    henochrome modes hg:0,0:1:1 lg:1,0:1:1      envelope CSVs + norm/Gram JSON
    henochrome maps ip --q-max 0.3              unitarity-weight sweep for one map
    henochrome uniqueness                       (alpha, beta) lattice sweep
    henochrome unitarity --map hc --pairs 20    spectral/paraxial proportionality
    henochrome roundtrip                        null-coordinate completeness round trip
    henochrome pulse --mode hg:0,0:40:1         henochromatic vs paraxial pulse comparison
    henochrome synth hg:0,0:1:1 --map hc        field dumps at (z, t) stations

Global flags (--config, --out, --seed, --set key=value) work before or after the
subcommand.  Exit codes: 0 success, 1 tolerance breach, 2 usage/config error.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from pathlib import Path

import numpy as np

from .completeness import (
    PulseSpec,
    decompose_henochromatic,
    period_sampling,
    pulse_compare,
    synthesize_multicarrier,
)
from .dispersion import (
    DomainError,
    MapParseError,
    builtin_map,
    parse_map_string,
    positive_frequency_residual,
    uniqueness_sweep,
)
from .grids import SpectralAmplitude, TransverseGrid, forward_transform, l2_inner_product, write_envelope_csv
from .modes import ModeParseError, make_initial_data, parse_mode_spec, paraxial_inner_product, random_paraxial_solution
from .quantum_ip import CarrierComb, PhysicalConstants, defect_report, inner_product_spectral
from .synthesis import SpacetimeSampling, dump_spacetime_field, synthesize

EXIT_OK, EXIT_BREACH, EXIT_USAGE = 0, 1, 2

DEFAULT_CONFIG = {
    "grid": {"n": 256, "extent": 16.0},
    "constants": {"c": 1.0, "hbar": 1.0, "rho": "unit"},
    "comb": {"k_min": 0.5, "k_max": 1.5, "count": 8},
    "output_dir": "henochrome-out",
    "seed": 0,
}

NORM_TOL = 1e-10
ROUNDTRIP_TOL = 1e-10
NULL_PLANE_TOL = 1e-13
PROPORTIONALITY_TOL = 1e-10


class UsageError(Exception):
    pass


# -- config -----------------------------------------------------------------

def _parse_value(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def apply_override(cfg: dict, assignment: str) -> None:
    if "=" not in assignment:
        raise UsageError(f"--set expects key=value, got {assignment!r}")
    key, value = assignment.split("=", 1)
    node = cfg
    parts = key.strip().split(".")
    for p in parts[:-1]:
        node = node.setdefault(p, {})
        if not isinstance(node, dict):
            raise UsageError(f"cannot set {key!r}: {p!r} is not a section")
    node[parts[-1]] = _parse_value(value)


def load_config(path=None, overrides=()) -> dict:
    cfg = copy.deepcopy(DEFAULT_CONFIG)
    if path:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {path}: {exc}") from None
        _merge(cfg, user)
    for item in overrides:
        apply_override(cfg, item)
    return cfg


def _merge(base: dict, extra: dict) -> None:
    for key, val in extra.items():
        if isinstance(val, dict) and isinstance(base.get(key), dict):
            _merge(base[key], val)
        else:
            base[key] = val


class RunConfig:
    """Validated view of the config dictionary."""

    def __init__(self, cfg: dict):
        self.raw = cfg
        try:
            self.grid = TransverseGrid(int(cfg["grid"]["n"]), float(cfg["grid"]["extent"]))
            c = cfg["constants"]
            self.constants = PhysicalConstants(float(c["c"]), float(c["hbar"]), str(c["rho"]))
            cb = cfg["comb"]
            self.k_min, self.k_max, self.count = float(cb["k_min"]), float(cb["k_max"]), int(cb["count"])
            if self.k_min <= 0 or self.count < 1:
                raise ValueError("comb needs k_min > 0 and count >= 1")
            self.output_dir = Path(cfg["output_dir"])
            self.seed = int(cfg["seed"])
        except (KeyError, TypeError, ValueError) as exc:
            raise UsageError(f"invalid config: {exc}") from None

    def comb(self, count=None) -> CarrierComb:
        count = self.count if count is None else count
        dk = (self.k_max - self.k_min) / max(count - 1, 1) if self.k_max > self.k_min else self.k_min
        try:
            return CarrierComb.from_range(self.k_min, self.k_max, count, dk=dk)
        except ValueError as exc:
            raise UsageError(f"invalid comb: {exc}") from None


def _write_json(path: Path, payload: dict) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, indent=2, sort_keys=True, allow_nan=False) + "\n")
    return path


def _cx(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


# -- subcommands --------------------------------------------------------------

def cmd_modes(args, rc: RunConfig) -> int:
    try:
        specs = [parse_mode_spec(s) for s in args.mode]
    except ModeParseError as exc:
        raise UsageError(str(exc)) from None
    out = rc.output_dir
    out.mkdir(parents=True, exist_ok=True)
    envs = [make_initial_data(s, rc.grid) for s in specs]
    for i, env in enumerate(envs):
        write_envelope_csv(env, out / f"mode_{i:02d}.csv")
    gram = np.array([[l2_inner_product(a, b) for b in envs] for a in envs])
    norms = [math.sqrt(g.real) for g in np.diag(gram)]
    off = gram - np.diag(np.diag(gram))
    norm_err = max(abs(n - 1.0) for n in norms)
    _write_json(out / "modes.json", {
        "grid": {"n": rc.grid.n, "extent": rc.grid.extent},
        "modes": [str(s) for s in specs],
        "norms": norms,
        "gram_re": gram.real.tolist(),
        "gram_im": gram.imag.tolist(),
        "max_norm_error": norm_err,
        "max_offdiagonal": float(np.abs(off).max()),
        "seed": rc.seed,
    })
    if norm_err >= NORM_TOL:
        print(f"tolerance breach: max_norm_error = {norm_err:.3e} >= {NORM_TOL:g}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def cmd_maps(args, rc: RunConfig) -> int:
    try:
        m = parse_map_string(args.map, rc.constants.c)
    except MapParseError as exc:
        raise UsageError(str(exc)) from None
    report = defect_report(m, args.k, args.q_max, args.count)
    residuals = []
    for sample in report["weight_samples"]:
        try:
            r = float(positive_frequency_residual(m, sample["q"], args.k))
        except DomainError:
            r = None
        residuals.append({"q": sample["q"], "residual": r})
    report["residual_samples"] = residuals
    report["seed"] = rc.seed
    _write_json(rc.output_dir / "maps.json", report)
    return EXIT_OK


def _lattice(text: str, label: str) -> np.ndarray:
    try:
        lo, hi, count = text.split(",")
        lo, hi, count = float(lo), float(hi), int(count)
    except ValueError:
        raise UsageError(f"{label} range must be 'lo,hi,count', got {text!r}") from None
    if count < 1 or hi < lo or (count > 1 and hi == lo) or (count == 1 and hi != lo):
        raise UsageError(f"degenerate {label} range {text!r}")
    return np.linspace(lo, hi, count)


def cmd_uniqueness(args, rc: RunConfig) -> int:
    alphas = _lattice(args.alpha, "alpha")
    betas = _lattice(args.beta, "beta")
    if np.any(betas == 0):
        raise UsageError("beta lattice must not contain 0")
    rep = uniqueness_sweep(alphas, betas, k=args.k)
    payload = rep.to_dict()
    payload["seed"] = rc.seed
    _write_json(rc.output_dir / "uniqueness.json", payload)
    a, b = rep.argmin_point
    print(f"argmin (alpha, beta) = ({a:.4g}, {b:.4g}); max unitarity defect {rep.max_unitarity_defect:.3e}")
    if not rep.consistency_attained:
        print("consistency unattained: no lattice point reproduces the carrier as q -> 0", file=sys.stderr)
        return EXIT_BREACH
    if not rep.passed:
        print("argmin is not the lattice point nearest (ln 2, 1)", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def proportionality_run(rng, grid: TransverseGrid, comb: CarrierComb, map_name: str,
                        consts: PhysicalConstants, pairs: int) -> dict:
    """Ratio of spectral quantum product to paraxial product for random states on each carrier."""
    m = builtin_map(map_name, consts.c)
    rows = []
    for k in comb.k_values:
        expected = 4.0 * math.pi * k / (consts.hbar * consts.c * comb.dk)
        ratios = []
        for _ in range(pairs):
            a = random_paraxial_solution(rng, grid, k)
            b = random_paraxial_solution(rng, grid, k)
            par = paraxial_inner_product(a, b)
            q = inner_product_spectral(a.initial_spectrum(), k, m, b.initial_spectrum(), k, m, comb, consts)
            ratios.append(q / par)
        ratios = np.array(ratios)
        scaled = ratios / expected
        rows.append({
            "k": float(k),
            "expected_constant": expected,
            "ratios": [_cx(r) for r in ratios],
            "relative_spread": float(np.max(np.abs(ratios - ratios.mean())) / abs(ratios.mean())),
            "max_deviation_from_expected": float(np.max(np.abs(scaled - 1.0))),
        })
    return {
        "map": map_name,
        "pairs": pairs,
        "dk": comb.dk,
        "carriers": rows,
        "max_relative_spread": max(r["relative_spread"] for r in rows),
        "max_deviation_from_expected": max(r["max_deviation_from_expected"] for r in rows),
    }


def cmd_unitarity(args, rc: RunConfig) -> int:
    if args.map not in ("pa", "mc", "ip", "hc"):
        raise UsageError(f"unitarity needs a builtin map, got {args.map!r}")
    rng = np.random.default_rng(rc.seed)
    comb = rc.comb(args.carriers)
    try:
        rep = proportionality_run(rng, rc.grid, comb, args.map, rc.constants, args.pairs)
    except DomainError as exc:
        raise UsageError(str(exc)) from None
    rep["seed"] = rc.seed
    _write_json(rc.output_dir / "unitarity.json", rep)
    worst = max(rep["max_relative_spread"], rep["max_deviation_from_expected"])
    if worst >= PROPORTIONALITY_TOL:
        print(f"tolerance breach: proportionality constant relative spread {worst:.3e} "
              f">= {PROPORTIONALITY_TOL:g}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def roundtrip_run(rng, grid: TransverseGrid, comb: CarrierComb, c: float = 1.0) -> dict:
    n = grid.n
    Fs = [SpectralAmplitude(grid, rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n)))
          for _ in comb.k_values]
    v = float(rng.uniform(-5.0, 5.0))
    sampling = period_sampling(grid, comb, [v])
    fld = synthesize_multicarrier(Fs, builtin_map("hc", c), sampling, comb)
    back = decompose_henochromatic(fld, comb)
    errors, norms_in, norms_out = [], [], []
    for a, b in zip(Fs, back):
        errors.append(float(np.linalg.norm(b.values - a.values) / np.linalg.norm(a.values)))
        norms_in.append(math.sqrt(l2_inner_product(a, a).real))
        norms_out.append(math.sqrt(l2_inner_product(b, b).real))
    return {
        "carriers": [float(k) for k in comb.k_values],
        "dk": comb.dk,
        "v": v,
        "relative_errors": errors,
        "max_relative_error": max(errors),
        "norms_in": norms_in,
        "norms_out": norms_out,
    }


def cmd_roundtrip(args, rc: RunConfig) -> int:
    rng = np.random.default_rng(rc.seed)
    rep = roundtrip_run(rng, rc.grid, rc.comb(args.carriers), rc.constants.c)
    rep["seed"] = rc.seed
    _write_json(rc.output_dir / "roundtrip.json", rep)
    if rep["max_relative_error"] >= ROUNDTRIP_TOL:
        print(f"tolerance breach: max_relative_error = {rep['max_relative_error']:.3e}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def cmd_pulse(args, rc: RunConfig) -> int:
    try:
        mode = parse_mode_spec(args.mode)
        spec = PulseSpec(args.k0, args.sigma * args.k0, mode)
    except (ModeParseError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    extent = args.extent if args.extent else 16.0 * mode.waist
    grid = TransverseGrid(args.n, extent)
    span = 2.0 / spec.dk_sigma
    z = np.linspace(-span, span, args.stations)
    t = np.linspace(-span, span, args.stations) / rc.constants.c
    rep = pulse_compare(spec, SpacetimeSampling(grid, z, t), rc.constants.c)
    jpath, _ = rep.write(rc.output_dir)
    payload = json.loads(jpath.read_text())
    payload["seed"] = rc.seed
    _write_json(jpath, payload)
    if rep.null_plane_residual >= NULL_PLANE_TOL:
        print(f"tolerance breach: null_plane_residual = {rep.null_plane_residual:.3e}", file=sys.stderr)
        return EXIT_BREACH
    return EXIT_OK


def _floats(text: str) -> list[float]:
    try:
        return [float(s) for s in text.split(",")]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from None


def cmd_synth(args, rc: RunConfig) -> int:
    try:
        spec = parse_mode_spec(args.mode)
        m = parse_map_string(args.map, rc.constants.c)
        F = forward_transform(make_initial_data(spec, rc.grid))
        sampling = SpacetimeSampling(rc.grid, _floats(args.z), _floats(args.t))
        fld = synthesize(F, spec.carrier, m, sampling)
    except (ModeParseError, MapParseError, DomainError, ValueError) as exc:
        raise UsageError(str(exc)) from None
    dump_spacetime_field(fld, rc.output_dir / "synth")
    return EXIT_OK


# -- parser -------------------------------------------------------------------

def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", metavar="PATH", default=argparse.SUPPRESS, help="JSON run config")
    p.add_argument("--out", metavar="DIR", default=argparse.SUPPRESS, help="output directory")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="seed for randomized runs")
    p.add_argument("--set", metavar="K=V", action="append", default=argparse.SUPPRESS,
                   help="override a config entry, e.g. grid.n=128")
    return p


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    parser = argparse.ArgumentParser(prog="henochrome", parents=[common],
                                     description="Paraxial modes vs exact single-particle fields.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", parents=[common], help="mode envelopes, norms and Gram matrix")
    p.add_argument("mode", nargs="+", help="hg:m,n:W:k or lg:l,p:W:k")
    p.set_defaults(func=cmd_modes)

    p = sub.add_parser("maps", parents=[common], help="unitarity-weight sweep of one map")
    p.add_argument("map", help="pa | mc | ip | hc | family:alpha,beta")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--q-max", type=float, default=0.9, help="upper end of the |q| sweep")
    p.add_argument("--count", type=int, default=200)
    p.set_defaults(func=cmd_maps)

    p = sub.add_parser("uniqueness", parents=[common], help="(alpha, beta) lattice sweep")
    p.add_argument("--alpha", default="0,1.4,15", help="lo,hi,count")
    p.add_argument("--beta", default="0.5,1.5,15", help="lo,hi,count")
    p.add_argument("--k", type=float, default=1.0)
    p.set_defaults(func=cmd_uniqueness)

    p = sub.add_parser("unitarity", parents=[common], help="quantum/paraxial product proportionality")
    p.add_argument("--map", default="hc")
    p.add_argument("--pairs", type=int, default=5)
    p.add_argument("--carriers", type=int, default=None, help="override comb.count")
    p.set_defaults(func=cmd_unitarity)

    p = sub.add_parser("roundtrip", parents=[common], help="synthesize/decompose round trip")
    p.add_argument("--carriers", type=int, default=None, help="override comb.count")
    p.set_defaults(func=cmd_roundtrip)

    p = sub.add_parser("pulse", parents=[common], help="henochromatic vs paraxial pulse")
    p.add_argument("--mode", default="hg:0,0:40:1")
    p.add_argument("--k0", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=1e-3, help="carrier width as a fraction of k0")
    p.add_argument("--n", type=int, default=64, help="transverse samples per axis")
    p.add_argument("--extent", type=float, default=None, help="window side (default 16 W)")
    p.add_argument("--stations", type=int, default=9, help="z and t stations each")
    p.set_defaults(func=cmd_pulse)

    p = sub.add_parser("synth", parents=[common], help="dump a synthesized field")
    p.add_argument("mode")
    p.add_argument("--map", default="hc")
    p.add_argument("--z", default="0", help="comma-separated z stations")
    p.add_argument("--t", default="0", help="comma-separated t stations")
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = load_config(getattr(args, "config", None), getattr(args, "set", ()))
        if hasattr(args, "out"):
            cfg["output_dir"] = args.out
        if hasattr(args, "seed"):
            cfg["seed"] = args.seed
        rc = RunConfig(cfg)
        return args.func(args, rc)
    except UsageError as exc:
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
