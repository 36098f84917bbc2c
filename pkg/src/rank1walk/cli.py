"""Command line entry point: ``rank1walk <subcommand> ...``.

Exit codes: 0 success, 1 runtime error (or failed acceptance rows), 2 bad
input. ``--config file.json`` overrides flags; ``RANK1_THREADS`` caps the
Monte Carlo thread pool.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import acceptance, io
from .errors import IncompatibleDimension, Rank1Error, SupportViolation
from .geometry import CATALOG, SpaceParams, parse_space, space_selector
from .heat import Psi, psi
from .laws import RadialLaw, asymptotic_t, law_from_samples, make_bump, scale_law, variance
from .montecarlo import Scaling, group_model, ks_statistic, simulate_walk, threads
from .spherical import phi_grid
from .transform import (
    RadialGridFunction,
    SpectralFunction,
    calibrate_constants,
    forward_transform,
    inverse_transform,
    lambda_rule,
)
from .walk import sup_grid, walk_density, walk_report


class ConfigError(Rank1Error, ValueError):
    pass


@dataclass
class RunConfig:
    """Everything that determines a run's output; embedded in every JSON file."""

    command: str
    space: str = "real:3"
    support_radius: float = 1.0
    center: float = 0.5
    width: float = 0.3
    law_path: str | None = None
    d_eta: float = 0.01
    d_lambda: float = 0.05
    eta_max: float | None = None
    lambda_max: float | None = None
    N_list: list[int] = field(default_factory=lambda: [4, 8, 16, 32, 64, 128, 256])
    samples: int = 100_000
    seed: int = 0
    out_dir: str = "."
    extra: dict = field(default_factory=dict)

    def validate(self) -> RunConfig:
        parse_space(self.space)
        for name in ("d_eta", "d_lambda"):
            if not getattr(self, name) > 0:
                raise ConfigError(f"{name} must be positive")
        for name in ("eta_max", "lambda_max", "support_radius", "width"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ConfigError(f"{name} must be positive")
        if not self.N_list or any(int(n) != n or n < 1 for n in self.N_list):
            raise ConfigError("N list must be nonempty positive integers")
        if any(b <= a for a, b in zip(self.N_list, self.N_list[1:])):
            raise ConfigError("N list must be strictly increasing")
        if self.samples < 1:
            raise ConfigError("samples must be positive")
        return self

    @property
    def params(self) -> SpaceParams:
        return parse_space(self.space)


# -- argument parsing -----------------------------------------------------------

def _n_list(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad N list {text!r}") from None


def _grid(text: str) -> tuple[float, float, float]:
    try:
        a, b, step = (float(x) for x in text.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be a:b:step, got {text!r}") from None
    if not (step > 0 and b >= a >= 0):
        raise argparse.ArgumentTypeError(f"grid needs 0 <= a <= b and step > 0, got {text!r}")
    return a, b, step


def grid_points(spec) -> np.ndarray:
    a, b, step = spec
    count = int(math.floor((b - a) / step + 1e-9)) + 1
    return np.round(a + step * np.arange(count), 12)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_help(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _common(sp: argparse.ArgumentParser, law: bool = False):
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--space", default=None, help="real:3 | complex:4 | quat:8 | cayley | real:<n> ...")
    g.add_argument("--multiplicities", default=None, help="m_a,m_2a")
    sp.add_argument("--config", default=None, help="JSON file whose keys override flags")
    sp.add_argument("--out-dir", default=None)
    if law:
        sp.add_argument("--law", dest="law_path", default=None, help="density CSV (eta,density)")
        sp.add_argument("--R", dest="support_radius", type=float, default=None)
        sp.add_argument("--center", type=float, default=None)
        sp.add_argument("--width", type=float, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="rank1walk", description="Random walks on rank-one symmetric spaces.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sp = sub.add_parser("phi", help="spherical function on an eta grid")
    _common(sp)
    sp.add_argument("--lambda", dest="lam", type=float, required=True)
    sp.add_argument("--eta-grid", type=_grid, default=(0.0, 5.0, 0.01))

    sp = sub.add_parser("transform", help="forward or inverse spherical transform of a CSV")
    _common(sp)
    sp.add_argument("--input", required=True)
    sp.add_argument("--direction", choices=("fwd", "inv"), required=True)
    sp.add_argument("--lambda-max", type=float, default=None)
    sp.add_argument("--eta-max", type=float, default=None)
    sp.add_argument("--d-lambda", type=float, default=None)
    sp.add_argument("--d-eta", type=float, default=None)

    sp = sub.add_parser("heat", help="heat kernel psi and limit law Psi")
    _common(sp)
    sp.add_argument("--t", type=float, required=True)
    sp.add_argument("--eta-grid", type=_grid, default=None)

    sp = sub.add_parser("law", help="make, scale and summarize radial laws")
    sp.add_argument("action", choices=("make-bump", "scale", "variance", "t"))
    _common(sp, law=True)
    sp.add_argument("--input", dest="law_input", default=None, help="alias for --law")
    sp.add_argument("--eps", type=float, default=None)
    sp.add_argument("--d-eta", type=float, default=None)

    sp = sub.add_parser("walk", help="exact densities of the renormalized walk")
    _common(sp, law=True)
    sp.add_argument("--N-list", type=_n_list, default=None)

    sp = sub.add_parser("mc", help="matrix-group Monte Carlo walk")
    _common(sp, law=True)
    sp.add_argument("--N", type=int, required=True)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--seed", type=int, default=None)
    sp.add_argument("--scaling", choices=[s.value for s in Scaling], default=Scaling.InvSqrtN.value)
    sp.add_argument("--exact", default=None, help="exact density CSV (eta,density) to compare against")

    sp = sub.add_parser("verify-all", help="run the acceptance suite")
    _common(sp)
    sp.add_argument("--only", type=_n_list, default=None, help="criterion numbers, e.g. 1,2,5")
    return ap


_CONFIG_KEYS = {f.name for f in dataclasses.fields(RunConfig)}


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults < flags < ``--config`` file."""
    cfg = RunConfig(command=args.command)
    if getattr(args, "multiplicities", None):
        cfg.space = args.multiplicities
    elif getattr(args, "space", None):
        cfg.space = args.space
    for key in ("support_radius", "center", "width", "law_path", "d_eta", "d_lambda",
                "eta_max", "lambda_max", "samples", "seed", "out_dir"):
        val = getattr(args, key, None)
        if val is not None:
            setattr(cfg, key, val)
    if getattr(args, "law_input", None):
        cfg.law_path = args.law_input
    if getattr(args, "N_list", None):
        cfg.N_list = list(args.N_list)
    if args.command == "mc":
        cfg.N_list = [args.N]
    extra = {k: v for k, v in vars(args).items()
             if k in ("lam", "eta_grid", "t", "action", "eps", "direction", "input", "scaling", "exact", "only")
             and v is not None}
    if getattr(args, "config", None):
        override = io.read_json(args.config)
        if not isinstance(override, dict):
            raise ConfigError(f"{args.config}: expected a JSON object")
        for key, val in override.items():
            if key in _CONFIG_KEYS and key not in ("command", "extra"):
                setattr(cfg, key, val)
            else:
                extra[key] = val
    cfg.extra = extra
    return cfg.validate()


# -- helpers --------------------------------------------------------------------

def _out(cfg: RunConfig, name: str) -> Path:
    return Path(cfg.out_dir) / name


def load_law(cfg: RunConfig) -> RadialLaw:
    """Law from ``--law`` (exact rebuild if its sidecar records bump parameters) or from flags."""
    p = cfg.params
    if cfg.law_path is None:
        return make_bump(cfg.support_radius, cfg.center, cfg.width, p)
    side = io.sidecar(cfg.law_path)
    if side.exists():
        meta = io.read_json(side).get("law", {})
        if meta.get("kind") == "bump" and meta.get("space") == space_selector(p):
            Z = make_bump(meta["support_radius"], meta["center"], meta["width"], p)
            eps = float(meta.get("scale", 1.0))
            return Z if eps == 1 else scale_law(Z, eps)
    _, (eta, dens) = io.read_csv(cfg.law_path, columns=2)
    return law_from_samples(eta, dens, p)


def _law_meta(cfg: RunConfig, Z: RadialLaw, base: dict | None) -> dict:
    return {"law": dict(base or {}, space=space_selector(cfg.params), scale=Z.scale,
                        support_radius_scaled=Z.support_radius)}


def _bump_meta(cfg: RunConfig) -> dict | None:
    if cfg.law_path is None:
        return {"kind": "bump", "support_radius": cfg.support_radius, "center": cfg.center, "width": cfg.width}
    side = io.sidecar(cfg.law_path)
    if side.exists():
        meta = io.read_json(side).get("law", {})
        if meta.get("kind") == "bump":
            return {k: meta[k] for k in ("kind", "support_radius", "center", "width")}
    return None


# -- subcommands ----------------------------------------------------------------

def cmd_phi(cfg: RunConfig, echo) -> int:
    etas = grid_points(cfg.extra["eta_grid"])
    vals = phi_grid(cfg.params, [cfg.extra["lam"]], etas)[0]
    path = io.write_csv(_out(cfg, "phi.csv"), ["eta", "phi"], [etas, vals])
    io.write_json(io.sidecar(path), {"lambda": cfg.extra["lam"]}, cfg)
    echo(str(path))
    return 0


def cmd_transform(cfg: RunConfig, echo) -> int:
    p = cfg.params
    _, (x, y) = io.read_csv(cfg.extra["input"], columns=2)
    c_fwd, c_inv = calibrate_constants(p)
    if cfg.extra["direction"] == "fwd":
        f = RadialGridFunction(x, y, p)
        lam_max = cfg.lambda_max or 20.0
        lams = np.round(np.arange(int(round(lam_max / cfg.d_lambda)) + 1) * cfg.d_lambda, 12)
        F = forward_transform(f, p, lams, lambda_max=lam_max, check=False)
        path = io.write_csv(_out(cfg, "transform_fwd.csv"), ["lambda", "value"], [lams, F.values])
        meta = {"eta_grid": [float(x[0]), float(x[-1]), int(x.size)], "lambda_max": lam_max}
    else:
        lam_max = float(x[-1]) if cfg.lambda_max is None else cfg.lambda_max
        rule = lambda_rule(lam_max)
        # resample on quadrature nodes so the inversion has weights
        spline = RadialGridFunction(x, y, p)
        F = SpectralFunction(rule.nodes, spline.at(rule.nodes), lam_max, p, rule.weights)
        eta_max = cfg.eta_max or 5.0
        etas = np.round(np.arange(int(round(eta_max / cfg.d_eta)) + 1) * cfg.d_eta, 12)
        f = inverse_transform(F, p, etas)
        path = io.write_csv(_out(cfg, "transform_inv.csv"), ["eta", "value"], [etas, f.values])
        meta = {"lambda_grid": [float(x[0]), float(x[-1]), int(x.size)], "lambda_max": lam_max,
                "eta_grid": [0.0, eta_max, int(etas.size)]}
    meta["calibration"] = {"C_fwd": c_fwd, "C_inv": c_inv}
    io.write_json(io.sidecar(path), meta, cfg)
    echo(str(path))
    return 0


def cmd_heat(cfg: RunConfig, echo) -> int:
    p, t = cfg.params, float(cfg.extra["t"])
    if not t > 0:
        raise ConfigError("t must be positive")
    spec = cfg.extra.get("eta_grid") or (0.0, cfg.eta_max or 6 * math.sqrt(t) + 2 * p.rho * t, cfg.d_eta)
    etas = grid_points(spec)
    small, big = psi(p, t, etas).values, Psi(p, t, etas).values
    path = io.write_csv(_out(cfg, "heat.csv"), ["eta", "psi", "Psi"], [etas, small, big])
    io.write_json(io.sidecar(path), {"t": t}, cfg)
    echo(str(path))
    return 0


def cmd_law(cfg: RunConfig, echo) -> int:
    action = cfg.extra["action"]
    Z = load_law(cfg)
    base = _bump_meta(cfg)
    if action in ("make-bump", "scale"):
        if action == "scale":
            eps = cfg.extra.get("eps")
            if eps is None or not 0 < eps <= 1:
                raise ConfigError("law scale needs --eps in (0, 1]")
            Z = scale_law(Z, eps)
        top = Z.support_radius
        etas = np.round(np.arange(int(round(top / cfg.d_eta)) + 1) * cfg.d_eta, 12)
        name = "bump.csv" if action == "make-bump" else "scaled.csv"
        path = io.write_csv(_out(cfg, name), ["eta", "density"], [etas, Z.pdf(etas)])
        io.write_json(io.sidecar(path), _law_meta(cfg, Z, base), cfg)
        echo(str(path))
        return 0
    value = variance(Z) if action == "variance" else asymptotic_t(Z)
    path = io.write_json(_out(cfg, f"law_{action}.json"), {action: value}, cfg)
    echo(f"{action} = {io.fmt(value)}")
    echo(str(path))
    return 0


def cmd_walk(cfg: RunConfig, echo) -> int:
    p = cfg.params
    Z = load_law(cfg)
    report = walk_report(Z, cfg.N_list, p)
    grid = sup_grid(Z, report.t)
    ref = Psi(p, report.t, grid).values
    for N, lam in zip(report.N_list, report.lambda_max):
        f = walk_density(Z, N, p, grid, lambda_max=None if N == 1 else lam).values
        io.write_csv(_out(cfg, f"walk_N{N}.csv"), ["eta", "f_SN", "Psi"], [grid, f, ref])
    path = io.write_json(_out(cfg, "walk_report.json"), {"report": report.to_dict()}, cfg)
    echo(f"fitted_rate = {report.fitted_rate:.6g}")
    echo(str(path))
    return 0


def cmd_mc(cfg: RunConfig, echo) -> int:
    p = cfg.params
    group_model(p)
    Z = load_law(cfg)
    N = cfg.N_list[0]
    scaling = Scaling(cfg.extra.get("scaling", Scaling.InvSqrtN.value))
    batch = simulate_walk(Z, N, scaling, samples=cfg.samples, seed=cfg.seed)
    path = io.write_csv(_out(cfg, "mc_distances.csv"), ["distance"], [batch.radial_distances])
    if cfg.extra.get("exact"):
        _, (eta, dens) = io.read_csv(cfg.extra["exact"], columns=2)
        exact = RadialGridFunction(eta, dens, p)
    elif scaling is Scaling.InvSqrtN:
        top = max(float(batch.radial_distances.max()) + 0.05, Z.support_radius)
        exact = walk_density(Z, N, p, np.linspace(0.0, top, 4001))
    else:
        exact = None
    summary = {"N": N, "samples": cfg.samples, "seed": cfg.seed, "scaling": scaling.value,
               "threads": threads(), "mean_distance": float(batch.radial_distances.mean())}
    if exact is not None:
        summary["ks"] = ks_statistic(batch, exact, p)
        echo(f"KS = {summary['ks']:.6g}")
    io.write_json(_out(cfg, "mc_summary.json"), summary, cfg)
    echo(str(path))
    return 0


def cmd_verify_all(cfg: RunConfig, echo, explicit_space: bool) -> int:
    spaces = [cfg.space] if explicit_space else None
    if spaces and spaces[0] not in CATALOG:
        spaces = [space_selector(cfg.params)]
    only = set(cfg.extra["only"]) if cfg.extra.get("only") else None
    results = acceptance.run_all(spaces, only=only, echo=echo)
    passed = sum(r.passed for r in results)
    echo(f"{passed}/{len(results)} criteria passed")
    io.write_json(_out(cfg, "verify_all.json"),
                  {"results": [dataclasses.asdict(r) for r in results]}, cfg)
    return 0 if passed == len(results) else 1


COMMANDS = {"phi": cmd_phi, "transform": cmd_transform, "heat": cmd_heat, "law": cmd_law,
            "walk": cmd_walk, "mc": cmd_mc}

# bad input: exit 2; anything else raised while computing: exit 1
_INPUT_ERRORS = (io.InputFormatError, ConfigError, IncompatibleDimension, SupportViolation)


def run_subcommand(argv=None, echo=print) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        cfg = resolve_config(args)
    except (Rank1Error, ValueError, TypeError) as exc:
        print(f"rank1walk: error: {exc}", file=sys.stderr)
        return 2
    try:
        if args.command == "verify-all":
            explicit = bool(args.space or args.multiplicities)
            return cmd_verify_all(cfg, echo, explicit)
        return COMMANDS[args.command](cfg, echo)
    except _INPUT_ERRORS as exc:
        print(f"rank1walk: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - top-level reporting
        print(f"rank1walk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main(argv=None) -> None:
    sys.exit(run_subcommand(argv))


if __name__ == "__main__":
    main()
