"""Acceptance checks 1-10 as library functions returning structured results.

Each ``criterion_k`` runs at the stated tolerance and returns a
:class:`CriterionResult`; ``run_all`` drives them for ``verify-all`` and the
test suite.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import TailNotNegligible
from .geometry import CATALOG, SpaceParams, space_selector
from .heat import (
    Psi,
    double_precision_suffices,
    extended_rule,
    heat_eta_max,
    heat_transform,
    psi,
    psi_h3_closed_form,
)
from .laws import (
    asymptotic_t,
    char_fn_values,
    default_bump,
    law_transform,
    make_bump,
    scale_law,
    spectral_variance,
    variance,
)
from .montecarlo import Scaling, ks_statistic, simulate_walk
from .spherical import phi_d4_lambda, phi_dd_eta_at_zero, phi_dd_lambda_at_zero, phi_grid
from .transform import (
    TAIL_TOL,
    calibrate_constants,
    forward_transform,
    inverse_transform,
    lambda_rule,
    radial_mass,
)
from .walk import (
    choose_lambda_max,
    integrated_difference,
    lln_mass_within,
    llt_error,
    llt_shape,
    walk_density,
    walk_report,
)

SPECTRAL_SPACES = ("real:3", "complex:4", "quat:8", "cayley")
MC_SPACES = ("real:3", "complex:4")
ROUND_TRIP_BUMP = (3.0, 1.5, 1.45)
# phi costs grow linearly in lambda; past this the 30 s budget is gone
ROUND_TRIP_CEILING = 512.0
HEAT_TIMES = (0.25, 0.5, 1.0)
SHAPE_TIMES = (0.2, 0.5, 1.0)
SHAPE_N = 64


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    values: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.number:>2} {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _timed(number, name, fn, *args, **kwargs) -> CriterionResult:
    start = time.perf_counter()
    passed, detail, values = fn(*args, **kwargs)
    return CriterionResult(number, name, bool(passed), detail, values, time.perf_counter() - start)


def _spaces(spaces, allowed):
    names = allowed if spaces is None else [s for s in spaces if s in allowed]
    return [CATALOG[s] for s in names]


# 1 ---------------------------------------------------------------------------

def h3_oracle(lam: float, eta):
    eta = np.asarray(eta, dtype=float)
    if lam == 0:
        return eta / np.sinh(eta)
    return np.sin(lam * eta) / (lam * np.sinh(eta))


def _c1():
    p = CATALOG["real:3"]
    lams = [0.0, 0.5, 1.0, 2.0, 5.0, 10.0]
    etas = np.round(np.arange(1, 501) * 0.01, 10)
    grid = phi_grid(p, lams, etas, cache=False)
    err = max(float(np.max(np.abs(grid[i] - h3_oracle(l, etas)))) for i, l in enumerate(lams))
    return err <= 1e-8, f"sup error {err:.2e} <= 1e-8", {"sup_error": err}


def criterion_1(spaces=None):
    return _timed(1, "phi oracle on H^3", _c1)


# 2 ---------------------------------------------------------------------------

def _c2(spaces):
    worst, table = 0.0, {}
    for p in spaces:
        for lam in (0.0, 1.0, 2.0, 5.0):
            err = abs(phi_dd_eta_at_zero(p, lam) + (lam**2 + p.rho**2) / p.n)
            table[f"{space_selector(p)}@{lam:g}"] = err
            worst = max(worst, err)
    return worst <= 1e-4, f"max |phi''(0) + (lam^2+rho^2)/n| = {worst:.2e} <= 1e-4", table


def criterion_2(spaces=None):
    return _timed(2, "second eta-derivative at 0", _c2, _spaces(spaces, SPECTRAL_SPACES))


# 3 ---------------------------------------------------------------------------

def round_trip(p: SpaceParams, bump=ROUND_TRIP_BUMP, ceiling: float = ROUND_TRIP_CEILING) -> dict:
    """Round trip of a probability bump, error measured relative to its peak.

    ``lambda_max`` is where the tail of the unit-peak rescaling drops below
    the tail tolerance, capped at ``ceiling``; ``precondition`` records the
    stated absolute tail test on the probability density itself.
    """
    R, c, w = bump
    Z = make_bump(R, c, w, p)
    calibrate_constants(p)
    grid = np.round(np.arange(int(round(R / 0.01)) + 1) * 0.01, 10)
    exact = Z.pdf(grid)
    peak = float(exact.max())
    try:
        lam_max = choose_lambda_max(Z, 1, target=TAIL_TOL * peak, ceiling=ceiling)
    except TailNotNegligible:
        lam_max = ceiling
    F = forward_transform(Z.density, p, lambda_rule(lam_max, eta_extent=R))
    try:
        f = inverse_transform(F, p, grid)
        ok = True
    except TailNotNegligible:
        f, ok = inverse_transform(F, p, grid, check_tail=False), False
    err = float(np.max(np.abs(f.values - exact)))
    return {"lambda_max": float(lam_max), "precondition": ok, "relative_error": err / peak,
            "absolute_error": err, "f_max": peak}


def _c3(spaces):
    table, passed = {}, True
    for p in spaces:
        r = round_trip(p)
        table[space_selector(p)] = r
        passed &= r["precondition"] and r["relative_error"] <= 1e-6
    parts = [f"{k} rel {v['relative_error']:.1e} (abs {v['absolute_error']:.1e}, L={v['lambda_max']:g}"
             f"{'' if v['precondition'] else ', tail not negligible'})" for k, v in table.items()]
    return passed, "; ".join(parts), table


def criterion_3(spaces=None):
    return _timed(3, "transform round trip", _c3, _spaces(spaces, SPECTRAL_SPACES))


# 4 ---------------------------------------------------------------------------

def heat_pair_error(p: SpaceParams, t: float) -> float:
    """``sup |forward(psi(t)) e^{rho^2 t} - e^{-lam^2 t}|`` over ``lam in [0, 10]``."""
    lams = np.linspace(0.0, 10.0, 41)
    grid = extended_rule(p, t, lam_top=10.0) if not double_precision_suffices(p, t, heat_eta_max(p, t)) else None
    kernel = psi(p, t, grid)
    F = forward_transform(kernel, p, lams, check=False).values
    return float(np.max(np.abs((F - heat_transform(p, t, lams)) * math.exp(p.rho**2 * t))))


def h3_closed_form_error(t: float = 0.5) -> dict:
    """psi on H^3 against the closed form at the matching time convention.

    The closed form solves ``d/dt = Delta/2``, so ``psi(t)`` equals it at
    ``2t``; the literal same-time comparison is kept for the record.
    """
    p = CATALOG["real:3"]
    etas = np.round(np.arange(0, 501) * 0.01, 10)
    ours = psi(p, t, etas).values
    out = {}
    for label, ref in (("psi(t) vs closed(2t)", psi_h3_closed_form(2 * t, etas)),
                       ("Psi(t) vs closed(t)", psi_h3_closed_form(t, etas)),
                       ("literal psi(t) vs closed(t)", psi_h3_closed_form(t, etas))):
        mine = Psi(p, t, etas).values if label.startswith("Psi") else ours
        out[label] = float(np.max(np.abs(mine - ref) / ref))
    return out


def _c4(spaces):
    table = {}
    for p in spaces:
        for t in HEAT_TIMES:
            table[f"pair {space_selector(p)}@{t:g}"] = heat_pair_error(p, t)
            table[f"mass {space_selector(p)}@{t:g}"] = radial_mass(psi(p, t), p)
    pair = max((v for k, v in table.items() if k.startswith("pair")), default=0.0)
    mass_err = max((abs(v - 1) for k, v in table.items() if k.startswith("mass")), default=0.0)
    passed = pair <= 1e-5 and mass_err <= 1e-5
    detail = f"heat pair {pair:.1e} <= 1e-5, mass error {mass_err:.1e} <= 1e-5"
    if any(space_selector(p) == "real:3" for p in spaces):
        closed = h3_closed_form_error()
        table.update(closed)
        rel = closed["psi(t) vs closed(2t)"]
        passed &= rel <= 1e-5
        detail += (f", H^3 closed form rel {rel:.1e} <= 1e-5"
                   f" (same-time literal {closed['literal psi(t) vs closed(t)']:.1e})")
    return passed, detail, table


def criterion_4(spaces=None):
    return _timed(4, "heat pair, closed form, mass", _c4, _spaces(spaces, SPECTRAL_SPACES))


# 5 ---------------------------------------------------------------------------

def variance_additivity(p: SpaceParams, h: float = 1e-3) -> float:
    Z1 = default_bump(p)
    Z2 = make_bump(1.5, 0.8, 0.5, p)
    lams = np.array([0.0, h])
    F1 = law_transform(Z1, lams, check=False).values
    F2 = law_transform(Z2, lams, check=False).values
    v_sum = spectral_variance(lambda _: F1 * F2, h)
    return abs(v_sum - (variance(Z1, h=h) + variance(Z2, h=h)))


def scaling_exponent(p: SpaceParams) -> float:
    Z = default_bump(p)
    eps = 2.0 ** -np.arange(1, 7)
    V = [variance(scale_law(Z, e)) for e in eps]
    return float(np.polyfit(np.log(eps), np.log(V), 1)[0])


def variance_gap_slope(p: SpaceParams, N_list=(4, 8, 16, 32, 64, 128, 256)) -> float:
    Z = default_bump(p)
    t = asymptotic_t(Z)
    gaps = [abs(N * variance(scale_law(Z, 1 / math.sqrt(N))) - t) for N in N_list]
    return float(np.polyfit(np.log(N_list), np.log(gaps), 1)[0])


def _c5(spaces):
    table, passed = {}, True
    for p in spaces:
        add = variance_additivity(p)
        expo = scaling_exponent(p)
        slope = variance_gap_slope(p)
        table[space_selector(p)] = {"additivity": add, "exponent": expo, "gap_slope": slope}
        passed &= add <= 1e-6 and abs(expo - 2) <= 0.05 and abs(slope + 1) <= 0.2
    worst_add = max(v["additivity"] for v in table.values())
    expos = ", ".join(f"{k} {v['exponent']:.3f}/{v['gap_slope']:.3f}" for k, v in table.items())
    return passed, f"additivity {worst_add:.1e} <= 1e-6; exponent/gap slope {expos}", table


def criterion_5(spaces=None):
    return _timed(5, "variance laws", _c5, _spaces(spaces, SPECTRAL_SPACES))


# 6 ---------------------------------------------------------------------------

def bump_with_t(p: SpaceParams, t: float, width_ratio: float = 0.4):
    """Bump ``(center, width = 0.4 center)`` whose asymptotic ``t`` is the given value."""
    def gap(c):
        w = width_ratio * c
        return asymptotic_t(make_bump(c + w + 0.05, c, w, p)) - t
    c = brentq(gap, 0.05, 20.0, xtol=1e-10)
    w = width_ratio * c
    return make_bump(c + w + 0.05, c, w, p)


def llt_shape_fit(p: SpaceParams, times=SHAPE_TIMES, N: int = SHAPE_N) -> dict:
    """Single constant ``C`` with ``llt_error(N) <= C shape(t) / N`` across ``times``."""
    ratios = {}
    for t in times:
        Z = bump_with_t(p, t)
        ratios[t] = llt_error(Z, N) * N / llt_shape(asymptotic_t(Z), p.n)
    C = max(ratios.values())
    return {"C": C, "ratios": ratios, "spread": C / min(ratios.values())}


def _c6(spaces):
    table, passed = {}, True
    for p in spaces:
        rep = walk_report(default_bump(p))
        shape = llt_shape_fit(p)
        ok = -1.3 <= rep.fitted_rate <= -0.7 and rep.sup_errors[-1] < rep.sup_errors[0] / 20
        ok &= math.isfinite(shape["C"]) and shape["C"] > 0
        passed &= ok
        table[space_selector(p)] = {"rate": rep.fitted_rate, "err4": rep.sup_errors[0], "err256": rep.sup_errors[-1],
                          "shape_C": shape["C"], "shape_spread": shape["spread"]}
    detail = "; ".join(f"{k} rate {v['rate']:.3f}, err 4->256 {v['err4']:.2e}->{v['err256']:.2e}, "
                       f"C {v['shape_C']:.3g}" for k, v in table.items())
    return passed, detail, table


def criterion_6(spaces=None):
    return _timed(6, "local limit rate", _c6, _spaces(spaces, MC_SPACES))


# 7 ---------------------------------------------------------------------------

def _c7(spaces):
    if not spaces:
        return True, "not applicable", {}
    gap = integrated_difference(default_bump(CATALOG["real:3"]), 256)
    return gap <= 0.01, f"integrated difference at N=256 {gap:.2e} <= 0.01", {"gap": gap}


def criterion_7(spaces=None):
    return _timed(7, "central limit (integrated)", _c7, _spaces(spaces, ("real:3",)))


# 8 ---------------------------------------------------------------------------

def _c8(spaces, samples=100_000):
    table, passed = {}, True
    for p in spaces:
        Z = default_bump(p)
        mass = lln_mass_within(Z, 256, 0.1)
        batch = simulate_walk(Z, 256, Scaling.InvN, samples=samples, seed=2024)
        beyond = float(np.mean(batch.radial_distances > 0.1))
        table[space_selector(p)] = {"spectral_mass": mass, "mc_beyond": beyond}
        passed &= mass >= 0.99 and beyond < 0.01
    detail = "; ".join(f"{k} mass {v['spectral_mass']:.6f} >= 0.99, beyond {v['mc_beyond']:.4f} < 0.01"
                       for k, v in table.items())
    return passed, detail, table


def criterion_8(spaces=None):
    return _timed(8, "law of large numbers", _c8, _spaces(spaces, MC_SPACES))


# 9 ---------------------------------------------------------------------------

def mc_cross_check(p: SpaceParams, N: int, samples: int = 100_000, seed: int = 7) -> float:
    Z = default_bump(p)
    batch = simulate_walk(Z, N, samples=samples, seed=seed)
    top = float(batch.radial_distances.max()) + 0.05
    grid = np.linspace(0.0, max(top, Z.support_radius), 4001)
    return ks_statistic(batch, walk_density(Z, N, p, grid), p)


def reproducible_across_threads(p: SpaceParams, N: int = 4, samples: int = 20_000, seed: int = 11) -> bool:
    Z = default_bump(p)
    one = simulate_walk(Z, N, samples=samples, seed=seed, n_threads=1).radial_distances
    many = simulate_walk(Z, N, samples=samples, seed=seed, n_threads=4).radial_distances
    return one.tobytes() == many.tobytes()


def _c9(spaces):
    table, passed = {}, True
    for p in spaces:
        for N in (1, 4, 16):
            ks = mc_cross_check(p, N)
            table[f"{space_selector(p)} N={N}"] = ks
            passed &= ks < 0.02
        same = reproducible_across_threads(p)
        table[f"{space_selector(p)} reproducible"] = same
        passed &= same
    worst = max((v for v in table.values() if not isinstance(v, bool)), default=0.0)
    return passed, f"max KS {worst:.4f} < 0.02, thread-count reproducible", table


def criterion_9(spaces=None):
    return _timed(9, "Monte Carlo vs spectral", _c9, _spaces(spaces, MC_SPACES))


# 10 --------------------------------------------------------------------------

def sup_abs_phi(p: SpaceParams) -> float:
    lams = np.linspace(0.0, 30.0, 121)
    etas = np.linspace(0.0, 6.0, 241)
    return float(np.max(np.abs(phi_grid(p, lams, etas, cache=False))))


def lower_gap_constant(p: SpaceParams) -> float:
    """``min (1 - phi_lam(eta))`` over ``lam eta in [1, 50]`` (lam up to 50, eta in [0.02, 5])."""
    lams = np.linspace(0.2, 50.0, 250)
    etas = np.linspace(0.02, 5.0, 250)
    grid = phi_grid(p, lams, etas, cache=False)
    prod = lams[:, None] * etas[None, :]
    mask = (prod >= 1) & (prod <= 50)
    return float(np.min((1 - grid)[mask]))


def quadratic_decay_margin(p: SpaceParams, factor: float = 1.0, radius: float = 1.0,
                           N_list=(4, 16, 64, 256)) -> float:
    """``min (1 - lam^2 x^2 c - phi_lam(x))`` with ``x = eta/sqrt N``, ``lam x <= 1``.

    ``c = factor / (4 (m + 1))`` with ``m = n/2 - 1``; the bound holds where
    the result is non-negative.
    """
    c = factor / (4 * (p.n / 2))
    worst = math.inf
    for N in N_list:
        xs = np.linspace(0.01, radius, 100) / math.sqrt(N)
        lams = np.linspace(0.0, 1.0 / xs[0], 200)
        grid = phi_grid(p, lams, xs, cache=False)
        prod = lams[:, None] * xs[None, :]
        mask = prod <= 1
        margin = 1 - c * prod**2 - grid
        worst = min(worst, float(np.min(margin[mask])))
    return worst


def fourth_derivative_constant(p: SpaceParams) -> float:
    """``max |d^4_lam phi| / (eta^2 |d^2_lam phi at 0|)`` on a grid."""
    worst = 0.0
    for eta in (0.1, 0.25, 0.5, 1.0, 2.0, 3.0):
        base = abs(phi_dd_lambda_at_zero(p, eta))
        for lam in np.linspace(0.0, 10.0, 21):
            worst = max(worst, abs(phi_d4_lambda(p, lam, eta)) / (eta**2 * base))
    return worst


def _c10(spaces):
    table, passed = {}, True
    for p in spaces:
        row = {
            "sup_abs_phi": sup_abs_phi(p),
            "gap_constant": lower_gap_constant(p),
            "decay_margin": quadratic_decay_margin(p),
            "decay_margin_2_3": quadratic_decay_margin(p, factor=2 / 3),
            "d4_constant": fourth_derivative_constant(p),
        }
        table[space_selector(p)] = row
        passed &= (row["sup_abs_phi"] <= 1 + 1e-12 and row["gap_constant"] > 0
                   and row["decay_margin"] >= 0 and math.isfinite(row["d4_constant"]))
    detail = "; ".join(
        f"{k} |phi|<={v['sup_abs_phi']:.12f}, gap {v['gap_constant']:.3g}, "
        f"decay margin {v['decay_margin']:.1e} (2/3: {v['decay_margin_2_3']:.1e}), C4 {v['d4_constant']:.3g}"
        for k, v in table.items())
    return passed, detail, table


def criterion_10(spaces=None):
    return _timed(10, "inequality suite", _c10, _spaces(spaces, SPECTRAL_SPACES))


CRITERIA = {k: globals()[f"criterion_{k}"] for k in range(1, 11)}


def run_all(spaces=None, only=None, echo=None) -> list[CriterionResult]:
    results = []
    for k, fn in CRITERIA.items():
        if only is not None and k not in only:
            continue
        res = fn(spaces)
        if echo is not None:
            echo(res.line())
        results.append(res)
    return results
