"""Exact densities of the renormalized walks and local-limit error metrics.

``S_N`` is the non-Euclidean sum of N copies of ``(1/sqrt N) (x) Z``; its
transform is the N-th power of the scaled law's transform, and its density
follows by Plancherel inversion. ``S_N bar`` uses ``1/N`` instead.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import InsufficientData, TailNotNegligible
from .geometry import SpaceParams
from .heat import Psi
from .laws import RadialLaw, asymptotic_t, law_transform, scale_law, variance_from_char
from .quadrature import PanelRule, gauss_legendre_panels
from .spherical import SphericalEvalConfig
from .transform import (
    RadialGridFunction,
    SpectralFunction,
    inverse_transform,
    lambda_rule,
    plancherel_density,
    radial_mass,
)

LAMBDA_TARGET = 1e-13
LAMBDA_CEILING = 8192.0
MIN_T = 0.05
DEFAULT_N_LIST = (4, 8, 16, 32, 64, 128, 256)
SUP_STEP = 0.01
SCAN_SAMPLES = 256
SCAN_CONFIG = SphericalEvalConfig(ode_tol=1e-13)


@dataclass
class WalkReport:
    N_list: list[int]
    sup_errors: list[float]
    variance_gaps: list[float]
    fitted_rate: float
    t: float
    masses: list[float] = field(default_factory=list)
    lambda_max: list[float] = field(default_factory=list)

    def __post_init__(self):
        n = len(self.N_list)
        if len(self.sup_errors) != n or len(self.variance_gaps) != n:
            raise ValueError("report lists must have equal length")
        if any(b <= a for a, b in zip(self.N_list, self.N_list[1:])):
            raise ValueError("N_list must be increasing")

    def to_dict(self) -> dict:
        return asdict(self)


def choose_lambda_max(Zs: RadialLaw, N: int, target: float = LAMBDA_TARGET,
                      ceiling: float = LAMBDA_CEILING, cfg: SphericalEvalConfig = SCAN_CONFIG) -> float:
    """Smallest ``L`` past which ``|F(lam)|^N |c(lam)|^-2`` stays below ``target``.

    Scans ``[0, L]`` with at most 256 samples (spacing no finer than 0.5)
    and doubles ``L`` until every sample in the upper half is below target,
    so isolated zeros of ``F`` cannot end the search early. The scan runs
    at a tight ODE tolerance: integration noise times ``|c|^-2`` would
    otherwise look like an undecayed tail at large ``lam``.
    """
    p = Zs.space
    top = 16.0
    while top <= ceiling:
        step = max(0.5, top / SCAN_SAMPLES)
        lams = np.arange(step, top + step / 2, step)
        F = law_transform(Zs, lams, check=False, cfg=cfg).values
        with np.errstate(over="ignore", under="ignore"):
            size = np.abs(F) ** N * plancherel_density(p, lams)
        above = np.nonzero(size >= target)[0]
        last = float(lams[above[-1]]) + 2 * step if above.size else 0.0
        if last <= top / 2 + 2 * step:
            return max(4.0, float(math.ceil(last)))
        top *= 2
    raise TailNotNegligible(f"transform power does not decay below {target:g} by lambda={ceiling:g}")


def product_transform(Z: RadialLaw, eps: float, N: int, lambda_max: float | None = None,
                      check: bool = True) -> SpectralFunction:
    """``(transform of eps (x) Z)^N`` on the default lambda rule."""
    Zs = scale_law(Z, eps)
    lam_max = choose_lambda_max(Zs, N) if lambda_max is None else lambda_max
    F = law_transform(Zs, lambda_rule(lam_max), check=check)
    return F.with_values(F.values ** N)


def sup_grid(Z: RadialLaw, t: float | None = None, step: float = SUP_STEP) -> np.ndarray:
    """Uniform grid on ``[0, 6 sqrt(t) + R]`` used for sup-norm comparisons."""
    t = asymptotic_t(Z) if t is None else t
    top = 6 * math.sqrt(t) + Z.support_radius
    return np.linspace(0.0, top, int(round(top / step)) + 1)


def mass_rule(top: float) -> PanelRule:
    return gauss_legendre_panels(0.0, top, width=0.5, order=32)


def walk_density(Z: RadialLaw, N: int, p: SpaceParams | None = None, eta_grid=None,
                 lambda_max: float | None = None) -> RadialGridFunction:
    """Density of ``S_N``.

    For ``N = 1`` the law's own density is returned: ``S_1 = Z`` exactly,
    and the slowly decaying transform of a narrow bump makes the spectral
    round trip needlessly expensive.
    """
    p = Z.space if p is None else p
    _check_N(N)
    grid = sup_grid(Z) if eta_grid is None else eta_grid
    if N == 1:
        etas = grid.nodes if isinstance(grid, PanelRule) else np.asarray(grid, dtype=float)
        weights = grid.weights if isinstance(grid, PanelRule) else None
        rule = grid if isinstance(grid, PanelRule) else None
        return RadialGridFunction(etas, Z.pdf(etas), p, weights, evaluator=Z.pdf, rule=rule)
    FN = product_transform(Z, 1.0 / math.sqrt(N), N, lambda_max)
    return inverse_transform(FN, p, grid)


def lln_density(Z: RadialLaw, N: int, p: SpaceParams | None = None, eta_grid=None,
                lambda_max: float | None = None) -> RadialGridFunction:
    """Density of ``S_N bar``, the sum of ``N`` copies of ``(1/N) (x) Z``."""
    p = Z.space if p is None else p
    _check_N(N)
    grid = mass_rule(Z.support_radius) if eta_grid is None else eta_grid
    if N == 1:
        return walk_density(Z, 1, p, grid)
    FN = product_transform(Z, 1.0 / N, N, lambda_max)
    return inverse_transform(FN, p, grid)


def mass_within(f: RadialGridFunction, p: SpaceParams, radius: float) -> float:
    """``C_fwd * int_0^radius f w`` using the exact evaluator or by re-inversion."""
    if f.evaluator is None:
        raise ValueError("mass_within needs a density with an evaluator")
    rule = gauss_legendre_panels(0.0, radius, width=0.05, order=32)
    g = RadialGridFunction(rule.nodes, f.at(rule.nodes), p, rule=rule)
    return radial_mass(g, p)


def lln_mass_within(Z: RadialLaw, N: int, radius: float = 0.1) -> float:
    """Probability that ``S_N bar`` lies within ``radius`` of the origin."""
    rule = gauss_legendre_panels(0.0, radius, width=0.05, order=32)
    f = lln_density(Z, N, eta_grid=rule)
    return radial_mass(f, Z.space)


def walk_mass(Z: RadialLaw, N: int) -> float:
    top = 6 * math.sqrt(asymptotic_t(Z)) + 2 * Z.support_radius
    return radial_mass(walk_density(Z, N, eta_grid=mass_rule(top)), Z.space)


def llt_error(Z: RadialLaw, N: int, p: SpaceParams | None = None, eta_grid=None,
              t: float | None = None) -> float:
    """``sup_eta |f_{S_N}(eta) - Psi(t, eta)|`` with ``t = asymptotic_t(Z)``."""
    p = Z.space if p is None else p
    t = asymptotic_t(Z) if t is None else t
    if t < MIN_T:
        raise ValueError(f"asymptotic t = {t:.3g} is below the supported minimum {MIN_T}")
    grid = sup_grid(Z, t) if eta_grid is None else np.asarray(eta_grid, dtype=float)
    f = walk_density(Z, N, p, grid).values
    g = Psi(p, t, grid).values
    return float(np.max(np.abs(f - g)))


def integrated_difference(Z: RadialLaw, N: int, p: SpaceParams | None = None) -> float:
    """``C_fwd * int |f_{S_N} - Psi(t)| w d eta``, the total-variation-type CLT gap."""
    p = Z.space if p is None else p
    t = asymptotic_t(Z)
    rule = mass_rule(6 * math.sqrt(t) + 2 * Z.support_radius)
    f = walk_density(Z, N, p, rule).values
    g = Psi(p, t, rule).values
    diff = RadialGridFunction(rule.nodes, np.abs(f - g), p, rule=rule)
    return radial_mass(diff, p)


def walk_variance(Z: RadialLaw, N: int, h: float = 1e-3) -> float:
    """Variance of ``S_N`` from the spectral product (normalized at 0)."""
    Zs = scale_law(Z, 1.0 / math.sqrt(N))
    vals = law_transform(Zs, np.array([0.0, h]), check=False).values
    return variance_from_char((vals[1] / vals[0]) ** N, h)


def rate_fit(report: WalkReport) -> float:
    """Least-squares slope of ``log(sup_error)`` against ``log(N)``."""
    Ns = np.asarray(report.N_list, dtype=float)
    errs = np.asarray(report.sup_errors, dtype=float)
    if Ns.size < 4 or Ns.max() / Ns.min() < 4:
        raise InsufficientData("rate_fit needs at least 4 values of N spanning two octaves")
    if np.any(errs <= 0) or not np.all(np.isfinite(errs)):
        raise InsufficientData("sup errors must be positive and finite")
    slope = np.polyfit(np.log(Ns), np.log(errs), 1)[0]
    return float(slope)


def walk_report(Z: RadialLaw, N_list=DEFAULT_N_LIST, p: SpaceParams | None = None) -> WalkReport:
    p = Z.space if p is None else p
    N_list = [int(n) for n in N_list]
    t = asymptotic_t(Z)
    grid = sup_grid(Z, t)
    ref = Psi(p, t, grid).values
    errors, gaps, lam_used = [], [], []
    for N in N_list:
        _check_N(N)
        if N == 1:
            f = walk_density(Z, 1, p, grid).values
            lam_used.append(float("nan"))
        else:
            Zs = scale_law(Z, 1.0 / math.sqrt(N))
            lam = choose_lambda_max(Zs, N)
            f = walk_density(Z, N, p, grid, lambda_max=lam).values
            lam_used.append(lam)
        errors.append(float(np.max(np.abs(f - ref))))
        gaps.append(walk_variance(Z, N) - t)
    report = WalkReport(N_list, errors, gaps, float("nan"), t, lambda_max=lam_used)
    try:
        report.fitted_rate = rate_fit(report)
    except InsufficientData:
        pass
    return report


def llt_shape(t: float, n: int) -> float:
    """t-dependence of the local limit bound: ``t^-2 min(t^-1/2, t^-n/2) + 1``."""
    return t**-2 * min(t**-0.5, t ** (-n / 2)) + 1.0


def _check_N(N: int) -> None:
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
