"""Compactly supported radial laws, scaling, characteristic function and variance."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import cumulative_simpson
from scipy.interpolate import PchipInterpolator

from .errors import DegenerateNormalizer, SupportViolation
from .geometry import SpaceParams, log_volume_weight, radial_measure_constant
from .quadrature import PanelRule, gauss_legendre_panels
from .transform import RadialGridFunction, SpectralFunction, forward_transform, weighted_density

VARIANCE_STEP = 1e-3
BUMP_PANELS = 8
BUMP_ORDER = 64


@dataclass(frozen=True)
class RadialLaw:
    """Probability law of the radial part of a bi-K-invariant step.

    ``density`` lives on the Gauss-Legendre nodes of ``rule``, which cover
    the part of ``[0, support_radius]`` where the density can be nonzero,
    and carries an exact evaluator. ``scale`` records the accumulated
    ``eps`` of :func:`scale_law`.
    """

    density: RadialGridFunction
    support_radius: float
    smoothness_certified: bool
    space: SpaceParams
    pdf: Callable = field(repr=False, compare=False)
    scale: float = 1.0

    @property
    def rule(self) -> PanelRule:
        return self.density.rule

    def __call__(self, eta):
        return self.pdf(eta)


def _bump_profile(center: float, width: float):
    def profile(eta):
        s = (np.asarray(eta, dtype=float) - center) / width
        inside = np.abs(s) < 1
        out = np.zeros(s.shape)
        with np.errstate(divide="ignore", over="ignore"):
            out[inside] = np.exp(-1.0 / (1.0 - s[inside] ** 2))
        return out
    return profile


def law_from_pdf(pdf: Callable, rule: PanelRule, support_radius: float, p: SpaceParams,
                 certified: bool = False) -> RadialLaw:
    """Normalize a non-negative profile against ``C_fwd * volume_weight`` on ``rule``."""
    raw = np.asarray(pdf(rule.nodes), dtype=float)
    if np.any(raw < 0):
        raise ValueError("density must be non-negative")
    mass = radial_measure_constant(p) * float(np.sum(weighted_density(p, rule.nodes, raw) * rule.weights))
    if not mass > 0 or not math.isfinite(mass):
        raise DegenerateNormalizer(f"profile has mass {mass!r}")

    def normalized(eta, _pdf=pdf, _m=mass):
        return np.asarray(_pdf(eta), dtype=float) / _m

    grid = RadialGridFunction(rule.nodes, raw / mass, p, evaluator=normalized, rule=rule)
    return RadialLaw(grid, float(support_radius), certified, p, normalized)


def make_bump(support_radius: float, center: float, width: float, p: SpaceParams,
              panels: int = BUMP_PANELS) -> RadialLaw:
    """Smooth bump ``exp(-1/(1-s^2))``, ``s = (eta-center)/width``, as a probability law."""
    if not (support_radius > 0 and width > 0):
        raise SupportViolation("support radius and width must be positive")
    lo, hi = center - width, center + width
    if not (0 < lo and hi < support_radius):
        raise SupportViolation(
            f"[{lo:g}, {hi:g}] is not inside (0, {support_radius:g})"
        )
    rule = gauss_legendre_panels(lo, hi, panels=panels, order=BUMP_ORDER)
    return law_from_pdf(_bump_profile(center, width), rule, support_radius, p, certified=True)


def law_from_samples(eta, values, p: SpaceParams, support_radius: float | None = None) -> RadialLaw:
    """Law from a tabulated density (e.g. a CSV file), interpolated monotonically.

    Accuracy is limited by the sampling; such laws are not certified smooth.
    """
    eta = np.asarray(eta, dtype=float)
    values = np.asarray(values, dtype=float)
    if eta.ndim != 1 or eta.size < 4 or np.any(np.diff(eta) <= 0):
        raise ValueError("need at least 4 strictly increasing eta samples")
    if np.any(values < 0):
        raise ValueError("density must be non-negative")
    nz = np.nonzero(values > 0)[0]
    if nz.size == 0:
        raise DegenerateNormalizer("density is identically zero")
    lo = eta[max(nz[0] - 1, 0)]
    hi = eta[min(nz[-1] + 1, eta.size - 1)]
    interp = PchipInterpolator(eta, values, extrapolate=False)

    def pdf(x, _lo=lo, _hi=hi):
        x = np.asarray(x, dtype=float)
        out = np.nan_to_num(interp(x), nan=0.0)
        return np.where((x < _lo) | (x > _hi), 0.0, np.maximum(out, 0.0))

    rule = gauss_legendre_panels(lo, hi, width=0.05, order=32)
    R = float(eta[-1]) if support_radius is None else float(support_radius)
    return law_from_pdf(pdf, rule, R, p, certified=False)


def default_bump(p: SpaceParams) -> RadialLaw:
    return make_bump(1.0, 0.5, 0.3, p)


def scale_law(Z: RadialLaw, eps: float, p: SpaceParams | None = None) -> RadialLaw:
    """Law of ``eps (x) Z``: radial coordinate multiplied by ``eps``.

    The density picks up the Jacobian of ``eta -> eta/eps`` against the
    curved volume weight. The quadrature nodes are the original ones times
    ``eps``, so integrals against the scaled law are exact reparametrizations.
    """
    p = Z.space if p is None else p
    if p != Z.space:
        raise ValueError("law belongs to a different space")
    if not eps > 0:
        raise ValueError("eps must be positive")
    if eps == 1:
        return Z
    base = Z.pdf

    def scaled(eta, _eps=eps):
        eta = np.asarray(eta, dtype=float)
        out = np.zeros(eta.shape)
        src = eta / _eps
        f = np.asarray(base(src), dtype=float)
        nz = (f != 0) & (eta > 0)
        log_ratio = log_volume_weight(p, src[nz]) - log_volume_weight(p, eta[nz])
        out[nz] = f[nz] * np.exp(log_ratio) / _eps
        return out

    old = Z.rule
    rule = gauss_legendre_panels(eps * old.lo, eps * old.hi, panels=old.panels, order=old.order)
    grid = RadialGridFunction(rule.nodes, scaled(rule.nodes), p, evaluator=scaled, rule=rule)
    return RadialLaw(grid, eps * Z.support_radius, Z.smoothness_certified, p, scaled, Z.scale * eps)


def law_transform(Z: RadialLaw, lambda_grid, **kw) -> SpectralFunction:
    return forward_transform(Z.density, Z.space, lambda_grid, **kw)


def char_fn_values(Z: RadialLaw, lams, check: bool = False) -> np.ndarray:
    """``Phi_Z`` at arbitrary real ``lams``; evaluated at ``|lam|`` so it is even by construction."""
    lams = np.abs(np.atleast_1d(np.asarray(lams, dtype=float)))
    uniq, inverse = np.unique(np.concatenate([[0.0], lams]), return_inverse=True)
    vals = law_transform(Z, uniq, check=check).values
    norm = vals[0]
    if not norm > 0:
        raise DegenerateNormalizer(f"transform at 0 is {norm!r}")
    return (vals / norm)[inverse[1:]]


def char_fn(Z: RadialLaw, p: SpaceParams, lambda_grid, check: bool = True) -> SpectralFunction:
    """Second-kind characteristic function ``f_Z^(lam) / f_Z^(0)``."""
    if p != Z.space:
        raise ValueError("law belongs to a different space")
    F = law_transform(Z, lambda_grid, check=check)
    norm = law_transform(Z, np.array([0.0]), check=False).values[0]
    if not norm > 0:
        raise DegenerateNormalizer(f"transform at 0 is {norm!r}")
    return F.with_values(F.values / norm)


def variance_from_char(values_at_h: float, h: float = VARIANCE_STEP) -> float:
    return 2.0 * (1.0 - values_at_h) / h**2


def variance(Z: RadialLaw, p: SpaceParams | None = None, h: float = VARIANCE_STEP) -> float:
    """``-Phi_Z''(0)`` by the symmetric second difference with step ``h``."""
    phi_h = char_fn_values(Z, [h])[0]
    return variance_from_char(phi_h, h)


def spectral_variance(F: SpectralFunction | Callable, h: float = VARIANCE_STEP) -> float:
    """Variance of a law given by a transform callable ``F(lams)`` (not normalized)."""
    vals = np.asarray(F(np.array([0.0, h])), dtype=float)
    if not vals[0] > 0:
        raise DegenerateNormalizer(f"transform at 0 is {vals[0]!r}")
    return variance_from_char(vals[1] / vals[0], h)


def second_moment(Z: RadialLaw) -> float:
    rule = Z.rule
    dens = weighted_density(Z.space, rule.nodes, Z.density.values)
    return radial_measure_constant(Z.space) * float(np.sum(rule.nodes**2 * dens * rule.weights))


def asymptotic_t(Z: RadialLaw, p: SpaceParams | None = None) -> float:
    """``t = (1/n) E[eta^2]`` under the law's normalized radial measure."""
    return second_moment(Z) / Z.space.n


def law_mass(Z: RadialLaw, rule: PanelRule | None = None) -> float:
    rule = Z.rule if rule is None else rule
    vals = Z.pdf(rule.nodes)
    return radial_measure_constant(Z.space) * float(np.sum(weighted_density(Z.space, rule.nodes, vals) * rule.weights))


@dataclass(frozen=True)
class RadialCDF:
    """Tabulated radial CDF with monotone interpolation and its inverse."""

    grid: np.ndarray
    cdf: np.ndarray

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        return np.interp(r, self.grid, self.cdf, left=0.0, right=1.0)

    def quantile(self, u):
        cdf, grid = _strict(self.cdf, self.grid)
        return PchipInterpolator(cdf, grid, extrapolate=False)(np.clip(u, cdf[0], cdf[-1]))


def _strict(cdf, grid):
    # drop flat stretches so the inverse is a function
    keep = np.concatenate([[True], np.diff(cdf) > 1e-13])
    return cdf[keep], grid[keep]


def tabulated_cdf(values, grid, p: SpaceParams, normalize: bool = True) -> RadialCDF:
    """CDF of ``C_fwd * values * weight`` on an increasing grid (Simpson, cumulative)."""
    grid = np.asarray(grid, dtype=float)
    dens = radial_measure_constant(p) * weighted_density(p, grid, np.asarray(values, dtype=float))
    cdf = cumulative_simpson(dens, x=grid, initial=0.0)
    cdf = np.maximum.accumulate(np.clip(cdf, 0.0, None))
    if normalize and cdf[-1] > 0:
        cdf = cdf / cdf[-1]
    return RadialCDF(grid, cdf)


def law_cdf(Z: RadialLaw, points: int = 4001) -> RadialCDF:
    lo, hi = Z.rule.lo, Z.rule.hi
    grid = np.linspace(lo, hi, points)
    return tabulated_cdf(Z.pdf(grid), grid, Z.space)
