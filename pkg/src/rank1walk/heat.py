"""Heat kernels by spectral inversion, and the closed form on real hyperbolic 3-space.

``psi`` is the kernel of ``d/dt = Delta`` (transform ``exp(-(lam^2+rho^2) t)``);
``Psi(t) = psi(t/2)`` is the kernel of ``d/dt = Delta/2``, the limit law of
the walks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SpaceParams, coth_drift
from .quadrature import PanelRule, gauss_legendre_panels
from .transform import (
    RadialGridFunction,
    eta_rule,
    inverse_transform,
    plancherel_density,
    spectral_from_function,
)

TAIL_TARGET = 1e-17


@dataclass(frozen=True)
class HeatKernelRequest:
    space: SpaceParams
    t: float
    eta_grid: np.ndarray | PanelRule | None = None
    lambda_max: float | None = None

    def __post_init__(self):
        if not self.t > 0:
            raise ValueError(f"t must be positive, got {self.t}")
        if self.lambda_max is not None and not self.lambda_max > 0:
            raise ValueError("lambda_max must be positive")


def heat_lambda_max(p: SpaceParams, t: float, tol: float = TAIL_TARGET) -> float:
    """Smallest integer ``L`` with ``exp(-L^2 t) * |c(L)|^-2 < tol``.

    The common factor ``exp(-rho^2 t)`` is left out so the truncation is
    relative to the size of the kernel, not absolute.
    """
    lam = 1.0
    log_tol = math.log(tol)
    while -lam * lam * t + math.log(plancherel_density(p, lam)) >= log_tol:
        lam += 1.0
    return lam


def heat_eta_max(p: SpaceParams, t: float) -> float:
    # weighted kernel is roughly Gaussian about 2 rho t with spread sqrt(2t)
    return 2 * p.rho * t + 7 * math.sqrt(2 * t) + 0.5


def double_precision_suffices(p: SpaceParams, t: float, eta_max: float) -> bool:
    """Whether rounding in the double inversion stays below ~1e-9 of the mass.

    Absolute rounding error is about ``1e-16 exp(-rho^2 t - rho eta)``; after
    multiplying by the volume weight it grows like ``exp(rho eta - rho^2 t)``.
    """
    return p.rho * eta_max - p.rho**2 * t <= 16.0


def extended_rule(p: SpaceParams, t: float, lam_top: float = 0.0) -> PanelRule:
    """Coarse quadrature for the extended path: the weighted kernel is a smooth bell.

    ``lam_top`` adds panels so a later forward transform up to that
    frequency stays resolved (``lam * half_width <= order / 3``).
    """
    eta_max = heat_eta_max(p, t)
    order = 24
    panels = max(4, math.ceil(eta_max / (6 * math.sqrt(2 * t))), math.ceil(1.5 * lam_top * eta_max / order))
    return gauss_legendre_panels(0.0, eta_max, panels=panels, order=order)


def _psi_extended(p: SpaceParams, t: float, etas: np.ndarray) -> np.ndarray:
    from flint import arb

    from .precise import _bits_for, inverse_transform_arb

    def dynamic_range(eta):
        return eta * eta / (4 * t) + 10.0

    bits = _bits_for(dynamic_range(float(np.max(etas))))
    lam = 1.0
    while lam * lam * t - math.log(plancherel_density(p, lam)) < bits * math.log(2):
        lam += 1.0
    at = arb(t)
    rho2 = arb(p.rho) ** 2

    def transform(x):
        return (-(x * x + rho2) * at).exp()

    return inverse_transform_arb(p, transform, etas, lam, dynamic_range)


def heat_transform(p: SpaceParams, t: float, lams):
    lams = np.asarray(lams, dtype=float)
    return np.exp(-(lams**2 + p.rho**2) * t)


def psi(p: SpaceParams, t: float, eta_grid=None, lambda_max: float | None = None,
        precision: str = "auto") -> RadialGridFunction:
    """Heat kernel of ``Delta`` at time ``t`` on ``eta_grid`` (default: a quadrature rule).

    ``precision="auto"`` falls back to ball arithmetic when the grid reaches
    radii where double-precision inversion loses the kernel to rounding.
    """
    req = HeatKernelRequest(p, float(t), eta_grid, lambda_max)
    if precision not in ("auto", "double", "extended"):
        raise ValueError(f"unknown precision {precision!r}")
    grid = eta_grid
    if grid is None:
        eta_max = heat_eta_max(p, req.t)
        if precision == "double" or (precision == "auto" and double_precision_suffices(p, req.t, eta_max)):
            grid = eta_rule(eta_max)
        else:
            grid = extended_rule(p, req.t)
    if isinstance(grid, PanelRule):
        etas, weights, rule = grid.nodes, grid.weights, grid
    else:
        etas, weights, rule = np.atleast_1d(np.asarray(grid, dtype=float)), None, None
    extended = precision == "extended" or (
        precision == "auto" and etas.size and not double_precision_suffices(p, req.t, float(etas.max()))
    )
    if extended:
        return RadialGridFunction(etas, _psi_extended(p, req.t, etas), p, weights, rule=rule)
    lam_max = req.lambda_max or heat_lambda_max(p, req.t)
    F = spectral_from_function(p, lam_max, lambda lam: heat_transform(p, req.t, lam))
    return inverse_transform(F, p, grid)


def Psi(p: SpaceParams, t: float, eta_grid=None, lambda_max: float | None = None,
        precision: str = "auto") -> RadialGridFunction:
    """Limit law of the walks: ``psi(t/2)``."""
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    return psi(p, t / 2, eta_grid, lambda_max, precision)


def psi_h3_closed_form(t: float, eta):
    """``exp(-t/2) (2 pi t)^(-3/2) (eta/sinh eta) exp(-eta^2/(2t))``.

    This is the kernel of ``d/dt = Delta/2`` on real hyperbolic 3-space,
    i.e. ``Psi(t)`` in this package's naming.
    """
    if not t > 0:
        raise ValueError(f"t must be positive, got {t}")
    eta = np.asarray(eta, dtype=float)
    ratio = np.ones_like(eta)
    nz = eta != 0
    ratio[nz] = eta[nz] / np.sinh(eta[nz])
    out = math.exp(-t / 2) / (2 * math.pi * t) ** 1.5 * ratio * np.exp(-(eta**2) / (2 * t))
    return out if out.ndim else float(out)


def heat_residual(p: SpaceParams, t: float, eta_grid=None, dt: float = 1e-3) -> float:
    """Sup of ``|Delta Psi / 2 - d Psi/dt|`` on the interior of a uniform grid."""
    if t < 0.1:
        raise ValueError("heat_residual needs t >= 0.1")
    if eta_grid is None:
        eta_grid = np.arange(0.0, heat_eta_max(p, t / 2) / 2, 0.01)
    eta = np.asarray(eta_grid, dtype=float)
    h = np.diff(eta)
    if eta.size < 3 or not np.allclose(h, h[0], rtol=1e-9, atol=0):
        raise ValueError("heat_residual needs a uniform grid with at least 3 points")
    h = h[0]
    lam_max = heat_lambda_max(p, (t - dt) / 2)
    now = Psi(p, t, eta, lam_max).values
    later = Psi(p, t + dt, eta, lam_max).values
    earlier = Psi(p, t - dt, eta, lam_max).values
    d2 = (now[2:] - 2 * now[1:-1] + now[:-2]) / h**2
    d1 = (now[2:] - now[:-2]) / (2 * h)
    inner = eta[1:-1]
    mask = inner > 0
    lap = d2 + coth_drift(p, np.where(mask, inner, 1.0)) * d1
    dtpsi = (later[1:-1] - earlier[1:-1]) / (2 * dt)
    res = np.abs(0.5 * lap - dtpsi)[mask]
    return float(res.max()) if res.size else 0.0
