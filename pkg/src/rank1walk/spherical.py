"""Elementary spherical functions phi_lambda(exp(eta H0)).

Two evaluation routes are combined:

* the Gauss hypergeometric series ``2F1(a, b; n/2; -sinh(eta)^2)`` with
  ``a, b = (rho +- i lambda)/2``, used close to the origin;
* the radial eigenvalue ODE
  ``u'' + (A'/A) u' + (lambda^2 + rho^2) u = 0``, ``u(0) = 1``,
  integrated from a small launch radius with series initial data.

The ODE is integrated for all requested lambdas at once, in the rescaled
unknown ``v = exp(rho eta) u`` whose amplitude stays bounded for large eta.
"""

from __future__ import annotations

import hashlib
import threading
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np
from scipy.integrate import solve_ivp

from .errors import IntegratorFailure, NoConvergence, SeriesDiverged
from .geometry import SpaceParams, coth_drift

MAX_SERIES_TERMS = 10_000
ASINH_ONE = float(np.arcsinh(1.0))


@dataclass(frozen=True)
class SphericalEvalConfig:
    series_cutoff_eta: float = 0.5
    series_tol: float = 1e-17
    ode_step: float = np.inf
    ode_tol: float = 1e-11
    launch_eta: float = 0.1
    # series terms grow like exp(lambda sinh eta) before they alternate away
    series_max_arg: float = 6.0

    def __post_init__(self):
        if not 0 < self.series_cutoff_eta < ASINH_ONE:
            raise ValueError("series_cutoff_eta must lie in (0, asinh(1))")
        if min(self.series_tol, self.ode_step, self.ode_tol, self.launch_eta, self.series_max_arg) <= 0:
            raise ValueError("tolerances and steps must be positive")


DEFAULT_CONFIG = SphericalEvalConfig()


def hypergeometric_parameters(p: SpaceParams, lam: float):
    """Return ``(a, b, c)`` of the hypergeometric representation."""
    a = 0.5 * (p.rho + 1j * lam)
    b = 0.5 * (p.rho - 1j * lam)
    return a, b, p.n / 2


def _series(p: SpaceParams, lam, eta, tol, derivative=False):
    lam = np.asarray(lam, dtype=float)
    eta = np.asarray(eta, dtype=float)
    lam2, eta = np.broadcast_arrays(lam ** 2 / 4, eta)
    z = -np.sinh(eta) ** 2
    half_rho = p.rho / 2
    half_n = p.n / 2
    coef = np.ones(z.shape)
    zpow = np.ones(z.shape)
    value = np.ones(z.shape)
    slope = np.zeros(z.shape)
    dz = -np.sinh(2 * eta)
    for q in range(MAX_SERIES_TERMS):
        # (a)_q (b)_q is real because a and b are complex conjugates
        ratio = ((half_rho + q) ** 2 + lam2) / ((half_n + q) * (q + 1))
        if derivative:
            d_term = coef * ratio * (q + 1) * zpow * dz
            slope += d_term
        coef = coef * ratio
        zpow = zpow * z
        term = coef * zpow
        value += term
        small = np.abs(term) < tol
        if derivative:
            small &= np.abs(d_term) < tol
        if np.all(small & (np.abs(ratio * z) < 1)):
            break
    else:
        raise NoConvergence(f"hypergeometric series needed more than {MAX_SERIES_TERMS} terms")
    return (value, slope) if derivative else value


def phi_series(p: SpaceParams, lam, eta, cfg: SphericalEvalConfig = DEFAULT_CONFIG):
    """Hypergeometric-series value of phi_lambda(eta).

    Valid while ``|z| = sinh(eta)^2 < 1``; :func:`phi` only uses it below
    ``cfg.series_cutoff_eta`` where it converges fast.
    """
    eta_arr = np.asarray(eta, dtype=float)
    if np.any(eta_arr >= ASINH_ONE):
        raise SeriesDiverged(
            f"series used at eta={eta_arr.max():g}, outside its disc of convergence (eta < {ASINH_ONE:.6f})"
        )
    if np.any(eta_arr < 0):
        raise ValueError("eta must be non-negative")
    out = _series(p, lam, eta_arr, cfg.series_tol)
    return out if out.ndim else float(out)


def phi_series_with_slope(p: SpaceParams, lam, eta, cfg: SphericalEvalConfig = DEFAULT_CONFIG):
    """Series value and eta-derivative, used to launch the ODE."""
    return _series(p, lam, eta, cfg.series_tol, derivative=True)


def _amplitude(p: SpaceParams, lam):
    # asymptotically exp(rho eta) phi_lambda oscillates with amplitude 2|c(lambda)|
    from .transform import c_function_abs

    lam = np.abs(np.asarray(lam, float))
    amp = np.ones_like(lam)
    pos = lam > 1e-8
    amp[pos] = np.minimum(1.0, 2 * c_function_abs(p, lam[pos]))
    return amp


def launch_radius(lam_top: float, cfg: SphericalEvalConfig = DEFAULT_CONFIG) -> float:
    # launch where lambda * sinh(eta0) <= 1, so the series is cancellation-free
    return min(cfg.launch_eta, float(np.arcsinh(1.0 / max(lam_top, 1.0))))


def _integrate_ode(p: SpaceParams, lams, etas, cfg: SphericalEvalConfig, eta0: float | None = None):
    """phi_lambda(eta) for every lambda in ``lams`` and sorted ``etas > eta0``."""
    lams = np.asarray(lams, dtype=float)
    etas = np.asarray(etas, dtype=float)
    if eta0 is None:
        eta0 = launch_radius(float(np.max(np.abs(lams))) if lams.size else 0.0, cfg)
    if etas.size == 0:
        return np.empty((lams.size, 0)), eta0
    if etas[0] <= eta0:
        raise ValueError("ODE evaluation points must lie beyond the launch radius")
    rho = p.rho
    u0, du0 = phi_series_with_slope(p, lams, np.full(lams.shape, eta0), cfg)
    scale = np.exp(rho * eta0)
    v0 = scale * u0
    dv0 = scale * (du0 + rho * u0)
    big_l = lams.size
    stiff = lams ** 2 + 2 * rho ** 2

    def rhs(x, y):
        v = y[:big_l]
        dv = y[big_l:]
        drift = float(coth_drift(p, x))
        return np.concatenate([dv, -(drift - 2 * rho) * dv - (stiff - rho * drift) * v])

    amp = _amplitude(p, lams)
    atol = 1e-2 * cfg.ode_tol * np.concatenate([amp, amp * np.maximum(np.abs(lams), 1.0)])
    sol = solve_ivp(
        rhs, (eta0, float(etas[-1])), np.concatenate([v0, dv0]), method="DOP853",
        rtol=cfg.ode_tol, atol=atol, t_eval=etas, max_step=cfg.ode_step,
    )
    if sol.status != 0 or sol.y.shape[1] != etas.size:
        raise IntegratorFailure(f"radial ODE integration failed: {sol.message}")
    return np.exp(-rho * etas)[None, :] * sol.y[:big_l], eta0


def phi_ode(p: SpaceParams, lam, eta, cfg: SphericalEvalConfig = DEFAULT_CONFIG):
    """ODE value of phi_lambda at one or more radii ``eta > 0`` (single lambda)."""
    eta_arr = np.atleast_1d(np.asarray(eta, dtype=float))
    if np.any(eta_arr <= 0):
        raise ValueError("phi_ode needs eta > 0")
    order = np.argsort(eta_arr)
    sorted_eta = eta_arr[order]
    lam_arr = np.atleast_1d(float(lam))
    eta0 = launch_radius(abs(lam_arr[0]), cfg)
    out = np.empty(sorted_eta.size)
    near = sorted_eta <= eta0
    if near.any():
        out[near] = _series(p, lam_arr[0], sorted_eta[near], cfg.series_tol)
    if (~near).any():
        uniq, inverse = np.unique(sorted_eta[~near], return_inverse=True)
        vals, _ = _integrate_ode(p, lam_arr, uniq, cfg, eta0)
        out[~near] = vals[0][inverse]
    result = np.empty_like(out)
    result[order] = out
    return result if np.ndim(eta) else float(result[0])


def _series_mask(lams, etas, cfg):
    return (etas[None, :] < cfg.series_cutoff_eta) & (
        np.abs(lams)[:, None] * np.sinh(etas)[None, :] <= cfg.series_max_arg
    )


class _PhiCache:
    """Small LRU cache of phi matrices keyed by (space, config, grids)."""

    def __init__(self, maxsize=12):
        self.maxsize = maxsize
        self._data: OrderedDict[tuple, np.ndarray] = OrderedDict()
        self._lock = threading.Lock()

    @staticmethod
    def key(p, lams, etas, cfg):
        h = hashlib.sha1()
        h.update(np.ascontiguousarray(lams, dtype=float).tobytes())
        h.update(b"|")
        h.update(np.ascontiguousarray(etas, dtype=float).tobytes())
        return (p, cfg, lams.size, etas.size, h.hexdigest())

    def get(self, key):
        with self._lock:
            val = self._data.get(key)
            if val is not None:
                self._data.move_to_end(key)
            return val

    def put(self, key, val):
        with self._lock:
            self._data[key] = val
            self._data.move_to_end(key)
            while len(self._data) > self.maxsize:
                self._data.popitem(last=False)

    def clear(self):
        with self._lock:
            self._data.clear()


PHI_CACHE = _PhiCache()


def phi_grid(p: SpaceParams, lams, etas, cfg: SphericalEvalConfig = DEFAULT_CONFIG, cache=True):
    """Matrix ``out[i, j] = phi_{lams[i]}(etas[j])``.

    Entries close to the origin come from the series; all others from one
    vectorized ODE sweep. Only ``lambda**2`` enters, so the matrix is exactly
    even in lambda.
    """
    lams = np.atleast_1d(np.asarray(lams, dtype=float))
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if np.any(etas < 0):
        raise ValueError("eta must be non-negative")
    key = _PhiCache.key(p, lams, etas, cfg) if cache else None
    if cache:
        hit = PHI_CACHE.get(key)
        if hit is not None:
            return hit
    abs_l = np.abs(lams)
    out = np.empty((lams.size, etas.size))
    use_series = _series_mask(abs_l, etas, cfg)
    eta0 = launch_radius(float(abs_l.max()) if abs_l.size else 0.0, cfg)
    use_series |= (etas <= eta0)[None, :]
    need_ode = ~use_series
    if use_series.any():
        li, ej = np.nonzero(use_series)
        out[li, ej] = _series(p, abs_l[li], etas[ej], cfg.series_tol)
    if need_ode.any():
        rows = np.flatnonzero(need_ode.any(axis=1))
        cols = np.flatnonzero(need_ode.any(axis=0))
        uniq, inverse = np.unique(etas[cols], return_inverse=True)
        vals, _ = _integrate_ode(p, abs_l[rows], uniq, cfg, eta0)
        block = vals[:, inverse]
        sub = need_ode[np.ix_(rows, cols)]
        target = out[np.ix_(rows, cols)]
        target[sub] = block[sub]
        out[np.ix_(rows, cols)] = target
    out.flags.writeable = False
    if cache:
        PHI_CACHE.put(key, out)
    return out


def phi(p: SpaceParams, lam, eta, cfg: SphericalEvalConfig = DEFAULT_CONFIG):
    """phi_lambda(eta): series near the origin, ODE elsewhere.

    Scalars in, scalar out; array ``eta`` gives an array for one lambda.
    """
    eta_arr = np.atleast_1d(np.asarray(eta, dtype=float))
    if np.any(eta_arr < 0):
        raise ValueError("eta must be non-negative")
    row = phi_grid(p, [float(lam)], eta_arr, cfg, cache=False)[0]
    return row.copy() if np.ndim(eta) else float(row[0])


def phi_dd_lambda_at_zero(p: SpaceParams, eta, h: float = 1e-3,
                          cfg: SphericalEvalConfig = DEFAULT_CONFIG):
    """Second lambda-derivative of phi_lambda(eta) at lambda = 0 (central difference)."""
    eta_arr = np.atleast_1d(np.asarray(eta, dtype=float))
    grid = phi_grid(p, [0.0, h], eta_arr, cfg, cache=False)
    # phi is even in lambda, so phi(-h) = phi(h)
    out = 2.0 * (grid[1] - grid[0]) / h ** 2
    return out if np.ndim(eta) else float(out[0])


def phi_dd_eta_at_zero(p: SpaceParams, lam, h: float = 1e-3,
                       cfg: SphericalEvalConfig = DEFAULT_CONFIG) -> float:
    """Second eta-derivative of phi_lambda at the origin (central difference).

    phi_lambda is an even function of eta, so the stencil h, 0, -h collapses
    to ``2 (phi(h) - 1) / h**2``.
    """
    val = phi(p, lam, h, cfg)
    return 2.0 * (val - 1.0) / h ** 2


def phi_d4_lambda(p: SpaceParams, lam, eta, h: float | None = None,
                  cfg: SphericalEvalConfig = DEFAULT_CONFIG):
    """Fourth lambda-derivative of phi_lambda(eta) by a five-point stencil.

    The lambda scale of phi is ``1/eta``, so the default step is ``0.05/eta``.
    """
    eta = float(eta)
    if h is None:
        h = 0.05 / max(eta, 1e-3)
    lams = lam + h * np.arange(-2, 3)
    row = phi_grid(p, lams, [eta], cfg, cache=False)[:, 0]
    return float((row[0] - 4 * row[1] + 6 * row[2] - 4 * row[3] + row[4]) / h ** 4)
