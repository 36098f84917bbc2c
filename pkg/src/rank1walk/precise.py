"""Plancherel inversion in ball arithmetic, for kernels too small for doubles.

Inverting a Gaussian-type transform at radius ``eta`` cancels terms of size
``exp(-rho^2 t)`` down to a result of size ``exp(-rho^2 t - eta^2/4t)``
(times the decay of ``phi``). Beyond a few standard deviations of the
weighted kernel this exceeds double precision, which matters on spaces with
large ``rho``. The same quadrature formula is evaluated here with Arb
(``python-flint``) at a working precision chosen per radius.
"""

from __future__ import annotations

import math
import threading
from functools import lru_cache
from typing import Callable

import numpy as np
from flint import acb, arb, ctx

from .geometry import SpaceParams

GUARD_BITS = 64
_CTX_LOCK = threading.Lock()


def _bits_for(dynamic_range_nats: float) -> int:
    return GUARD_BITS + int(math.ceil(dynamic_range_nats / math.log(2))) + 16


@lru_cache(maxsize=8)
def _legendre_rule(order: int, bits: int):
    with ctx.workprec(bits):
        pairs = [arb.legendre_p_root(order, k, weight=True) for k in range(order)]
    return tuple(x for x, _ in pairs), tuple(w for _, w in pairs)


def gl_rule(lo: float, hi: float, order: int, bits: int):
    """Gauss-Legendre nodes and weights on ``[lo, hi]`` as Arb balls."""
    xs, ws = _legendre_rule(order, bits)
    with ctx.workprec(bits):
        half = (arb(hi) - arb(lo)) / 2
        mid = (arb(hi) + arb(lo)) / 2
        return [mid + half * x for x in xs], [half * w for w in ws]


def plancherel_density_arb(p: SpaceParams, lam: arb) -> arb:
    il = acb(0, lam)
    c = (
        acb(2) ** (acb(p.rho) - il)
        * acb(arb(p.n) / 2).gamma()
        * il.gamma()
        / ((il + p.rho) / 2).gamma()
        / ((il + arb(p.m_alpha) / 2 + 1) / 2).gamma()
    )
    return 1 / (c.real**2 + c.imag**2)


def phi_arb(p: SpaceParams, lam: arb, eta: arb) -> arb:
    z = acb(-(eta.sinh() ** 2))
    a = acb(arb(p.rho) / 2, lam / 2)
    b = acb(arb(p.rho) / 2, -lam / 2)
    return z.hypgeom_2f1(a, b, acb(arb(p.n) / 2)).real


def inverse_constant_arb(p: SpaceParams) -> arb:
    """``2^(n-1) / (2 pi C_fwd)`` with ``C_fwd = area(S^(n-1)) / 2^m_2alpha``."""
    half_n = arb(p.n) / 2
    area = 2 * arb.pi() ** half_n / half_n.gamma()
    c_fwd = area / arb(2) ** p.m_2alpha
    return arb(2) ** (p.n - 1) / (2 * arb.pi() * c_fwd)


def gl_order_for(omega_half_width: float, bits: int) -> int:
    """Smallest order whose error ``(e*omega*H / 2N)^(2N)`` is below ``2^-bits``."""
    n = max(16, int(math.e * omega_half_width / 2))
    while 2 * n * math.log2(max(2 * n / (math.e * omega_half_width + 1e-300), 1.0)) < bits:
        n += 8
    return n


def inverse_transform_arb(p: SpaceParams, transform: Callable[[arb], arb], etas, lambda_max: float,
                          dynamic_range: Callable[[float], float], order: int | None = None) -> np.ndarray:
    """``C_inv * int_0^lambda_max F(lam) phi_lam(eta) |c(lam)|^-2 d lam`` per radius.

    ``dynamic_range(eta)`` estimates, in nats, how far the result at ``eta``
    sits below the integrand; that many bits (plus guard bits) are carried.
    Results are rounded to doubles at the end.
    """
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if etas.size == 0:
        return np.zeros(0)
    top_bits = max(_bits_for(dynamic_range(float(e))) for e in etas)
    if order is None:
        order = gl_order_for(float(etas.max()) * lambda_max / 2, top_bits)
    out = np.empty(etas.shape)
    with _CTX_LOCK, ctx.workprec(top_bits):
        nodes, weights = gl_rule(0.0, lambda_max, order, top_bits)
        pre = [w * transform(x) * plancherel_density_arb(p, x) for x, w in zip(nodes, weights)]
        c_inv = inverse_constant_arb(p)
    for j, e in enumerate(etas):
        bits = _bits_for(dynamic_range(float(e)))
        with _CTX_LOCK, ctx.workprec(bits):
            eta = arb(float(e))
            total = arb(0)
            for x, coef in zip(nodes, pre):
                total += coef * phi_arb(p, x, eta)
            out[j] = float((c_inv * total).mid())
    return out
