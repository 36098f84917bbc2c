"""Matrix-group random walks on real and complex hyperbolic space.

Points are cosets ``g K`` of ``SO(1,n)`` or ``SU(1,2)`` acting on the form
``J = diag(-1, 1, ..., 1)``; the non-Euclidean sum is the matrix product and
the radial coordinate is ``arccosh |g_00|``. Products are computed for whole
batches of walkers at once.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import FormViolated
from .geometry import SpaceParams
from .laws import RadialLaw, law_cdf, tabulated_cdf
from .transform import RadialGridFunction

FORM_TOL = 1e-8
REORTHO_EVERY = 64
BLOCK_SIZE = 4096
SMALL_RADIUS = 1e-9


class Scaling(enum.Enum):
    InvSqrtN = "inv-sqrt-n"
    InvN = "inv-n"

    def factor(self, N: int) -> float:
        return 1 / math.sqrt(N) if self is Scaling.InvSqrtN else 1 / N


@dataclass(frozen=True)
class GroupModel:
    """``field`` is "real" for SO(1,n) and "complex" for SU(1,k)."""

    field: str
    size: int

    @property
    def dtype(self):
        return np.float64 if self.field == "real" else np.complex128

    @property
    def form(self) -> np.ndarray:
        J = np.eye(self.size)
        J[0, 0] = -1
        return J


def group_model(p: SpaceParams) -> GroupModel:
    if p.m_2alpha == 0:
        return GroupModel("real", p.n + 1)
    if p.m_2alpha == 1 and p.m_alpha % 2 == 0:
        return GroupModel("complex", p.m_alpha // 2 + 2)
    raise ValueError(f"no matrix model for multiplicities {p.label}")


@dataclass(frozen=True)
class GroupElement:
    matrix: np.ndarray
    model: GroupModel

    def form_residual(self) -> float:
        return float(np.max(form_residual(self.matrix, self.model)))

    def check(self, tol: float = FORM_TOL) -> GroupElement:
        res = self.form_residual()
        if res > tol:
            raise FormViolated(f"form residual {res:.2e} exceeds {tol:g}")
        return self


@dataclass(frozen=True)
class SampleBatch:
    radial_distances: np.ndarray
    N: int
    seed: int
    scaling: Scaling = Scaling.InvSqrtN

    def __post_init__(self):
        d = np.asarray(self.radial_distances)
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("radial distances must be finite and non-negative")


def form_residual(mats: np.ndarray, model: GroupModel) -> np.ndarray:
    """``|g* J g - J|_F / max(1, |g|_F^2)`` per matrix (relative to the entry scale)."""
    J = model.form
    gh = np.conj(np.swapaxes(mats, -1, -2))
    res = np.linalg.norm(gh @ J @ mats - J, axis=(-2, -1))
    scale = np.maximum(1.0, np.linalg.norm(mats, axis=(-2, -1)) ** 2)
    return res / scale


def _boosts(model: GroupModel, eta: np.ndarray) -> np.ndarray:
    eta = np.asarray(eta, dtype=float)
    out = np.zeros(eta.shape + (model.size, model.size), dtype=model.dtype)
    idx = np.arange(2, model.size)
    out[..., idx, idx] = 1
    c, s = np.cosh(eta), np.sinh(eta)
    out[..., 0, 0] = c
    out[..., 1, 1] = c
    out[..., 0, 1] = s
    out[..., 1, 0] = s
    return out


def embed_radial(model: GroupModel | SpaceParams, eta: float) -> GroupElement:
    """The boost ``exp(eta H0)`` in the first coordinate plane."""
    model = model if isinstance(model, GroupModel) else group_model(model)
    if eta < 0:
        raise ValueError("eta must be non-negative")
    return GroupElement(_boosts(model, np.asarray(eta, float)), model)


def _haar_k(model: GroupModel, rng: np.random.Generator, count: int) -> np.ndarray:
    m = model.size - 1
    if model.field == "real":
        A = rng.standard_normal((count, m, m))
    else:
        A = (rng.standard_normal((count, m, m)) + 1j * rng.standard_normal((count, m, m))) / math.sqrt(2)
    Q, R = np.linalg.qr(A)
    d = np.diagonal(R, axis1=-2, axis2=-1)
    ph = d / np.abs(d)
    Q = Q * ph[:, None, :]
    out = np.zeros((count, m + 1, m + 1), dtype=model.dtype)
    out[:, 1:, 1:] = Q
    det = np.linalg.det(Q)
    if model.field == "real":
        # move O(n) into SO(n) by flipping one column; Haar measure is preserved
        flip = det < 0
        out[flip, 1:, 1] *= -1
        out[:, 0, 0] = 1
    else:
        out[:, 0, 0] = np.conj(det / np.abs(det))
    return out


def random_k(model: GroupModel | SpaceParams, rng: np.random.Generator) -> GroupElement:
    """Haar-random element of K: ``blockdiag(u, Q)`` fixing the base point."""
    model = model if isinstance(model, GroupModel) else group_model(model)
    return GroupElement(_haar_k(model, rng, 1)[0], model)


def _radial(mats: np.ndarray) -> np.ndarray:
    a = np.abs(mats[..., 0, 0])
    tail = np.linalg.norm(mats[..., 1:, 0], axis=-1)
    # sinh c = |g_{r0}|; use it where arccosh is ill-conditioned
    return np.where(a < 2.0, np.arcsinh(tail), np.arccosh(np.maximum(a, 1.0)))


def radial_part(g: GroupElement) -> float:
    """Cartan radial coordinate ``c(g) = arccosh |g_00|``."""
    g.check()
    return float(_radial(g.matrix))


def oplus(g: GroupElement, h: GroupElement) -> GroupElement:
    if g.model != h.model:
        raise ValueError("elements belong to different groups")
    return GroupElement(g.matrix @ h.matrix, g.model).check()


def _boost_along(model: GroupModel, u: np.ndarray, s: float) -> np.ndarray:
    d = model.size
    B = np.eye(d, dtype=model.dtype)
    B[0, 0] = math.cosh(s)
    B[0, 1:] = math.sinh(s) * np.conj(u)
    B[1:, 0] = math.sinh(s) * u
    B[1:, 1:] += (math.cosh(s) - 1) * np.outer(u, np.conj(u))
    return B


def otimes_scale(v: float, g: GroupElement) -> GroupElement:
    """``k1 exp(v c(g)) k2`` for ``g = k1 exp(c(g)) k2``.

    Conjugating a boost by ``k1`` gives a boost along the unit vector
    ``u = g_{r0} / (phase(g_00) sinh c)``, so ``v (x) g = B_u((v-1) c) g``.
    Near ``c = 0`` the factorization is not unique and ``g`` is returned.
    """
    if not 0 < v <= 1:
        raise ValueError("v must lie in (0, 1]")
    g.check()
    c = float(_radial(g.matrix))
    if c < SMALL_RADIUS or v == 1:
        return g
    g00 = g.matrix[0, 0]
    u = g.matrix[1:, 0] / ((g00 / abs(g00)) * math.sinh(c))
    u = u / np.linalg.norm(u)
    return GroupElement(_boost_along(g.model, u, (v - 1) * c) @ g.matrix, g.model).check()


def reorthogonalize(mats: np.ndarray, model: GroupModel) -> np.ndarray:
    """One Newton step ``g (3 - J g* J g) / 2`` back onto the group."""
    J = model.form
    gh = np.conj(np.swapaxes(mats, -1, -2))
    h = J @ gh @ J @ mats
    return mats @ (1.5 * np.eye(model.size) - 0.5 * h)


def threads() -> int:
    try:
        return max(1, int(os.environ.get("RANK1_THREADS", "1")))
    except ValueError:
        return 1


def _simulate_block(model: GroupModel, quantile, N: int, scale: float, count: int,
                    seed: int, block: int) -> np.ndarray:
    rng = np.random.default_rng(np.random.SeedSequence([seed, block]))
    prod = np.broadcast_to(np.eye(model.size, dtype=model.dtype), (count, model.size, model.size)).copy()
    for j in range(N):
        eta = quantile(rng.random(count))
        k1 = _haar_k(model, rng, count)
        k2 = _haar_k(model, rng, count)
        prod = prod @ (k1 @ _boosts(model, scale * eta) @ k2)
        if (j + 1) % REORTHO_EVERY == 0:
            prod = reorthogonalize(prod, model)
    res = form_residual(prod, model)
    if np.any(res > FORM_TOL):
        raise FormViolated(f"form residual {res.max():.2e} after {N} products")
    return _radial(prod)


def simulate_walk(Z: RadialLaw, N: int, scaling: Scaling | str = Scaling.InvSqrtN, samples: int = 100_000,
                  seed: int = 0, n_threads: int | None = None) -> SampleBatch:
    """Radial distances of ``samples`` independent walkers after ``N`` steps.

    Walkers are split into fixed blocks of 4096, each with its own stream
    ``SeedSequence([seed, block])``, so the result does not depend on how
    many threads run the blocks.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    if int(N) != N or N < 1:
        raise ValueError("N must be a positive integer")
    scaling = Scaling(scaling) if isinstance(scaling, str) else scaling
    model = group_model(Z.space)
    cdf = law_cdf(Z)
    counts = [min(BLOCK_SIZE, samples - b) for b in range(0, samples, BLOCK_SIZE)]
    scale = scaling.factor(N)

    def run(i):
        return _simulate_block(model, cdf.quantile, int(N), scale, counts[i], int(seed), i)

    workers = threads() if n_threads is None else max(1, n_threads)
    if workers == 1:
        parts = [run(i) for i in range(len(counts))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(len(counts))))
    return SampleBatch(np.concatenate(parts), int(N), int(seed), scaling)


def ks_statistic(batch: SampleBatch | np.ndarray, exact: RadialGridFunction, p: SpaceParams | None = None) -> float:
    """Kolmogorov-Smirnov distance between the sample and ``exact * weight``."""
    p = exact.space if p is None else p
    data = batch.radial_distances if isinstance(batch, SampleBatch) else np.asarray(batch, float)
    cdf = tabulated_cdf(exact.values, exact.eta_grid, p)
    return float(stats.kstest(data, cdf).statistic)
