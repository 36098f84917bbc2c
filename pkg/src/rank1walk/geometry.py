"""Rank-one symmetric spaces and the radial volume weight.

Every radial integral in the package is written in the algebraic radial
coordinate ``eta`` (the one with ``alpha(H0) = 1``), in which the volume
element is ``C * sinh(eta)**m_alpha * sinh(2*eta)**m_2alpha * d eta``.
The Riemannian rescaling ``c = (2 m_alpha + 8 m_2alpha) ** -0.5`` is not
applied anywhere.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .errors import IncompatibleDimension


class Family(enum.Enum):
    RealHyperbolic = "real"
    ComplexHyperbolic = "complex"
    QuaternionicHyperbolic = "quat"
    CayleyPlane = "cayley"


@dataclass(frozen=True)
class SpaceParams:
    """Root multiplicities of a rank-one space plus derived constants."""

    m_alpha: int
    m_2alpha: int

    def __post_init__(self):
        if int(self.m_alpha) != self.m_alpha or int(self.m_2alpha) != self.m_2alpha:
            raise ValueError("multiplicities must be integers")
        if self.m_alpha < 1 or self.m_2alpha < 0:
            raise ValueError(
                f"need m_alpha >= 1 and m_2alpha >= 0, got ({self.m_alpha}, {self.m_2alpha})"
            )

    @property
    def n(self) -> int:
        return self.m_alpha + self.m_2alpha + 1

    @property
    def rho(self) -> float:
        return self.m_alpha / 2 + self.m_2alpha

    @property
    def label(self) -> str:
        return f"({self.m_alpha},{self.m_2alpha})"


def space_params(family: Family | str, real_dim: int) -> SpaceParams:
    """Standard multiplicities for ``family`` in real dimension ``real_dim``."""
    if isinstance(family, str):
        family = Family(family)
    n = int(real_dim)
    if family is Family.RealHyperbolic:
        if n < 2:
            raise IncompatibleDimension(f"real hyperbolic space needs n >= 2, got {n}")
        p = SpaceParams(n - 1, 0)
    elif family is Family.ComplexHyperbolic:
        if n == 2:
            # CH^1 is the real hyperbolic plane
            p = SpaceParams(1, 0)
        elif n >= 4 and n % 2 == 0:
            p = SpaceParams(n - 2, 1)
        else:
            raise IncompatibleDimension(f"complex hyperbolic space needs even n >= 2, got {n}")
    elif family is Family.QuaternionicHyperbolic:
        if n >= 8 and n % 4 == 0:
            p = SpaceParams(n - 4, 3)
        else:
            raise IncompatibleDimension(
                f"quaternionic hyperbolic space needs n = 0 mod 4, n >= 8, got {n}"
            )
    elif family is Family.CayleyPlane:
        if n != 16:
            raise IncompatibleDimension(f"the Cayley plane has real dimension 16, got {n}")
        p = SpaceParams(8, 7)
    else:  # pragma: no cover
        raise IncompatibleDimension(str(family))
    assert p.n == n, (p, n)
    return p


CATALOG: dict[str, SpaceParams] = {
    "real:3": space_params(Family.RealHyperbolic, 3),
    "complex:4": space_params(Family.ComplexHyperbolic, 4),
    "quat:8": space_params(Family.QuaternionicHyperbolic, 8),
    "cayley": space_params(Family.CayleyPlane, 16),
}


def parse_space(text: str) -> SpaceParams:
    """Parse a CLI space selector such as ``real:3``, ``cayley`` or ``2,1``."""
    text = text.strip().lower()
    if text == "cayley":
        return CATALOG["cayley"]
    if ":" in text:
        name, _, dim = text.partition(":")
        try:
            return space_params(Family(name), int(dim))
        except ValueError as exc:
            if isinstance(exc, IncompatibleDimension):
                raise
            raise ValueError(f"unknown space selector {text!r}") from exc
    if "," in text:
        a, _, b = text.partition(",")
        return SpaceParams(int(a), int(b))
    raise ValueError(f"unknown space selector {text!r}")


def space_selector(p: SpaceParams) -> str:
    for key, val in CATALOG.items():
        if val == p:
            return key
    return f"{p.m_alpha},{p.m_2alpha}"


def volume_weight(p: SpaceParams, eta):
    """Unnormalized radial weight ``sinh(eta)^m_alpha * sinh(2 eta)^m_2alpha``."""
    eta = np.asarray(eta, dtype=float)
    if np.any(eta < 0):
        raise ValueError("eta must be non-negative")
    out = np.sinh(eta) ** p.m_alpha
    if p.m_2alpha:
        out = out * np.sinh(2 * eta) ** p.m_2alpha
    return out if out.ndim else float(out)


def log_volume_weight(p: SpaceParams, eta):
    eta = np.asarray(eta, dtype=float)
    with np.errstate(divide="ignore"):
        out = p.m_alpha * np.log(np.sinh(eta))
        if p.m_2alpha:
            out = out + p.m_2alpha * np.log(np.sinh(2 * eta))
    return out


def coth_drift(p: SpaceParams, eta):
    """Logarithmic derivative ``A'/A = m_alpha coth(eta) + 2 m_2alpha coth(2 eta)``."""
    eta = np.asarray(eta, dtype=float)
    out = p.m_alpha / np.tanh(eta)
    if p.m_2alpha:
        out = out + 2 * p.m_2alpha / np.tanh(2 * eta)
    return out


def sphere_area(dim: int) -> float:
    """Area of the unit sphere S^dim in R^(dim+1)."""
    k = dim + 1
    return 2 * math.pi ** (k / 2) / math.gamma(k / 2)


def radial_measure_constant(p: SpaceParams) -> float:
    """Constant C making ``C * volume_weight`` the Riemannian radial measure.

    Chosen so that ``C * volume_weight(eta) ~ area(S^(n-1)) * eta^(n-1)``
    as ``eta -> 0``, which is the normalization under which the closed-form
    kernel of the real hyperbolic 3-space integrates to one.
    """
    return sphere_area(p.n - 1) / 2**p.m_2alpha
