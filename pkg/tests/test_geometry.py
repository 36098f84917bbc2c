import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from rank1walk.errors import IncompatibleDimension
from rank1walk.geometry import (
    CATALOG,
    Family,
    SpaceParams,
    parse_space,
    radial_measure_constant,
    space_params,
    space_selector,
    sphere_area,
    volume_weight,
)


@pytest.mark.parametrize("family, dim, expected", [
    (Family.RealHyperbolic, 3, (2, 0, 3, 1.0)),
    (Family.ComplexHyperbolic, 4, (2, 1, 4, 2.0)),
    (Family.QuaternionicHyperbolic, 8, (4, 3, 8, 5.0)),
    (Family.CayleyPlane, 16, (8, 7, 16, 11.0)),
])
def test_catalog_multiplicities(family, dim, expected):
    p = space_params(family, dim)
    assert (p.m_alpha, p.m_2alpha, p.n, p.rho) == expected


def test_invariants_hold_for_every_catalog_entry():
    for p in CATALOG.values():
        assert p.n == p.m_alpha + p.m_2alpha + 1
        assert p.rho == p.m_alpha / 2 + p.m_2alpha


@pytest.mark.parametrize("family, dim", [
    (Family.RealHyperbolic, 1), (Family.ComplexHyperbolic, 5), (Family.QuaternionicHyperbolic, 12 - 2),
    (Family.QuaternionicHyperbolic, 4), (Family.CayleyPlane, 8),
])
def test_incompatible_dimensions(family, dim):
    with pytest.raises(IncompatibleDimension):
        space_params(family, dim)


def test_complex_line_is_real_plane():
    assert space_params(Family.ComplexHyperbolic, 2) == space_params(Family.RealHyperbolic, 2)


def test_volume_weight_examples():
    assert volume_weight(CATALOG["real:3"], 0.0) == 0.0
    assert volume_weight(SpaceParams(1, 1), 1.0) == pytest.approx(math.sinh(1) * math.sinh(2), rel=1e-14)
    # the quoted 4.2625 is a rounding of 4.26229
    assert volume_weight(SpaceParams(1, 1), 1.0) == pytest.approx(4.2625, abs=5e-4)
    assert volume_weight(CATALOG["real:3"], 2.0) == pytest.approx(13.1541, abs=5e-5)


@pytest.mark.parametrize("name", list(CATALOG))
def test_small_radius_euclidean_behaviour(name):
    p = CATALOG[name]
    eta = np.array([1e-5, 1e-4, 1e-3])
    ratio = volume_weight(p, eta) / (eta ** (p.n - 1) * 2.0 ** p.m_2alpha)
    assert np.all(np.abs(ratio - 1) < 0.01)


@given(st.sampled_from(list(CATALOG)), st.floats(1e-3, 20), st.floats(1e-6, 1.0))
def test_volume_weight_strictly_increasing(name, eta, step):
    p = CATALOG[name]
    assert volume_weight(p, eta + step) > volume_weight(p, eta)


def test_parse_space_forms():
    assert parse_space("real:3") == CATALOG["real:3"]
    assert parse_space("cayley") == CATALOG["cayley"]
    assert parse_space("2,1") == CATALOG["complex:4"]
    assert parse_space("real:5") == SpaceParams(4, 0)
    with pytest.raises(ValueError):
        parse_space("hyperbolic")
    with pytest.raises(ValueError):
        parse_space("0,1")
    assert space_selector(SpaceParams(6, 0)) == "6,0"


def test_measure_constant():
    assert sphere_area(2) == pytest.approx(4 * math.pi)
    assert radial_measure_constant(CATALOG["complex:4"]) == pytest.approx(sphere_area(3) / 2)
