import math

import numpy as np
import pytest

from rank1walk.errors import InsufficientData
from rank1walk.geometry import CATALOG
from rank1walk.laws import asymptotic_t, default_bump, make_bump, scale_law, variance
from rank1walk.walk import (
    WalkReport,
    llt_error,
    llt_shape,
    lln_mass_within,
    rate_fit,
    walk_density,
    walk_mass,
    walk_variance,
    sup_grid,
)

H3 = CATALOG["real:3"]
C4 = CATALOG["complex:4"]


def _report(Ns, errs):
    return WalkReport(list(Ns), list(errs), [0.0] * len(Ns), float("nan"), 0.1)


def test_rate_fit_on_a_synthetic_power_law():
    Ns = [4, 8, 16, 32, 64]
    assert rate_fit(_report(Ns, [3.0 / N for N in Ns])) == pytest.approx(-1.0, abs=1e-12)
    assert rate_fit(_report(Ns, [2.0 * N**-0.5 for N in Ns])) == pytest.approx(-0.5, abs=1e-12)


def test_rate_fit_needs_enough_range():
    with pytest.raises(InsufficientData):
        rate_fit(_report([4, 8, 16], [1, 0.5, 0.25]))
    with pytest.raises(InsufficientData):
        rate_fit(_report([4, 5, 6, 7], [1, 0.5, 0.25, 0.1]))
    with pytest.raises(InsufficientData):
        rate_fit(_report([4, 8, 16, 32], [1, 0.5, 0.0, 0.1]))


def test_report_validation():
    with pytest.raises(ValueError):
        WalkReport([4, 8], [1.0], [0.0, 0.0], 0.0, 0.1)
    with pytest.raises(ValueError):
        WalkReport([8, 4], [1.0, 1.0], [0.0, 0.0], 0.0, 0.1)
    rep = _report([4, 8], [1.0, 0.5])
    assert rep.to_dict()["N_list"] == [4, 8]


def test_single_step_is_the_law_itself():
    Z = default_bump(H3)
    grid = sup_grid(Z)
    f = walk_density(Z, 1, eta_grid=grid)
    assert np.array_equal(f.values, Z.pdf(grid))


@pytest.mark.parametrize("name", ["real:3", "complex:4"])
def test_walk_density_has_unit_mass(name):
    Z = make_bump(1.0, 0.5, 0.45, CATALOG[name])
    assert walk_mass(Z, 8) == pytest.approx(1.0, abs=1e-5)


def test_local_limit_error_decreases():
    Z = make_bump(1.0, 0.5, 0.45, H3)
    assert llt_error(Z, 64) < llt_error(Z, 4)


@pytest.mark.parametrize("N", [4, 16, 64])
def test_walk_variance_two_paths(N):
    # from Phi^N at h, and N times the variance of one scaled step
    Z = default_bump(C4)
    direct = walk_variance(Z, N)
    additive = N * variance(scale_law(Z, 1 / math.sqrt(N)))
    assert abs(direct - additive) <= 1e-8 * max(1.0, abs(direct))


def test_lln_concentrates():
    Z = make_bump(1.0, 0.5, 0.45, H3)
    masses = [lln_mass_within(Z, N, radius=0.1) for N in (4, 16, 64)]
    assert masses[0] < masses[1] < masses[2]


def test_llt_rejects_tiny_t():
    Z = make_bump(0.2, 0.1, 0.05, H3)
    with pytest.raises(ValueError):
        llt_error(Z, 4)


def test_invalid_N():
    Z = default_bump(H3)
    for N in (0, 2.5, -1):
        with pytest.raises(ValueError):
            walk_density(Z, N)


def test_llt_shape():
    assert llt_shape(1.0, 3) == pytest.approx(2.0)
    assert llt_shape(4.0, 3) == pytest.approx(4.0**-2 * 4.0**-1.5 + 1)
    assert llt_shape(0.25, 3) == pytest.approx(16 * 2 + 1)
