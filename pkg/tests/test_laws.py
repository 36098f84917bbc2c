import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from rank1walk.errors import DegenerateNormalizer, SupportViolation
from rank1walk.geometry import CATALOG
from rank1walk.laws import (
    asymptotic_t,
    char_fn,
    char_fn_values,
    default_bump,
    law_cdf,
    law_from_samples,
    law_mass,
    make_bump,
    scale_law,
    second_moment,
    variance,
)
from rank1walk.quadrature import gauss_legendre_panels

H3 = CATALOG["real:3"]
# frozen from a converged run: E[eta^2]/3 for the default bump on real hyperbolic 3-space
DEFAULT_T_H3 = 0.10784330506105187


@pytest.mark.parametrize("name", list(CATALOG))
def test_bump_is_a_probability_law(name):
    Z = default_bump(CATALOG[name])
    assert law_mass(Z) == pytest.approx(1.0, abs=1e-12)
    fine = gauss_legendre_panels(0.2, 0.8, panels=32, order=64)
    assert law_mass(Z, fine) == pytest.approx(1.0, abs=1e-12)


def test_bump_vanishes_outside_its_support():
    Z = default_bump(H3)
    assert np.all(Z.pdf(np.array([0.0, 0.1, 0.2, 0.8, 0.95, 1.0, 3.0])) == 0)
    assert Z.pdf(np.array([0.5]))[0] > 0


def test_frozen_asymptotic_t():
    assert asymptotic_t(default_bump(H3)) == pytest.approx(DEFAULT_T_H3, rel=1e-12)


def test_bump_support_must_fit():
    with pytest.raises(SupportViolation):
        make_bump(1.0, 0.5, 0.6, H3)
    with pytest.raises(SupportViolation):
        make_bump(1.0, 0.8, 0.3, H3)
    with pytest.raises(SupportViolation):
        make_bump(-1.0, 0.5, 0.3, H3)


@pytest.mark.parametrize("eps", [1.0, 0.5, 0.1, 1 / 16])
@pytest.mark.parametrize("name", ["real:3", "quat:8"])
def test_scaling_preserves_mass_and_shrinks_support(name, eps):
    Z = default_bump(CATALOG[name])
    Zs = scale_law(Z, eps)
    assert law_mass(Zs) == pytest.approx(1.0, abs=1e-12)
    assert Zs.support_radius == pytest.approx(eps)
    assert Zs.scale == pytest.approx(eps)


def test_scaling_pushes_the_cdf_forward():
    Z = default_bump(H3)
    Zs = scale_law(Z, 0.25)
    F, Fs = law_cdf(Z), law_cdf(Zs)
    r = np.linspace(0.2, 0.8, 13)
    assert np.max(np.abs(Fs(0.25 * r) - F(r))) < 1e-6


@settings(max_examples=25, deadline=None)
@given(st.floats(0.0, 60.0))
def test_char_fn_bounded(lam):
    Z = default_bump(CATALOG["complex:4"])
    v = char_fn_values(Z, [lam])[0]
    assert abs(v) <= 1 + 1e-12


def test_char_fn_basics():
    Z = default_bump(H3)
    F = char_fn(Z, H3, np.array([0.0, 1.0, 2.0]))
    assert F.values[0] == pytest.approx(1.0, abs=1e-12)
    # evenness by construction; smoothness: third difference at 0 vanishes for an even function
    h = 1e-2
    v = char_fn_values(Z, [-2 * h, -h, h, 2 * h])
    assert abs(v[2] - v[1]) / (2 * h) < 1e-12
    d3 = (v[3] - 2 * v[2] + 2 * v[1] - v[0]) / (2 * h**3)
    assert abs(d3) < 1e-8


def test_char_fn_rejects_other_space():
    with pytest.raises(ValueError):
        char_fn(default_bump(H3), CATALOG["complex:4"], [0.0])


@pytest.mark.parametrize("name", list(CATALOG))
def test_variance_of_a_narrow_bump_is_its_second_moment(name):
    p = CATALOG[name]
    Z = make_bump(0.01, 0.005, 0.004, p)
    # for a near-delta law -Phi''(0) ~ E[eta^2]/n
    assert variance(Z) == pytest.approx(second_moment(Z) / p.n, rel=2e-2)


def test_variance_scales_quadratically():
    Z = default_bump(H3)
    assert variance(scale_law(Z, 0.1)) / variance(Z) == pytest.approx(0.01, rel=5e-2)


def test_cdf_is_monotone_and_inverts():
    cdf = law_cdf(default_bump(CATALOG["complex:4"]))
    assert np.all(np.diff(cdf.cdf) >= 0) and cdf.cdf[-1] == pytest.approx(1.0)
    u = np.array([0.05, 0.5, 0.95])
    assert np.max(np.abs(cdf(cdf.quantile(u)) - u)) < 1e-6


def test_law_from_samples_reproduces_a_bump():
    Z = default_bump(H3)
    eta = np.linspace(0, 1, 401)
    Y = law_from_samples(eta, Z.pdf(eta), H3, support_radius=1.0)
    assert law_mass(Y) == pytest.approx(1.0, abs=1e-12)
    assert not Y.smoothness_certified
    assert asymptotic_t(Y) == pytest.approx(DEFAULT_T_H3, rel=1e-4)


def test_law_from_samples_validation():
    with pytest.raises(ValueError):
        law_from_samples([0, 1, 2], [0, 1, 0], H3)
    with pytest.raises(ValueError):
        law_from_samples([0, 1, 2, 3], [0, -1, 0, 0], H3)
    with pytest.raises(DegenerateNormalizer):
        law_from_samples([0, 1, 2, 3], [0, 0, 0, 0], H3)
