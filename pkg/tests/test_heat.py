import numpy as np
import pytest

from rank1walk.geometry import CATALOG
from rank1walk.heat import (
    HeatKernelRequest,
    Psi,
    heat_eta_max,
    heat_residual,
    heat_transform,
    psi,
    psi_h3_closed_form,
)
from rank1walk.transform import forward_transform, radial_mass

H3 = CATALOG["real:3"]


@pytest.mark.parametrize("name", ["real:3", "complex:4"])
@pytest.mark.parametrize("t", [0.1, 0.5, 1.0])
def test_heat_kernel_is_a_probability_density(name, t):
    p = CATALOG[name]
    k = psi(p, t)
    assert radial_mass(k, p) == pytest.approx(1.0, abs=1e-9)
    assert np.all(k.values > -1e-12 * np.max(k.values))


def test_transform_pair_on_h3():
    t = 0.5
    lams = np.linspace(0, 10, 21)
    F = forward_transform(psi(H3, t), H3, lams, check=False)
    err = np.abs(F.values - heat_transform(H3, t, lams)) * np.exp(H3.rho**2 * t)
    assert err.max() < 1e-8


@pytest.mark.parametrize("t", [0.2, 0.5, 1.0, 2.0])
def test_closed_form_on_h3(t):
    eta = np.linspace(0, 3, 61)
    num = Psi(H3, t, eta).values
    ref = psi_h3_closed_form(t, eta)
    assert np.max(np.abs(num - ref)) < 1e-9 * ref.max()


def test_two_time_conventions_differ():
    eta = np.linspace(0, 2, 21)
    assert np.allclose(Psi(H3, 1.0, eta).values, psi(H3, 0.5, eta).values, rtol=0, atol=1e-14)
    assert not np.allclose(psi(H3, 1.0, eta).values, psi_h3_closed_form(1.0, eta), rtol=1e-3)


def test_semigroup_in_spectral_domain():
    a, b = heat_transform(H3, 0.3, [1.0, 4.0]), heat_transform(H3, 0.4, [1.0, 4.0])
    assert np.allclose(a * b, heat_transform(H3, 0.7, [1.0, 4.0]), rtol=1e-15)


@pytest.mark.parametrize("name", ["real:3", "complex:4"])
def test_heat_equation_residual(name):
    p = CATALOG[name]
    coarse = heat_residual(p, 0.5, np.arange(0.0, 2.0, 0.02))
    fine = heat_residual(p, 0.5, np.arange(0.0, 2.0, 0.01))
    assert fine <= 1e-3
    # second-order stencil: halving h cuts the residual by about four
    assert fine < 0.4 * coarse


def test_residual_guards():
    with pytest.raises(ValueError):
        heat_residual(H3, 0.05)
    with pytest.raises(ValueError):
        heat_residual(H3, 0.5, np.array([0.0, 0.1, 0.3]))


def test_request_validation():
    with pytest.raises(ValueError):
        HeatKernelRequest(H3, 0.0)
    with pytest.raises(ValueError):
        HeatKernelRequest(H3, 1.0, lambda_max=-1.0)
    with pytest.raises(ValueError):
        psi(H3, 1.0, precision="quad")


@pytest.mark.slow
def test_extended_precision_path_on_quaternionic_space():
    p = CATALOG["quat:8"]
    t = 0.5
    k = psi(p, t)
    assert heat_eta_max(p, t) > 5
    assert radial_mass(k, p) == pytest.approx(1.0, abs=1e-9)


def test_large_time_kernel_vanishes_on_compacts():
    k = psi(H3, 8.0, np.linspace(0, 1, 11))
    assert np.max(np.abs(k.values)) < np.exp(-H3.rho**2 * 8.0)
