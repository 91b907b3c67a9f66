import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from greenwalk.errors import NonConverged, NonpositiveTime, OutsideDomain
from greenwalk.heat_kernel import KernelSeriesConfig, integrate_kernel, rho_half_plane, rho_plane, rho_strip

times = st.floats(1e-3, 20)
strip_pt = st.builds(complex, st.floats(-3, 3), st.floats(-0.999, 0.999))


def test_plane_kernel_values():
    assert abs(rho_plane(1, 0.3j, 0.3j) - 1 / (2 * math.pi)) < 1e-15
    assert abs(rho_plane(0.5, 0, 1) - math.exp(-1) / math.pi) < 1e-15


def test_plane_kernel_mass():
    xs = np.arange(-6, 6, 0.01) + 0.005
    X, Y = np.meshgrid(xs, xs)
    dens = np.exp(-(X**2 + Y**2) / 2) / (2 * math.pi)
    assert abs(dens.sum() * 1e-4 - 1) < 1e-4
    assert abs(rho_plane(1, 0, 0.7 + 0.2j) - np.exp(-0.53 / 2) / (2 * math.pi)) < 1e-15


def test_chapman_kolmogorov():
    s, t = 0.3, 0.5
    z, w = 0.2 + 0.1j, -0.4 + 0.3j
    xs = np.arange(-5, 5, 0.02) + 0.01
    U = xs[None, :] + 1j * xs[:, None]
    a = np.exp(-np.abs(z - U) ** 2 / (2 * s)) / (2 * math.pi * s)
    b = np.exp(-np.abs(U - w) ** 2 / (2 * t)) / (2 * math.pi * t)
    assert abs((a * b).sum() * 0.02**2 - rho_plane(s + t, z, w)) < 1e-4


def test_half_plane_kernel():
    expected = (math.exp(-0.5) - math.exp(-4.5)) / (2 * math.pi)
    assert abs(rho_half_plane(1, 1j, 2j) - expected) < 1e-15
    assert rho_half_plane(1, 1j, 0.7) == 0.0


@given(times, st.builds(complex, st.floats(-3, 3), st.floats(0.01, 3)),
       st.builds(complex, st.floats(-3, 3), st.floats(0.01, 3)))
def test_half_plane_deficit(t, z, w):
    free = rho_plane(t, z, w)
    killed = rho_half_plane(t, z, w)
    assert 0 <= killed <= free
    # the removed mass is the reflected kernel, strictly positive while representable
    if free > 1e-300 and 2 * z.imag * w.imag / t < 30:
        assert killed < free


def test_strip_kernel_small_time():
    direct = sum((1 if m % 2 == 0 else -1) * math.exp(-(2 * m) ** 2 / 0.2)
                 for m in range(-50, 51)) / (2 * math.pi * 0.1)
    assert abs(rho_strip(0.1, 0, 0) - direct) < 1e-12
    assert abs(rho_strip(0.1, 0, 0) - 1 / (0.2 * math.pi)) < 1e-8


def test_strip_kernel_vanishes_on_boundary():
    for t in (0.05, 1.0, 10.0):
        assert rho_strip(t, 0.3j, 2 + 1j) < 1e-15
        assert rho_strip(t, 0.3j, -1 - 1j) < 1e-15


@given(times, strip_pt, strip_pt)
def test_strip_kernel_symmetries(t, z, w):
    v = rho_strip(t, z, w)
    assert abs(v - rho_strip(t, w, z)) < 1e-12
    assert abs(v - rho_strip(t, z.conjugate(), w.conjugate())) < 1e-12
    assert 0 <= v <= rho_plane(t, z, w)


def test_strip_kernel_positive_random():
    rng = np.random.default_rng(1)
    t = 10 ** rng.uniform(-3, 1.5, 10_000)
    zs = rng.uniform(-2, 2, 10_000) + 1j * rng.uniform(-1, 1, 10_000)
    ws = rng.uniform(-2, 2, 10_000) + 1j * rng.uniform(-1, 1, 10_000)
    assert all(rho_strip(ti, zi, wi) >= 0 for ti, zi, wi in zip(t, zs, ws))


def test_kernel_errors():
    with pytest.raises(NonpositiveTime):
        rho_plane(0, 0, 1)
    with pytest.raises(NonpositiveTime):
        rho_strip(-1, 0, 0.5j)
    with pytest.raises(OutsideDomain):
        rho_half_plane(1, -1j, 1j)
    with pytest.raises(OutsideDomain):
        rho_strip(1, 2j, 0)
    with pytest.raises(ValueError):
        KernelSeriesConfig(max_images=0)
    with pytest.raises(ValueError):
        integrate_kernel("disk", 0, 0.5)


def test_strip_image_budget():
    with pytest.raises(NonConverged):
        rho_strip(500.0, 0, 0.5j, KernelSeriesConfig(max_images=2))


def test_integrals_match_closed_forms():
    assert abs(integrate_kernel("half_plane", 1j, 2j).value - oracles.LN3_OVER_PI) < 1e-6
    assert abs(integrate_kernel("strip", 0, 0.5j).value - oracles.STRIP_0_HALF_I) < 1e-5
    assert abs(integrate_kernel("half_plane", 1j, 1 + 1j).value - math.log(5) / (2 * math.pi)) < 1e-6


def test_diagonal_integral_diverges():
    with pytest.raises(NonConverged):
        integrate_kernel("half_plane", 1j, 1j)
