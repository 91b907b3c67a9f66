import cmath
import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

import oracles
from greenwalk.closed_form import exit_time_greens, greens_disk, greens_half_plane, greens_right_half_plane, greens_winding
from greenwalk.complex_geometry import (
    Disk,
    DiskAutomorphism,
    Mobius,
    MobiusTransform,
    Power,
    RightHalfPlane,
    Strip,
    TanQuarterStrip,
)
from greenwalk.errors import ParameterError, SourceImage
from greenwalk.pushforward import PushforwardProblem, continuity_probe, pushforward_greens, pushforward_terms


@st.composite
def disk_pt(draw, r=0.9):
    return cmath.rect(r * math.sqrt(draw(st.floats(0, 1))), draw(st.floats(-math.pi, math.pi)))


def disk_problem(fmap, a):
    return PushforwardProblem(fmap, greens_disk, a, Disk())


def test_square_map_example():
    p = disk_problem(Power(2), 0.5)
    expected = greens_disk(0.5, 0.3).value + greens_disk(0.5, -0.3).value
    assert abs(pushforward_greens(p, 0.09).value - expected) < 1e-12
    assert abs(pushforward_greens(p, 0.09).value - oracles.disk(0.25 + 0j, 0.09 + 0j)) < 1e-12


def test_critical_value_needs_multiplicity():
    p = disk_problem(Power(2), 0.5)
    v = pushforward_greens(p, 0).value
    assert abs(v - 2 * math.log(2) / math.pi) < 1e-12
    assert abs(v - greens_disk(0.25, 0).value) < 1e-12
    wrong = pushforward_greens(p, 0, weight_multiplicity=False).value
    assert abs(v - wrong - math.log(2) / math.pi) < 1e-12


def test_continuity_probe():
    p = disk_problem(Power(2), 0.5)
    assert continuity_probe(p, 0, 1e-3).max_discrepancy < 5e-3
    bad = continuity_probe(p, 0, 1e-3, weight_multiplicity=False).max_discrepancy
    assert abs(bad - math.log(2) / math.pi) < 5e-3
    smooth = [continuity_probe(p, 0.4j, r).max_discrepancy for r in (1e-2, 1e-3)]
    assert smooth[1] < smooth[0] / 5


@given(disk_pt(), disk_pt())
def test_square_map_pushforward(a, w):
    assume(abs(a * a - w * w) > 1e-3 and abs(a - w) > 1e-3 and abs(a + w) > 1e-3)
    p = disk_problem(Power(2), a)
    lhs = greens_disk(a * a, w * w).value
    rhs = pushforward_greens(p, w * w).value
    assert abs(lhs - rhs) < 1e-10
    assert abs(rhs - (greens_disk(a, w).value + greens_disk(a, -w).value)) < 1e-10


@given(st.floats(0.1, 20), st.floats(-math.pi, math.pi))
def test_winding_is_pushforward_of_right_half_plane(r, th):
    w = cmath.rect(r, th)
    assume(abs(w - 1) > 1e-3)
    p = PushforwardProblem(Power(4), greens_right_half_plane, 1, RightHalfPlane())
    assert abs(pushforward_greens(p, w).value - greens_winding(1, w).value) < 1e-10


@given(disk_pt(), disk_pt(), disk_pt(0.7))
def test_degree_one_maps_are_conformal_invariance(a, w, b):
    assume(abs(a - w) > 1e-3)
    auto = DiskAutomorphism(b)
    p = disk_problem(auto, a)
    assert abs(pushforward_greens(p, auto(w)).value - greens_disk(a, w).value) < 1e-10
    cay = Mobius(MobiusTransform.disk_to_half_plane())
    p = disk_problem(cay, a)
    assert abs(pushforward_greens(p, cay(w)).value - greens_half_plane(cay(a), cay(w)).value) < 1e-10


def test_tan_map_pushes_strip_to_disk():
    f = TanQuarterStrip()
    p = PushforwardProblem(f, lambda z, w: exit_time_greens(Strip(1.0), z, w), 0.2j, Strip(1.0))
    for w in (0.1 + 0.2j, -0.5, 0.7j):
        got = pushforward_greens(p, w).value
        assert abs(got - greens_disk(f(0.2j), w).value) < 1e-8


def test_source_image_rejected():
    p = disk_problem(Power(2), 0.5)
    with pytest.raises(SourceImage):
        pushforward_greens(p, 0.25)
    # −0.5 is a second preimage of 0.25 but the sum would still include the source
    with pytest.raises(SourceImage):
        pushforward_terms(p, 0.25)


def test_source_must_be_in_domain():
    with pytest.raises(ParameterError):
        disk_problem(Power(2), 1.5)


def test_terms_are_ordered():
    p = PushforwardProblem(Power(4), greens_right_half_plane, 1, RightHalfPlane())
    # ±2i lie on ∂U and are not preimages in the open half-plane
    assert [z for z, _, _ in pushforward_terms(p, 16)] == [2]
    zs = [z for z, _, _ in pushforward_terms(p, -1)]
    assert np.allclose(zs, [cmath.exp(-0.25j * math.pi), cmath.exp(0.25j * math.pi)])
