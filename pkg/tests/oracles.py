"""Independent reference formulas for the tests.

These use the textbook ratio-of-moduli forms (no log1p rewriting, no
series machinery) so they share no code path with the package.
"""
import cmath
import math

LN3_OVER_PI = math.log(3) / math.pi
LN2_OVER_PI = math.log(2) / math.pi
LN125_OVER_PI = math.log(1.25) / math.pi
WINDING_MINUS_ONE = 2 / math.pi * math.log(1 + math.sqrt(2))
STRIP_0_HALF_I = math.log(1 + math.sqrt(2)) / math.pi  # = (1/π) ln cot(π/8)


def half_plane(z, w):
    return math.log(abs(z - w.conjugate()) / abs(z - w)) / math.pi


def right_half_plane(z, w):
    return math.log(abs(z + w.conjugate()) / abs(z - w)) / math.pi


def disk(a, w):
    return math.log(abs(1 - a.conjugate() * w) / abs(w - a)) / math.pi


def cayley(z):
    """−i(z − 1)/(z + 1): unit disk onto the upper half-plane."""
    return -1j * (z - 1) / (z + 1)


def winding1(w):
    """G_{τ₁}(1, w) summed over the three candidate fourth roots directly."""
    r = abs(w) ** 0.25
    th = cmath.phase(w)
    total = 0.0
    for k in (-1, 0, 1):
        phi = (th + 2 * math.pi * k) / 4
        if abs(phi) < math.pi / 2:
            total += right_half_plane(1 + 0j, cmath.rect(r, phi))
    return total
