"""Exact Green's functions for planar Brownian motion.

All values use the probabilist's normalisation: G(z, w) is the density at w of
the expected occupation time of Brownian motion started at z, so that
G(z, w) ≈ (1/π) ln(1/|z − w|) near the source.
"""
from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .complex_geometry import (
    Disk, Domain, ExitTime, PuncturedDisk, RightHalfPlane, StoppingRule, Strip,
    UpperHalfPlane, WindingTime,
)
from .errors import OriginExcluded, OutsideDomain, SourcePoint
from .series import SeriesTruncation, paired_sum, require

INV_PI = 1.0 / math.pi
INV_2PI = 0.5 / math.pi


class GreensKind(enum.Enum):
    FINITE = "finite"
    SINGULAR_AT_SOURCE = "singular_at_source"
    INFINITE_WHOLE_PLANE = "infinite_whole_plane"


@dataclass(frozen=True)
class GreensValue:
    kind: GreensKind
    value: Optional[float] = None

    def __post_init__(self):
        if self.kind is GreensKind.FINITE:
            if self.value is None or not self.value >= 0:
                raise ValueError(f"finite Green's value must be >= 0, got {self.value!r}")
        elif self.value is not None:
            raise ValueError("only finite Green's values carry a number")

    @classmethod
    def finite(cls, value: float) -> GreensValue:
        # rounding can push a vanishing value a hair below zero
        return cls(GreensKind.FINITE, max(float(value), 0.0))

    @property
    def is_finite(self) -> bool:
        return self.kind is GreensKind.FINITE

    def __float__(self) -> float:
        if not self.is_finite:
            raise ValueError(f"Green's value is {self.kind.value}")
        return self.value


SINGULAR = GreensValue(GreensKind.SINGULAR_AT_SOURCE)
WHOLE_PLANE = GreensValue(GreensKind.INFINITE_WHOLE_PLANE)


def greens_whole_plane(z: complex, w: complex) -> GreensValue:
    """Brownian motion in the whole plane is recurrent: G ≡ ∞."""
    return WHOLE_PLANE


# The log1p forms below follow from |z − w̄|² − |z − w|² = 4 Im z Im w and
# |1 − ā w|² − |w − a|² = (1 − |a|²)(1 − |w|²); they stay accurate near the
# boundary where the plain ratio of moduli cancels.

def _raw_right_half_plane(z: complex, w: complex) -> float:
    return INV_2PI * math.log1p(4.0 * z.real * max(w.real, 0.0) / abs(z - w) ** 2)


def greens_half_plane(z: complex, w: complex) -> GreensValue:
    """G_ℍ(z, w) = (1/π) ln(|z − w̄| / |z − w|)."""
    z, w = complex(z), complex(w)
    if not (z.imag > 0 and w.imag > 0):
        raise OutsideDomain(f"upper half-plane needs Im > 0: z={z}, w={w}")
    if z == w:
        return SINGULAR
    return GreensValue.finite(INV_2PI * math.log1p(4.0 * z.imag * w.imag / abs(z - w) ** 2))


def greens_right_half_plane(z: complex, w: complex) -> GreensValue:
    """G_U(z, w) = (1/π) ln(|z + w̄| / |z − w|) on U = {Re > 0}."""
    z, w = complex(z), complex(w)
    if not (z.real > 0 and w.real > 0):
        raise OutsideDomain(f"right half-plane needs Re > 0: z={z}, w={w}")
    if z == w:
        return SINGULAR
    return GreensValue.finite(_raw_right_half_plane(z, w))


def greens_disk(a: complex, w: complex) -> GreensValue:
    """G_𝔻(a, w) = (1/π) ln(|1 − ā w| / |w − a|)."""
    a, w = complex(a), complex(w)
    if not (abs(a) < 1 and abs(w) < 1):
        raise OutsideDomain(f"unit disk needs |a|, |w| < 1: a={a}, w={w}")
    if a == w:
        return SINGULAR
    num = (1.0 - abs(a) ** 2) * (1.0 - abs(w) ** 2)
    return GreensValue.finite(INV_2PI * math.log1p(num / abs(w - a) ** 2))


def _strip_coords(z: complex, w: complex, h: float) -> tuple[float, float, float]:
    if not h > 0:
        raise ValueError("strip half-width must be positive")
    if not (abs(z.imag) < h and abs(w.imag) < h):
        raise OutsideDomain(f"strip needs |Im| < {h}: z={z}, w={w}")
    z, w = z / h, w / h
    return (z - w).real, z.imag, w.imag


def greens_strip(z: complex, w: complex, h: float = 1.0,
                 truncation: SeriesTruncation = SeriesTruncation()) -> GreensValue:
    """Green's function of {|Im z| < h} from the image series, paired in ±n.

    The half-width is removed by Brownian scaling z ↦ z/h. The fitted c/n²
    tail of the paired series is added back; ``NonConverged`` is raised when
    the residual of that fit exceeds ``truncation.tail_tolerance``.
    """
    z, w = complex(z), complex(w)
    a, b, c = _strip_coords(z, w, h)
    if z == w:
        return SINGULAR
    a2 = a * a
    S, D = b + c + 2.0, b - c

    # ln[(a² + (S − 4n)²) / (a² + (D − 4n)²)] written with log1p
    def term(n):
        return np.log1p((S - D) * (S + D - 8.0 * n) / (a2 + (D - 4.0 * n) ** 2))

    ps = paired_sum(float(term(0.0)), lambda n: term(n) + term(-n), truncation.N)
    residual = INV_2PI * ps.residual
    require(residual <= truncation.tail_tolerance,
            f"strip series residual {residual:.3g} above {truncation.tail_tolerance:.3g} at N={ps.N}")
    return GreensValue.finite(INV_2PI * ps.corrected)


def greens_strip_map(z: complex, w: complex) -> GreensValue:
    """Green's function of {|Im z| < 1} through the map z ↦ tan(πi z/4) onto the disk."""
    z, w = complex(z), complex(w)
    a, b, c = _strip_coords(z, w, 1.0)
    if z == w:
        return SINGULAR
    tb = math.tan(0.25 * math.pi * b)
    tw = cmath.tan(0.25j * math.pi * a - 0.25 * math.pi * c)
    ratio = abs((1.0 + tb * tw) / (tb + tw))
    return GreensValue.finite(INV_PI * math.log(ratio))


def greens_punctured_disk(a: float, w: complex,
                          truncation: SeriesTruncation = SeriesTruncation()) -> GreensValue:
    """Green's function of 𝔻 \\ {0} from the covering map z ↦ e^{iz} of ℍ.

    The source sits at a = e^{−α} on (0, 1) and w = e^{−c + ib}. Summing the
    lifted half-plane values over all 2πn translates gives a series that must
    equal ``greens_disk(a, w)``, since Brownian motion never hits the puncture.
    """
    w = complex(w)
    if not (isinstance(a, (int, float)) and 0.0 < a < 1.0):
        raise OutsideDomain(f"source must be real in (0, 1), got {a!r}")
    if not 0.0 < abs(w) < 1.0:
        raise OutsideDomain(f"target must satisfy 0 < |w| < 1, got {w}")
    if w == a:
        return SINGULAR
    alpha = -math.log(a)
    c = -math.log(abs(w))
    b = cmath.phase(w)
    num = 4.0 * alpha * c
    d2 = (alpha - c) ** 2
    two_pi = 2.0 * math.pi

    def term(n):
        return np.log1p(num / ((b + two_pi * n) ** 2 + d2))

    ps = paired_sum(float(term(0.0)), lambda n: term(n) + term(-n), truncation.N)
    residual = INV_2PI * ps.residual
    require(residual <= truncation.tail_tolerance,
            f"punctured-disk series residual {residual:.3g} above "
            f"{truncation.tail_tolerance:.3g} at N={ps.N}")
    return GreensValue.finite(INV_2PI * ps.corrected)


# ---------------------------------------------------------------------------
# Winding stopping time τ_n, source 1
# ---------------------------------------------------------------------------

def _principal_arg(w: complex) -> float:
    theta = cmath.phase(w)
    return math.pi if theta == -math.pi else theta


def winding_preimage_angles(n: int, theta: float) -> list[float]:
    """Angles (θ + 2πk)/(4n) lying in [−π/2, π/2], in increasing k."""
    two_pi = 2.0 * math.pi
    k_lo = math.ceil((-two_pi * n - theta) / two_pi)
    k_hi = math.floor((two_pi * n - theta) / two_pi)
    return [(theta + two_pi * k) / (4 * n) for k in range(k_lo, k_hi + 1)]


def greens_winding(n: int, w: complex) -> GreensValue:
    """G_{τ_n}(1, w): push the right half-plane forward under z ↦ z^{4n}.

    Preimages on the sector edges ±π/2 sit on ∂U and contribute exactly 0.
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    w = complex(w)
    if w == 0:
        raise OriginExcluded("winding Green's function is undefined at the origin")
    if w == 1:
        raise SourcePoint("w = 1 is the source point")
    rho = abs(w) ** (1.0 / (4 * n))
    total = 0.0
    for phi in winding_preimage_angles(n, _principal_arg(w)):
        total += _raw_right_half_plane(1.0 + 0j, cmath.rect(rho, phi))
    return GreensValue.finite(total)


def winding_regular_limit(n: int) -> float:
    """lim_{w→1} G_{τ_n}(1, w) + (1/π) ln|1 − w|.

    The k = 0 preimage carries the log singularity; its regular part tends to
    (1/π) ln 2 + (1/π) ln 4n, and the other preimages of 1 sit at angles
    πk/(2n).
    """
    if int(n) != n or n < 1:
        raise ValueError("n must be a positive integer")
    value = INV_PI * (math.log(4 * n) + math.log(2.0))
    for k in range(-n, n + 1):
        if k != 0:
            value += _raw_right_half_plane(1.0 + 0j, cmath.rect(1.0, math.pi * k / (2 * n)))
    return value


# ---------------------------------------------------------------------------
# Dispatch by stopping rule
# ---------------------------------------------------------------------------

def exit_time_greens(domain: Domain, z: complex, w: complex,
                     truncation: SeriesTruncation = SeriesTruncation()) -> GreensValue:
    """Closed-form G_Ω(z, w) for any supported domain type."""
    z, w = complex(z), complex(w)
    if isinstance(domain, UpperHalfPlane):
        return greens_half_plane(z, w)
    if isinstance(domain, RightHalfPlane):
        return greens_right_half_plane(z, w)
    if isinstance(domain, Disk):
        return greens_disk((z - domain.center) / domain.radius, (w - domain.center) / domain.radius)
    if isinstance(domain, PuncturedDisk):
        if z == 0 or w == 0:
            raise OutsideDomain("the punctured disk excludes the origin")
        return greens_disk(z, w)
    if isinstance(domain, Strip):
        if domain.vertical:  # rotate {|Re| < h} onto {|Im| < h}
            z, w = -1j * z, -1j * w
        return greens_strip(z, w, domain.half_width, truncation)
    raise TypeError(f"no closed form for {domain!r}")


def closed_form_for(rule: StoppingRule, source: complex) -> Optional[Callable[[complex], GreensValue]]:
    """Return w ↦ G_rule(source, w), or None when no closed form is available."""
    source = complex(source)
    if isinstance(rule, ExitTime):
        return lambda w: exit_time_greens(rule.domain, source, w)
    if isinstance(rule, WindingTime):
        if source != 1:
            return None
        return lambda w: greens_winding(rule.n, w)
    return None
