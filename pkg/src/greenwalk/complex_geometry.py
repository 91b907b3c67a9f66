"""Points, Möbius transforms, planar domains and analytic maps.

Points of the plane are plain Python ``complex`` numbers. The point at
infinity is the explicit sentinel :data:`INFINITY`; it is only ever produced
or consumed by Möbius transforms.
"""
from __future__ import annotations

import cmath
import math
import sys
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from .errors import DegenerateTransform, UnsupportedMap

__all__ = [
    "INFINITY", "PointAtInfinity", "MobiusTransform", "mobius_apply",
    "Domain", "UpperHalfPlane", "RightHalfPlane", "Disk", "Strip", "PuncturedDisk",
    "StoppingRule", "ExitTime", "WindingTime",
    "AnalyticMap", "Power", "Exp", "Mobius", "DiskAutomorphism", "TanQuarterStrip",
    "preimages", "sort_key",
]


class PointAtInfinity:
    """The point ∞ of the Riemann sphere (singleton)."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "INFINITY"

    def __reduce__(self):
        return (PointAtInfinity, ())


INFINITY = PointAtInfinity()

ExtendedPoint = Union[complex, PointAtInfinity]


# ---------------------------------------------------------------------------
# Möbius transforms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MobiusTransform:
    """z ↦ (a z + b) / (c z + d) with ad − bc ≠ 0."""

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        for name in "abcd":
            object.__setattr__(self, name, complex(getattr(self, name)))
        scale = abs(self.a * self.d) + abs(self.b * self.c)
        if scale == 0.0 or abs(self.det) <= 1e-14 * scale:
            raise DegenerateTransform(f"ad - bc = {self.det!r} for {self}")

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @classmethod
    def identity(cls) -> MobiusTransform:
        return cls(1, 0, 0, 1)

    @classmethod
    def disk_to_half_plane(cls) -> MobiusTransform:
        """z ↦ −i(z − 1)/(z + 1), sending the unit disk onto the upper half-plane and 0 to i."""
        return cls(-1j, 1j, 1, 1)

    @classmethod
    def disk_automorphism(cls, a: complex) -> MobiusTransform:
        """z ↦ (z − a)/(1 − ā z)."""
        a = complex(a)
        return cls(1, -a, -a.conjugate(), 1)

    def __call__(self, z: ExtendedPoint) -> ExtendedPoint:
        if z is INFINITY:
            return INFINITY if self.c == 0 else self.a / self.c
        den = self.c * z + self.d
        if den == 0:
            return INFINITY
        return (self.a * z + self.b) / den

    def compose(self, other: MobiusTransform) -> MobiusTransform:
        """Return self ∘ other."""
        return MobiusTransform(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def inverse(self) -> MobiusTransform:
        return MobiusTransform(self.d, -self.b, -self.c, self.a)

    def derivative(self, z: complex) -> complex:
        return self.det / (self.c * z + self.d) ** 2


def mobius_apply(m: MobiusTransform, z: ExtendedPoint) -> ExtendedPoint:
    return m(z)


# ---------------------------------------------------------------------------
# Domains
# ---------------------------------------------------------------------------

class Domain:
    """A planar region with a signed distance to its boundary (positive inside)."""

    def contains(self, z: complex) -> bool:
        return bool(self.boundary_distance(z) > 0)

    def boundary_distance(self, z: complex) -> float:
        raise NotImplementedError

    def imag_bounds(self) -> tuple[float, float]:
        """Range of Im z over the domain (may be infinite)."""
        return (-math.inf, math.inf)


@dataclass(frozen=True)
class UpperHalfPlane(Domain):
    def boundary_distance(self, z):
        return z.imag

    def imag_bounds(self):
        return (0.0, math.inf)


@dataclass(frozen=True)
class RightHalfPlane(Domain):
    def boundary_distance(self, z):
        return z.real


@dataclass(frozen=True)
class Disk(Domain):
    center: complex = 0j
    radius: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "center", complex(self.center))
        if not self.radius > 0:
            raise ValueError("disk radius must be positive")

    def boundary_distance(self, z):
        return self.radius - abs(z - self.center)

    def imag_bounds(self):
        return (self.center.imag - self.radius, self.center.imag + self.radius)


@dataclass(frozen=True)
class Strip(Domain):
    """{|Im z| < half_width}, or {|Re z| < half_width} when ``vertical``."""

    half_width: float = 1.0
    vertical: bool = False

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("strip half-width must be positive")

    def boundary_distance(self, z):
        coord = z.real if self.vertical else z.imag
        return self.half_width - abs(coord)

    def imag_bounds(self):
        if self.vertical:
            return (-math.inf, math.inf)
        return (-self.half_width, self.half_width)


@dataclass(frozen=True)
class PuncturedDisk(Domain):
    """The unit disk with the origin removed."""

    def boundary_distance(self, z):
        r = abs(z)
        return min(1.0 - r, r)

    def imag_bounds(self):
        return (-1.0, 1.0)


# ---------------------------------------------------------------------------
# Stopping rules
# ---------------------------------------------------------------------------

class StoppingRule:
    pass


@dataclass(frozen=True)
class ExitTime(StoppingRule):
    domain: Domain


@dataclass(frozen=True)
class WindingTime(StoppingRule):
    """First time the continuous argument reaches ±2πn."""

    n: int = 1

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError("winding number n must be a positive integer")


# ---------------------------------------------------------------------------
# Analytic maps
# ---------------------------------------------------------------------------

def sort_key(z: complex) -> tuple[float, float]:
    """Deterministic preimage order: argument in (−π, π], then modulus."""
    arg = math.atan2(z.imag, z.real)
    if arg == -math.pi:
        arg = math.pi
    return (arg, abs(z))


def _finalize(candidates, domain: Domain) -> list[tuple[complex, int]]:
    kept = [(complex(z), m) for z, m in candidates if domain.contains(complex(z))]
    kept.sort(key=lambda item: sort_key(item[0]))
    return kept


class AnalyticMap:
    """Closed family of maps with hand-written inverses.

    Subclasses accept numpy arrays in ``__call__`` and ``derivative`` so that
    whole sampled paths can be projected at once.
    """

    degree_on_plane: int | None = None

    def __call__(self, z):
        raise NotImplementedError

    def derivative(self, z):
        raise NotImplementedError

    def preimages(self, w: complex, domain: Domain) -> list[tuple[complex, int]]:
        raise NotImplementedError


def _snap(z: complex, scale: float) -> complex:
    """Zero out a coordinate that is pure rounding noise, so roots on an axis stay on it."""
    tol = 4 * sys.float_info.epsilon * scale
    return complex(0.0 if abs(z.real) < tol else z.real, 0.0 if abs(z.imag) < tol else z.imag)


@dataclass(frozen=True)
class Power(AnalyticMap):
    k: int

    def __post_init__(self):
        if int(self.k) != self.k or self.k < 1:
            raise ValueError("Power exponent must be a positive integer")

    def __call__(self, z):
        return z ** self.k

    def derivative(self, z):
        return self.k * z ** (self.k - 1)

    def preimages(self, w, domain):
        w = complex(w)
        if w == 0:
            return _finalize([(0j, self.k)], domain)
        r = abs(w) ** (1.0 / self.k)
        theta = cmath.phase(w)
        roots = [_snap(cmath.rect(r, (theta + 2 * math.pi * j) / self.k), r) for j in range(self.k)]
        return _finalize([(z, 1) for z in roots], domain)


@dataclass(frozen=True)
class Exp(AnalyticMap):
    def __call__(self, z):
        return np.exp(z)

    def derivative(self, z):
        return np.exp(z)

    def preimages(self, w, domain):
        w = complex(w)
        if w == 0:
            return []
        lo, hi = domain.imag_bounds()
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise UnsupportedMap(f"exp has infinitely many preimages in {domain!r}")
        base = cmath.log(w)
        k_lo = math.floor((lo - base.imag) / (2 * math.pi))
        k_hi = math.ceil((hi - base.imag) / (2 * math.pi))
        cands = [(base + 2j * math.pi * k, 1) for k in range(k_lo, k_hi + 1)]
        return _finalize(cands, domain)


@dataclass(frozen=True)
class Mobius(AnalyticMap):
    transform: MobiusTransform

    def __call__(self, z):
        m = self.transform
        return (m.a * z + m.b) / (m.c * z + m.d)

    def derivative(self, z):
        return self.transform.derivative(z)

    def preimages(self, w, domain):
        z = self.transform.inverse()(complex(w))
        if z is INFINITY:
            return []
        return _finalize([(z, 1)], domain)


@dataclass(frozen=True)
class DiskAutomorphism(AnalyticMap):
    """z ↦ (z − a)/(1 − ā z) for |a| < 1."""

    a: complex

    def __post_init__(self):
        object.__setattr__(self, "a", complex(self.a))
        if not abs(self.a) < 1:
            raise ValueError("disk automorphism needs |a| < 1")

    @property
    def transform(self) -> MobiusTransform:
        return MobiusTransform.disk_automorphism(self.a)

    def __call__(self, z):
        return (z - self.a) / (1 - self.a.conjugate() * z)

    def derivative(self, z):
        return (1 - abs(self.a) ** 2) / (1 - self.a.conjugate() * z) ** 2

    def preimages(self, w, domain):
        w = complex(w)
        den = 1 + self.a.conjugate() * w
        if den == 0:
            return []
        return _finalize([((w + self.a) / den, 1)], domain)


@dataclass(frozen=True)
class TanQuarterStrip(AnalyticMap):
    """z ↦ tan(πi z / 4); sends the strip {|Im z| < 1} onto the unit disk."""

    _scale: complex = field(default=0.25j * math.pi, init=False, repr=False)

    def __call__(self, z):
        return np.tan(self._scale * z)

    def derivative(self, z):
        return self._scale / np.cos(self._scale * z) ** 2

    def preimages(self, w, domain):
        w = complex(w)
        try:
            base = cmath.atan(w) / self._scale
        except ValueError:  # w = ±i is never attained
            return []
        # period of the map is −4i
        lo, hi = domain.imag_bounds()
        if not (math.isfinite(lo) and math.isfinite(hi)):
            raise UnsupportedMap(f"tan map has infinitely many preimages in {domain!r}")
        k_lo = math.floor((base.imag - hi) / 4.0)
        k_hi = math.ceil((base.imag - lo) / 4.0)
        cands = [(base - 4j * k, 1) for k in range(k_lo, k_hi + 1)]
        return _finalize(cands, domain)


def preimages(f: AnalyticMap, w: complex, restrict: Domain) -> list[tuple[complex, int]]:
    """All preimages of ``w`` under ``f`` inside ``restrict``, with multiplicities."""
    if not isinstance(f, AnalyticMap):
        raise UnsupportedMap(f"not an analytic map: {f!r}")
    return f.preimages(w, restrict)
