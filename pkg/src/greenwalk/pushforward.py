"""Green's function of a stopping time projected through an analytic map.

If f is analytic on the base domain and B is stopped at τ, then f(B) is a
time-changed Brownian motion whose Green's function at w is the sum of the
base Green's function over the preimages of w, each weighted by the order of
the zero of f − w there.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Callable

from .closed_form import GreensValue
from .complex_geometry import AnalyticMap, Domain
from .errors import ParameterError, SourceImage, SourcePoint

BaseGreens = Callable[[complex, complex], GreensValue]


@dataclass(frozen=True)
class PushforwardProblem:
    """A map f, a base evaluator (z, w) ↦ G_τ(z, w) on ``base_domain``, and the source z."""

    map: AnalyticMap
    base_greens: BaseGreens
    source: complex
    base_domain: Domain

    def __post_init__(self):
        object.__setattr__(self, "source", complex(self.source))
        if not self.base_domain.contains(self.source):
            raise ParameterError(f"source {self.source} is not in {self.base_domain!r}")

    @property
    def source_image(self) -> complex:
        return complex(self.map(self.source))


def pushforward_terms(p: PushforwardProblem, w: complex,
                      weight_multiplicity: bool = True) -> list[tuple[complex, int, float]]:
    """(preimage, multiplicity, weighted term) in the deterministic preimage order."""
    w = complex(w)
    if w == p.source_image:
        raise SourceImage(f"w = {w} is the image of the source")
    terms = []
    for zeta, mult in p.map.preimages(w, p.base_domain):
        try:
            g = p.base_greens(p.source, zeta)
        except SourcePoint as exc:
            raise SourceImage(str(exc)) from exc
        if not g.is_finite:
            raise SourceImage(f"preimage {zeta} coincides with the source")
        weight = mult if weight_multiplicity else 1
        terms.append((zeta, mult, weight * g.value))
    return terms


def pushforward_greens(p: PushforwardProblem, w: complex,
                       weight_multiplicity: bool = True) -> GreensValue:
    """G_{σ_τ}(f(z), w) = Σ_{f(w') = w} n(f, w') G_τ(z, w').

    ``weight_multiplicity=False`` is a diagnostic that drops n(f, w'); it only
    differs at critical values, where it breaks continuity.
    """
    terms = pushforward_terms(p, w, weight_multiplicity)
    return GreensValue.finite(math.fsum(t for _, _, t in terms))


@dataclass(frozen=True)
class ContinuityReport:
    center: complex
    radius: float
    center_value: float
    ring_values: tuple[float, ...] = field(repr=False)
    max_discrepancy: float


def continuity_probe(p: PushforwardProblem, wc: complex, radius: float,
                     n_points: int = 16, weight_multiplicity: bool = True) -> ContinuityReport:
    """Largest jump between the pushforward at ``wc`` and on a small circle around it."""
    wc = complex(wc)
    center = pushforward_greens(p, wc, weight_multiplicity).value
    ring = []
    for j in range(n_points):
        w = wc + cmath.rect(radius, 2 * math.pi * (j + 0.5) / n_points)
        ring.append(pushforward_greens(p, w, weight_multiplicity).value)
    gap = max(abs(v - center) for v in ring)
    return ContinuityReport(wc, radius, center, tuple(ring), gap)
