"""Infinite-product identities obtained by computing one Green's function twice.

Each case pairs a doubly infinite (or classical one-sided) product with its
closed form. Products are evaluated in log space with the factors for +n and
−n multiplied together first, since several of them only converge in that
symmetric order.
"""
from __future__ import annotations

import cmath
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable

import numpy as np

from .errors import NonConverged, ParameterError, PoleInParameters
from .series import SeriesTruncation, paired_sum

POLE_RADIUS = 1e-8
DEFAULT_TRUNCATION = SeriesTruncation(N=10_000, tail_tolerance=1e-2)

PARAMETERS = {
    "mirror": ("a", "b", "c"),
    "fourHands": ("a", "b", "c"),
    "sinhProd": ("a",),
    "coshProd": ("a",),
    "sinProd": ("a",),
    "cosProd": ("a",),
    "tanSq": ("a",),
    "tanProd": ("c",),
}


@dataclass(frozen=True)
class IdentityCase:
    name: str
    params: dict = field(default_factory=dict)
    truncation: SeriesTruncation = DEFAULT_TRUNCATION

    def __post_init__(self):
        if self.name not in PARAMETERS:
            raise ParameterError(f"unknown identity {self.name!r}; choose from {sorted(PARAMETERS)}")
        missing = [p for p in PARAMETERS[self.name] if p not in self.params]
        if missing:
            raise ParameterError(f"{self.name} needs parameters {missing}")
        clean = {p: float(self.params[p]) for p in PARAMETERS[self.name]}
        object.__setattr__(self, "params", clean)


def _near_lattice(x: float, period: float, offset: float = 0.0) -> bool:
    r = (x - offset) / period
    return abs(r - round(r)) * period < POLE_RADIUS


def _log_abs_1p(q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """log|1 + q| and sign(1 + q), using log1p where 1 + q > 0."""
    q = np.asarray(q, dtype=float)
    pos = q > -1.0
    with np.errstate(divide="ignore", invalid="ignore"):
        logs = np.where(pos, np.log1p(np.where(pos, q, 0.0)), np.log(np.abs(1.0 + q)))
    return logs, np.where(pos, 1.0, -1.0)


# --- per-case factors -------------------------------------------------------
# Each returns (centre factor, q(n)) where the paired factor for ±n is 1 + q(n),
# or, when ``inverted`` is set below, 1/(1 + q(n)).

def _mirror(a, b, c):
    if abs(a - c) < POLE_RADIUS and _near_lattice(b, 2 * math.pi):
        raise PoleInParameters("mirror has a pole at a = c, b ∈ 2πℤ")
    four_ac, d2 = 4.0 * a * c, (a - c) ** 2

    def one(n):
        return four_ac / ((b + 2.0 * math.pi * n) ** 2 + d2)

    def q(n):
        return one(n) + one(-n) + one(n) * one(-n)

    return 1.0 + float(one(np.float64(0.0))), q


def _four_hands(a, b, c):
    S, D = b + c + 2.0, b - c
    if abs(a) < POLE_RADIUS and _near_lattice(D, 4.0):
        raise PoleInParameters("fourHands has a pole at a = 0, b − c ∈ 4ℤ")

    def one(n):
        return (S - D) * (S + D - 8.0 * n) / (a * a + (D - 4.0 * n) ** 2)

    def q(n):
        return one(n) + one(-n) + one(n) * one(-n)

    return 1.0 + float(one(np.float64(0.0))), q


def _classical(center_is_a: bool, shift: float, sign: float):
    def factory(a):
        def q(n):
            return sign * (a / (math.pi * (n - shift))) ** 2
        return (a if center_is_a else 1.0), q
    return factory


def _tan_sq(a):
    y = (a / math.pi) ** 2
    if _near_lattice(abs(a) / math.pi, 1.0, 0.5):
        raise PoleInParameters("tanSq has a pole at a ∈ π/2 + πℤ")

    def q(n):
        u = n * n - y
        return (0.5 * u + 0.0625 - n * n) / (u * u)

    return y / (0.25 - y), q


def _tan_prod(c):
    x = c / math.pi
    if _near_lattice(x, 1.0, -0.5):
        raise PoleInParameters("tanProd has a pole at c ∈ π/2 + πℤ")

    def q(n):
        return -(x + 0.25) / (n * n - x * x)

    return x / (x + 0.5), q


_FACTORS: dict[str, tuple[Callable, bool]] = {
    "mirror": (_mirror, False),
    "fourHands": (_four_hands, False),
    "sinhProd": (_classical(True, 0.0, +1.0), False),
    "coshProd": (_classical(False, 0.5, +1.0), False),
    "sinProd": (_classical(True, 0.0, -1.0), False),
    "cosProd": (_classical(False, 0.5, -1.0), False),
    "tanSq": (_tan_sq, True),
    "tanProd": (_tan_prod, True),
}


@dataclass(frozen=True)
class PartialProduct:
    value: float
    tail_bound: float           # relative size of the omitted tail
    interval: tuple[float, float]  # multiplicative interval for the true value / value
    N: int


def lhs_partial(case: IdentityCase) -> PartialProduct:
    """Product over {0} ∪ {±1, …, ±N} (paired), with a fitted c/n² tail envelope."""
    N = case.truncation.N
    if N < 4:
        raise ParameterError("truncation N must be >= 4")
    factory, inverted = _FACTORS[case.name]
    center, q = factory(*case.params.values())
    if center == 0.0:
        return PartialProduct(0.0, 0.0, (1.0, 1.0), N)
    s = -1.0 if inverted else 1.0

    signs = []

    def log_pair(n):
        logs, sg = _log_abs_1p(q(n))
        signs.append(sg)
        return s * logs

    ps = paired_sum(math.log(abs(center)), log_pair, N)
    negatives = int(np.count_nonzero(signs[0] < 0)) + (center < 0)
    sign = -1.0 if negatives % 2 else 1.0
    value = sign * math.exp(ps.partial)
    tail_bound = math.expm1(ps.tail_bound)
    if not math.isfinite(value) or tail_bound > case.truncation.tail_tolerance:
        raise NonConverged(f"{case.name}: tail bound {tail_bound:.3g} at N={N}")
    lo, hi = sorted((1.0, math.exp(ps.tail)))
    return PartialProduct(value, tail_bound, (lo, hi), N)


def one_sided_product(case: IdentityCase) -> float:
    """Diagnostic: the same number of factors but indices 0..2N, unpaired.

    Only meaningful for the products indexed by all of ℤ.
    """
    N = case.truncation.N
    n = np.arange(0, 2 * N + 1, dtype=float)
    p = case.params
    if case.name == "tanProd":
        x = p["c"] / math.pi
        f = (n + x) / ((n - 0.5) - x)
        lead = -1.0
    elif case.name == "tanSq":
        y = (p["a"] / math.pi) ** 2
        f = (n * n - y) / ((n - 0.5) ** 2 - y)
        lead = -1.0
    elif case.name == "mirror":
        a, b, c = p["a"], p["b"], p["c"]
        f = ((b + 2 * math.pi * n) ** 2 + (a + c) ** 2) / ((b + 2 * math.pi * n) ** 2 + (a - c) ** 2)
        lead = 1.0
    elif case.name == "fourHands":
        a, b, c = p["a"], p["b"], p["c"]
        f = (a * a + ((b + c) - (4 * n - 2)) ** 2) / (a * a + ((b - c) - 4 * n) ** 2)
        lead = 1.0
    else:
        raise ParameterError(f"{case.name} is not indexed by ℤ")
    sign = -1.0 if np.count_nonzero(f < 0) % 2 else 1.0
    return lead * sign * math.exp(math.fsum(np.log(np.abs(f)).tolist()))


def rhs_closed(case: IdentityCase) -> float:
    p = case.params
    name = case.name
    if name == "mirror":
        _mirror(p["a"], p["b"], p["c"])  # pole check
        a, b, c = p["a"], p["b"], p["c"]
        return abs((1 - cmath.exp(-a - c + 1j * b)) / (math.exp(-a) - cmath.exp(-c + 1j * b))) ** 2
    if name == "fourHands":
        a, b, c = p["a"], p["b"], p["c"]
        _four_hands(a, b, c)
        tb = math.tan(0.25 * math.pi * b)
        tw = cmath.tan(0.25j * math.pi * a - 0.25 * math.pi * c)
        den = tb + tw
        if abs(den) < POLE_RADIUS:
            raise PoleInParameters("fourHands right-hand side is singular")
        return abs((1 + tb * tw) / den) ** 2
    if name == "sinhProd":
        return math.sinh(p["a"])
    if name == "coshProd":
        return math.cosh(p["a"])
    if name == "sinProd":
        return math.sin(p["a"])
    if name == "cosProd":
        return math.cos(p["a"])
    if name == "tanSq":
        _tan_sq(p["a"])
        return math.tan(p["a"]) ** 2
    if name == "tanProd":
        _tan_prod(p["c"])
        return math.tan(p["c"])
    raise ParameterError(name)


@dataclass(frozen=True)
class IdentityReport:
    name: str
    params: dict
    N: int
    lhs: float
    rhs: float
    relError: float
    tailBound: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["pass"] = d.pop("passed")
        return d

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kwargs)


def verify(case: IdentityCase) -> IdentityReport:
    """Pass iff relError ≤ max(10·tailBound, 1e−6)."""
    left = lhs_partial(case)
    right = rhs_closed(case)
    diff = abs(left.value - right)
    rel = diff / abs(right) if right != 0 else diff
    ok = rel <= max(10.0 * left.tail_bound, 1e-6)
    return IdentityReport(case.name, dict(case.params), left.N, left.value, right, rel, left.tail_bound, ok)
