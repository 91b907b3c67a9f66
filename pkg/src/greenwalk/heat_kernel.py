"""Transition densities of killed Brownian motion by the method of images.

Brownian motion here has variance t per coordinate, so the free kernel is
ρ_t(z, w) = exp(−|z − w|²/2t) / (2πt). Integrating a killed kernel over
t ∈ (0, ∞) recovers the Green's function of the stopping time.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy import integrate

from .closed_form import GreensValue
from .errors import NonConverged, NonpositiveTime, OutsideDomain

# Past this time the strip density is below exp(−π²t/8) ≈ 1e−32 of the free one.
STRIP_TIME_CUTOFF = 60.0


@dataclass(frozen=True)
class KernelSeriesConfig:
    max_images: int = 400
    image_tolerance: float = 1e-16   # relative to the free-kernel peak 1/(2πt)
    rel_tol: float = 1e-10           # quadrature
    abs_tol: float = 1e-11
    t_split: Optional[float] = None  # defaults to |z − w|²

    def __post_init__(self):
        if self.max_images < 1:
            raise ValueError("max_images must be >= 1")
        if not (self.image_tolerance > 0 and self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")


def _check_time(t: float) -> None:
    if not t > 0:
        raise NonpositiveTime(f"t must be positive, got {t!r}")


def rho_plane(t: float, z: complex, w: complex) -> float:
    _check_time(t)
    return math.exp(-abs(z - w) ** 2 / (2.0 * t)) / (2.0 * math.pi * t)


def rho_half_plane(t: float, z: complex, w: complex) -> float:
    """ρ_t(z, w) − ρ_t(z, w̄): the reflected path is removed."""
    _check_time(t)
    z, w = complex(z), complex(w)
    if z.imag <= 0 or w.imag < 0:
        raise OutsideDomain(f"upper half-plane needs Im z > 0 and Im w >= 0: z={z}, w={w}")
    # ρ(z,w) − ρ(z,w̄) = ρ(z,w)·(1 − exp(−2 Im z Im w / t))
    return rho_plane(t, z, w) * -math.expm1(-2.0 * z.imag * w.imag / t)


def _strip_images(t: float, z: complex, w: complex, cfg: KernelSeriesConfig) -> tuple[float, float]:
    """Alternating image sum for {|Im| < 1}; returns (value, first omitted pair)."""
    peak = 1.0 / (2.0 * math.pi * t)
    dx2 = (z.real - w.real) ** 2
    y, yw = z.imag, w.imag
    m = np.arange(1, cfg.max_images + 2, dtype=float)
    # image m sits at ±2m i + w (m even) or ±2m i + w̄ (m odd)
    img = np.where(m % 2 == 0, yw, -yw)
    up = np.exp(-(dx2 + (y - (img + 2.0 * m)) ** 2) / (2.0 * t))
    down = np.exp(-(dx2 + (y - (img - 2.0 * m)) ** 2) / (2.0 * t))
    pairs = np.where(m % 2 == 0, 1.0, -1.0) * (up + down)
    centre = math.exp(-(dx2 + (y - yw) ** 2) / (2.0 * t))
    # once the images are beyond the spread the pairs decrease in size
    small = np.nonzero(np.abs(pairs[:-1]) <= cfg.image_tolerance)[0]
    if small.size == 0:
        bound = abs(pairs[-1]) * peak
        if bound > cfg.image_tolerance * peak:
            raise NonConverged(
                f"strip image sum: first omitted pair {bound:.3g} after {cfg.max_images} images")
        used = cfg.max_images
    else:
        used = int(small[0]) + 1
        bound = abs(pairs[used]) * peak if used < pairs.size else 0.0
    total = math.fsum([centre, *pairs[:used].tolist()])
    return total * peak, bound


def rho_strip(t: float, z: complex, w: complex, cfg: KernelSeriesConfig = KernelSeriesConfig()) -> float:
    """Density of Brownian motion killed on leaving {|Im| < 1}."""
    _check_time(t)
    z, w = complex(z), complex(w)
    if abs(z.imag) >= 1 or abs(w.imag) > 1:
        raise OutsideDomain(f"strip needs |Im z| < 1, |Im w| <= 1: z={z}, w={w}")
    value, _ = _strip_images(t, z, w, cfg)
    # cancellation between images leaves rounding noise of order eps·peak
    return min(max(value, 0.0), rho_plane(t, z, w))


_KERNELS = {
    "half_plane": (rho_half_plane, math.inf),
    "strip": (rho_strip, STRIP_TIME_CUTOFF),
}


def integrate_kernel(kernel: str, z: complex, w: complex,
                     cfg: KernelSeriesConfig = KernelSeriesConfig()) -> GreensValue:
    """G(z, w) = ∫₀^∞ ρ_t(z, w) dt by adaptive quadrature.

    Below t* = |z − w|² the integrand is taken on log-spaced panels in
    s = ln(t/t*); above it the substitution u = 1/t maps the tail onto a
    finite interval.
    """
    try:
        rho, t_max = _KERNELS[kernel]
    except KeyError:
        raise ValueError(f"unknown kernel {kernel!r}; choose from {sorted(_KERNELS)}") from None
    z, w = complex(z), complex(w)
    if z == w:
        raise NonConverged("the diagonal integrand ~ 1/(2πt) is not integrable")
    rho(1.0, z, w)  # domain check
    if kernel == "strip":
        kernel_args = (cfg,)
    else:
        kernel_args = ()
    t_star = cfg.t_split if cfg.t_split is not None else abs(z - w) ** 2

    def lower(s):
        t = t_star * math.exp(s)
        return rho(t, z, w, *kernel_args) * t

    def upper(u):
        if u == 0.0:
            return 0.0 if math.isfinite(t_max) else _tail_limit(kernel, z, w)
        return rho(1.0 / u, z, w, *kernel_args) / (u * u)

    pieces = []
    panels = np.arange(-12.0, 0.0 + 1e-12, 1.0)
    for s0, s1 in zip(panels[:-1], panels[1:]):
        pieces.append(integrate.quad(lower, s0, s1, epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=200))
    u_min = 0.0 if not math.isfinite(t_max) else 1.0 / max(t_max, t_star)
    if t_star < t_max:
        pieces.append(integrate.quad(upper, u_min, 1.0 / t_star,
                                     epsabs=cfg.abs_tol, epsrel=cfg.rel_tol, limit=400))
    value = math.fsum(p[0] for p in pieces)
    err = sum(p[1] for p in pieces)
    if not math.isfinite(value) or err > max(cfg.abs_tol, cfg.rel_tol * abs(value)) * len(pieces):
        raise NonConverged(f"quadrature error estimate {err:.3g} for value {value:.6g}")
    return GreensValue.finite(value)


def _tail_limit(kernel: str, z: complex, w: complex) -> float:
    # ρ_H(1/u)/u² → 2 Im z Im w / (2π) · ... = Im z Im w / π as u → 0
    return z.imag * w.imag / math.pi
