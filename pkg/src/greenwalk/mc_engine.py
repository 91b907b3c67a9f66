"""Monte Carlo estimates of Green's functions from Brownian occupation time.

Paths start at a source point and run until a stopping rule fires (leaving a
domain, or winding ±2πn times around the origin). The expected time spent in
a set A before stopping is ∫_A G(z, w) dA(w), so time per unit area per path
estimates G.

Occupation time is stored as integer ticks of dt·2⁻²⁴ time units, which
makes merging grids exact and independent of the order or the number of
workers.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import _kernels as K
from .complex_geometry import (
    AnalyticMap,
    Disk,
    ExitTime,
    PuncturedDisk,
    RightHalfPlane,
    StoppingRule,
    Strip,
    UpperHalfPlane,
    WindingTime,
)
from .errors import BiasedWindow, OutsideDomain, ParameterError, SimulationError, StepTooCoarse, UnsupportedMap

N_BATCHES = 32
_TICK_LIMIT = 2**62
_SEED_MASK = (1 << 64) - 1


@dataclass(frozen=True)
class MCConfig:
    """Simulation settings.

    ``step_growth`` lets the time step grow as (step_growth · d)² once the
    walker is a distance d from the boundary and from the tallied region,
    never below ``dt``. Half-plane and winding exit times have infinite mean,
    so a fixed step would stall on rare excursions. Set it to 0 for a strictly
    fixed step.
    """

    n_paths: int = 10_000
    dt: float = 1e-4
    seed: int = 0
    workers: int = 1
    angular_cap: float = math.pi / 4
    bridge_correction: bool = True
    step_growth: float = 0.2
    max_steps: int = 10**8

    def __post_init__(self):
        if int(self.n_paths) != self.n_paths or self.n_paths < 1:
            raise ParameterError("n_paths must be a positive integer")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ParameterError("dt must be positive")
        if int(self.workers) != self.workers or self.workers < 1:
            raise ParameterError("workers must be a positive integer")
        if not 0 < self.angular_cap <= math.pi / 4:
            raise ParameterError("angular_cap must lie in (0, π/4]")
        if not 0 <= self.step_growth < 1:
            raise ParameterError("step_growth must lie in [0, 1)")
        if self.max_steps < 1:
            raise ParameterError("max_steps must be positive")
        object.__setattr__(self, "seed", int(self.seed) & _SEED_MASK)

    def echo(self) -> dict:
        return {
            "nPaths": self.n_paths, "dt": self.dt, "seed": self.seed, "workers": self.workers,
            "angularCap": self.angular_cap, "bridgeCorrection": self.bridge_correction,
            "stepGrowth": self.step_growth, "maxSteps": self.max_steps,
        }


# ---------------------------------------------------------------------------
# stopping rule encoding
# ---------------------------------------------------------------------------

def _encode_rule(rule: StoppingRule, start: complex) -> tuple[int, np.ndarray]:
    if rule is None:
        raise ParameterError("whole-plane runs never stop (G is infinite); give a stopping rule")
    if isinstance(rule, WindingTime):
        if start == 0:
            raise OutsideDomain("winding runs cannot start at the origin")
        return K.R_WINDING, np.array([float(rule.n)])
    if not isinstance(rule, ExitTime):
        raise ParameterError(f"unsupported stopping rule {rule!r}")
    dom = rule.domain
    if not dom.contains(start):
        raise OutsideDomain(f"start {start} is not inside {dom!r}")
    if isinstance(dom, UpperHalfPlane):
        return K.R_UPPER_HALF_PLANE, np.zeros(1)
    if isinstance(dom, RightHalfPlane):
        return K.R_RIGHT_HALF_PLANE, np.zeros(1)
    if isinstance(dom, Disk):
        return K.R_DISK, np.array([dom.center.real, dom.center.imag, dom.radius])
    if isinstance(dom, Strip):
        return (K.R_VERTICAL_STRIP if dom.vertical else K.R_STRIP), np.array([dom.half_width])
    if isinstance(dom, PuncturedDisk):
        return K.R_PUNCTURED_DISK, np.zeros(1)
    raise ParameterError(f"no simulator for domain {dom!r}")


def _args(start: complex, rule: StoppingRule, cfg: MCConfig):
    start = complex(start)
    kind, rp = _encode_rule(rule, start)
    return (np.uint64(cfg.seed), start.real, start.imag, kind, rp, float(cfg.dt),
            float(cfg.step_growth), float(cfg.angular_cap), bool(cfg.bridge_correction),
            int(cfg.max_steps))


# ---------------------------------------------------------------------------
# single paths
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HitBoundary:
    where: complex


@dataclass(frozen=True)
class WoundOut:
    sign: int
    where: complex


@dataclass(frozen=True)
class PathSample:
    points: np.ndarray = field(repr=False)   # complex
    times: np.ndarray = field(repr=False)
    stopped: object
    total_arg: Optional[float] = None

    @property
    def end(self) -> complex:
        return complex(self.points[-1])

    def __eq__(self, other):
        if not isinstance(other, PathSample):
            return NotImplemented
        return (np.array_equal(self.points, other.points) and np.array_equal(self.times, other.times)
                and self.stopped == other.stopped and self.total_arg == other.total_arg)

    __hash__ = None


def _raise_status(status: int, path_id: int) -> None:
    if status == K.S_TOO_COARSE:
        raise StepTooCoarse(
            f"path {path_id}: argument increment still above the cap after {K.MAX_BISECTIONS} bisections")
    if status == K.S_TRUNCATED:
        raise SimulationError(f"path {path_id} did not stop within max_steps")


def _one_path(start, rule, cfg: MCConfig, path_id: int) -> PathSample:
    seed, x0, y0, kind, rp, dt, growth, cap, bridge, max_steps = _args(start, rule, cfg)
    tp = np.zeros(K.TP_SIZE)
    ticks = np.zeros((1, 1), np.int64)
    size = 4096
    while True:
        rec = np.empty((size, 3))
        if kind == K.R_WINDING:
            status, x, y, t, phi, _, nrec = K.simulate_winding(
                path_id, seed, x0, y0, int(rp[0]), dt, growth, cap, bridge, max_steps,
                K.T_NONE, tp, ticks, 0, rec)
        else:
            status, x, y, t, _, nrec = K.simulate_exit(
                path_id, seed, x0, y0, kind, rp, dt, growth, bridge, max_steps,
                K.T_NONE, tp, ticks, 0, rec)
            phi = None
        if nrec <= size:
            break
        size = nrec
    _raise_status(status, path_id)
    rec = rec[:nrec]
    points = rec[:, 0] + 1j * rec[:, 1]
    if status == K.S_WOUND:
        stop = WoundOut(int(math.copysign(1, phi)), complex(x, y))
    else:
        stop = HitBoundary(complex(x, y))
    return PathSample(points, rec[:, 2].copy(), stop, phi)


def sample_path(start: complex, rule: StoppingRule, cfg: MCConfig, index: int = 0) -> PathSample:
    """Path number ``index`` of the run described by ``cfg``, with every step recorded."""
    return _one_path(start, rule, cfg, index)


def sample_paths(start: complex, rule: StoppingRule, cfg: MCConfig) -> list[PathSample]:
    return [_one_path(start, rule, cfg, i) for i in range(cfg.n_paths)]


@dataclass(frozen=True)
class Endpoints:
    """Stopping data for every path of a run, without the trajectories."""

    where: np.ndarray      # complex stop positions
    times: np.ndarray
    total_arg: np.ndarray  # zeros for exit-time runs
    steps: np.ndarray


def _split(n: int, workers: int):
    """(first, count) for each worker when path i goes to worker i mod workers."""
    return [(w, len(range(w, n, workers))) for w in range(min(workers, n))]


def stop_points(start: complex, rule: StoppingRule, cfg: MCConfig) -> Endpoints:
    """Stopping position and time of every path, in path order."""
    seed, x0, y0, kind, rp, dt, growth, cap, bridge, max_steps = _args(start, rule, cfg)
    W = cfg.workers
    parts = _split(cfg.n_paths, W)
    outs = [np.zeros((count, 6)) for _, count in parts]

    def work(j):
        first, count = parts[j]
        K.run_endpoints(first, W, count, seed, x0, y0, kind, rp, dt, growth, cap, bridge,
                        max_steps, outs[j])

    _run_pool(work, len(parts), W)
    out = np.zeros((cfg.n_paths, 6))
    for (first, _), o in zip(parts, outs):
        out[first::W] = o
    for i in np.nonzero(out[:, 4] >= K.S_TRUNCATED)[0][:1]:
        _raise_status(int(out[i, 4]), int(i))
    return Endpoints(out[:, 0] + 1j * out[:, 1], out[:, 2], out[:, 3], out[:, 5].astype(np.int64))


def _run_pool(work, n_jobs: int, workers: int) -> None:
    if workers == 1 or n_jobs == 1:
        for j in range(n_jobs):
            work(j)
        return
    with ThreadPoolExecutor(max_workers=workers) as pool:
        for f in [pool.submit(work, j) for j in range(n_jobs)]:
            f.result()


# ---------------------------------------------------------------------------
# projection through an analytic map
# ---------------------------------------------------------------------------

def project_path(sample: PathSample, fmap: AnalyticMap) -> PathSample:
    """Image path f(B) on the clock σ = Σ |f'(B)|² Δt (midpoint rule).

    The image is a time-changed Brownian path; its recorded points may be far
    apart where |f'| is large, so no argument is accumulated for it.
    """
    z = np.asarray(sample.points, dtype=complex)
    try:
        with np.errstate(all="raise"):
            img = np.asarray(fmap(z), dtype=complex)
            speed = np.abs(np.asarray(fmap.derivative(0.5 * (z[1:] + z[:-1])), dtype=complex)) ** 2
    except (FloatingPointError, ZeroDivisionError, OverflowError) as exc:
        raise UnsupportedMap(f"{fmap!r} is not analytic along the path: {exc}") from exc
    if not (np.all(np.isfinite(img)) and np.all(np.isfinite(speed))):
        raise UnsupportedMap(f"{fmap!r} is not analytic along the path")
    times = np.asarray(sample.times, dtype=float)
    if np.all(speed == 1.0):
        new_times = times.copy()
    else:
        new_times = np.concatenate(([times[0]], times[0] + np.cumsum(speed * np.diff(times))))
    stop = sample.stopped
    if isinstance(stop, HitBoundary):
        stop = HitBoundary(complex(img[-1]))
    elif isinstance(stop, WoundOut):
        stop = WoundOut(stop.sign, complex(img[-1]))
    return PathSample(img, new_times, stop, None)


# ---------------------------------------------------------------------------
# occupation grids
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridSpec:
    """Cells of size dx × dy with lower-left corner (x0, y0), nx across and ny up."""

    x0: float
    y0: float
    dx: float
    dy: float
    nx: int
    ny: int

    def __post_init__(self):
        if not (self.dx > 0 and self.dy > 0):
            raise ParameterError("cell sides must be positive")
        if int(self.nx) != self.nx or int(self.ny) != self.ny or self.nx < 1 or self.ny < 1:
            raise ParameterError("nx and ny must be positive integers")
        object.__setattr__(self, "nx", int(self.nx))
        object.__setattr__(self, "ny", int(self.ny))

    @classmethod
    def square(cls, xmin: float, xmax: float, ymin: float, ymax: float, nx: int, ny: int) -> GridSpec:
        return cls(xmin, ymin, (xmax - xmin) / nx, (ymax - ymin) / ny, nx, ny)

    @classmethod
    def cell_around(cls, w: complex, side: float) -> GridSpec:
        """A single square cell centred at w."""
        return cls(w.real - side / 2, w.imag - side / 2, side, side, 1, 1)

    def params(self) -> np.ndarray:
        return np.array([self.x0, self.y0, self.dx, self.dy, self.nx, self.ny], dtype=float)

    def centers(self) -> np.ndarray:
        """Complex cell centres, shape (ny, nx)."""
        xs = self.x0 + (np.arange(self.nx) + 0.5) * self.dx
        ys = self.y0 + (np.arange(self.ny) + 0.5) * self.dy
        return xs[None, :] + 1j * ys[:, None]

    @property
    def cell_area(self) -> float:
        return self.dx * self.dy


@dataclass(frozen=True, eq=False)
class OccupationGrid:
    """Occupation time per cell, kept per batch (path i is in batch i mod 32)."""

    spec: GridSpec
    batch_ticks: np.ndarray = field(repr=False)  # int64, (N_BATCHES, ny, nx)
    n_paths: int
    tick: float                                  # time units per tick
    config: dict = field(default_factory=dict, repr=False)

    @property
    def bounds(self) -> tuple[float, float, float, float]:
        s = self.spec
        return (s.x0, s.x0 + s.nx * s.dx, s.y0, s.y0 + s.ny * s.dy)

    @property
    def nx(self) -> int:
        return self.spec.nx

    @property
    def ny(self) -> int:
        return self.spec.ny

    @property
    def ticks(self) -> np.ndarray:
        return self.batch_ticks.sum(axis=0)

    @property
    def cells(self) -> np.ndarray:
        """Total occupation time per cell, shape (ny, nx)."""
        return self.ticks * self.tick

    def batch_sizes(self) -> np.ndarray:
        b = np.arange(N_BATCHES)
        return (self.n_paths - b + N_BATCHES - 1) // N_BATCHES

    def densities(self) -> np.ndarray:
        return self.cells / (self.spec.cell_area * self.n_paths)

    def stderr(self) -> np.ndarray:
        """Standard error of the density from the spread of the batch means."""
        sizes = self.batch_sizes()
        used = sizes > 0
        if used.sum() < 2:
            return np.full((self.ny, self.nx), math.inf)
        means = self.batch_ticks[used] * self.tick / (self.spec.cell_area * sizes[used, None, None])
        return means.std(axis=0, ddof=1) / math.sqrt(used.sum())

    def merge(self, other: OccupationGrid) -> OccupationGrid:
        """Pool two independent runs on the same grid (batches add cellwise)."""
        if self.spec != other.spec or self.tick != other.tick:
            raise ParameterError("cannot merge grids with different geometry or time step")
        return OccupationGrid(self.spec, self.batch_ticks + other.batch_ticks,
                              self.n_paths + other.n_paths, self.tick, dict(self.config))

    def __add__(self, other):
        return self.merge(other)

    def __eq__(self, other):
        if not isinstance(other, OccupationGrid):
            return NotImplemented
        return (self.spec == other.spec and self.n_paths == other.n_paths and self.tick == other.tick
                and np.array_equal(self.batch_ticks, other.batch_ticks))

    __hash__ = None

    # --- serialisation ------------------------------------------------------

    def to_csv(self, values: Optional[np.ndarray] = None) -> str:
        """Header line, the geometry, then ny rows of nx values (bottom row first)."""
        s = self.spec
        values = self.densities() if values is None else values
        return format_grid_csv(s, values)

    def summary(self, comparison: Optional[np.ndarray] = None) -> dict:
        s = self.spec
        out = {
            "bounds": {"x0": s.x0, "y0": s.y0, "dx": s.dx, "dy": s.dy},
            "shape": [s.ny, s.nx],
            "nPaths": self.n_paths,
            "densities": self.densities().tolist(),
            "stderr": self.stderr().tolist(),
            "config": self.config,
        }
        if comparison is not None:
            out["closedForm"] = comparison.tolist()
        return out

    def to_json(self, comparison: Optional[np.ndarray] = None) -> str:
        return json.dumps(self.summary(comparison), sort_keys=True)


def format_grid_csv(spec: GridSpec, values: np.ndarray) -> str:
    lines = ["x0,y0,dx,dy,nx,ny",
             ",".join([repr(float(spec.x0)), repr(float(spec.y0)), repr(float(spec.dx)),
                       repr(float(spec.dy)), str(spec.nx), str(spec.ny)])]
    for row in np.asarray(values, dtype=float).reshape(spec.ny, spec.nx):
        lines.append(",".join(repr(float(v)) for v in row))
    return "\n".join(lines) + "\n"


def parse_grid_csv(text: str) -> tuple[GridSpec, np.ndarray]:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or lines[0].strip() != "x0,y0,dx,dy,nx,ny":
        raise ValueError("missing grid header")
    x0, y0, dx, dy, nx, ny = lines[1].split(",")
    spec = GridSpec(float(x0), float(y0), float(dx), float(dy), int(nx), int(ny))
    rows = [[float(v) for v in ln.split(",")] for ln in lines[2:]]
    values = np.array(rows, dtype=float)
    if values.shape != (spec.ny, spec.nx):
        raise ValueError(f"expected {spec.ny}×{spec.nx} values, found {values.shape}")
    return spec, values


def _tally(start, rule, cfg: MCConfig, tkind: int, tally: Sequence[float], nbins: int):
    tp = np.zeros(K.TP_SIZE)
    tp[:len(tally)] = tally
    tp[-1] = K.TICKS_PER_STEP / cfg.dt
    seed, x0, y0, kind, rp, dt, growth, cap, bridge, max_steps = _args(start, rule, cfg)
    W = cfg.workers
    parts = _split(cfg.n_paths, W)
    ticks = [np.zeros((N_BATCHES, nbins), np.int64) for _ in parts]
    stats = [np.zeros(2, np.int64) for _ in parts]
    bad = [-1] * len(parts)

    def work(j):
        first, count = parts[j]
        bad[j] = K.run_paths(first, W, count, seed, x0, y0, kind, rp, dt, growth, cap, bridge,
                             max_steps, tkind, tp, N_BATCHES, ticks[j], stats[j])

    _run_pool(work, len(parts), W)
    failed = [b for b in bad if b >= 0]
    if failed:
        _raise_status(K.S_TOO_COARSE, min(failed))
    total = ticks[0]
    for t in ticks[1:]:
        total = total + t
    if total.min() < 0 or total.max() > _TICK_LIMIT:
        raise SimulationError("occupation counter overflow; increase dt for this region size")
    truncated = int(sum(s[0] for s in stats))
    steps = int(sum(s[1] for s in stats))
    return total, truncated, steps


def occupation_density(start: complex, rule: StoppingRule, grid: GridSpec, cfg: MCConfig) -> OccupationGrid:
    """Occupation time of ``cfg.n_paths`` paths binned on ``grid``.

    Paths that fail to stop within ``cfg.max_steps`` contribute what they
    accumulated so far; their count is reported as ``truncatedPaths``.
    """
    total, truncated, steps = _tally(start, rule, cfg, K.T_GRID, grid.params(), grid.nx * grid.ny)
    config = cfg.echo()
    config.update({"start": [complex(start).real, complex(start).imag], "rule": repr(rule),
                   "truncatedPaths": truncated, "totalSteps": steps})
    return OccupationGrid(grid, total.reshape(N_BATCHES, grid.ny, grid.nx), cfg.n_paths,
                          cfg.dt / K.TICKS_PER_STEP, config)


# ---------------------------------------------------------------------------
# point estimates
# ---------------------------------------------------------------------------

def _check_window(start: complex, rule: StoppingRule, w: complex, radius: float) -> None:
    if not radius > 0:
        raise ParameterError("window radius must be positive")
    if abs(w - start) <= radius:
        raise BiasedWindow(f"window of radius {radius} around {w} contains the source {start}")
    if isinstance(rule, WindingTime):
        if abs(w) <= radius:
            raise BiasedWindow("window contains the origin")
    elif isinstance(rule, ExitTime) and rule.domain.boundary_distance(w) <= radius:
        raise BiasedWindow(f"window of radius {radius} around {w} crosses the boundary")


def estimate_greens(start: complex, rule: StoppingRule, w: complex, window_radius: float,
                    cfg: MCConfig) -> tuple[float, float]:
    """Occupation density in the disk of radius ``window_radius`` about w.

    Returns (value, stderr); the error comes from the 32 batch means.
    """
    start, w = complex(start), complex(w)
    _encode_rule(rule, start)
    _check_window(start, rule, w, window_radius)
    total, _, _ = _tally(start, rule, cfg, K.T_WINDOW, (w.real, w.imag, float(window_radius)), 1)
    tick = cfg.dt / K.TICKS_PER_STEP
    area = math.pi * window_radius**2
    sizes = (cfg.n_paths - np.arange(N_BATCHES) + N_BATCHES - 1) // N_BATCHES
    value = float(total.sum() * tick / (area * cfg.n_paths))
    used = sizes > 0
    if used.sum() < 2:
        return value, math.inf
    means = total[used, 0] * tick / (area * sizes[used])
    return value, float(means.std(ddof=1) / math.sqrt(used.sum()))


__all__ = [
    "MCConfig", "PathSample", "HitBoundary", "WoundOut", "Endpoints", "GridSpec", "OccupationGrid",
    "sample_path", "sample_paths", "stop_points", "project_path", "occupation_density",
    "estimate_greens", "format_grid_csv", "parse_grid_csv", "N_BATCHES",
]
