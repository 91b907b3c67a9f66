"""Compiled inner loops for the Monte Carlo engine.

Everything here works on plain floats and integer codes so numba can compile
it in nopython mode. The public wrappers live in :mod:`greenwalk.mc_engine`.

Random numbers are a pure function of (seed, path index, counter): a
splitmix64 finaliser applied to a Weyl sequence keyed per path. A path's
trajectory therefore does not depend on which worker runs it or on what
other paths consume.
"""
import math

import numpy as np
from numba import njit

# stopping rules
R_UPPER_HALF_PLANE = 0
R_RIGHT_HALF_PLANE = 1
R_DISK = 2            # params: cx, cy, radius
R_STRIP = 3           # params: half-width          {|Im z| < h}
R_VERTICAL_STRIP = 4  # params: half-width          {|Re z| < h}
R_PUNCTURED_DISK = 5
R_WINDING = 6         # params: n

# occupation tallies
T_NONE = 0
T_GRID = 1    # params: x0, y0, dx, dy, nx, ny
T_WINDOW = 2  # params: cx, cy, radius
TP_SIZE = 7   # tally params; the last slot holds ticks per unit time

# path outcomes
S_BOUNDARY = 1
S_WOUND = 2
S_TRUNCATED = 3
S_TOO_COARSE = 4

MAX_BISECTIONS = 20
# winding steps keep a standard deviation below |z|/7, so a single step
# passing close to the origin is a 7σ event
WINDING_STEP_SCALE = 1.0 / 7.0
TICKS_PER_STEP = float(2 ** 24)  # resolution of the occupation counters, per dt

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_SALT = np.uint64(0xD1B54A32D192ED03)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO = np.uint64(2)
_FOUR = np.uint64(4)
_ONE = np.uint64(1)
_SHIFT_NODE = np.uint64(22)
_INV53 = 1.0 / 9007199254740992.0
TWO_PI = 2.0 * math.pi
MIN_STEP = 1e-300
HALF_PI = 0.5 * math.pi


@njit(cache=True, inline="always")
def _mix(x):
    x = (x ^ (x >> _S30)) * _M1
    x = (x ^ (x >> _S27)) * _M2
    return x ^ (x >> _S31)


@njit(cache=True)
def path_key(seed, path_id):
    return _mix(_mix(seed + _GOLDEN) + np.uint64(path_id) * _M2)


@njit(cache=True, inline="always")
def _uniform(key, counter):
    """Uniform on [0, 1) with 53 random bits."""
    return float(_mix(key + counter * _GOLDEN) >> _S11) * _INV53


@njit(cache=True, inline="always")
def _normal_pair(key, counter):
    # Box–Muller on counters 2c and 2c+1; u1 is shifted into (0, 1]
    u1 = 1.0 - _uniform(key, counter * _TWO)
    u2 = _uniform(key, counter * _TWO + _ONE)
    r = math.sqrt(-2.0 * math.log(u1))
    return r * math.cos(TWO_PI * u2), r * math.sin(TWO_PI * u2)


# ---------------------------------------------------------------------------
# geometry
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _signed_distance(kind, rp, x, y):
    if kind == R_UPPER_HALF_PLANE:
        return y
    if kind == R_RIGHT_HALF_PLANE:
        return x
    if kind == R_DISK:
        return rp[2] - math.hypot(x - rp[0], y - rp[1])
    if kind == R_STRIP:
        return rp[0] - abs(y)
    if kind == R_VERTICAL_STRIP:
        return rp[0] - abs(x)
    if kind == R_PUNCTURED_DISK:
        # the puncture is polar: paths never hit it
        return 1.0 - math.hypot(x, y)
    return math.hypot(x, y)


@njit(cache=True, inline="always")
def _line_cross(d0, d1, h):
    return math.exp(-2.0 * d0 * d1 / h)


@njit(cache=True)
def _bridge_probability(kind, rp, x0, y0, x1, y1, h):
    """Chance that the Brownian bridge between two interior samples left the domain.

    Uses exp(−2 d₀ d₁ / h) for a locally straight boundary; the strip
    combines its two lines as independent events.
    """
    if kind == R_STRIP or kind == R_VERTICAL_STRIP:
        c0 = y0 if kind == R_STRIP else x0
        c1 = y1 if kind == R_STRIP else x1
        hw = rp[0]
        p_top = _line_cross(hw - c0, hw - c1, h)
        p_bot = _line_cross(hw + c0, hw + c1, h)
        return 1.0 - (1.0 - p_top) * (1.0 - p_bot)
    d0 = _signed_distance(kind, rp, x0, y0)
    d1 = _signed_distance(kind, rp, x1, y1)
    return _line_cross(d0, d1, h)


@njit(cache=True)
def _project_to_boundary(kind, rp, x, y):
    if kind == R_UPPER_HALF_PLANE:
        return x, 0.0
    if kind == R_RIGHT_HALF_PLANE:
        return 0.0, y
    if kind == R_DISK or kind == R_PUNCTURED_DISK:
        cx = rp[0] if kind == R_DISK else 0.0
        cy = rp[1] if kind == R_DISK else 0.0
        rad = rp[2] if kind == R_DISK else 1.0
        dx, dy = x - cx, y - cy
        r = math.hypot(dx, dy)
        if r == 0.0:
            return cx + rad, cy
        return cx + rad * dx / r, cy + rad * dy / r
    if kind == R_STRIP:
        return x, math.copysign(rp[0], y)
    if kind == R_VERTICAL_STRIP:
        return math.copysign(rp[0], x), y
    return x, y


# ---------------------------------------------------------------------------
# occupation tallies
# ---------------------------------------------------------------------------

@njit(cache=True, inline="always")
def _roi_distance(tkind, tp, x, y):
    if tkind == T_GRID:
        x1 = tp[0] + tp[2] * tp[4]
        y1 = tp[1] + tp[3] * tp[5]
        ox = max(tp[0] - x, 0.0, x - x1)
        oy = max(tp[1] - y, 0.0, y - y1)
        return math.hypot(ox, oy)
    if tkind == T_WINDOW:
        return max(math.hypot(x - tp[0], y - tp[1]) - tp[2], 0.0)
    return math.inf


@njit(cache=True, inline="always")
def _bin(tkind, tp, x, y):
    if tkind == T_GRID:
        fx = (x - tp[0]) / tp[2]
        fy = (y - tp[1]) / tp[3]
        if fx < 0.0 or fy < 0.0 or fx >= tp[4] or fy >= tp[5]:
            return -1
        return int(fy) * int(tp[4]) + int(fx)
    if tkind == T_WINDOW:
        if math.hypot(x - tp[0], y - tp[1]) < tp[2]:
            return 0
    return -1


@njit(cache=True, inline="always")
def _credit(tkind, tp, ticks, batch, x0, y0, x1, y1, dur):
    if tkind == T_NONE or dur <= 0.0:
        return
    b = _bin(tkind, tp, 0.5 * (x0 + x1), 0.5 * (y0 + y1))
    if b >= 0:
        ticks[batch, b] += np.int64(dur * tp[6] + 0.5)


@njit(cache=True, inline="always")
def _record(rec, nrec, x, y, t):
    if nrec < rec.shape[0]:
        rec[nrec, 0] = x
        rec[nrec, 1] = y
        rec[nrec, 2] = t
    return nrec + 1


# ---------------------------------------------------------------------------
# single path
# ---------------------------------------------------------------------------

@njit(cache=True)
def _step_size(kind, dt, growth, cap, tkind, tp, x, y, scale):
    """Base step ``dt`` near the boundary and inside the tallied region.

    Further away the step grows like (growth · distance)², which keeps the
    per-step boundary crossing probability negligible while letting paths
    that wander far from everything cross space in few steps. Positions are
    exact Brownian samples because the step only depends on the current
    state.
    """
    h = dt
    if growth > 0.0:
        ell = min(scale, _roi_distance(tkind, tp, x, y))
        g = growth * ell
        h = max(dt, g * g)
    if kind == R_WINDING:
        a = min(0.25 * cap, WINDING_STEP_SCALE) * scale
        h = min(h, a * a)
    return h


@njit(cache=True)
def simulate_exit(path_id, seed, x, y, kind, rp, dt, growth, bridge, max_steps,
                  tkind, tp, ticks, batch, rec):
    """Run one path until it leaves the domain.

    Returns (status, x, y, t, steps, n_recorded).
    """
    key = path_key(seed, path_id)
    t = 0.0
    nrec = _record(rec, 0, x, y, t)
    k = 0
    while True:
        if k >= max_steps:
            return S_TRUNCATED, x, y, t, k, nrec
        d0 = _signed_distance(kind, rp, x, y)
        h = _step_size(kind, dt, growth, 0.0, tkind, tp, x, y, d0)
        ku = np.uint64(k)
        g1, g2 = _normal_pair(key, ku * _FOUR)
        s = math.sqrt(h)
        x1 = x + s * g1
        y1 = y + s * g2
        k += 1
        d1 = _signed_distance(kind, rp, x1, y1)
        if d1 <= 0.0:
            f = d0 / (d0 - d1)
            xe, ye = _project_to_boundary(kind, rp, x + f * (x1 - x), y + f * (y1 - y))
            _credit(tkind, tp, ticks, batch, x, y, xe, ye, f * h)
            t += f * h
            nrec = _record(rec, nrec, xe, ye, t)
            return S_BOUNDARY, xe, ye, t, k, nrec
        if bridge:
            p = _bridge_probability(kind, rp, x, y, x1, y1, h)
            if p > 0.0 and _uniform(key, ku * _FOUR + _TWO) < p:
                xe, ye = _project_to_boundary(kind, rp, 0.5 * (x + x1), 0.5 * (y + y1))
                # crossing time is unknown inside the step; credit half of it
                _credit(tkind, tp, ticks, batch, x, y, x1, y1, 0.5 * h)
                t += 0.5 * h
                nrec = _record(rec, nrec, xe, ye, t)
                return S_BOUNDARY, xe, ye, t, k, nrec
        _credit(tkind, tp, ticks, batch, x, y, x1, y1, h)
        x, y = x1, y1
        t += h
        nrec = _record(rec, nrec, x, y, t)


@njit(cache=True)
def simulate_winding(path_id, seed, x, y, n, dt, growth, cap, bridge, max_steps,
                     tkind, tp, ticks, batch, rec):
    """Run one path until its continuous argument reaches ±2πn.

    A proposed step whose argument increment exceeds ``cap`` is refined by
    Brownian-bridge bisection, depth first, up to MAX_BISECTIONS levels.
    Returns (status, x, y, t, phi, steps, n_recorded).
    """
    key = path_key(seed, path_id)
    key2 = _mix(key ^ _SALT)
    target = TWO_PI * n
    t = 0.0
    phi = 0.0
    nrec = _record(rec, 0, x, y, t)
    k = 0
    sx = np.empty(MAX_BISECTIONS + 4)
    sy = np.empty(MAX_BISECTIONS + 4)
    sh = np.empty(MAX_BISECTIONS + 4)
    sdepth = np.empty(MAX_BISECTIONS + 4, np.int64)
    snode = np.empty(MAX_BISECTIONS + 4, np.uint64)
    while True:
        if k >= max_steps:
            return S_TRUNCATED, x, y, t, phi, k, nrec
        r = math.hypot(x, y)
        h = _step_size(R_WINDING, dt, growth, cap, tkind, tp, x, y, r)
        if not h > MIN_STEP:
            # so close to the origin that the step underflows
            return S_TOO_COARSE, x, y, t, phi, k, nrec
        ku = np.uint64(k)
        g1, g2 = _normal_pair(key, ku * _FOUR)
        s = math.sqrt(h)
        k += 1
        top = 0
        sx[0] = x + s * g1
        sy[0] = y + s * g2
        sh[0] = h
        sdepth[0] = 0
        snode[0] = _ONE
        top = 1
        while top > 0:
            top -= 1
            ex, ey, eh = sx[top], sy[top], sh[top]
            depth, node = sdepth[top], snode[top]
            dphi = math.atan2(x * ey - y * ex, x * ex + y * ey)
            if abs(dphi) > cap:
                if depth >= MAX_BISECTIONS:
                    return S_TOO_COARSE, x, y, t, phi, k, nrec
                c = ((ku << _SHIFT_NODE) | node) * _FOUR
                m1, m2 = _normal_pair(key2, c)
                sd = math.sqrt(0.25 * eh)
                # right half waits on the stack, left half runs next
                sx[top], sy[top], sh[top] = ex, ey, 0.5 * eh
                sdepth[top], snode[top] = depth + 1, node * _TWO + _ONE
                top += 1
                sx[top] = 0.5 * (x + ex) + sd * m1
                sy[top] = 0.5 * (y + ey) + sd * m2
                sh[top] = 0.5 * eh
                sdepth[top], snode[top] = depth + 1, node * _TWO
                top += 1
                continue
            phi1 = phi + dphi
            if abs(phi1) >= target:
                # the segment crosses the positive real axis on the stopping sheet
                f = y / (y - ey) if y != ey else 1.0
                f = min(max(f, 0.0), 1.0)
                xe = x + f * (ex - x)
                _credit(tkind, tp, ticks, batch, x, y, xe, 0.0, f * eh)
                t += f * eh
                phi = math.copysign(target, phi1)
                nrec = _record(rec, nrec, xe, 0.0, t)
                return S_WOUND, xe, 0.0, t, phi, k, nrec
            if bridge:
                gap0 = target - abs(phi)
                gap1 = target - abs(phi1)
                if gap0 < HALF_PI and gap1 < HALF_PI:
                    d0 = r * math.sin(gap0) if node == _ONE else math.hypot(x, y) * math.sin(gap0)
                    d1 = math.hypot(ex, ey) * math.sin(gap1)
                    p = _line_cross(d0, d1, eh)
                    c = ((ku << _SHIFT_NODE) | node) * _FOUR + _TWO
                    if _uniform(key2, c) < p:
                        xm = 0.5 * (x + ex)
                        _credit(tkind, tp, ticks, batch, x, y, ex, ey, 0.5 * eh)
                        t += 0.5 * eh
                        phi = math.copysign(target, phi1)
                        xe = max(xm, 0.0)
                        nrec = _record(rec, nrec, xe, 0.0, t)
                        return S_WOUND, xe, 0.0, t, phi, k, nrec
            _credit(tkind, tp, ticks, batch, x, y, ex, ey, eh)
            x, y = ex, ey
            phi = phi1
            t += eh
            nrec = _record(rec, nrec, x, y, t)


@njit(cache=True, nogil=True)
def run_paths(first, stride, count, seed, x0, y0, kind, rp, dt, growth, cap, bridge,
              max_steps, tkind, tp, n_batches, ticks, stats):
    """Simulate paths first, first + stride, ... into a private tally.

    stats[0] counts truncated paths, stats[1] total steps. Returns the id of
    a path whose bisection hit the depth floor, or −1.
    """
    rec = np.empty((0, 3))
    for j in range(count):
        pid = first + j * stride
        batch = pid % n_batches
        if kind == R_WINDING:
            status, _, _, _, _, steps, _ = simulate_winding(
                pid, seed, x0, y0, int(rp[0]), dt, growth, cap, bridge, max_steps,
                tkind, tp, ticks, batch, rec)
        else:
            status, _, _, _, steps, _ = simulate_exit(
                pid, seed, x0, y0, kind, rp, dt, growth, bridge, max_steps,
                tkind, tp, ticks, batch, rec)
        if status == S_TOO_COARSE:
            return pid
        if status == S_TRUNCATED:
            stats[0] += 1
        stats[1] += steps
    return -1


@njit(cache=True, nogil=True)
def run_endpoints(first, stride, count, seed, x0, y0, kind, rp, dt, growth, cap, bridge,
                  max_steps, out):
    """Stop position, time, argument and status for each path (no tally)."""
    rec = np.empty((0, 3))
    tp = np.zeros(TP_SIZE)
    ticks = np.zeros((1, 1), np.int64)
    for j in range(count):
        pid = first + j * stride
        if kind == R_WINDING:
            status, x, y, t, phi, steps, _ = simulate_winding(
                pid, seed, x0, y0, int(rp[0]), dt, growth, cap, bridge, max_steps,
                T_NONE, tp, ticks, 0, rec)
        else:
            status, x, y, t, steps, _ = simulate_exit(
                pid, seed, x0, y0, kind, rp, dt, growth, bridge, max_steps,
                T_NONE, tp, ticks, 0, rec)
            phi = 0.0
        out[j, 0] = x
        out[j, 1] = y
        out[j, 2] = t
        out[j, 3] = phi
        out[j, 4] = status
        out[j, 5] = steps
    return -1
