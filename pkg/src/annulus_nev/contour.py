"""Zero location for holomorphic functions on an annulus by the argument principle.

The annulus is tiled by annular sectors ("cells").  For each cell the
boundary integrals

    (1/2 pi i) \\oint z^j f'(z)/f(z) dz,   j = 0, 1, 2

give the number of enclosed zeros and their power sums.  Cells holding one
zero are finished by Newton's method started at the first moment; cells
holding a tight cluster are confirmed by shrinking circles; anything else
is split into four.  Grid lines sit at irregular positions so that zeros on
the axes or on ``|z| = 1`` never land on them.  When a zero does come
within ``clearance`` of an edge the whole search is redone with shifted
grid lines and the outer boundary pushed out by a fraction of the
clearance.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import BoundaryZeroError

JITTER_STEP = 1e-6  # circles move to r (1 + s JITTER_STEP)
CLEARANCE = 1e-7  # well below the smallest jitter move, so a zero on a circle is cleared
MAX_DEPTH = 40
_GL_X, _GL_W = np.polynomial.legendre.leggauss(10)
_PANEL_TOL = 1e-11
_MAX_PANELS = 50_000
_MAX_CELLS = 200_000
# outer-boundary jitter, in units of the clearance
_JITTER = (0.0, 1.0, 0.5, 0.25, 0.75)
_ANGLE_OFFSET = 0.3183098861837907
_BAND_WIDTH = 0.7


class _Hit(Exception):
    """A zero came within the clearance of an integration path."""


Fn = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class ZeroSearch:
    zeros: tuple  # ((z, multiplicity), ...)
    inner: float
    outer: float
    cells: int
    attempts: int


@dataclass
class _Cell:
    t0: float  # log radius
    t1: float
    a0: float  # angle
    a1: float
    depth: int

    @property
    def size(self) -> float:
        r1 = math.exp(self.t1)
        return max(r1 - math.exp(self.t0), r1 * (self.a1 - self.a0))


class _Integrator:
    def __init__(self, f: Fn, df: Fn, clearance: float):
        self.f = f
        self.df = df
        self.clearance = clearance
        self.cache: dict = {}

    def _g(self, kind: str, fixed: float, s: np.ndarray) -> np.ndarray:
        if kind == "arc":
            z = math.exp(fixed) * np.exp(1j * s)
            dz = 1j * z
        else:
            z = np.exp(s + 1j * fixed)
            dz = z
        fv = self.f(z)
        dv = self.df(z)
        with np.errstate(all="ignore"):
            near = np.abs(fv) <= self.clearance * (1 + np.abs(z)) * np.abs(dv)
            g = dv / fv * dz
        if np.any(near) or not np.all(np.isfinite(g)):
            raise _Hit()
        return np.stack([g, g * z, g * z * z])

    def _panels(self, kind, fixed, a: np.ndarray, b: np.ndarray) -> np.ndarray:
        mid = 0.5 * (a + b)
        half = 0.5 * (b - a)
        s = (mid[:, None] + half[:, None] * _GL_X[None, :]).ravel()
        vals = self._g(kind, fixed, s).reshape(3, a.size, _GL_X.size)
        return (vals @ _GL_W).T * half[:, None]

    def edge(self, kind: str, fixed: float, a: float, b: float) -> np.ndarray:
        """Integral over an edge from parameter ``a`` to ``b``; moments scaled by 1."""
        lo, hi = (a, b) if a <= b else (b, a)
        key = (kind, fixed, lo, hi)
        val = self.cache.get(key)
        if val is None:
            val = self._adaptive(kind, fixed, lo, hi)
            self.cache[key] = val
        return val if a <= b else -val

    def _adaptive(self, kind, fixed, lo, hi) -> np.ndarray:
        if kind == "arc":
            scale = math.exp(fixed)
            n0 = max(2, math.ceil((hi - lo) / (math.pi / 8)))
        else:
            scale = math.exp(hi)
            n0 = max(2, math.ceil((hi - lo) / 0.25))
        norm = np.array([1.0, 1 / scale, 1 / scale**2])
        edges = np.linspace(lo, hi, n0 + 1)
        A, B = edges[:-1], edges[1:]
        est = self._panels(kind, fixed, A, B)
        total = np.zeros(3, dtype=complex)
        for _ in range(60):
            M = 0.5 * (A + B)
            left = self._panels(kind, fixed, A, M)
            right = self._panels(kind, fixed, M, B)
            fine = left + right
            err = np.abs(fine - est) * norm
            ok = np.all(err <= _PANEL_TOL * (1 + np.abs(fine) * norm), axis=1)
            total += fine[ok].sum(axis=0)
            bad = ~ok
            if not np.any(bad):
                return total
            A = np.concatenate([A[bad], M[bad]])
            B = np.concatenate([M[bad], B[bad]])
            est = np.concatenate([left[bad], right[bad]])
            if A.size > _MAX_PANELS:
                raise _Hit()
        raise _Hit()

    def cell(self, c: _Cell) -> np.ndarray:
        # counterclockwise: out along a0, arc at t1, in along a1, arc back at t0
        tot = (
            self.edge("rad", c.a0, c.t0, c.t1)
            + self.edge("arc", c.t1, c.a0, c.a1)
            + self.edge("rad", c.a1, c.t1, c.t0)
            + self.edge("arc", c.t0, c.a1, c.a0)
        )
        return tot / (2j * math.pi)


_NOISE = 1e4 * np.finfo(float).eps


def _circle_moments(f: Fn, df: Fn, center: complex, rho: float, majorant: Fn | None):
    """(count, sum of (z_j - center)) inside a small circle.

    Returns "noise" when ``|f|`` on the circle is down at the rounding level
    of its own evaluation and "hit" when a zero lies on the circle.
    """
    prev = None
    for n in (64, 128, 256, 512, 1024, 2048, 4096):
        w = np.exp(2j * math.pi * np.arange(n) / n)
        z = center + rho * w
        fv = f(z)
        dv = df(z)
        if majorant is not None and np.any(np.abs(fv) <= _NOISE * majorant(z)):
            return "noise"
        with np.errstate(all="ignore"):
            q = fv / dv
            g = dv / fv * rho * w
        if not np.all(np.isfinite(g)) or np.any(np.abs(q) <= 1e-3 * rho):
            return "hit"
        cur = np.array([g.mean(), (g * rho * w).mean()])
        if prev is not None and np.all(np.abs(cur - prev) <= 1e-8 * (1 + np.abs(cur))):
            return cur
        prev = cur
    return "noise"


def _newton(f: Fn, df: Fn, z: complex, m: int = 1, steps: int = 50) -> complex | None:
    for _ in range(steps):
        fv = complex(f(np.array([z]))[0])
        dv = complex(df(np.array([z]))[0])
        if fv == 0:
            return z
        if dv == 0 or not np.isfinite(dv) or not np.isfinite(fv):
            return None
        step = m * fv / dv
        z = z - step
        if abs(step) <= 4e-16 * (1 + abs(z)):
            return z
    return z


class _Search:
    def __init__(self, f: Fn, df: Fn, inner_t: float, outer_t: float, attempt: int, clearance: float, majorant=None):
        self.f, self.df = f, df
        self.majorant = majorant
        self.integ = _Integrator(f, df, clearance)
        self.inner_t, self.outer_t = inner_t, outer_t
        self.attempt = attempt
        self.cells_done = 0
        self.zeros: list[tuple[complex, int]] = []

    def initial_cells(self) -> list[_Cell]:
        span = self.outer_t - self.inner_t
        nr = max(1, math.ceil(span / _BAND_WIDTH))
        shift = 0.118 + 0.0371 * self.attempt
        ts = [self.inner_t] + [self.inner_t + span * (j + shift) / nr for j in range(1, nr)] + [self.outer_t]
        na = 8
        off = _ANGLE_OFFSET + 0.0517 * self.attempt
        angs = [off + 2 * math.pi * k / na for k in range(na + 1)]
        return [_Cell(ts[i], ts[i + 1], angs[k], angs[k + 1], 0) for i in range(nr) for k in range(na)]

    def split(self, c: _Cell) -> list[_Cell]:
        fr = 0.5 + 0.0127 * (1 + self.attempt)
        fa = 0.5 - 0.0073 * (1 + self.attempt)
        tm = c.t0 + fr * (c.t1 - c.t0)
        am = c.a0 + fa * (c.a1 - c.a0)
        d = c.depth + 1
        return [
            _Cell(c.t0, tm, c.a0, am, d),
            _Cell(tm, c.t1, c.a0, am, d),
            _Cell(c.t0, tm, am, c.a1, d),
            _Cell(tm, c.t1, am, c.a1, d),
        ]

    def run(self, max_depth: int) -> None:
        stack = self.initial_cells()
        while stack:
            c = stack.pop()
            self.cells_done += 1
            if self.cells_done > _MAX_CELLS:
                raise BoundaryZeroError("zero search exceeded the cell budget")
            mom = self.integ.cell(c)
            w = round(mom[0].real)
            if abs(mom[0] - w) > 0.25 or w < 0:
                if c.depth >= max_depth:
                    raise BoundaryZeroError("winding number did not settle")
                stack.extend(self.split(c))
                continue
            if w == 0:
                continue
            centroid = mom[1] / w
            if c.depth >= max_depth:
                self.zeros.append((complex(centroid), w))
                continue
            if w == 1:
                z = _newton(self.f, self.df, complex(centroid))
                if z is not None and abs(z - centroid) <= 1e-6 * (1 + abs(centroid)):
                    self.zeros.append((z, 1))
                    continue
                if self._inside(c, centroid):
                    self.zeros.append((complex(centroid), 1))
                    continue
                stack.extend(self.split(c))
                continue
            z = self._cluster(complex(centroid), w, c.size)
            if z is None:
                stack.extend(self.split(c))
            else:
                self.zeros.append((z, w))

    def _inside(self, c: _Cell, z: complex) -> bool:
        t = math.log(abs(z))
        a = math.atan2(z.imag, z.real)
        a = c.a0 + (a - c.a0) % (2 * math.pi)
        return c.t0 <= t <= c.t1 and c.a0 <= a <= c.a1

    def _cluster(self, center: complex, w: int, size: float) -> complex | None:
        rho = 0.25 * size
        floor = 1e-6 * (1 + abs(center))
        good = None
        while rho >= floor:
            got = _circle_moments(self.f, self.df, center, rho, self.majorant)
            if isinstance(got, str):
                if got == "hit":
                    return None
                break
            count = round(got[0].real)
            if abs(got[0] - count) > 0.25 or count != w:
                return None
            center = center + got[1] / w
            good = rho
            rho /= 10
        # below the rounding floor a tight cluster is a multiple zero
        return None if good is None else center


def find_zeros(
    f: Fn,
    df: Fn,
    outer: float,
    clearance: float = CLEARANCE,
    max_depth: int = MAX_DEPTH,
    majorant: Fn | None = None,
) -> ZeroSearch:
    """Zeros of a holomorphic ``f`` on ``{1/R <= |z| <= R}``, ``R`` near ``outer``.

    ``R`` is ``outer`` unless a zero sits within the clearance of the
    boundary circles, in which case it is ``outer * (1 + s*JITTER_STEP)`` for
    the first jitter ``s`` that clears it.  ``majorant`` bounds the
    magnitudes summed when evaluating ``f``; it lets cluster confirmation
    stop at the rounding floor.  Raises BoundaryZeroError when
    no attempt succeeds.
    """
    if not outer > 1:
        raise ValueError("outer radius must exceed 1")
    for attempt, s in enumerate(_JITTER):
        R = outer * (1 + s * JITTER_STEP)
        search = _Search(f, df, -math.log(R), math.log(R), attempt, clearance, majorant)
        try:
            search.run(max_depth)
        except _Hit:
            continue
        zs = tuple(sorted(search.zeros, key=lambda p: (abs(p[0]), math.atan2(p[0].imag, p[0].real) % (2 * math.pi))))
        return ZeroSearch(zs, 1 / R, R, search.cells_done, attempt + 1)
    raise BoundaryZeroError(f"zero within clearance of a contour for every jitter of R={outer}")
