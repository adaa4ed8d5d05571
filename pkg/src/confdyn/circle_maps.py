"""Expansive covering maps of the unit circle.

Every map is represented through its *lift*: a strictly monotone real
function L with L(t + 1) = L(t) + s*d, where d is the degree and s = +1
for orientation-preserving maps, s = -1 for orientation-reversing ones.
The circle map itself is t -> L(t) mod 1.  All lifts here are globally
strictly monotone, which makes piece inversion a bracketed 1-d solve.

Kinds:
  * Power(d, orientation): z^d or the angle map of conj(z)^d.
  * BlaschkeParabolicFamily(d): B(z) = ((d+1)z^d + (d-1)) / ((d-1)z^d + (d+1)),
    a degree-d Blaschke product with a multiplier-one fixed point at z = 1
    whose second derivative vanishes there.
  * GeneralBlaschke(rotation, zeros, anti): e^{2 pi i theta} prod (z-c)/(1-conj(c)z),
    optionally post-composed with complex conjugation (anti=True).
  * PiecewiseReflection(breaks): on each arc [a_k, a_{k+1}], reflection in the
    circle orthogonal to S^1 through the arc's endpoints.
  * Hybrid(d, reflect_arcs): break points j/(d+1); selected arcs use the
    orthogonal-circle reflection, the rest the power map angle formula.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import OutsidePieceDomain
from .geom import EuclideanCircle, angle_of, mod1, orthogonal_circle, unit
from .numparse import format_real, parse_real

PRESERVING = "preserving"
REVERSING = "reversing"


def _asarray(t):
    arr = np.asarray(t, dtype=float)
    return arr, arr.ndim == 0


def _ret(arr, scalar):
    return float(arr) if scalar else arr


class CoveringMap:
    """Common interface; subclasses provide lift / deriv / extension."""

    degree: int
    orientation: str

    @property
    def sign(self) -> int:
        return 1 if self.orientation == PRESERVING else -1

    # -- circle dynamics ------------------------------------------------

    def lift(self, t):
        raise NotImplementedError

    def deriv(self, t):
        """Signed derivative dL/dt of the lift."""
        raise NotImplementedError

    def eval(self, t):
        return mod1(self.lift(t))

    # -- piece structure -------------------------------------------------

    def natural_breaks(self) -> np.ndarray:
        """Default Markov break points for this map."""
        raise NotImplementedError

    def extension(self, z: complex, k: int) -> complex:
        """Conformal extension of piece k at a point near its arc."""
        raise NotImplementedError

    def invert_lift(self, y, lo, hi):
        """Solve L(t) = y for t in [lo, hi] (lift must be monotone there).

        y, lo, hi may be arrays of a common shape.  Subclasses override
        with closed forms where available.
        """
        return self._solve_monotone(y, lo, hi)

    def _solve_monotone(self, y, lo, hi, iters: int = 60):
        y, scalar = _asarray(y)
        lo = np.broadcast_to(np.asarray(lo, dtype=float), y.shape).copy()
        hi = np.broadcast_to(np.asarray(hi, dtype=float), y.shape).copy()
        increasing = self.sign > 0
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            val = self.lift(mid)
            if increasing:
                take_lo = val < y
            else:
                take_lo = val > y
            lo = np.where(take_lo, mid, lo)
            hi = np.where(take_lo, hi, mid)
        t = 0.5 * (lo + hi)
        # Newton polish
        for _ in range(3):
            dv = self.deriv(t)
            step = np.where(dv != 0.0, (self.lift(t) - y) / np.where(dv == 0, 1, dv), 0.0)
            t = np.clip(t - step, lo, hi)
        return _ret(t, scalar)

    # -- serialization ----------------------------------------------------

    def to_config(self) -> dict:
        raise NotImplementedError


@dataclass(frozen=True)
class Power(CoveringMap):
    degree: int
    orientation: str = REVERSING

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("degree must be >= 2")
        if self.orientation not in (PRESERVING, REVERSING):
            raise ValueError(f"bad orientation {self.orientation!r}")

    def lift(self, t):
        t, scalar = _asarray(t)
        return _ret(self.sign * self.degree * t, scalar)

    def deriv(self, t):
        t, scalar = _asarray(t)
        return _ret(np.full(t.shape, float(self.sign * self.degree)), scalar)

    def natural_breaks(self) -> np.ndarray:
        # Fixed points: s*d*t = t mod 1.
        if self.sign < 0:
            n = self.degree + 1
        else:
            n = self.degree - 1
        return np.arange(n) / float(n)

    def extension(self, z: complex, k: int = 0) -> complex:
        r = abs(z)
        if not 0.25 < r < 4.0:
            raise OutsidePieceDomain(f"|z| = {r} too far from the circle")
        if self.sign > 0:
            return z ** self.degree
        return 1.0 / z ** self.degree

    def invert_lift(self, y, lo, hi):
        y, scalar = _asarray(y)
        t = y / (self.sign * self.degree)
        return _ret(np.clip(t, np.minimum(lo, hi), np.maximum(lo, hi)), scalar)

    def to_config(self) -> dict:
        return {"kind": "power", "degree": self.degree,
                "orientation": self.orientation}


@dataclass(frozen=True)
class BlaschkeParabolicFamily(CoveringMap):
    """B(z) = ((d+1) z^d + (d-1)) / ((d-1) z^d + (d+1)); holomorphic, degree d."""

    degree: int
    orientation: str = field(default=PRESERVING, init=False)

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("degree must be >= 2")

    # B = M(z^d) with M a boundary-fixing Mobius map; lift in closed form.
    def _m01(self, s):
        a, b = self.degree + 1.0, self.degree - 1.0
        w = unit(s)
        return mod1(np.angle((a * w + b) / (b * w + a)) / (2 * np.pi))

    def _m01_inv(self, u):
        a, b = self.degree + 1.0, self.degree - 1.0
        w = unit(u)
        return mod1(np.angle((a * w - b) / (-b * w + a)) / (2 * np.pi))

    def lift(self, t):
        t, scalar = _asarray(t)
        s = self.degree * t
        fl = np.floor(s)
        return _ret(fl + self._m01(s - fl), scalar)

    def deriv(self, t):
        t, scalar = _asarray(t)
        a, b = self.degree + 1.0, self.degree - 1.0
        w = unit(mod1(self.degree * t))
        out = self.degree * 4.0 * self.degree / np.abs(b * w + a) ** 2
        return _ret(out, scalar)

    def rational(self, z):
        d = self.degree
        zd = z ** d
        return ((d + 1) * zd + (d - 1)) / ((d - 1) * zd + (d + 1))

    def natural_breaks(self) -> np.ndarray:
        # d-th roots of 1 and of -1: the preimages of the fixed point 1
        # and of the half-turn point -1.
        return np.arange(2 * self.degree) / (2.0 * self.degree)

    def extension(self, z: complex, k: int = 0) -> complex:
        r = abs(z)
        if not 0.25 < r < 4.0:
            raise OutsidePieceDomain(f"|z| = {r} too far from the circle")
        return self.rational(z)

    def invert_lift(self, y, lo, hi):
        # The lift is a global bijection of the line; invert it exactly
        # and use the bracket only to absorb rounding at its ends.
        y, scalar = _asarray(y)
        fl = np.floor(y)
        t = (fl + self._m01_inv(y - fl)) / self.degree
        return _ret(np.clip(t, np.minimum(lo, hi), np.maximum(lo, hi)), scalar)

    def to_config(self) -> dict:
        return {"kind": "blaschke_parabolic", "degree": self.degree}


@dataclass(frozen=True)
class GeneralBlaschke(CoveringMap):
    """Finite Blaschke product, optionally post-conjugated (anti=True)."""

    rotation: float  # turns
    zeros: Tuple[complex, ...]
    anti: bool = False

    def __post_init__(self):
        zs = tuple(complex(c) for c in self.zeros)
        object.__setattr__(self, "zeros", zs)
        if len(zs) < 2:
            raise ValueError("need degree >= 2")
        if any(abs(c) >= 1 for c in zs):
            raise ValueError("zeros must lie in the open unit disk")

    @property
    def degree(self) -> int:
        return len(self.zeros)

    @property
    def orientation(self) -> str:
        return REVERSING if self.anti else PRESERVING

    def _product(self, z):
        out = np.full(np.shape(z), np.exp(2j * np.pi * self.rotation),
                      dtype=complex)
        for c in self.zeros:
            out = out * (z - c) / (1.0 - np.conj(c) * z)
        return out

    def _lift_holo(self, t):
        # Each Blaschke factor has strictly increasing boundary phase that
        # gains one full turn per circuit; anchor each factor at t = 0.
        t = np.asarray(t, dtype=float)
        fl = np.floor(t)
        r = t - fl
        z = unit(r)
        total = np.full(r.shape, self.rotation)
        for c in self.zeros:
            base = angle_of((1.0 - c) / (1.0 - np.conj(c)))
            cur = angle_of((z - c) / (1.0 - np.conj(c) * z))
            total = total + base + mod1(cur - base)
        return total + self.degree * fl

    def lift(self, t):
        t, scalar = _asarray(t)
        val = self._lift_holo(t)
        return _ret(-val if self.anti else val, scalar)

    def deriv(self, t):
        t, scalar = _asarray(t)
        z = unit(mod1(t))
        total = np.zeros(z.shape, dtype=float)
        for c in self.zeros:
            total += (1.0 - abs(c) ** 2) / np.abs(z - c) ** 2
        return _ret(self.sign * total, scalar)

    def rational(self, z):
        return self._product(z)

    def natural_breaks(self) -> np.ndarray:
        """Fixed points of the circle map, used as default break points."""
        # The lift displacement L(t) - t is strictly monotone with total
        # change s*d - 1 over one turn; each integer crossing is a fixed point.
        n = self.degree + 1 if self.anti else self.degree - 1
        g0 = self.lift(0.0) - 0.0
        g1 = self.lift(1.0) - 1.0
        vals = []
        lo_v, hi_v = (g0, g1) if g1 > g0 else (g1, g0)
        for m in range(int(np.ceil(lo_v - 1e-9)), int(np.floor(hi_v + 1e-9)) + 1):
            lo, hi = 0.0, 1.0
            for _ in range(200):
                mid = 0.5 * (lo + hi)
                gm = self.lift(mid) - mid
                if (gm < m) == (g0 < m):
                    lo = mid
                else:
                    hi = mid
            root = 0.5 * (lo + hi)
            vals.append(mod1(root))
        vals = np.unique(np.round(np.sort(np.array(vals)), 14) % 1.0)
        if len(vals) != n:
            raise ValueError(
                f"expected {n} fixed points, found {len(vals)}")
        return vals

    def extension(self, z: complex, k: int = 0) -> complex:
        r = abs(z)
        if not 0.25 < r < 4.0:
            raise OutsidePieceDomain(f"|z| = {r} too far from the circle")
        val = self._product(z)
        return 1.0 / val if self.anti else val

    def to_config(self) -> dict:
        return {"kind": "blaschke",
                "rotation": format_real(self.rotation),
                "zeros": [[format_real(c.real), format_real(c.imag)]
                          for c in self.zeros],
                "anti": self.anti}


class _PiecewiseBase(CoveringMap):
    """Shared machinery for break-point-indexed reflection/power pieces."""

    orientation = REVERSING
    breaks: np.ndarray  # d+1 increasing angles in [0, 1)

    def _is_reflection(self, k: int) -> bool:
        raise NotImplementedError

    def _circle(self, k: int) -> EuclideanCircle:
        raise NotImplementedError

    def piece_of(self, t):
        """Index k of the arc [a_k, a_{k+1}) containing angle t (mod 1)."""
        t01 = mod1(t)
        idx = np.searchsorted(self.breaks, t01, side="right") - 1
        return np.where(idx < 0, len(self.breaks) - 1, idx)

    def _arc_bounds(self, k):
        br = self.breaks
        n = len(br)
        ak = br[k]
        ak1 = np.where(k + 1 < n, br[(k + 1) % n], br[0] + 1.0)
        return ak, ak1

    def _reflect_angle(self, k, t01):
        """Angle of the reflection r_k applied to e^{2 pi i t}, as array."""
        kk = np.atleast_1d(np.asarray(k))
        tt = np.atleast_1d(np.asarray(t01, dtype=float))
        out = np.empty(tt.shape, dtype=float)
        for j in np.unique(kk):
            C = self._circle(int(j))
            sel = kk == j
            z = unit(tt[sel])
            w = C.center + C.radius ** 2 / np.conj(z - C.center)
            out[sel] = angle_of(w)
        return out

    def lift(self, t):
        t, scalar = _asarray(t)
        t = np.atleast_1d(t)
        a0 = float(self.breaks[0])
        u = t - a0
        m = np.floor(u)
        tt = a0 + (u - m)  # in [a0, a0+1)
        kk = np.atleast_1d(np.minimum(self.piece_of(tt), len(self.breaks) - 1))
        ak, ak1 = self._arc_bounds(kk)
        val = np.empty(tt.shape, dtype=float)
        refl = np.zeros(tt.shape, dtype=bool)
        for j in np.unique(kk):
            refl |= (kk == j) & self._is_reflection(int(j))
        if np.any(refl):
            u_ang = self._reflect_angle(kk[refl], tt[refl])
            lowrep = ak1[refl] - 1.0
            rep = lowrep + mod1(u_ang - lowrep)
            rep = np.minimum(rep, ak[refl])  # clip rounding overshoot
            val[refl] = rep - kk[refl]
        pw = ~refl
        if np.any(pw):
            val[pw] = -self.degree * tt[pw]
        # exact snap at break points
        exact = tt == ak
        val = np.where(exact, ak - kk, val)
        out = val - self.degree * m
        return _ret(out[0] if scalar else out, scalar)

    def deriv(self, t):
        t, scalar = _asarray(t)
        t01 = np.atleast_1d(mod1(t))
        kk = np.atleast_1d(self.piece_of(t01))
        out = np.full(t01.shape, -float(self.degree))
        for j in np.unique(kk):
            if self._is_reflection(int(j)):
                C = self._circle(int(j))
                sel = kk == j
                z = unit(t01[sel])
                out[sel] = -(C.radius ** 2 / np.abs(z - C.center) ** 2)
        return _ret(out[0] if scalar else out, scalar)

    def extension(self, z: complex, k: int) -> complex:
        if self._is_reflection(k):
            C = self._circle(k)
            if abs(z - C.center) > C.radius * (1.0 + 1e-9) and abs(abs(z) - 1.0) > 0.05:
                raise OutsidePieceDomain(
                    f"point not in the reflection neighborhood of piece {k}")
            w = np.conj(C.center) + C.radius ** 2 / (z - C.center)
            return 1.0 / complex(w)
        r = abs(z)
        if not 0.25 < r < 4.0:
            raise OutsidePieceDomain(f"|z| = {r} too far from the circle")
        return 1.0 / z ** self.degree

    def invert_lift(self, y, lo, hi):
        y, scalar = _asarray(y)
        y = np.atleast_1d(y)
        lo_a = np.broadcast_to(np.atleast_1d(np.minimum(lo, hi)), y.shape)
        hi_a = np.broadcast_to(np.atleast_1d(np.maximum(lo, hi)), y.shape)
        mid = 0.5 * (lo_a + hi_a)
        kk = np.atleast_1d(self.piece_of(mod1(mid)))
        out = np.empty(y.shape, dtype=float)
        refl = np.zeros(y.shape, dtype=bool)
        for j in np.unique(kk):
            refl |= (kk == j) & self._is_reflection(int(j))
        if np.any(refl):
            ang = self._reflect_angle(kk[refl], mod1(y[refl]))
            w = mod1(ang - lo_a[refl])
            width = hi_a[refl] - lo_a[refl]
            # a value that should sit at the bracket's lower end can round
            # to w ~ 1; snap it back rather than letting clip send it to hi
            w = np.where(w > width + 0.5, 0.0, w)
            out[refl] = lo_a[refl] + np.minimum(w, width)
        pw = ~refl
        if np.any(pw):
            out[pw] = y[pw] / (-self.degree)
        out = np.clip(out, lo_a, hi_a)
        return _ret(out[0] if scalar else out, scalar)


@dataclass(frozen=True)
class PiecewiseReflection(_PiecewiseBase):
    """Reflections in circles orthogonal to S^1 over each break arc."""

    break_angles: Tuple[float, ...]

    def __post_init__(self):
        br = np.array(sorted(mod1(a) for a in self.break_angles), dtype=float)
        if len(br) < 3:
            raise ValueError("need at least 3 break points")
        if len(np.unique(br)) != len(br):
            raise ValueError("break points must be distinct")
        object.__setattr__(self, "breaks", br)
        circles = []
        n = len(br)
        for k in range(n):
            a = br[k]
            b = br[(k + 1) % n]
            circles.append(orthogonal_circle(a, b))  # raises if arc >= pi
        object.__setattr__(self, "_circles", tuple(circles))

    @property
    def degree(self) -> int:
        return len(self.breaks) - 1

    def _is_reflection(self, k: int) -> bool:
        return True

    def _circle(self, k: int) -> EuclideanCircle:
        return self._circles[k]

    def natural_breaks(self) -> np.ndarray:
        return self.breaks.copy()

    def to_config(self) -> dict:
        return {"kind": "reflection",
                "breaks": [format_real(a) for a in self.breaks]}


@dataclass(frozen=True)
class Hybrid(_PiecewiseBase):
    """Power map pieces with selected arcs replaced by reflections.

    Break points are j/(d+1); reflect_arcs lists the arc indices k
    (the arc from k/(d+1) to (k+1)/(d+1)) carrying reflections.
    """

    degree: int
    reflect_arcs: Tuple[int, ...]

    def __post_init__(self):
        if self.degree < 2:
            raise ValueError("degree must be >= 2")
        n = self.degree + 1
        arcs = tuple(sorted(set(int(k) % n for k in self.reflect_arcs)))
        object.__setattr__(self, "reflect_arcs", arcs)
        object.__setattr__(self, "breaks", np.arange(n) / float(n))
        circles = {}
        for k in arcs:
            circles[k] = orthogonal_circle(k / n, (k + 1) / n)
        object.__setattr__(self, "_circles", circles)

    def _is_reflection(self, k: int) -> bool:
        return k in self._circles

    def _circle(self, k: int) -> EuclideanCircle:
        return self._circles[k]

    def natural_breaks(self) -> np.ndarray:
        return self.breaks.copy()

    def to_config(self) -> dict:
        return {"kind": "hybrid", "degree": self.degree,
                "reflect_arcs": list(self.reflect_arcs)}


def eval(map: CoveringMap, t):  # noqa: A001 - module-level evaluation entry point
    """Angle of f(e^{2 pi i t}), in turns."""
    return map.eval(t)


def eval_extension(map: CoveringMap, z: complex, k: int = 0) -> complex:
    """Conformal extension of piece k evaluated off the circle."""
    return map.extension(z, k)


def from_config(cfg: dict) -> CoveringMap:
    kind = cfg["kind"]
    if kind == "power":
        return Power(int(cfg["degree"]), cfg.get("orientation", REVERSING))
    if kind == "blaschke_parabolic":
        return BlaschkeParabolicFamily(int(cfg["degree"]))
    if kind == "blaschke":
        zeros = tuple(complex(parse_real(re), parse_real(im))
                      for re, im in cfg["zeros"])
        return GeneralBlaschke(parse_real(cfg.get("rotation", 0.0)), zeros,
                               bool(cfg.get("anti", False)))
    if kind == "reflection":
        return PiecewiseReflection(tuple(parse_real(a) for a in cfg["breaks"]))
    if kind == "hybrid":
        return Hybrid(int(cfg["degree"]),
                      tuple(int(k) for k in cfg["reflect_arcs"]))
    raise ValueError(f"unknown covering map kind {kind!r}")


def to_config(map: CoveringMap) -> dict:
    return map.to_config()
