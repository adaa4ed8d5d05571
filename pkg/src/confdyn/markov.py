"""Markov partitions, refinement, and periodic-point classification."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, List, Optional, Tuple

import numpy as np

from .circle_maps import CoveringMap
from .errors import (ClassificationUnstable, NotInjectiveOnPiece,
                     NotInvariant, NotPeriodic)
from .geom import chord, circ_dist, mod1

_TOL = 1e-9


@dataclass(frozen=True)
class MarkovPartition:
    """Break points with the induced transition structure.

    lift_lo/lift_hi are exact (snapped) lift values of the arc endpoints,
    so image intervals of pieces are known without rounding drift.
    """

    map: CoveringMap
    breaks: np.ndarray          # r+1 increasing angles in [0, 1)
    image_index: np.ndarray     # sigma: break k maps to break sigma(k)
    transition: np.ndarray      # (r+1, r+1) 0/1: b[k, j] = 1 iff f(A_k) >= A_j
    lift_lo: np.ndarray         # lift value at arc k's start
    lift_hi: np.ndarray         # lift value at arc k's end

    @property
    def size(self) -> int:
        return len(self.breaks)

    def arc(self, k: int) -> Tuple[float, float]:
        """Arc k endpoints as (lo, hi) with hi in (lo, lo+1)."""
        br = self.breaks
        lo = br[k]
        hi = br[k + 1] if k + 1 < len(br) else br[0] + 1.0
        return float(lo), float(hi)

    def image_window(self, k: int) -> Tuple[float, float]:
        """Sorted lift interval covered by f(A_k)."""
        a, b = self.lift_lo[k], self.lift_hi[k]
        return (float(a), float(b)) if a <= b else (float(b), float(a))

    def piece_containing(self, t) -> np.ndarray:
        t01 = mod1(t)
        idx = np.searchsorted(self.breaks, t01, side="right") - 1
        return np.where(idx < 0, len(self.breaks) - 1, idx)

    def break_index(self, t, tol: float = _TOL) -> Optional[int]:
        d = circ_dist(np.asarray([mod1(t)]), self.breaks[:, None]).ravel()
        k = int(np.argmin(d))
        return k if d[k] < tol else None


def build_markov(map: CoveringMap, break_points, tol: float = _TOL
                 ) -> MarkovPartition:
    """Validate break points and compute the transition matrix."""
    br = np.array(sorted(set(float(mod1(a)) for a in break_points)))
    if len(br) < 2:
        raise NotInvariant("need at least two break points")
    r1 = len(br)
    # forward invariance, with index of the image break
    sigma = np.empty(r1, dtype=int)
    for k, a in enumerate(br):
        v = map.eval(a)
        d = np.minimum(mod1(v - br), mod1(br - v))
        j = int(np.argmin(d))
        if d[j] > tol:
            raise NotInvariant(
                f"image of break point {a} is {v}, not a break point")
        sigma[k] = j
    # snapped lift values at arc endpoints (points br[0..r], br[0]+1)
    pts = np.append(br, br[0] + 1.0)
    raw = map.lift(pts)
    img = br[np.append(sigma, sigma[0])]
    snapped = img + np.round(raw - img)
    if np.max(np.abs(snapped - raw)) > 1e-6:
        raise NotInvariant("lift endpoints failed to snap to break images")
    lift_lo = snapped[:-1]
    lift_hi = snapped[1:]
    wind = lift_hi - lift_lo
    if np.any(np.abs(wind) > 1.0 + 1e-9):
        k = int(np.argmax(np.abs(wind)))
        raise NotInjectiveOnPiece(
            f"piece {k} wraps {abs(wind[k]):.6f} > 1 turns")
    # transition by containment of lifted arcs in image windows
    ends = np.append(br, br[0] + 1.0)
    trans = np.zeros((r1, r1), dtype=np.int8)
    for k in range(r1):
        lo = min(lift_lo[k], lift_hi[k])
        hi = max(lift_lo[k], lift_hi[k])
        for j in range(r1):
            m = np.ceil(lo - br[j] - 1e-9)
            if br[j] + m >= lo - 1e-9 and ends[j + 1] + m <= hi + 1e-9:
                trans[k, j] = 1
    return MarkovPartition(map=map, breaks=br, image_index=sigma,
                           transition=trans, lift_lo=lift_lo,
                           lift_hi=lift_hi)


@dataclass(frozen=True)
class RefinedArc:
    word: Tuple[int, ...]
    lo: float   # start angle (may exceed 1 as a lift representative)
    hi: float   # end angle, lo < hi <= lo + 1

    @property
    def length(self) -> float:
        return self.hi - self.lo

    @property
    def diameter(self) -> float:
        return chord(min(self.length, 0.5))


def refine(P: MarkovPartition, n: int) -> List[RefinedArc]:
    """Level-n arcs A_w of the refined partition, with admissible words.

    The arc with word w = (k, j, ...) satisfies A_w subset A_{w[:-1]}; its
    endpoints are computed by inverting the map piece on exact lift targets
    rather than by accumulating float subdivisions.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    arcs = [RefinedArc((k,), *P.arc(k)) for k in range(P.size)]
    for _ in range(n - 1):
        new: List[RefinedArc] = []
        for k in range(P.size):
            children = [a for a in arcs if P.transition[k, a.word[0]]]
            if not children:
                continue
            lo_w, hi_w = P.image_window(k)
            ylo = np.empty(len(children))
            yhi = np.empty(len(children))
            for i, a in enumerate(children):
                m = np.ceil(lo_w - a.lo - 1e-9)
                ylo[i] = a.lo + m
                yhi[i] = a.hi + m
            t1 = P.map.invert_lift(ylo if P.map.sign > 0 else yhi,
                                   np.full(len(children), P.arc(k)[0]),
                                   np.full(len(children), P.arc(k)[1]))
            t2 = P.map.invert_lift(yhi if P.map.sign > 0 else ylo,
                                   np.full(len(children), P.arc(k)[0]),
                                   np.full(len(children), P.arc(k)[1]))
            for i, a in enumerate(children):
                lo, hi = float(t1[i]), float(t2[i])
                if hi < lo:
                    lo, hi = hi, lo
                new.append(RefinedArc((k,) + a.word, lo, hi))
        arcs = new
    return arcs


def circle_fixed_points(map: CoveringMap) -> np.ndarray:
    """All fixed points of the circle map, as sorted angles in [0, 1)."""
    g0 = map.lift(0.0)
    g1 = map.lift(1.0) - 1.0
    lo_v, hi_v = (g0, g1) if g1 > g0 else (g1, g0)
    roots = []
    for m in range(int(np.ceil(lo_v - 1e-9)), int(np.floor(hi_v + 1e-9)) + 1):
        lo, hi = 0.0, 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            gm = map.lift(mid) - mid
            if (gm < m) == (g0 < m):
                lo = mid
            else:
                hi = mid
        roots.append(mod1(0.5 * (lo + hi)))
    vals = np.unique(np.round(np.sort(np.asarray(roots)), 13) % 1.0)
    return vals


def orbit_period(map: CoveringMap, a: float, tol: float = _TOL,
                 max_period: int = 64) -> int:
    a = float(mod1(a))
    t = a
    for i in range(1, max_period + 1):
        t = float(map.eval(t))
        if circ_dist(t, a) < tol:
            return i
    raise NotPeriodic(f"{a} did not return within {max_period} steps")


def first_return(map: CoveringMap, a: float, tol: float = _TOL,
                 max_period: int = 64):
    """Orientation-preserving first return near a periodic point.

    Returns (q, F) with q the orientation-preserving period and F the lift
    of f^q near a, normalized so F(a) is a's own lift representative.
    """
    a = float(mod1(a))
    period = orbit_period(map, a, tol, max_period)
    q = period if map.sign ** period == 1 else 2 * period

    def raw(t):
        s = np.asarray(t, dtype=float)
        for _ in range(q):
            s = map.lift(s)
        return s

    offset = np.round(raw(a) - a)

    def F(t):
        return raw(t) - offset

    return q, F


@dataclass(frozen=True)
class SideClass:
    kind: str                  # "hyperbolic" | "parabolic"
    multiplicity: Optional[int] = None   # N for parabolic sides

    def __str__(self):
        if self.kind == "parabolic":
            return f"parabolic(N={self.multiplicity})"
        return self.kind


@dataclass(frozen=True)
class FixedPointClass:
    point: float
    period: int
    op_period: int
    lam_plus: float
    lam_minus: float
    side_plus: SideClass
    side_minus: SideClass


_PARABOLIC_TOL = 1e-6


def _one_sided_multiplier(F, a: float, side: int) -> float:
    ks = np.arange(8, 17)
    h = 2.0 ** -ks
    Fa = float(F(a))
    D = (F(a + side * h) - Fa) / (side * h)
    # quadratic fit in h; the intercept is the one-sided derivative
    coef = np.polyfit(h, D, 2)
    return float(coef[-1])


def _parabolic_multiplicity(F, a: float, side: int) -> int:
    ks = np.arange(4, 21)
    h = 2.0 ** -ks
    x = a + side * h
    delta = np.abs(np.asarray(F(x)) - x)
    keep = delta > 1e-13     # below this the displacement is rounding noise
    if np.count_nonzero(keep) < 5:
        raise ClassificationUnstable(
            "too few usable offsets for the tangency-order fit")
    slope = np.polyfit(np.log(h[keep]), np.log(delta[keep]), 1)[0]
    order = int(round(slope))
    if abs(slope - order) > 0.05 or order < 2:
        raise ClassificationUnstable(
            f"tangency-order fit slope {slope:.4f} is not near an integer >= 2")
    return order - 1


def classify_fixed(map: CoveringMap, a: float, tol: float = _TOL
                   ) -> FixedPointClass:
    """One-sided multipliers and hyperbolic/parabolic type at a periodic point."""
    a = float(mod1(a))
    period = orbit_period(map, a, tol=tol)
    q, F = first_return(map, a, tol=tol)
    sides = {}
    lams = {}
    for side in (+1, -1):
        lam = _one_sided_multiplier(F, a, side)
        lams[side] = lam
        if abs(lam - 1.0) < _PARABOLIC_TOL:
            N = _parabolic_multiplicity(F, a, side)
            sides[side] = SideClass("parabolic", N)
        else:
            sides[side] = SideClass("hyperbolic")
    return FixedPointClass(point=a, period=period, op_period=q,
                           lam_plus=lams[+1], lam_minus=lams[-1],
                           side_plus=sides[+1], side_minus=sides[-1])


@dataclass(frozen=True)
class ExpansivityReport:
    fixed_points: np.ndarray
    min_deriv: float            # min |f'| over all samples
    min_deriv_off_fixed: float  # min |f'| at distance > margin from fixed set
    verdict: str                # "expansive" | "inconclusive" | "not expansive"


def check_expansive(map: CoveringMap, sample_count: int = 4096,
                    margin: float = 1e-3) -> ExpansivityReport:
    fixed = circle_fixed_points(map)
    t = (np.arange(sample_count) + 0.5) / sample_count
    d = np.abs(map.deriv(t))
    dist = np.min(np.minimum(mod1(t[:, None] - fixed[None, :]),
                             mod1(fixed[None, :] - t[:, None])), axis=1)
    off = dist > margin
    min_all = float(np.min(d))
    min_off = float(np.min(d[off])) if np.any(off) else min_all
    if min_all < 1.0 - 1e-9:
        verdict = "not expansive"
    elif min_off > 1.0 + 1e-9:
        verdict = "expansive"
    else:
        verdict = "inconclusive"
    return ExpansivityReport(fixed_points=fixed, min_deriv=min_all,
                             min_deriv_off_fixed=min_off, verdict=verdict)
