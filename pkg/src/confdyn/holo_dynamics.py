"""Rational and anti-rational maps on the Riemann sphere.

Maps are stored as numerator/denominator coefficients (descending powers)
plus an anti flag meaning "conjugate the input first".  Root finding uses
companion-matrix eigenvalues with a Newton polish; infinity is handled by
leading coefficients and a 1e12 modulus cutoff.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import IllConditioned, UnknownName
from .raster import DIVERGED, Raster, UNDECIDED, pixel_grid

INF = complex(np.inf, 0.0)
_SPHERE_CUTOFF = 1e12


def _trim(c: np.ndarray) -> np.ndarray:
    c = np.asarray(c, dtype=complex)
    nz = np.flatnonzero(np.abs(c) > 0)
    return c[nz[0]:] if nz.size else np.zeros(1, dtype=complex)


@dataclass(frozen=True)
class RationalMap:
    """num/den in descending powers; anti=True applies the map to conj(z)."""
    num: np.ndarray
    den: np.ndarray
    anti: bool = False

    def __post_init__(self):
        object.__setattr__(self, "num", _trim(self.num))
        object.__setattr__(self, "den", _trim(self.den))
        if np.all(self.den == 0):
            raise ValueError("zero denominator")
        if len(self.num) > 1 and len(self.den) > 1:
            rn = np.roots(self.num)
            rd = np.roots(self.den)
            if rn.size and rd.size:
                gap = np.min(np.abs(rn[:, None] - rd[None, :]))
                scale = 1.0 + max(np.max(np.abs(rn)), np.max(np.abs(rd)))
                if gap < 1e-10 * scale:
                    raise ValueError("numerator and denominator share a root")

    @property
    def degree(self) -> int:
        return max(len(self.num), len(self.den)) - 1

    def holomorphic_part(self) -> "RationalMap":
        """The same coefficients with the anti flag cleared."""
        return RationalMap(self.num, self.den, anti=False)

    def derivative_coeffs(self) -> Tuple[np.ndarray, np.ndarray]:
        """(numerator, denominator) of the holomorphic derivative."""
        n, d = self.num, self.den
        dn = np.polyder(n) if len(n) > 1 else np.zeros(1, dtype=complex)
        dd = np.polyder(d) if len(d) > 1 else np.zeros(1, dtype=complex)
        top = np.polysub(np.polymul(dn, d), np.polymul(n, dd))
        return _trim(top), _trim(np.polymul(d, d))


def eval_map(R: RationalMap, z):
    """Sphere-aware evaluation; poles map to INF, INF via leading terms."""
    z = np.asarray(z, dtype=complex)
    scalar = z.ndim == 0
    z = np.atleast_1d(z).copy()
    if R.anti:
        z = np.conj(z)
    out = np.empty(z.shape, dtype=complex)
    big = ~np.isfinite(z) | (np.abs(z) > _SPHERE_CUTOFF)
    if np.any(big):
        dn, dd = len(R.num) - 1, len(R.den) - 1
        if dn > dd:
            out[big] = INF
        elif dn < dd:
            out[big] = 0.0
        else:
            out[big] = R.num[0] / R.den[0]
    if np.any(~big):
        zf = z[~big]
        nv = np.polyval(R.num, zf)
        dv = np.polyval(R.den, zf)
        vals = np.where(dv != 0, nv / np.where(dv != 0, dv, 1.0), INF)
        out[~big] = vals
    return complex(out[0]) if scalar else out


def _polish_roots(coeffs: np.ndarray, roots: np.ndarray,
                  iters: int = 8) -> np.ndarray:
    dcoef = np.polyder(coeffs)
    r = roots.copy()
    for _ in range(iters):
        p = np.polyval(coeffs, r)
        dp = np.polyval(dcoef, r)
        step = np.where(dp != 0, p / np.where(dp != 0, dp, 1.0), 0.0)
        # damp steps near multiple roots where Newton overshoots
        mag = np.abs(step)
        step = np.where(mag < 1.0, step, step / np.maximum(mag, 1.0))
        r_new = r - step
        better = (np.abs(np.polyval(coeffs, r_new)) <= np.abs(p))
        r = np.where(better, r_new, r)
    return r


def _roots(coeffs: np.ndarray) -> np.ndarray:
    coeffs = _trim(coeffs)
    if len(coeffs) == 1:
        return np.zeros(0, dtype=complex)
    r = np.roots(coeffs)
    return _polish_roots(coeffs, r)


def critical_points(R: RationalMap) -> List[Tuple[complex, int]]:
    """Critical points with multiplicities; infinity carries whatever of
    the 2d-2 total the finite roots do not account for.

    For an anti map the derivative lives in the conjugate variable, so its
    critical points are the conjugates of the holomorphic derivative's
    roots."""
    if R.degree < 2:
        raise ValueError("critical points need degree >= 2")
    top, _ = R.derivative_coeffs()
    finite = _roots(top)
    scale = 1.0 + (np.max(np.abs(finite)) if finite.size else 0.0)
    res = np.abs(np.polyval(top, finite)) / np.max(np.abs(top))
    if np.any(res > 1e-8 * scale ** (len(top) - 1)):
        raise IllConditioned("critical point residual too large")
    if R.anti:
        finite = np.conj(finite)
    out = _group_roots(finite)
    missing = 2 * R.degree - 2 - len(finite)
    if missing > 0:
        out.append((INF, missing))
    return out


def _group_roots(roots: np.ndarray, tol: float = 1e-7
                 ) -> List[Tuple[complex, int]]:
    out: List[Tuple[complex, int]] = []
    used = np.zeros(len(roots), dtype=bool)
    for i, r in enumerate(roots):
        if used[i]:
            continue
        close = ~used & (np.abs(roots - r) < tol * (1.0 + abs(r)))
        used |= close
        out.append((complex(np.mean(roots[close])), int(np.sum(close))))
    return out


def _holo_multiplier(R: RationalMap, p: complex) -> complex:
    top, bot = R.derivative_coeffs()
    if p is INF or not np.isfinite(p.real) or abs(p) > _SPHERE_CUTOFF:
        dn, dd = len(R.num) - 1, len(R.den) - 1
        if dn - dd >= 2:
            return 0.0
        if dn - dd == 1:
            return complex(R.den[0] / R.num[0])
        raise ValueError("infinity is not fixed")
    dv = np.polyval(bot, p)
    if dv == 0:
        return INF
    return complex(np.polyval(top, p) / dv)


def _anti_compose(R: RationalMap) -> Tuple[np.ndarray, np.ndarray]:
    """num/den of the holomorphic second iterate R(conj(R(conj z))),
    i.e. R composed with the coefficient-conjugated copy of itself."""
    nc, dc = np.conj(R.num), np.conj(R.den)
    # substitute w = nc/dc into R = num/den, clearing denominators
    deg = len(R.num) - 1 if len(R.num) >= len(R.den) else len(R.den) - 1
    d = max(len(R.num), len(R.den)) - 1

    def subst(coeffs: np.ndarray) -> np.ndarray:
        # sum c_k * nc^k * dc^(d-k), padded to the full degree d
        padded = np.concatenate([np.zeros(d + 1 - len(coeffs),
                                          dtype=complex), coeffs])
        acc = np.zeros(1, dtype=complex)
        for k in range(d + 1):
            c = padded[d - k]
            if c == 0:
                continue
            term = np.array([c], dtype=complex)
            for _ in range(k):
                term = np.polymul(term, nc)
            for _ in range(d - k):
                term = np.polymul(term, dc)
            acc = np.polyadd(acc, term)
        return acc

    return _trim(subst(R.num)), _trim(subst(R.den))


def fixed_points(R: RationalMap) -> List[Tuple[complex, complex]]:
    """Fixed points on the sphere with multipliers.

    Holomorphic maps: roots of num - z*den, plus infinity when that
    polynomial drops below degree d+1; multiplier is the derivative (the
    1/R'(infinity) chart value at infinity).  Anti maps: fixed points of
    the holomorphic second iterate filtered by |R(conj p) - p|, with the
    real multiplier |dR/dzbar|.
    """
    if not R.anti:
        poly = np.polysub(R.num, np.polymul(np.array([1.0, 0.0]), R.den))
        roots = _roots(poly)
        res = np.abs(np.polyval(poly, roots))
        if roots.size and np.any(res > 1e-8 * (1.0 + np.abs(roots)) ** len(poly)):
            raise IllConditioned("fixed point residual too large")
        out = [(complex(p), _holo_multiplier(R, complex(p))) for p in roots]
        if len(_trim(poly)) - 1 < R.degree + 1:
            for _ in range(R.degree + 1 - (len(_trim(poly)) - 1)):
                out.append((INF, _holo_multiplier(R, INF)))
        return out
    num2, den2 = _anti_compose(R)
    poly = np.polysub(num2, np.polymul(np.array([1.0, 0.0]), den2))
    roots = _roots(poly)
    keep = []
    for p in roots:
        p = complex(p)
        if abs(eval_map(R, p) - p) < 1e-8 * (1.0 + abs(p)):
            if all(abs(p - q) > 1e-7 * (1.0 + abs(p)) for q, _ in keep):
                top, bot = R.derivative_coeffs()
                lam = abs(np.polyval(top, np.conj(p))
                          / np.polyval(bot, np.conj(p)))
                keep.append((p, complex(lam)))
    # infinity fixed for anti-polynomials
    if len(R.num) - 1 > len(R.den) - 1:
        keep.append((INF, 0.0 if R.degree >= 2 else INF))
    return keep


@dataclass(frozen=True)
class Attractor:
    point: complex
    kind: str = "attracting"          # "attracting" | "parabolic"
    direction: complex = 1.0 + 0j     # attracting direction (parabolic)
    capture_radius: float = 1e-6


@dataclass(frozen=True)
class OrbitClass:
    outcome: str        # "converged" | "diverged" | "undecided"
    cycle_id: Optional[int]
    steps: int


def classify_orbit(R: RationalMap, z: complex,
                   attractors: Sequence[Attractor],
                   budget: int = 1000) -> OrbitClass:
    """Iterate until capture by an attractor, escape to infinity, or
    budget.  Parabolic capture requires the petal cone plus 50 steps of
    monotonically shrinking displacement."""
    w = complex(z)
    prev_disp = np.inf
    mono = 0
    pending: Optional[int] = None
    for step in range(budget + 1):
        if not np.isfinite(w.real) or abs(w) > _SPHERE_CUTOFF:
            for i, a in enumerate(attractors):
                if a.point is INF or not np.isfinite(a.point.real):
                    return OrbitClass("converged", i, step)
            return OrbitClass("diverged", None, step)
        captured = None
        for i, a in enumerate(attractors):
            if a.point is INF or not np.isfinite(a.point.real):
                continue
            dz = w - a.point
            r = abs(dz)
            if a.kind == "attracting":
                if r < a.capture_radius:
                    return OrbitClass("converged", i, step)
            else:
                cone = (r < 0.05 and r > 0
                        and np.real(dz * np.conj(a.direction))
                        > 0.9 * r * abs(a.direction))
                if r == 0:
                    return OrbitClass("converged", i, step)
                if cone:
                    captured = i
        if captured is not None and captured == pending:
            mono = mono + 1 if abs(w - w_prev) <= prev_disp else 0
            prev_disp = abs(w - w_prev)
            if mono >= 50:
                return OrbitClass("converged", captured, step)
        else:
            mono = 0
            prev_disp = np.inf
        pending = captured
        w_prev = w
        w = eval_map(R, w)
    return OrbitClass("undecided", None, budget)


def render_julia(R: RationalMap,
                 viewport: Tuple[float, float, float, float],
                 width: int, height: int,
                 attractors: Sequence[Attractor],
                 budget: int = 200) -> Raster:
    """Per-pixel orbit classification with a step-count channel.

    Raster capture uses radius (attracting) or petal-cone membership
    (parabolic) without the scalar path's 50-step monotonicity check.
    """
    Z = pixel_grid(viewport, width, height).ravel()
    codes = np.full(Z.shape, UNDECIDED, dtype=np.int32)
    counts = np.zeros(Z.shape, dtype=np.int32)
    active = np.ones(Z.shape, dtype=bool)
    inf_ids = [i for i, a in enumerate(attractors)
               if a.point is INF or not np.isfinite(a.point.real)]
    for step in range(budget + 1):
        if not np.any(active):
            break
        za = Z[active]
        idx = np.flatnonzero(active)
        esc = ~np.isfinite(za) | (np.abs(za) > _SPHERE_CUTOFF)
        codes[idx[esc]] = inf_ids[0] if inf_ids else DIVERGED
        counts[idx[esc]] = step
        active[idx[esc]] = False
        rem = ~esc
        for i, a in enumerate(attractors):
            if i in inf_ids:
                continue
            dz = za - a.point
            r = np.abs(dz)
            if a.kind == "attracting":
                cap = rem & (r < a.capture_radius)
            else:
                cap = rem & (r < 0.05) & (np.real(dz * np.conj(a.direction))
                                          > 0.9 * r * abs(a.direction))
            codes[idx[cap]] = i
            counts[idx[cap]] = step
            active[idx[cap]] = False
            rem &= ~cap
        if step < budget:
            still = np.flatnonzero(active)
            Z[still] = eval_map(R, Z[still])
            counts[still] = step + 1
    return Raster(width=width, height=height, viewport=tuple(viewport),
                  codes=codes.reshape(height, width),
                  counts=counts.reshape(height, width))


def default_attractors(R: RationalMap,
                       capture_radius: float = 1e-3) -> List[Attractor]:
    """Attractors derived from the fixed points: attracting ones directly,
    multiplier-one ones with petal directions probed from nearby orbits."""
    out: List[Attractor] = []
    for p, lam in fixed_points(R):
        if p is INF or not np.isfinite(p.real):
            out.append(Attractor(point=INF, capture_radius=capture_radius))
            continue
        if abs(lam) < 1.0 - 1e-9:
            out.append(Attractor(point=p, kind="attracting",
                                 capture_radius=capture_radius))
        elif abs(abs(lam) - 1.0) < 1e-9:
            for k in range(8):
                w = p + 1e-3 * np.exp(2j * np.pi * k / 8.0)
                ok = True
                # parabolic approach is ~1/n, so give the probe room
                for _ in range(3000):
                    w = eval_map(R, w)
                    if not np.isfinite(w.real) or abs(w - p) > 0.05:
                        ok = False
                        break
                if not ok or abs(w - p) > 5e-4:
                    continue
                direction = (w - p) / abs(w - p)
                if all(np.real(direction * np.conj(a.direction)) < 0.9
                       for a in out if a.kind == "parabolic"
                       and abs(a.point - p) < 1e-9):
                    out.append(Attractor(point=p, kind="parabolic",
                                         direction=direction))
    return out


_SQRT2 = np.sqrt(2.0)
_SQRT3 = np.sqrt(3.0)


def blaschke_family(d: int) -> RationalMap:
    """((d+1) z^d + (d-1)) / ((d-1) z^d + (d+1))."""
    if d < 2:
        raise ValueError("d must be >= 2")
    num = np.zeros(d + 1, dtype=complex)
    den = np.zeros(d + 1, dtype=complex)
    num[0], num[-1] = d + 1, d - 1
    den[0], den[-1] = d - 1, d + 1
    return RationalMap(num, den)


def catalog(name: str) -> RationalMap:
    """Named maps with exact-radical coefficients."""
    if name == "pine_tree":
        return RationalMap(np.array([4.0, 0, 0, 8 - 3 * (1 - _SQRT3)]),
                           np.array([1 - _SQRT3, 0, 0, 8 + 4 * _SQRT3]))
    if name == "welding":
        return RationalMap(np.array([2.0, 0, 0, 1.0]),
                           np.array([1.0, 0, 0, 2.0]))
    if name.startswith("blaschke_family_"):
        return blaschke_family(int(name.rsplit("_", 1)[1]))
    if name == "p1":
        return RationalMap(np.array([1.0, 0, -3j / _SQRT2, 0]),
                           np.array([1.0]), anti=True)
    if name == "p_gamma":
        return RationalMap(np.array([1.0, 0, -1.5j, 0]),
                           np.array([1.0]), anti=True)
    if name == "p2":
        return RationalMap(np.array([1.0, 0, 0, (1 + 1j) / _SQRT2]),
                           np.array([1.0]), anti=True)
    if name == "cauliflower_poly":
        return RationalMap(np.array([1.0, 0, 0.25]),
                           np.array([1.0]), anti=True)
    if name == "cauliflower_model_blaschke":
        return RationalMap(np.array([3.0, 0, 1.0]),
                           np.array([1.0, 0, 3.0]), anti=True)
    if name == "cauliflower_rational":
        return RationalMap(np.array([10.0, -30.0, 2.0, 2.0]),
                           np.array([10.0, 1.0, 1.0]))
    raise UnknownName(f"unknown catalog map: {name}")


CATALOG_NAMES = ("pine_tree", "welding", "blaschke_family_2",
                 "blaschke_family_3", "p1", "p_gamma", "p2",
                 "cauliflower_poly", "cauliflower_model_blaschke",
                 "cauliflower_rational")
