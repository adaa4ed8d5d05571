"""Beurling-Ahlfors extension of circle homeomorphisms to the disk.

A circle homeomorphism lifts to an increasing map H of the line commuting
with x -> x+1.  Its Beurling-Ahlfors extension to the upper half plane,

    H~(x + iy) = u + 2iv,
    u = (1/2) int_0^1 H(x+ty) + H(x-ty) dt,
    v = (1/2) int_0^1 H(x+ty) - H(x-ty) dt,

descends through w = exp(2*pi*i*(theta + iy)) to an extension of the circle
map to the disk.  The vertical factor 2 makes the extension of the identity
the identity.  Beltrami coefficients are sampled by finite differences and
the distortion tail sigma{K >= K_j} is fitted against C*exp(-alpha*K).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple, Union

import numpy as np

from .conjugacy import ConjugacyMap
from .errors import StencilOutOfDomain
from .geom import mod1

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class LineHomeo:
    """Increasing lift H of a circle homeomorphism, H(x+1) = H(x) + 1.

    Either a sampled piecewise-linear table on [0, 1] (with an exact
    antiderivative, so BA integrals are closed-form) or a raw callable
    lift (integrated by adaptive Simpson) backs the evaluator.
    """
    table_x: Optional[np.ndarray] = None
    table_y: Optional[np.ndarray] = None
    table_phi: Optional[np.ndarray] = None   # antiderivative at table_x
    lift_fn: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.table_y is not None:
            n = np.floor(x)
            f = x - n
            return np.interp(f, self.table_x, self.table_y) + n
        return self.lift_fn(x)

    def antiderivative(self, x) -> np.ndarray:
        """Phi(x) = int_0^x H(s) ds, exact for the piecewise-linear table.

        Periodicity gives Phi(x+n) = Phi(x) + n*Phi(1) + n*x + n*(n-1)/2.
        """
        if self.table_phi is None:
            raise ValueError("antiderivative requires a sampled table")
        x = np.asarray(x, dtype=float)
        n = np.floor(x)
        f = x - n
        j = np.clip(np.searchsorted(self.table_x, f, side="right") - 1,
                    0, len(self.table_x) - 2)
        x0 = self.table_x[j]
        y0 = self.table_y[j]
        slope = ((self.table_y[j + 1] - y0)
                 / (self.table_x[j + 1] - x0))
        d = f - x0
        phi_f = self.table_phi[j] + y0 * d + 0.5 * slope * d * d
        return phi_f + n * self.table_phi[-1] + n * f + 0.5 * n * (n - 1.0)


def lift_to_line(h, samples: int = 4096,
                 tol: float = 1e-11) -> LineHomeo:
    """Continuous increasing lift of an orientation-preserving circle map.

    h may be a ConjugacyMap, a vectorized callable on angles mod 1, or an
    already-built LineHomeo (returned unchanged).  The lift is sampled on a
    uniform grid and stored with its exact piecewise-linear antiderivative;
    H(0) is the representative of h(0) in [0, 1).
    """
    if isinstance(h, LineHomeo):
        return h
    x = np.linspace(0.0, 1.0, samples + 1)
    if isinstance(h, ConjugacyMap):
        vals = h.eval_many(x[:-1], tol=tol)
    else:
        vals = np.asarray(h(x[:-1]), dtype=float)
    y0 = mod1(vals[0])
    y = y0 + mod1(vals - y0)
    # a rounding dip just below y0 must not wrap to y0 + 1
    y[0] = y0
    y = np.append(y, y0 + 1.0)
    if np.any(np.diff(y) < 0):
        raise ValueError("sampled circle map is not orientation-preserving")
    phi = np.concatenate([[0.0],
                          np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(x))])
    return LineHomeo(table_x=x, table_y=y, table_phi=phi)


def from_lift(H: Callable[[np.ndarray], np.ndarray]) -> LineHomeo:
    """Wrap a raw increasing lift callable (no table; Simpson quadrature)."""
    return LineHomeo(lift_fn=H)


def _adaptive_simpson(f, a: float, b: float, tol: float) -> float:
    fa, fm, fb = f(a), f(0.5 * (a + b)), f(b)
    whole = (b - a) * (fa + 4.0 * fm + fb) / 6.0

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) * (fa + 4.0 * flm + fm) / 6.0
        right = (b - m) * (fm + 4.0 * frm + fb) / 6.0
        if depth > 40 or abs(left + right - whole) < 15.0 * tol:
            return left + right + (left + right - whole) / 15.0
        return (rec(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1)
                + rec(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1))

    return rec(a, b, fa, fm, fb, whole, tol, 0)


def ba_extend(H: LineHomeo, x, y):
    """Beurling-Ahlfors extension H~(x+iy) = u + 2iv for y > 0."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(y <= 0):
        raise ValueError("ba_extend requires y > 0")
    if H.table_phi is not None:
        pp = H.antiderivative(x + y)
        pm = H.antiderivative(x - y)
        p0 = H.antiderivative(x)
        u = (pp - pm) / (2.0 * y)
        v = (pp - 2.0 * p0 + pm) / (2.0 * y)
        return u + 2.0j * v
    scalar = x.ndim == 0 and y.ndim == 0
    xs, ys = np.broadcast_arrays(np.atleast_1d(x), np.atleast_1d(y))
    out = np.empty(xs.shape, dtype=complex)
    it = np.nditer(xs, flags=["multi_index"])
    for _ in it:
        i = it.multi_index
        xi, yi = float(xs[i]), float(ys[i])
        g = lambda s: float(H(np.array(s)))
        ip = _adaptive_simpson(g, xi, xi + yi, 1e-11 * yi)
        im = _adaptive_simpson(g, xi - yi, xi, 1e-11 * yi)
        out[i] = (ip + im) / (2.0 * yi) + 2.0j * (ip - im) / (2.0 * yi)
    return complex(out[0]) if scalar else out


def disk_extend(h, w):
    """Extension of the circle map to the disk through the exp covering."""
    H = lift_to_line(h) if not isinstance(h, LineHomeo) else h
    w = np.asarray(w, dtype=complex)
    scalar = w.ndim == 0
    w = np.atleast_1d(w)
    out = np.zeros(w.shape, dtype=complex)
    r = np.abs(w)
    if np.any(r >= 1):
        raise ValueError("disk_extend requires |w| < 1")
    inz = r > 0
    theta = np.angle(w[inz]) / _TWO_PI
    yy = -np.log(r[inz]) / _TWO_PI
    hz = ba_extend(H, theta, yy)
    out[inz] = np.exp(2j * np.pi * hz)
    return complex(out[0]) if scalar else out


@dataclass(frozen=True)
class DistortionSample:
    z: complex
    mu: complex
    K: float


def beltrami_at(h, z: complex, step: Optional[float] = None
                ) -> DistortionSample:
    """Beltrami coefficient and distortion of the extension at z.

    Wirtinger derivatives come from a 4-point central-difference stencil;
    near the boundary the step shrinks with the remaining gap, so values
    there are estimates.
    """
    H = lift_to_line(h) if not isinstance(h, LineHomeo) else h
    z = complex(z)
    gap = 1.0 - abs(z)
    if step is None:
        step = min(1e-4, gap / 8.0)
    if step <= 0 or abs(z) + step >= 1.0:
        raise StencilOutOfDomain(f"stencil of step {step} leaves the disk")
    pts = np.array([z + step, z - step, z + 1j * step, z - 1j * step])
    fr_p, fr_m, fi_p, fi_m = disk_extend(H, pts)
    dx = (fr_p - fr_m) / (2.0 * step)
    dy = (fi_p - fi_m) / (2.0 * step)
    dz = 0.5 * (dx - 1j * dy)
    dzb = 0.5 * (dx + 1j * dy)
    if dz == 0:
        mu, K = complex(np.nan), float("inf")
    else:
        mu = dzb / dz
        am = abs(mu)
        K = (1.0 + am) / (1.0 - am) if am < 1.0 else float("inf")
    return DistortionSample(z=z, mu=mu, K=K)


@dataclass(frozen=True)
class DavidTail:
    thresholds: np.ndarray
    areas: np.ndarray       # fraction of sampled disk area with K >= K_j
    C: Optional[float]
    alpha: Optional[float]
    r_squared: Optional[float]


def _beltrami_grid(H: LineHomeo, grid_resolution: int,
                   rmax: float = 0.995) -> np.ndarray:
    """Distortion K on the square grid restricted to |z| <= rmax."""
    ax = np.linspace(-rmax, rmax, grid_resolution)
    X, Y = np.meshgrid(ax, ax)
    Z = (X + 1j * Y).ravel()
    Z = Z[np.abs(Z) <= rmax]
    step = np.minimum(1e-4, (1.0 - np.abs(Z)) / 8.0)
    pts = np.concatenate([Z + step, Z - step, Z + 1j * step, Z - 1j * step])
    vals = disk_extend(H, pts)
    m = Z.size
    dx = (vals[:m] - vals[m:2 * m]) / (2.0 * step)
    dy = (vals[2 * m:3 * m] - vals[3 * m:]) / (2.0 * step)
    dz = 0.5 * (dx - 1j * dy)
    dzb = 0.5 * (dx + 1j * dy)
    with np.errstate(divide="ignore", invalid="ignore"):
        am = np.abs(dzb) / np.abs(dz)
        K = np.where(am < 1.0, (1.0 + am) / (1.0 - am), np.inf)
    return K


def david_tail(h, grid_resolution: int = 256,
               K_levels: Optional[Sequence[float]] = None) -> DavidTail:
    """Empirical distortion tail area(K_j) with an exponential fit.

    The fit log(area) ~ log(C) - alpha*K runs over the largest contiguous
    block of thresholds with positive area; a bounded K field (tail hitting
    zero early) yields C = alpha = None.
    """
    if grid_resolution < 128:
        raise ValueError("grid_resolution must be >= 128")
    H = lift_to_line(h) if not isinstance(h, LineHomeo) else h
    if K_levels is None:
        K_levels = np.linspace(1.5, 30.0, 20)
    thr = np.asarray(K_levels, dtype=float)
    K = _beltrami_grid(H, grid_resolution)
    areas = np.array([np.mean(K >= kj) for kj in thr])
    pos = areas > 0
    C = alpha = r2 = None
    # largest contiguous positive block
    best: Tuple[int, int] = (0, 0)
    i = 0
    while i < len(pos):
        if pos[i]:
            j = i
            while j < len(pos) and pos[j]:
                j += 1
            if j - i > best[1] - best[0]:
                best = (i, j)
            i = j
        else:
            i += 1
    lo, hi = best
    if hi - lo >= 3:
        kk = thr[lo:hi]
        la = np.log(areas[lo:hi])
        slope, intercept = np.polyfit(kk, la, 1)
        pred = slope * kk + intercept
        ss_res = float(np.sum((la - pred) ** 2))
        ss_tot = float(np.sum((la - la.mean()) ** 2))
        r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
        C = float(np.exp(intercept))
        alpha = float(-slope)
    return DavidTail(thresholds=thr, areas=areas, C=C, alpha=alpha,
                     r_squared=r2)
