"""Angles on the unit circle, arcs, and orthogonal circles.

Angles are stored in *turns* (the point is e^{2*pi*i*t}) and reduced mod 1.
Keeping turns instead of radians makes invariance and ordering tests exact
for rational break points.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateArc

TWO_PI = 2.0 * np.pi


def mod1(t):
    """Reduce an angle (scalar or array) to [0, 1)."""
    return np.mod(t, 1.0)


def unit(t):
    """Point e^{2*pi*i*t} on the unit circle."""
    t = np.asarray(t, dtype=float)
    out = np.exp(1j * TWO_PI * t)
    return complex(out) if out.ndim == 0 else out


def angle_of(z):
    """Angle in turns, in [0, 1), of a nonzero complex number."""
    z = np.asarray(z)
    out = mod1(np.angle(z) / TWO_PI)
    return float(out) if out.ndim == 0 else out


def circ_dist(a, b):
    """Shortest circular distance between two angles, in turns (<= 1/2)."""
    d = mod1(np.asarray(a, dtype=float) - b)
    d = np.minimum(d, 1.0 - d)
    return float(d) if d.ndim == 0 else d


def chord(dt):
    """Euclidean chord length between circle points separated by dt turns.

    Computed as 2*sin(pi*dt) directly from the angular gap, which keeps
    full relative precision for gaps far below machine epsilon in
    absolute position.
    """
    dt = np.asarray(dt, dtype=float)
    out = 2.0 * np.abs(np.sin(np.pi * dt))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Arc:
    """Positively oriented closed arc from angle a to angle b (turns)."""

    a: float
    b: float

    def __post_init__(self):
        object.__setattr__(self, "a", float(mod1(self.a)))
        object.__setattr__(self, "b", float(mod1(self.b)))
        if self.a == self.b:
            raise DegenerateArc("arc endpoints coincide")

    @property
    def length(self) -> float:
        """Arc length in turns."""
        return float(mod1(self.b - self.a))

    @property
    def diameter(self) -> float:
        """Euclidean chord diameter of the arc's point set."""
        ln = self.length
        if ln >= 0.5:
            return 2.0
        return chord(ln)

    def contains(self, t, tol: float = 0.0) -> bool:
        """Whether angle t lies on the closed arc (tol widens both ends)."""
        return bool(mod1(t - self.a) <= self.length + tol or
                    mod1(self.b - t) <= tol)


@dataclass(frozen=True)
class EuclideanCircle:
    center: complex
    radius: float

    def __post_init__(self):
        if not self.radius > 0:
            raise ValueError("radius must be positive")

    def contains(self, z, closed: bool = True) -> bool:
        d = abs(z - self.center)
        return d <= self.radius if closed else d < self.radius


def orthogonal_circle(a: float, b: float) -> EuclideanCircle:
    """Circle through e^{2*pi*i*a}, e^{2*pi*i*b} orthogonal to the unit circle.

    Orthogonality forces |center|^2 = 1 + radius^2, so the center is the
    intersection of the tangent lines to S^1 at the two points; it exists
    (as a bounded circle) only when the positively oriented arc from a to b
    is shorter than a half circle.
    """
    a = float(mod1(a))
    b = float(mod1(b))
    gap = mod1(b - a)
    if gap == 0.0 or gap >= 0.5:
        raise DegenerateArc(
            f"no bounded orthogonal circle over arc of length {gap} turns")
    mid = a + gap / 2.0
    half = np.pi * gap  # half the central angle, radians
    center = unit(mid) / np.cos(half)
    radius = float(np.tan(half))
    return EuclideanCircle(center=complex(center), radius=radius)
