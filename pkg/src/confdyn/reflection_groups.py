"""Circle packings, necklace validation, and Nielsen-map dynamics.

A packing is a labeled family of circles with pairwise disjoint interiors;
its Nielsen map reflects a point in the lowest-labeled circle whose closed
disk contains it, and points outside every disk lie in the fundamental
domain.  Escape-time iteration of that map renders the limit set: pixels
that never reach the fundamental domain within budget approximate it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from .errors import (OverlappingInteriors, PoleAtCenter,
                     TransversalIntersection)
from .geom import EuclideanCircle, orthogonal_circle
from .raster import Raster, UNDECIDED, pixel_grid


def circle_inversion(C: EuclideanCircle, z):
    """Inversion in C: z -> c + r^2 / conj(z - c).  Involution; fixes C."""
    z = np.asarray(z, dtype=complex)
    d = z - C.center
    if np.any(d == 0):
        raise PoleAtCenter("inversion undefined at the circle center")
    out = C.center + (C.radius ** 2) / np.conj(d)
    return complex(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class CirclePacking:
    circles: Tuple[EuclideanCircle, ...]
    labels: Tuple[int, ...]
    contact_graph: nx.Graph
    tol: float

    @property
    def size(self) -> int:
        return len(self.circles)


def build_packing(circles: Sequence[EuclideanCircle],
                  labels: Optional[Sequence[int]] = None,
                  tol: float = 1e-9) -> CirclePacking:
    """Validate disjoint interiors and compute the tangency contact graph.

    Pairs closer than tangency by more than the tolerance overlap; a pair
    inside the ambiguity band just under tangency (boundaries crossing at a
    depth comparable to the tolerance) is refused as transversal rather
    than silently classified.
    """
    circles = tuple(circles)
    if len(circles) < 3:
        raise ValueError("a packing needs at least 3 circles")
    if labels is None:
        labels = tuple(range(1, len(circles) + 1))
    labels = tuple(int(l) for l in labels)
    if len(set(labels)) != len(circles):
        raise ValueError("labels must be unique")
    G = nx.Graph()
    G.add_nodes_from(labels)
    for i in range(len(circles)):
        for j in range(i + 1, len(circles)):
            ci, cj = circles[i], circles[j]
            d = abs(ci.center - cj.center)
            s = ci.radius + cj.radius
            band = tol * s
            if abs(d - s) <= band:
                G.add_edge(labels[i], labels[j])
            elif d < s - 1000.0 * band:
                raise OverlappingInteriors(
                    f"circles {labels[i]} and {labels[j]} overlap")
            elif d < s:
                raise TransversalIntersection(
                    f"circles {labels[i]} and {labels[j]} cross just inside "
                    "the tangency tolerance")
    return CirclePacking(circles=circles, labels=labels, contact_graph=G,
                         tol=tol)


def ideal_polygon_packing(n: int) -> CirclePacking:
    """Circles orthogonal to the unit circle through adjacent n-th roots
    of unity; neighbors are tangent at the shared root."""
    if n < 3:
        raise ValueError("n must be >= 3")
    circles = [orthogonal_circle(k / n, (k + 1) / n) for k in range(n)]
    return build_packing(circles)


def _is_outerplanar(G: nx.Graph) -> bool:
    """G is outerplanar iff G plus a vertex adjacent to everything is
    planar (the apex then sits in the outer face of an outerplanar
    embedding, and conversely)."""
    H = G.copy()
    apex = object()
    H.add_node(apex)
    H.add_edges_from((apex, v) for v in G.nodes)
    ok, _ = nx.check_planarity(H)
    return bool(ok)


def _touches_unbounded_face(packing: CirclePacking, i: int) -> Tuple[bool, bool]:
    """Ray test: from circle i's point farthest from the packing centroid,
    walk outward and check no other closed disk is crossed.  Second flag
    marks a near-tangent witness (diagnostic only)."""
    centroid = np.mean([c.center for c in packing.circles])
    ci = packing.circles[i]
    u = ci.center - centroid
    u = u / abs(u) if abs(u) > 0 else 1.0 + 0j
    start = ci.center + ci.radius * u
    shaky = False
    for j, cj in enumerate(packing.circles):
        if j == i:
            continue
        # distance from the ray {start + t*u, t >= 0} to cj's center
        w = cj.center - start
        t = max(np.real(w * np.conj(u)), 0.0)
        dist = abs(w - t * u)
        if dist < cj.radius - packing.tol * cj.radius:
            return False, shaky
        if abs(dist - cj.radius) <= 10.0 * packing.tol * cj.radius:
            shaky = True
    return True, shaky


def is_necklace(packing: CirclePacking) -> Tuple[bool, Dict[str, object]]:
    """Necklace test: cyclic tangency in label order, every circle on the
    unbounded face, 2-connected and outerplanar contact graph."""
    G = packing.contact_graph
    labels = sorted(packing.labels)
    n = len(labels)
    cyclic = all(G.has_edge(labels[k], labels[(k + 1) % n]) for k in range(n))
    unbounded = []
    shaky = []
    for i in range(n):
        ok, near = _touches_unbounded_face(packing, i)
        unbounded.append(ok)
        if near:
            shaky.append(packing.labels[i])
    two_connected = nx.is_biconnected(G)
    outerplanar = _is_outerplanar(G)
    verdict = cyclic and all(unbounded) and two_connected and outerplanar
    diag = {
        "cyclic_tangency": cyclic,
        "all_on_unbounded_face": all(unbounded),
        "two_connected": two_connected,
        "outerplanar": outerplanar,
        "near_tangent_witnesses": shaky,
    }
    return verdict, diag


def nielsen_step(packing: CirclePacking, z: complex) -> Optional[complex]:
    """Reflect z in the lowest-labeled circle whose closed disk contains
    it; None signals membership in the fundamental domain."""
    order = np.argsort(packing.labels)
    for i in order:
        c = packing.circles[i]
        if abs(z - c.center) <= c.radius:
            return circle_inversion(c, z) if z != c.center else z
    return None


@dataclass(frozen=True)
class NielsenOrbitClass:
    outcome: str            # "reached" | "undecided"
    steps: int
    final: complex


def escape_time(packing: CirclePacking, z: complex,
                max_steps: int) -> NielsenOrbitClass:
    """Iterate the Nielsen map until the fundamental domain or budget."""
    if max_steps < 1:
        raise ValueError("max_steps must be >= 1")
    w = complex(z)
    for k in range(max_steps + 1):
        nxt = nielsen_step(packing, w)
        if nxt is None:
            return NielsenOrbitClass(outcome="reached", steps=k, final=w)
        if k == max_steps:
            break
        w = nxt
    return NielsenOrbitClass(outcome="undecided", steps=max_steps, final=w)


def render_limit(packing: CirclePacking,
                 viewport: Tuple[float, float, float, float],
                 width: int, height: int, max_steps: int = 200) -> Raster:
    """Escape-time raster; undecided pixels approximate the limit set."""
    Z = pixel_grid(viewport, width, height).ravel()
    counts = np.zeros(Z.shape, dtype=np.int32)
    codes = np.full(Z.shape, UNDECIDED, dtype=np.int32)
    active = np.ones(Z.shape, dtype=bool)
    order = np.argsort(packing.labels)
    centers = np.array([packing.circles[i].center for i in order])
    radii = np.array([packing.circles[i].radius for i in order])
    for step in range(max_steps + 1):
        if not np.any(active):
            break
        za = Z[active]
        inside_any = np.zeros(za.shape, dtype=bool)
        for c, r in zip(centers, radii):
            d = za - c
            m = (~inside_any) & (np.abs(d) <= r)
            if np.any(m):
                dm = d[m]
                safe = dm != 0
                refl = np.where(safe, c + (r * r) / np.conj(np.where(
                    safe, dm, 1.0)), za[m])
                za[m] = refl
                inside_any |= m
        idx = np.flatnonzero(active)
        done = idx[~inside_any]
        codes[done] = 0
        counts[done] = step
        if step < max_steps:
            Z[idx[inside_any]] = za[inside_any]
        counts[idx[inside_any]] = step
        active[done] = False
    return Raster(width=width, height=height, viewport=tuple(viewport),
                  codes=codes.reshape(height, width),
                  counts=counts.reshape(height, width))
