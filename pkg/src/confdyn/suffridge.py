"""Suffridge-type boundary curves: cusps, double points, tiles, trees.

Maps f(z) = z + sum a_k z^{-k} with a_d = -1/d have d+1 simple critical
points on the unit circle (cusps of the boundary curve f(S^1)) and at most
d-2 tangential double points.  When the double-point count is exactly d-2,
the complement of the image domain splits into d-1 fundamental tiles, each
a curvilinear triangle with exactly three singular boundary marks; the
bi-angled tree has one vertex per tile, one edge per double point, and
angles that are multiples of 2*pi/3 read from the counter-clockwise order
of the singular marks.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.spatial import cKDTree

from .errors import CriticalPointsOffCircle, NotSuffridge, NotUnivalent
from .geom import mod1

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class SigmaStarMap:
    """f(z) = z + a_1/z + ... + a_d/z^d with a_d = -1/d implied."""
    degree: int
    coefficients: Tuple[complex, ...]   # a_1 .. a_{d-1}

    @property
    def full_coefficients(self) -> np.ndarray:
        return np.concatenate([np.asarray(self.coefficients, dtype=complex),
                               [-1.0 / self.degree]])

    def curve(self, t) -> np.ndarray:
        z = np.exp(2j * np.pi * np.asarray(t, dtype=float))
        out = z.astype(complex)
        for k, a in enumerate(self.full_coefficients, start=1):
            out = out + a * z ** (-k)
        return out

    def curve_derivative(self, t) -> np.ndarray:
        """d/dt of f(e^{2 pi i t})."""
        z = np.exp(2j * np.pi * np.asarray(t, dtype=float))
        fp = np.ones_like(z)
        for k, a in enumerate(self.full_coefficients, start=1):
            fp = fp - k * a * z ** (-k - 1)
        return 2j * np.pi * z * fp


@dataclass(frozen=True)
class PolynomialCurve:
    """Adapter: the boundary curve p(e^{2 pi i t}) of a polynomial map
    (ascending coefficients p(z) = c_0 + c_1 z + ...)."""
    coefficients: Tuple[complex, ...]

    def curve(self, t) -> np.ndarray:
        z = np.exp(2j * np.pi * np.asarray(t, dtype=float))
        return np.polyval(np.asarray(self.coefficients)[::-1], z)

    def curve_derivative(self, t) -> np.ndarray:
        z = np.exp(2j * np.pi * np.asarray(t, dtype=float))
        der = np.polyder(np.asarray(self.coefficients, dtype=complex)[::-1])
        return 2j * np.pi * z * np.polyval(der, z)


def _critical_polynomial(f: SigmaStarMap) -> np.ndarray:
    """z^{d+1} f'(z): z^{d+1} - sum k a_k z^{d-k} (the a_d term is +1)."""
    d = f.degree
    coeffs = np.zeros(d + 2, dtype=complex)
    coeffs[0] = 1.0
    for k, a in enumerate(f.full_coefficients, start=1):
        coeffs[d + 1 - (d - k)] -= k * a
    return coeffs


def make_sigma_star(d: int, coefficients: Sequence[complex]) -> SigmaStarMap:
    """Validate the critical-point structure and exterior univalence."""
    if d < 2:
        raise ValueError("degree must be >= 2")
    coefficients = tuple(complex(c) for c in coefficients)
    if len(coefficients) != d - 1:
        raise ValueError(f"expected {d - 1} coefficients a_1..a_{d - 1}")
    f = SigmaStarMap(degree=d, coefficients=coefficients)
    roots = np.roots(_critical_polynomial(f))
    if np.any(np.abs(np.abs(roots) - 1.0) > 1e-8):
        raise CriticalPointsOffCircle(
            "critical points must lie on the unit circle")
    if np.min(np.abs(roots[:, None] - roots[None, :])
              + 10.0 * np.eye(len(roots))) < 1e-8:
        raise CriticalPointsOffCircle("critical points must be simple")
    # univalence strictly outside the circle (self-contacts on the
    # boundary itself are allowed)
    n = 4096
    t = (np.arange(n) + 0.29) / n
    z = 1.05 * np.exp(2j * np.pi * t)
    w = z.copy()
    for k, a in enumerate(f.full_coefficients, start=1):
        w = w + a * z ** (-k)
    tree = cKDTree(np.column_stack([w.real, w.imag]))
    dists, idx = tree.query(np.column_stack([w.real, w.imag]), k=4)
    sep = np.abs((idx - np.arange(n)[:, None] + n // 2) % n - n // 2)
    far = sep > 8
    scale = float(np.max(np.abs(w))) + 1e-30
    if np.any(far) and np.min(dists[far]) < 1e-8 * scale:
        raise NotUnivalent("map is not injective outside the circle")
    return f


def curve_cusps(f: SigmaStarMap) -> List[Tuple[float, complex]]:
    """(parameter angle in turns, cusp point) for the d+1 boundary cusps."""
    roots = np.roots(_critical_polynomial(f))
    roots = roots / np.abs(roots)
    params = np.sort(mod1(np.angle(roots) / _TWO_PI))
    pts = f.curve(params)
    return [(float(t), complex(w)) for t, w in zip(params, pts)]


@dataclass(frozen=True)
class DoublePoint:
    point: complex
    t1: float
    t2: float
    residual: float


def curve_double_points(curve, samples: int = 2 ** 16,
                        min_separation: float = 0.02,
                        hash_radius: Optional[float] = None
                        ) -> List[DoublePoint]:
    """Parameter pairs t1 != t2 with gamma(t1) = gamma(t2).

    Double points of these curves are tangential, so crossing detection
    fails; instead near-coincident samples with separated parameters seed
    a damped (Levenberg) Newton iteration on gamma(t1) - gamma(t2), whose
    Jacobian is rank-deficient exactly at a tangency.
    """
    t = (np.arange(samples) + 0.13) / samples
    w = curve.curve(t)
    scale = float(np.max(np.abs(w - np.mean(w)))) + 1e-30
    r = hash_radius if hash_radius is not None else 1e-3 * scale
    tree = cKDTree(np.column_stack([w.real, w.imag]))
    pairs = tree.query_pairs(r, output_type="ndarray")
    if pairs.size == 0:
        return []
    tsep = np.abs(mod1(t[pairs[:, 0]] - t[pairs[:, 1]] + 0.5) - 0.5)
    pairs = pairs[tsep >= min_separation]
    # one Newton seed per parameter-pair cluster: keep the closest sample
    # pair within each cell of a coarse (t1, t2) grid
    gaps = np.abs(w[pairs[:, 0]] - w[pairs[:, 1]])
    cells: Dict[Tuple[int, int], int] = {}
    for idx in np.argsort(gaps):
        t1, t2 = sorted((t[pairs[idx, 0]], t[pairs[idx, 1]]))
        key = (int(t1 / min_separation), int(t2 / min_separation))
        cells.setdefault(key, int(idx))
    found: List[DoublePoint] = []
    for idx in sorted(cells.values()):
        i, j = pairs[idx]
        t1, t2 = float(t[i]), float(t[j])
        if any(min(abs(mod1(t1 - dp.t1 + 0.5) - 0.5),
                   abs(mod1(t1 - dp.t2 + 0.5) - 0.5)) < 2.0 * min_separation
               and min(abs(mod1(t2 - dp.t1 + 0.5) - 0.5),
                       abs(mod1(t2 - dp.t2 + 0.5) - 0.5))
               < 2.0 * min_separation for dp in found):
            continue
        res, p1, p2, pt = _refine_double_point(curve, t1, t2)
        if res < 1e-10 * scale:
            sep = abs(mod1(p1 - p2 + 0.5) - 0.5)
            if sep >= min_separation:
                lo, hi = sorted((mod1(p1), mod1(p2)))
                found.append(DoublePoint(point=pt, t1=lo, t2=hi,
                                         residual=res))
    found.sort(key=lambda dp: dp.t1)
    return found


def _refine_double_point(curve, t1: float, t2: float,
                         iters: int = 200) -> Tuple[float, float, float,
                                                    complex]:
    lam = 1e-8
    for _ in range(iters):
        g1 = complex(curve.curve(np.array(t1)))
        g2 = complex(curve.curve(np.array(t2)))
        F = np.array([(g1 - g2).real, (g1 - g2).imag])
        if np.hypot(*F) < 1e-14:
            break
        d1 = complex(curve.curve_derivative(np.array(t1)))
        d2 = complex(curve.curve_derivative(np.array(t2)))
        J = np.array([[d1.real, -d2.real], [d1.imag, -d2.imag]])
        A = J.T @ J + lam * np.eye(2)
        step = np.linalg.solve(A, J.T @ F)
        t1n, t2n = t1 - step[0], t2 - step[1]
        g1n = complex(curve.curve(np.array(t1n)))
        g2n = complex(curve.curve(np.array(t2n)))
        if abs(g1n - g2n) <= abs(g1 - g2):
            t1, t2 = t1n, t2n
            lam = max(lam * 0.5, 1e-12)
        else:
            lam *= 10.0
            if lam > 1e6:
                break
    g1 = complex(curve.curve(np.array(t1)))
    g2 = complex(curve.curve(np.array(t2)))
    return abs(g1 - g2), t1, t2, 0.5 * (g1 + g2)


@dataclass(frozen=True)
class Tile:
    index: int
    arcs: Tuple[Tuple[float, float], ...]   # parameter intervals on S^1
    cusp_params: Tuple[float, ...]
    chords: Tuple[int, ...]                 # incident double-point indices
    marks: Tuple[Tuple[str, object], ...]   # ccw ("cusp", t) / ("chord", id)


def fundamental_tiles(f: SigmaStarMap,
                      double_points: Optional[List[DoublePoint]] = None
                      ) -> List[Tile]:
    """Cut the circle at the double-point parameter pairs (a non-crossing
    chord system) and group the arcs into the d-1 fundamental tiles."""
    d = f.degree
    dps = curve_double_points(f) if double_points is None else double_points
    if len(dps) != d - 2:
        raise NotSuffridge(
            f"expected {d - 2} double points, found {len(dps)}")
    cusps = curve_cusps(f)
    return _tiles_from_combinatorics(
        [(dp.t1, dp.t2) for dp in dps], [t for t, _ in cusps])


def _tiles_from_combinatorics(chords: List[Tuple[float, float]],
                              cusps: List[float]) -> List[Tile]:
    events = []   # (param, chord id)
    for ci, (a, b) in enumerate(chords):
        events.append((mod1(a), ci))
        events.append((mod1(b), ci))
    events.sort()
    # walk the circle from 0 with a stack; non-crossing chords nest
    stack: List[int] = []
    face_of_state: Dict[Tuple[int, ...], int] = {}
    arc_runs: List[Tuple[float, float, int, Optional[int]]] = []
    boundaries = [e[0] for e in events] + [1.0]
    prev = 0.0
    for k, (pos, cid) in enumerate(events + [(1.0, -1)]):
        state = tuple(stack)
        if state not in face_of_state:
            face_of_state[state] = len(face_of_state)
        # arc [prev, pos) belongs to the current face; the chord event at
        # its end is the boundary mark there
        arc_runs.append((prev, pos, face_of_state[state],
                         cid if cid >= 0 else None))
        prev = pos
        if cid >= 0:
            if stack and stack[-1] == cid:
                stack.pop()
            else:
                stack.append(cid)
    if stack:
        raise NotSuffridge("double-point chords cross: not a lamination")
    # merge the wrap-around arc (last run continues into the first)
    n_faces = len(face_of_state)
    tiles_arcs: Dict[int, List[Tuple[float, float, Optional[int]]]] = {
        i: [] for i in range(n_faces)}
    runs = [r for r in arc_runs if r[1] > r[0] or r[3] is not None]
    for (a, b, face, endmark) in runs:
        tiles_arcs[face].append((a, b, endmark))
    out: List[Tile] = []
    cusps_sorted = sorted(mod1(np.asarray(cusps, dtype=float)))
    for face in range(n_faces):
        arcs = tiles_arcs[face]
        # wrap-around: the face containing parameter 0 has its first and
        # last runs joined; mark order is cyclic so concatenation suffices
        marks: List[Tuple[str, object]] = []
        cusp_list: List[float] = []
        chord_set: List[int] = []
        for (a, b, endmark) in arcs:
            for c in cusps_sorted:
                if a <= c < b:
                    marks.append(("cusp", c))
                    cusp_list.append(c)
            if endmark is not None:
                marks.append(("chord", endmark))
                if endmark not in chord_set:
                    chord_set.append(endmark)
        # the final wrap event (cid = -1) contributes no mark; if the face
        # reappears after the wrap its cyclic marks are already correct
        out.append(Tile(index=face,
                        arcs=tuple((a, b) for a, b, _ in arcs),
                        cusp_params=tuple(cusp_list),
                        chords=tuple(chord_set),
                        marks=tuple(marks)))
    for tile in out:
        if len(tile.marks) != 3:
            raise NotSuffridge(
                f"tile {tile.index} has {len(tile.marks)} singular marks, "
                "expected 3")
    return out


@dataclass(frozen=True)
class BiAngledTree:
    """Vertices are tiles, edges are double points; angle[(v, e, e')] is
    the multiple of 2*pi/3 (1 or 2) turned from edge e to e' at v."""
    vertices: Tuple[int, ...]
    edges: Tuple[Tuple[int, int, int], ...]   # (edge id, v1, v2)
    angles: Dict[Tuple[int, int, int], int]

    def neighbors(self, v: int) -> List[Tuple[int, int]]:
        out = []
        for (e, a, b) in self.edges:
            if a == v:
                out.append((e, b))
            elif b == v:
                out.append((e, a))
        return out


def bi_angled_tree(f: SigmaStarMap,
                   double_points: Optional[List[DoublePoint]] = None
                   ) -> BiAngledTree:
    """One vertex per tile, one edge per double point; the angle from
    chord e to chord e' at a tile is 2*pi/3 times (1 + number of singular
    marks strictly between them counter-clockwise)."""
    tiles = fundamental_tiles(f, double_points)
    edges: List[Tuple[int, int, int]] = []
    chord_faces: Dict[int, List[int]] = {}
    for tile in tiles:
        for c in tile.chords:
            chord_faces.setdefault(c, []).append(tile.index)
    for c, faces in sorted(chord_faces.items()):
        if len(faces) != 2:
            raise NotSuffridge(f"chord {c} borders {len(faces)} tiles")
        edges.append((c, faces[0], faces[1]))
    angles: Dict[Tuple[int, int, int], int] = {}
    for tile in tiles:
        marks = list(tile.marks)
        m = len(marks)
        pos = {mk[1]: i for i, mk in enumerate(marks) if mk[0] == "chord"}
        for e1, e2 in itertools.permutations(tile.chords, 2):
            # with exactly 3 marks, one plus the marks strictly between
            # e1 and e2 ccw equals their cyclic position difference
            angles[(tile.index, e1, e2)] = (pos[e2] - pos[e1]) % m
    return BiAngledTree(vertices=tuple(t.index for t in tiles),
                        edges=tuple(edges), angles=angles)


def trees_isomorphic(T1: BiAngledTree, T2: BiAngledTree) -> bool:
    """Exhaustive angle-preserving tree isomorphism (small trees)."""
    if len(T1.vertices) != len(T2.vertices) or len(T1.edges) != len(T2.edges):
        return False

    def match(v1: int, v2: int, e_from1: Optional[int],
              e_from2: Optional[int], vmap: Dict[int, int],
              emap: Dict[int, int]) -> bool:
        nb1 = [(e, u) for e, u in T1.neighbors(v1) if e != e_from1]
        nb2 = [(e, u) for e, u in T2.neighbors(v2) if e != e_from2]
        if len(nb1) != len(nb2):
            return False
        for perm in itertools.permutations(range(len(nb2))):
            trial_v = dict(vmap)
            trial_e = dict(emap)
            ok = True
            for i, (e1, u1) in enumerate(nb1):
                e2, u2 = nb2[perm[i]]
                trial_v[u1] = u2
                trial_e[e1] = e2
            # angle consistency at v1 over all known incident edge pairs
            inc1 = [e for e, _ in T1.neighbors(v1)]
            for a, b in itertools.permutations(inc1, 2):
                if a in trial_e and b in trial_e:
                    k1 = T1.angles.get((v1, a, b))
                    k2 = T2.angles.get((v2, trial_e[a], trial_e[b]))
                    if k1 != k2:
                        ok = False
                        break
            if not ok:
                continue
            good = True
            for i, (e1, u1) in enumerate(nb1):
                e2, u2 = nb2[perm[i]]
                if not match(u1, u2, e1, e2, trial_v, trial_e):
                    good = False
                    break
            if good:
                vmap.update(trial_v)
                emap.update(trial_e)
                return True
        return False

    for v2 in T2.vertices:
        if match(T1.vertices[0], v2, None, None,
                 {T1.vertices[0]: v2}, {}):
            return True
    return False


def rotate_sigma_star(f: SigmaStarMap, j: int) -> SigmaStarMap:
    """Conjugation by the (d+1)-st root of unity w^j:
    a_k -> a_k * w^{-j(k+1)}; a_d is invariant."""
    w = np.exp(2j * np.pi * j / (f.degree + 1))
    new = tuple(a * w ** (-(k + 1))
                for k, a in enumerate(f.coefficients, start=1))
    return SigmaStarMap(degree=f.degree, coefficients=new)


def claw_example() -> SigmaStarMap:
    """g(z) = z + (2 sqrt 2 / 5) z^{-2} - (1/5) z^{-5}."""
    return make_sigma_star(5, (0.0, 2.0 * np.sqrt(2.0) / 5.0, 0.0, 0.0))


def path_example() -> SigmaStarMap:
    """Approximate printed coefficients of the companion degree-5 map."""
    return make_sigma_star(5, (-0.71j, 0.0, 0.71j / 3.0, 0.0))
