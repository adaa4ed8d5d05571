"""End-to-end acceptance checks, one class per criterion.

Each class pins the quantitative claims of the corresponding feature at
its stated tolerance; the slow ones carry explicit runtime budgets.
"""

import time

import numpy as np
import pytest

from confdyn import holo_dynamics as hd
from confdyn import qc_extension as qc
from confdyn import reflection_groups as rg
from confdyn import schwarz as sw
from confdyn import suffridge as sf
from confdyn.circle_maps import (BlaschkeParabolicFamily, GeneralBlaschke,
                                 PiecewiseReflection, Power, REVERSING)
from confdyn.conjugacy import (arc_scaling_profile, build_conjugacy,
                               canonical_power_conjugacy, distortion_profile)
from confdyn.markov import build_markov

SQRT2 = np.sqrt(2.0)
SQRT3 = np.sqrt(3.0)
SQRT5 = np.sqrt(5.0)

THIRDS = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0])


def doubling_reflection_conjugacy():
    f = Power(2, REVERSING)
    g = PiecewiseReflection((0.0, 1.0 / 3.0, 2.0 / 3.0))
    return build_conjugacy(f, build_markov(f, THIRDS),
                           g, build_markov(g, THIRDS))


class TestCriterion1Multipliers:
    """(2z^3+1)/(z^3+2): multiplier 1 at z=1 and 9 at z=-1."""

    def test_welding_multipliers(self):
        start = time.monotonic()
        R = hd.RationalMap((2.0, 0.0, 0.0, 1.0), (1.0, 0.0, 0.0, 2.0))
        fps = [(p, lam) for p, lam in hd.fixed_points(R)
               if p is not hd.INF and np.isfinite(p.real)]
        p1, lam1 = min(fps, key=lambda pl: abs(pl[0] - 1.0))
        pm, lamm = min(fps, key=lambda pl: abs(pl[0] + 1.0))
        assert abs(lam1 - 1.0) < 1e-9
        assert abs(lamm - 9.0) < 1e-9
        assert time.monotonic() - start < 1.0


class TestCriterion2Alpha:
    """alpha closed form and the critical 2-cycle of the ellipse system."""

    def test_alpha_and_two_cycle(self):
        start = time.monotonic()
        alpha = sw.solve_alpha()
        exact = 0.5 * ((1.0 + SQRT5) - np.sqrt(2.0 + 2.0 * SQRT5))
        assert abs(alpha - exact) < 1e-10
        S = sw.ellipse_two_disks()
        a = 1.0 / alpha + alpha ** 3
        b = 2.0 * alpha
        assert abs(sw.system_step(S, complex(a)) - b) < 1e-9
        assert abs(sw.system_step(S, complex(b)) - a) < 1e-9
        assert time.monotonic() - start < 1.0


class TestCriterion3CauliflowerConstants:
    """R(1) = -4/3, quintic cusp coefficient 5/36, exponent 5/2."""

    def test_constants(self):
        start = time.monotonic()
        fit = sw.parabolic_fit()
        assert abs(fit["r_at_1"] - (-4.0 / 3.0)) < 1e-12
        assert abs(fit["epsilon5_coefficient"] - 5.0 / 36.0) \
            < 0.01 * (5.0 / 36.0)
        assert abs(fit["cusp_exponent"] - 2.5) < 0.05
        assert time.monotonic() - start < 5.0


class TestCriterion4CubicDomain:
    """f2(1) exactly, one double point, and the 0 <-> infinity 2-cycle."""

    def test_cubic_facts(self):
        start = time.monotonic()
        f2 = hd.RationalMap((1.0 / 3.0, 2.0 * SQRT2 / 3.0, 1.0, 0.0), (1.0,))
        assert abs(hd.eval_map(f2, 1.0 + 0.0j)
                   - (4.0 / 3.0 + 2.0 * SQRT2 / 3.0)) < 1e-12
        curve = sf.PolynomialCurve((0.0, 1.0, 2.0 * SQRT2 / 3.0, 1.0 / 3.0))
        assert len(sf.curve_double_points(curve)) == 1
        S = sw.cubic_circle()
        w = sw.system_step(S, 0.0j)
        assert w is not None and (not np.isfinite(w.real) or abs(w) > 1e10)
        assert abs(sw.system_step(S, w)) < 1e-10
        assert time.monotonic() - start < 10.0


class TestCriterion5ArcScaling:
    """Hyperbolic 1/9 geometric law; parabolic -1/-2 and -1/2 / -3/2 laws."""

    def test_scaling_laws(self):
        start = time.monotonic()
        prof = arc_scaling_profile(Power(3, REVERSING), 0.0, "+", 3,
                                   range(10, 41))
        assert prof.classification == "hyperbolic"
        assert abs(prof.geometric_ratio2 - 1.0 / 9.0) < 0.02 / 9.0

        rho2 = PiecewiseReflection((0.0, 1.0 / 3.0, 2.0 / 3.0))
        prof = arc_scaling_profile(rho2, 2.0 / 3.0, "+", 4,
                                   range(50, 501, 25))
        assert prof.classification == "parabolic"
        assert abs(prof.first_arc_exponent - (-1.0)) < 0.05
        assert abs(prof.later_arc_exponent - (-2.0)) < 0.1

        b2 = BlaschkeParabolicFamily(2)
        prof = arc_scaling_profile(b2, 0.0, "+", 4, range(50, 501, 25))
        assert prof.classification == "parabolic"
        assert abs(prof.first_arc_exponent - (-0.5)) < 0.05
        assert abs(prof.later_arc_exponent - (-1.5)) < 0.1
        assert time.monotonic() - start < 60.0


class TestCriterion6DistortionGrowth:
    """Logarithmic distortion growth for the parabolic pair, bounded
    distortion for the hyperbolic pair, over scales 2^-4 .. 2^-14."""

    def test_parabolic_pair_grows_linearly_in_k(self):
        start = time.monotonic()
        h = doubling_reflection_conjugacy()
        prof = distortion_profile(h, 4, 14, sample_count=1024)
        assert prof.preferred == "linear"
        # rho(2^-k)/k bounded: the fitted line has a modest slope
        assert np.max(prof.values / prof.ks) < 2.0
        assert time.monotonic() - start < 60.0

    def test_hyperbolic_pair_bounded(self):
        start = time.monotonic()
        m = GeneralBlaschke(0.0, (0.3 + 0.1j, 0.3 - 0.1j, 0.2), anti=True)
        h = canonical_power_conjugacy(m)
        prof = distortion_profile(h, 4, 14, sample_count=1024)
        assert prof.preferred == "bounded"
        assert np.max(prof.values) < 10.0
        assert time.monotonic() - start < 110.0


class TestCriterion7Extension:
    """Identity and symmetry at machine precision; David tail for the
    parabolic pair versus a bounded field for the hyperbolic pair."""

    def test_identity_extension(self):
        H = qc.lift_to_line(lambda t: t)
        xs, ys = np.meshgrid(np.linspace(0, 1, 64),
                             np.linspace(0.01, 1.0, 64))
        w = qc.ba_extend(H, xs.ravel(), ys.ravel())
        assert np.max(np.abs(w - (xs.ravel() + 1j * ys.ravel()))) < 1e-12

    def test_real_symmetry(self):
        h = doubling_reflection_conjugacy()
        H = qc.lift_to_line(h)
        x = np.linspace(0.05, 0.45, 24)
        y = np.full_like(x, 0.1)
        a = qc.ba_extend(H, x, y)
        b = qc.ba_extend(H, 1.0 - x, y)
        assert np.max(np.abs(a.real + b.real - 1.0)) < 1e-9
        assert np.max(np.abs(a.imag - b.imag)) < 1e-9

    def test_david_tail_versus_bounded_field(self):
        start = time.monotonic()
        h = doubling_reflection_conjugacy()
        tail = qc.david_tail(h, grid_resolution=256)
        assert tail.alpha is not None and tail.alpha > 0
        assert tail.r_squared >= 0.9

        m = GeneralBlaschke(0.0, (0.3 + 0.1j, 0.3 - 0.1j, 0.2), anti=True)
        hyp = canonical_power_conjugacy(m)
        tail_h = qc.david_tail(hyp, grid_resolution=256)
        # bounded distortion: the area above some threshold is exactly zero
        assert tail_h.areas[-1] == 0.0
        assert time.monotonic() - start < 600.0


class TestCriterion8GroupDynamics:
    """Necklace recognition, orbit equivalence, limit-set coverage."""

    @pytest.mark.parametrize("n", range(3, 10))
    def test_ideal_polygons_are_necklaces(self, n):
        ok, diag = rg.is_necklace(rg.ideal_polygon_packing(n))
        assert ok, diag

    def test_orbit_equivalence_words_up_to_three(self):
        import itertools
        P = rg.ideal_polygon_packing(3)
        z0 = 10.0 + 10.0j
        for length in (1, 2, 3):
            for word in itertools.product(range(3), repeat=length):
                if any(a == b for a, b in zip(word, word[1:])):
                    continue
                z = z0
                for k in reversed(word):
                    z = rg.circle_inversion(P.circles[k], z)
                orbit = rg.escape_time(P, z, max_steps=50)
                assert orbit.outcome == "reached"
                assert abs(orbit.final - z0) < 1e-8

    def test_limit_set_render_coverage(self):
        start = time.monotonic()
        P = rg.ideal_polygon_packing(3)
        raster = rg.render_limit(P, (-1.5, 1.5, -1.5, 1.5), 512, 512,
                                 max_steps=200)
        assert raster.undecided_fraction() < 0.05
        assert time.monotonic() - start < 30.0


class TestCriterion9Suffridge:
    """Counts, claw versus path trees, rotation invariance."""

    def test_combinatorics(self):
        start = time.monotonic()
        g = sf.claw_example()
        assert len(sf.curve_cusps(g)) == 6
        dps = sf.curve_double_points(g)
        assert len(dps) == 3
        tiles = sf.fundamental_tiles(g, dps)
        assert len(tiles) == 4
        Tg = sf.bi_angled_tree(g, dps)
        degrees = sorted(len(Tg.neighbors(v)) for v in Tg.vertices)
        assert degrees == [1, 1, 1, 3]
        center = max(Tg.vertices, key=lambda v: len(Tg.neighbors(v)))
        import itertools
        edges = [e for e, _ in Tg.neighbors(center)]
        assert sum(1 for a, b in itertools.permutations(edges, 2)
                   if Tg.angles[(center, a, b)] == 1) == 3

        f = sf.path_example()
        assert len(sf.curve_cusps(f)) == 6
        dps_f = sf.curve_double_points(f)
        assert len(dps_f) == 3
        assert len(sf.fundamental_tiles(f, dps_f)) == 4
        Tf = sf.bi_angled_tree(f, dps_f)
        assert sorted(len(Tf.neighbors(v)) for v in Tf.vertices) \
            == [1, 1, 2, 2]
        assert not sf.trees_isomorphic(Tg, Tf)

        for j in range(1, 6):
            Tj = sf.bi_angled_tree(sf.rotate_sigma_star(g, j))
            assert sf.trees_isomorphic(Tg, Tj)
        assert time.monotonic() - start < 60.0


class TestCriterion10CriticalOrbits:
    """Finite critical points of P_Gamma fixed; those of P1, P2 2-periodic."""

    def test_critical_orbit_facts(self):
        start = time.monotonic()
        R = hd.catalog("p_gamma")
        finite = [c for c, _ in hd.critical_points(R)
                  if c is not hd.INF and np.isfinite(c.real)]
        assert finite
        for c in finite:
            assert abs(hd.eval_map(R, c) - c) < 1e-10
        for name in ("p1", "p2"):
            R = hd.catalog(name)
            finite = [c for c, _ in hd.critical_points(R)
                      if c is not hd.INF and np.isfinite(c.real)]
            assert finite
            for c in finite:
                assert abs(hd.eval_map(R, hd.eval_map(R, c)) - c) < 1e-9
        assert time.monotonic() - start < 1.0
