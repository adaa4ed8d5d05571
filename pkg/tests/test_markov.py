import numpy as np
import pytest

from confdyn import markov
from confdyn.circle_maps import (BlaschkeParabolicFamily, PiecewiseReflection,
                                 Power, REVERSING)
from confdyn.errors import NotBreakPoint
from confdyn.geom import circ_dist, mod1

THIRDS = np.array([0.0, 1.0 / 3.0, 2.0 / 3.0])


@pytest.fixture
def p2():
    m = Power(2, REVERSING)
    return m, markov.build_markov(m, THIRDS)


class TestBuildMarkov:
    def test_break_dynamics(self, p2):
        m, P = p2
        assert P.size == 3
        # each break maps onto a break
        for k in range(P.size):
            img = m.eval(P.breaks[k])
            assert circ_dist(img, P.breaks[P.image_index[k]]) < 1e-13

    def test_transition_rows_nonempty(self, p2):
        _, P = p2
        assert np.all(P.transition.sum(axis=1) >= 1)

    def test_lift_endpoints_consistent(self, p2):
        m, P = p2
        for k in range(P.size):
            lo, hi = P.arc(k)
            assert abs(P.lift_lo[k] - m.lift(lo)) < 1e-9
            assert abs(P.lift_hi[k] - m.lift(hi)) < 1e-9


class TestRefine:
    def test_level1_is_partition(self, p2):
        _, P = p2
        arcs = markov.refine(P, 1)
        assert len(arcs) == 3
        assert all(len(a.word) == 1 for a in arcs)

    def test_level2_count_from_transition(self, p2):
        _, P = p2
        arcs = markov.refine(P, 2)
        assert len(arcs) == int(P.transition.sum())
        assert all(len(a.word) == 2 for a in arcs)

    def test_nesting(self, p2):
        _, P = p2
        level2 = markov.refine(P, 2)
        for a in level2:
            plo, phi = P.arc(a.word[0])
            lo = mod1(a.lo - plo)
            assert lo < (phi - plo) + 1e-12
            assert a.length <= (phi - plo) + 1e-12

    def test_lengths_shrink(self, p2):
        _, P = p2
        m3 = max(a.length for a in markov.refine(P, 3))
        m6 = max(a.length for a in markov.refine(P, 6))
        assert m6 < m3


class TestFixedPoints:
    def test_circle_fixed_points_power(self):
        # -2t = t mod 1 has the three solutions k/3
        fps = markov.circle_fixed_points(Power(2, REVERSING))
        assert np.allclose(np.sort(fps), THIRDS, atol=1e-12)

    def test_classify_hyperbolic(self):
        c = markov.classify_fixed(Power(2, REVERSING), 1.0 / 3.0)
        assert c.side_plus.kind == "hyperbolic"
        assert c.side_minus.kind == "hyperbolic"

    def test_classify_parabolic_blaschke(self):
        c = markov.classify_fixed(BlaschkeParabolicFamily(2), 0.0)
        assert abs(c.lam_plus - 1.0) < 1e-8
        assert c.side_plus.kind == "parabolic"

    def test_reflection_breaks_parabolic(self):
        m = PiecewiseReflection((0.0, 1.0 / 3.0, 2.0 / 3.0))
        c = markov.classify_fixed(m, 2.0 / 3.0)
        assert c.period == 1

    def test_orbit_period(self):
        m = Power(2, REVERSING)
        assert markov.orbit_period(m, 1.0 / 3.0) == 1
        # 1/5 -> 3/5 -> 4/5 -> 2/5 -> 1/5 under -2t
        assert markov.orbit_period(m, 0.2) == 4


class TestExpansivity:
    def test_power_expansive(self):
        rep = markov.check_expansive(Power(2, REVERSING))
        assert rep.verdict == "expansive"
        assert rep.min_deriv >= 2.0 - 1e-9

    def test_parabolic_family_expansive(self):
        # conjugate to doubling: derivative 1 only at the parabolic point
        rep = markov.check_expansive(BlaschkeParabolicFamily(2))
        assert rep.verdict == "expansive"
        assert rep.min_deriv >= 1.0 - 1e-9

    def test_contracting_blaschke_not_expansive(self):
        from confdyn.circle_maps import GeneralBlaschke
        rep = markov.check_expansive(GeneralBlaschke(0.0, (0.7, 0.7)))
        assert rep.verdict == "not expansive"


def test_scaling_profile_requires_break_point(p2):
    from confdyn.conjugacy import arc_scaling_profile
    m, P = p2
    with pytest.raises(NotBreakPoint):
        arc_scaling_profile(m, 0.1234, "+", 3, range(2, 5), partition=P)
