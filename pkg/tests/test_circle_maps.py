import numpy as np
import pytest

from confdyn import circle_maps as cm
from confdyn.geom import circ_dist, mod1


def lift_jump(m, t):
    return m.lift(t + 1.0) - m.lift(t)


class TestPower:
    def test_doubling_reversed(self):
        m = cm.Power(2, cm.REVERSING)
        t = np.linspace(0, 1, 17, endpoint=False)
        assert np.allclose(circ_dist(m.eval(t), mod1(-2 * t)), 0, atol=1e-15)

    def test_lift_covers_degree(self):
        for d in (2, 3, 5):
            for orient in (cm.PRESERVING, cm.REVERSING):
                m = cm.Power(d, orient)
                t = np.array([0.1, 0.6])
                expected = d * m.sign
                assert np.allclose(lift_jump(m, t), expected, atol=1e-12)

    def test_monotone_lift(self):
        m = cm.Power(3, cm.REVERSING)
        t = np.linspace(0, 1, 257)
        assert np.all(np.diff(m.lift(t)) < 0)


class TestBlaschkeParabolic:
    def test_fixed_point_zero_multiplier_one(self):
        for d in (2, 3):
            m = cm.BlaschkeParabolicFamily(d)
            assert circ_dist(m.eval(0.0), 0.0) < 1e-14
            assert abs(m.deriv(0.0) - 1.0) < 1e-10

    def test_degree(self):
        m = cm.BlaschkeParabolicFamily(2)
        assert abs(lift_jump(m, np.array([0.2]))[0] - 2.0) < 1e-10

    def test_inverse_roundtrip(self):
        m = cm.BlaschkeParabolicFamily(2)
        t = np.linspace(0.01, 0.32, 20)
        y = m.lift(t)
        back = m.invert_lift(y, np.zeros_like(t), np.full_like(t, 1.0 / 3.0))
        assert np.max(np.abs(back - t)) < 1e-11


class TestGeneralBlaschke:
    def test_conjugate_symmetric_zeros_fix_one(self):
        m = cm.GeneralBlaschke(0.0, (0.3 + 0.1j, 0.3 - 0.1j), anti=True)
        assert circ_dist(m.eval(0.0), 0.0) < 1e-13

    def test_orientation_flag(self):
        zeros = (0.2, -0.1)
        assert cm.GeneralBlaschke(0.0, zeros, anti=True).sign == -1
        assert cm.GeneralBlaschke(0.0, zeros, anti=False).sign == 1

    def test_zero_inside_disk_required(self):
        with pytest.raises(Exception):
            cm.GeneralBlaschke(0.0, (1.5,), anti=False)


class TestPiecewiseReflection:
    def test_breaks_fixed(self):
        m = cm.PiecewiseReflection((0.0, 1.0 / 3.0, 2.0 / 3.0))
        for b in (0.0, 1.0 / 3.0, 2.0 / 3.0):
            assert circ_dist(m.eval(b), b) < 1e-13

    def test_reverses(self):
        m = cm.PiecewiseReflection((0.0, 1.0 / 3.0, 2.0 / 3.0))
        assert m.sign == -1


class TestConfigRoundtrip:
    @pytest.mark.parametrize("cfg", [
        {"kind": "power", "degree": 2, "orientation": "reversing"},
        {"kind": "blaschke_parabolic", "degree": 3},
        {"kind": "reflection",
         "breaks": [0.0, 0.3333333333333333, 0.6666666666666666]},
    ])
    def test_roundtrip_evaluates_identically(self, cfg):
        m = cm.from_config(cfg)
        m2 = cm.from_config(cm.to_config(m))
        t = np.linspace(0, 1, 101, endpoint=False)
        assert np.allclose(m.lift(t), m2.lift(t), atol=1e-15)

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            cm.from_config({"kind": "nope"})
