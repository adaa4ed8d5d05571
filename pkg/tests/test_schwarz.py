import numpy as np
import pytest

from confdyn import holo_dynamics as hd
from confdyn import schwarz as sw
from confdyn.errors import NotUnivalent, OutsideDomain

SQRT2 = np.sqrt(2.0)
SQRT5 = np.sqrt(5.0)


class TestQuadratureDomain:
    def test_disk_reflection_is_inversion(self):
        Q = sw.disk_domain(1.0 + 2.0j, 0.5)
        z = 1.2 + 2.1j
        expected = Q.boundary(np.array([0.0]))  # touch API
        w = sw.schwarz_reflect(Q, z)
        c, r = 1.0 + 2.0j, 0.5
        inv = c + r * r / np.conj(z - c)
        assert abs(w - inv) < 1e-12

    def test_boundary_fixed(self):
        Q = sw.disk_domain(0.0j, 1.0)
        for t in (0.0, 0.13, 0.71):
            z = complex(Q.boundary(np.array([t]))[0])
            assert abs(sw.schwarz_reflect(Q, z) - z) < 1e-10

    def test_outside_rejected(self):
        Q = sw.disk_domain(0.0j, 1.0)
        with pytest.raises(OutsideDomain):
            sw.schwarz_reflect(Q, 3.0 + 0.0j)

    def test_non_univalent_rejected(self):
        # z^2 is 2-to-1 on the disk
        f = hd.RationalMap((1.0, 0.0, 0.0), (1.0,))
        with pytest.raises(NotUnivalent):
            sw.make_quadrature_domain(f, sw.DISK)


class TestAlpha:
    def test_closed_form(self):
        expected = 0.5 * ((1.0 + SQRT5) - np.sqrt(2.0 + 2.0 * SQRT5))
        assert abs(sw.solve_alpha() - expected) < 1e-10


@pytest.fixture(scope="module")
def ellipse_system():
    return sw.ellipse_two_disks()


@pytest.fixture(scope="module")
def cubic_system():
    return sw.cubic_circle()


@pytest.fixture(scope="module")
def cauliflower_fit():
    return sw.parabolic_fit()


class TestEllipseSystem:
    def test_three_domains_three_contacts(self, ellipse_system):
        assert len(ellipse_system.domains) == 3
        assert len(ellipse_system.contacts) == 3

    def test_critical_two_cycle(self, ellipse_system):
        alpha = sw.solve_alpha()
        a = 1.0 / alpha + alpha ** 3
        b = 2.0 * alpha
        wa = sw.system_step(ellipse_system, complex(a))
        wb = sw.system_step(ellipse_system, complex(b))
        assert abs(wa - b) < 1e-9
        assert abs(wb - a) < 1e-9

    def test_critical_orbit_non_escaping(self, ellipse_system):
        alpha = sw.solve_alpha()
        out = sw.classify_schwarz_orbit(ellipse_system, complex(2.0 * alpha),
                                        budget=200)
        assert out.outcome in ("non-escaping", "converged")


class TestCubicSystem:
    def test_f2_at_one(self):
        f2 = hd.RationalMap((1.0 / 3.0, 2.0 * SQRT2 / 3.0, 1.0, 0.0), (1.0,))
        assert abs(hd.eval_map(f2, 1.0 + 0.0j)
                   - (4.0 / 3.0 + 2.0 * SQRT2 / 3.0)) < 1e-12

    def test_contact_at_f2_of_one(self, cubic_system):
        target = 4.0 / 3.0 + 2.0 * SQRT2 / 3.0
        assert any(abs(c - target) < 1e-6 for c in cubic_system.contacts)

    def test_zero_infinity_two_cycle(self, cubic_system):
        w = sw.system_step(cubic_system, 0.0j)
        assert w is not None and (not np.isfinite(w.real) or abs(w) > 1e10)
        back = sw.system_step(cubic_system, w)
        assert abs(back) < 1e-10


class TestCauliflowerSystem:
    def test_single_domain_no_contacts(self):
        S = sw.cauliflower_system()
        assert len(S.domains) == 1
        assert len(S.contacts) == 0

    def test_orbit_converges_to_parabolic_point(self):
        S = sw.cauliflower_system()
        out = sw.classify_schwarz_orbit(S, -4.0 / 3.0 + 0.05, budget=4000)
        assert out.outcome == "converged"
        assert abs(out.point - (-4.0 / 3.0)) < 0.05

    def test_droplet_point_escapes(self):
        # the complement of the exterior quadrature domain is the droplet
        # around [-4, -4/3]; its interior points leave the system at once
        S = sw.cauliflower_system()
        out = sw.classify_schwarz_orbit(S, -2.5 + 0.0j, budget=100)
        assert out.outcome == "escaped"


class TestParabolicFit:
    def test_r_at_one(self, cauliflower_fit):
        assert abs(cauliflower_fit["r_at_1"] - (-4.0 / 3.0)) < 1e-12

    def test_quintic_coefficient(self, cauliflower_fit):
        target = 5.0 / 36.0
        assert abs(cauliflower_fit["epsilon5_coefficient"] - target) < 0.01 * target

    def test_cusp_exponent(self, cauliflower_fit):
        assert abs(cauliflower_fit["cusp_exponent"] - 2.5) < 0.05
