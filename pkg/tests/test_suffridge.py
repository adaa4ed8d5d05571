import numpy as np
import pytest

from confdyn import suffridge as sf
from confdyn.errors import CriticalPointsOffCircle, NotSuffridge

SQRT2 = np.sqrt(2.0)


@pytest.fixture(scope="module")
def claw_map():
    return sf.claw_example()


@pytest.fixture(scope="module")
def path_map():
    return sf.path_example()


class TestMakeSigmaStar:
    def test_last_coefficient_forced(self, claw_map):
        assert abs(claw_map.full_coefficients[-1] - (-1.0 / 5.0)) < 1e-15

    def test_wrong_coefficient_count(self):
        with pytest.raises(ValueError):
            sf.make_sigma_star(5, (0.0, 0.0))

    def test_critical_points_off_circle_rejected(self):
        with pytest.raises(CriticalPointsOffCircle):
            sf.make_sigma_star(5, (0.9, 0.0, 0.0, 0.0))


class TestCusps:
    def test_count_is_degree_plus_one(self, claw_map, path_map):
        assert len(sf.curve_cusps(claw_map)) == 6
        assert len(sf.curve_cusps(path_map)) == 6

    def test_cusps_are_critical_values(self, claw_map):
        for t, w in sf.curve_cusps(claw_map):
            assert abs(complex(claw_map.curve(np.array(t))) - w) < 1e-12
            assert abs(complex(claw_map.curve_derivative(np.array(t)))) < 1e-6


class TestDoublePoints:
    def test_claw_map_three(self, claw_map):
        dps = sf.curve_double_points(claw_map)
        assert len(dps) == 3
        for dp in dps:
            assert dp.residual < 1e-10
            g1 = complex(claw_map.curve(np.array(dp.t1)))
            g2 = complex(claw_map.curve(np.array(dp.t2)))
            assert abs(g1 - g2) < 1e-10

    def test_path_map_three(self, path_map):
        assert len(sf.curve_double_points(path_map)) == 3

    def test_cubic_adapter_one(self):
        curve = sf.PolynomialCurve((0.0, 1.0, 2.0 * SQRT2 / 3.0, 1.0 / 3.0))
        dps = sf.curve_double_points(curve)
        assert len(dps) == 1
        assert dps[0].residual < 1e-10


class TestTiles:
    def test_claw_map_four_tiles(self, claw_map):
        tiles = sf.fundamental_tiles(claw_map)
        assert len(tiles) == 4
        for tile in tiles:
            assert len(tile.marks) == 3

    def test_path_map_four_tiles(self, path_map):
        assert len(sf.fundamental_tiles(path_map)) == 4

    def test_cusps_partition_over_tiles(self, claw_map):
        tiles = sf.fundamental_tiles(claw_map)
        total = sum(len(t.cusp_params) for t in tiles)
        assert total == 6

    def test_wrong_double_point_count_rejected(self, claw_map):
        with pytest.raises(NotSuffridge):
            sf.fundamental_tiles(claw_map, double_points=[])


class TestTrees:
    def test_claw_shape(self, claw_map):
        T = sf.bi_angled_tree(claw_map)
        degrees = sorted(len(T.neighbors(v)) for v in T.vertices)
        assert degrees == [1, 1, 1, 3]
        center = max(T.vertices, key=lambda v: len(T.neighbors(v)))
        edges = [e for e, _ in T.neighbors(center)]
        import itertools
        # consecutive edges at the center meet at 2*pi/3
        ones = sum(1 for a, b in itertools.permutations(edges, 2)
                   if T.angles[(center, a, b)] == 1)
        assert ones == 3

    def test_path_shape(self, path_map):
        T = sf.bi_angled_tree(path_map)
        degrees = sorted(len(T.neighbors(v)) for v in T.vertices)
        assert degrees == [1, 1, 2, 2]
        for v in T.vertices:
            nb = T.neighbors(v)
            if len(nb) == 2:
                ks = {T.angles[(v, nb[0][0], nb[1][0])],
                      T.angles[(v, nb[1][0], nb[0][0])]}
                assert ks == {1, 2}

    def test_angle_antisymmetry(self, claw_map):
        T = sf.bi_angled_tree(claw_map)
        for (v, a, b), k in T.angles.items():
            assert (T.angles[(v, b, a)] + k) % 3 == 0

    def test_claw_not_isomorphic_to_path(self, claw_map, path_map):
        Tg = sf.bi_angled_tree(claw_map)
        Tf = sf.bi_angled_tree(path_map)
        assert not sf.trees_isomorphic(Tg, Tf)
        assert sf.trees_isomorphic(Tg, Tg)
        assert sf.trees_isomorphic(Tf, Tf)

    @pytest.mark.parametrize("j", [1, 2, 3])
    def test_rotation_gives_isomorphic_tree(self, claw_map, j):
        T = sf.bi_angled_tree(claw_map)
        Tj = sf.bi_angled_tree(sf.rotate_sigma_star(claw_map, j))
        assert sf.trees_isomorphic(T, Tj)
