import json

import numpy as np
import pytest

from confdyn.cli import parse_complex_list, parse_real, run
from confdyn.errors import UsageError


@pytest.fixture
def conj_config(tmp_path):
    cfg = {"source": {"map": {"kind": "power", "degree": 2,
                              "orientation": "reversing"},
                      "breaks": [0.0, 1.0 / 3.0, 2.0 / 3.0]},
           "target": {"map": {"kind": "reflection",
                              "breaks": [0.0, 1.0 / 3.0, 2.0 / 3.0]}}}
    path = tmp_path / "conj.json"
    path.write_text(json.dumps(cfg))
    return str(path)


class TestNumberParsing:
    def test_plain_decimal(self):
        assert parse_real("0.25") == 0.25
        assert parse_real("-3") == -3.0

    def test_radical_tokens(self):
        assert abs(parse_real("sqrt2") - np.sqrt(2)) < 1e-16
        assert abs(parse_real("2*sqrt2/5") - 2 * np.sqrt(2) / 5) < 1e-16
        assert abs(parse_real("-sqrt3") + np.sqrt(3)) < 1e-16

    def test_complex_list(self):
        vals = parse_complex_list("0,0;2*sqrt2/5,0")
        assert vals[0] == 0
        assert abs(vals[1] - 2 * np.sqrt(2) / 5) < 1e-16

    def test_garbage_rejected(self):
        with pytest.raises(UsageError):
            parse_real("two")


class TestExitCodes:
    def test_unknown_subcommand(self, capsys):
        assert run(["frobnicate"]) == 64

    def test_no_subcommand(self, capsys):
        assert run([]) == 64

    def test_bad_viewport(self, capsys, tmp_path):
        rc = run(["render", "--map", "pine_tree", "--viewport", "1,0,0,1",
                  "--out", str(tmp_path / "x.ppm")])
        assert rc == 64

    def test_unknown_map(self, capsys, tmp_path):
        rc = run(["render", "--map", "nope",
                  "--out", str(tmp_path / "x.ppm")])
        assert rc == 1


class TestRender:
    def test_writes_ppm(self, tmp_path):
        out = tmp_path / "pt.ppm"
        rc = run(["render", "--map", "pine_tree", "--viewport", "-2,2,-2,2",
                  "--size", "32x32", "--max-iter", "60", "--out", str(out)])
        assert rc == 0
        data = out.read_bytes()
        assert data.startswith(b"P6\n32 32\n255\n")

    def test_deterministic(self, tmp_path):
        outs = []
        for name in ("a.ppm", "b.ppm"):
            out = tmp_path / name
            run(["render", "--map", "welding", "--size", "24x24",
                 "--max-iter", "40", "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestLimitSet:
    def test_writes_ppm(self, tmp_path):
        out = tmp_path / "lim.ppm"
        rc = run(["limit-set", "--ngon", "3", "--size", "32x32",
                  "--budget", "60", "--out", str(out)])
        assert rc == 0
        assert out.read_bytes().startswith(b"P6\n32 32\n255\n")


class TestConjugacyCommands:
    def test_conjugacy_csv(self, conj_config, tmp_path):
        out = tmp_path / "h.csv"
        rc = run(["conjugacy", "--config", conj_config, "--samples", "16",
                  "--tol", "1e-8", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "t,h"
        assert len(lines) == 17
        vals = [tuple(map(float, ln.split(","))) for ln in lines[1:]]
        assert all(0 <= h < 1 for _, h in vals)

    def test_conjugacy_deterministic(self, conj_config, tmp_path):
        outs = []
        for name in ("1.csv", "2.csv"):
            out = tmp_path / name
            run(["conjugacy", "--config", conj_config, "--samples", "16",
                 "--out", str(out)])
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]

    def test_distortion_csv(self, conj_config, tmp_path):
        out = tmp_path / "rho.csv"
        rc = run(["distortion", "--config", conj_config, "--k-min", "4",
                  "--k-max", "6", "--samples", "256", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "k,scale,rho"
        assert len(lines) == 4

    def test_ba_extend_csv(self, conj_config, tmp_path):
        out = tmp_path / "ba.csv"
        rc = run(["ba-extend", "--config", conj_config, "--grid", "4",
                  "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "x,y,re,im"
        assert len(lines) == 17

    def test_missing_config(self, tmp_path, capsys):
        rc = run(["conjugacy", "--config", str(tmp_path / "missing.json"),
                  "--out", str(tmp_path / "h.csv")])
        assert rc == 1


class TestVerifyConstants:
    def test_all_within_tolerance(self, tmp_path):
        out = tmp_path / "const.csv"
        rc = run(["verify-constants", "--out", str(out)])
        assert rc == 0
        lines = out.read_text().splitlines()
        assert lines[0] == "name,expected,computed,abs_error"
        assert len(lines) == 7   # header + six constants


class TestSuffridgeCommand:
    def test_json_report(self, tmp_path):
        out = tmp_path / "suff.json"
        rc = run(["suffridge", "--degree", "5",
                  "--coeffs", "0,0;2*sqrt2/5,0;0,0;0,0", "--out", str(out)])
        assert rc == 0
        rep = json.loads(out.read_text())
        assert len(rep["cusps"]) == 6
        assert len(rep["double_points"]) == 3
        assert len(rep["tiles"]) == 4
        assert len(rep["tree"]["edges"]) == 3

    def test_sorted_keys(self, tmp_path):
        out = tmp_path / "suff.json"
        run(["suffridge", "--degree", "5",
             "--coeffs", "0,0;2*sqrt2/5,0;0,0;0,0", "--out", str(out)])
        text = out.read_text()
        assert text.index('"cusps"') < text.index('"double_points"') \
            < text.index('"tiles"') < text.index('"tree"')
