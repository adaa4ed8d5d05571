"""Command-line front end.

Subcommands: render, limit-set, conjugacy, distortion, ba-extend,
verify-constants, suffridge.  Exit codes: 0 success, 1 validation error,
2 numeric failure, 64 usage error.  Outputs are deterministic: CSV uses
RFC-4180 with LF endings and '.' decimals, PPM is binary P6, JSON reports
use UTF-8 with sorted keys.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
from typing import List, Optional, Sequence

import numpy as np

from . import circle_maps, conjugacy, holo_dynamics, qc_extension
from . import reflection_groups, schwarz, suffridge
from .errors import (ClassificationUnstable, ConfdynError, IllConditioned,
                     RefinementBudgetExceeded, UsageError)
from .markov import build_markov
from .raster import write_ppm

_SQRT_RE = re.compile(
    r"^([+-]?)(?:([0-9.]+)\*)?sqrt([235])(?:/([0-9.]+))?$")


def parse_real(s: str) -> float:
    """Decimal string, or a radical token like 'sqrt2', '-2*sqrt3/5'."""
    s = s.strip()
    m = _SQRT_RE.match(s)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(4)) if m.group(4) else 1.0
        return sign * num * np.sqrt(float(m.group(3))) / den
    try:
        return float(s)
    except ValueError as exc:
        raise UsageError(f"cannot parse number {s!r}") from exc


def parse_complex_list(s: str) -> List[complex]:
    """Semicolon-separated 're,im' pairs with radical tokens allowed."""
    out = []
    for item in s.split(";"):
        parts = item.split(",")
        if len(parts) != 2:
            raise UsageError(f"expected 're,im', got {item!r}")
        out.append(complex(parse_real(parts[0]), parse_real(parts[1])))
    return out


def _parse_viewport(s: str):
    parts = s.split(",")
    if len(parts) != 4:
        raise UsageError("viewport must be xmin,xmax,ymin,ymax")
    vp = tuple(parse_real(p) for p in parts)
    if vp[0] >= vp[1] or vp[2] >= vp[3]:
        raise UsageError("viewport bounds must increase")
    return vp


def _parse_size(s: str):
    m = re.match(r"^(\d+)x(\d+)$", s)
    if not m:
        raise UsageError("size must be WIDTHxHEIGHT, e.g. 256x256")
    return int(m.group(1)), int(m.group(2))


def _write_csv(path: str, header: Sequence[str],
               rows: Sequence[Sequence[object]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v
                             for v in row])


def _write_json(path: Optional[str], payload: dict) -> None:
    text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _conjugacy_from_config(path: str) -> conjugacy.ConjugacyMap:
    with open(path, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    maps = {}
    parts = {}
    for role in ("source", "target"):
        if role not in cfg:
            raise UsageError(f"config missing {role!r} entry")
        entry = cfg[role]
        m = circle_maps.from_config(entry["map"])
        breaks = entry.get("breaks")
        if breaks is None:
            breaks = m.natural_breaks()
        maps[role] = m
        parts[role] = build_markov(m, np.asarray(breaks, dtype=float))
    return conjugacy.build_conjugacy(maps["source"], parts["source"],
                                     maps["target"], parts["target"])


def _cmd_render(args) -> int:
    R = holo_dynamics.catalog(args.map)
    attractors = holo_dynamics.default_attractors(R)
    raster = holo_dynamics.render_julia(
        R, args.viewport, args.size[0], args.size[1], attractors,
        budget=args.max_iter)
    write_ppm(raster, args.out)
    return 0


def _cmd_limit_set(args) -> int:
    packing = reflection_groups.ideal_polygon_packing(args.ngon)
    raster = reflection_groups.render_limit(
        packing, args.viewport, args.size[0], args.size[1],
        max_steps=args.budget)
    write_ppm(raster, args.out)
    return 0


def _cmd_conjugacy(args) -> int:
    h = _conjugacy_from_config(args.config)
    t = (np.arange(args.samples) + 0.5) / args.samples
    vals = h.eval_many(t, tol=args.tol)
    _write_csv(args.out, ["t", "h"],
               [(float(a), float(b)) for a, b in zip(t, vals)])
    return 0


def _cmd_distortion(args) -> int:
    h = _conjugacy_from_config(args.config)
    prof = conjugacy.distortion_profile(h, args.k_min, args.k_max,
                                        sample_count=args.samples)
    rows = [(int(k), float(s), float(v))
            for k, s, v in zip(prof.ks, prof.scales, prof.values)]
    _write_csv(args.out, ["k", "scale", "rho"], rows)
    return 0


def _cmd_ba_extend(args) -> int:
    h = _conjugacy_from_config(args.config)
    H = qc_extension.lift_to_line(h)
    n = args.grid
    xs = (np.arange(n) + 0.5) / n
    ys = (np.arange(n) + 0.5) / n
    rows = []
    for y in ys:
        w = qc_extension.ba_extend(H, xs, np.full_like(xs, y))
        for x, val in zip(xs, np.atleast_1d(w)):
            rows.append((float(x), float(y),
                         float(val.real), float(val.imag)))
    _write_csv(args.out, ["x", "y", "re", "im"], rows)
    return 0


def verify_constants() -> List[dict]:
    """Six closed-form constants recomputed from scratch."""
    rows = []
    alpha = schwarz.solve_alpha()
    alpha_exact = 0.5 * ((1.0 + np.sqrt(5.0)) - np.sqrt(2.0 + 2.0 * np.sqrt(5.0)))
    rows.append({"name": "alpha", "expected": alpha_exact,
                 "computed": alpha, "tolerance": 1e-10})
    fit = schwarz.parabolic_fit()
    rows.append({"name": "cauliflower_r_at_1", "expected": -4.0 / 3.0,
                 "computed": fit["r_at_1"], "tolerance": 1e-12})
    rows.append({"name": "cusp_epsilon5_coefficient", "expected": 5.0 / 36.0,
                 "computed": fit["epsilon5_coefficient"],
                 "tolerance": 0.01 * 5.0 / 36.0})
    rows.append({"name": "cusp_exponent", "expected": 2.5,
                 "computed": fit["cusp_exponent"], "tolerance": 0.05})
    f2 = holo_dynamics.RationalMap(
        num=(1.0 / 3.0, 2.0 * np.sqrt(2.0) / 3.0, 1.0, 0.0), den=(1.0,))
    rows.append({"name": "cubic_f2_at_1",
                 "expected": 4.0 / 3.0 + 2.0 * np.sqrt(2.0) / 3.0,
                 "computed": complex(
                     holo_dynamics.eval_map(f2, 1.0 + 0.0j)).real,
                 "tolerance": 1e-12})
    welding = holo_dynamics.catalog("welding")
    fps = holo_dynamics.fixed_points(welding)
    p, lam = min(fps, key=lambda pl: abs(pl[0] - (-1.0)))
    rows.append({"name": "welding_multiplier_at_minus_1", "expected": 9.0,
                 "computed": complex(lam).real, "tolerance": 1e-9})
    for row in rows:
        row["abs_error"] = abs(row["computed"] - row["expected"])
    return rows


def _cmd_verify_constants(args) -> int:
    rows = verify_constants()
    out_rows = [(r["name"], float(r["expected"]), float(r["computed"]),
                 float(r["abs_error"])) for r in rows]
    if args.out:
        _write_csv(args.out, ["name", "expected", "computed", "abs_error"],
                   out_rows)
    else:
        for name, exp, comp, err in out_rows:
            sys.stdout.write(f"{name},{exp!r},{comp!r},{err!r}\n")
    ok = all(r["abs_error"] <= r["tolerance"] for r in rows)
    return 0 if ok else 2


def _cmd_suffridge(args) -> int:
    coeffs = parse_complex_list(args.coeffs) if args.coeffs else []
    f = suffridge.make_sigma_star(args.degree, coeffs)
    cusps = suffridge.curve_cusps(f)
    dps = suffridge.curve_double_points(f)
    report = {
        "cusps": [{"t": t, "re": w.real, "im": w.imag} for t, w in cusps],
        "double_points": [{"t1": dp.t1, "t2": dp.t2,
                           "re": dp.point.real, "im": dp.point.imag,
                           "residual": dp.residual} for dp in dps],
    }
    try:
        tiles = suffridge.fundamental_tiles(f, dps)
        tree = suffridge.bi_angled_tree(f, dps)
        report["tiles"] = [
            {"index": t.index,
             "cusp_params": list(t.cusp_params),
             "chords": list(t.chords)} for t in tiles]
        report["tree"] = {
            "edges": [list(e) for e in tree.edges],
            "angles": [{"vertex": v, "from": a, "to": b, "thirds": k}
                       for (v, a, b), k in sorted(tree.angles.items())],
        }
    except ConfdynError as exc:
        report["tiles"] = None
        report["tree"] = None
        report["note"] = str(exc)
    _write_json(args.out, report)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="confdyn")
    sub = p.add_subparsers(dest="subcommand")

    r = sub.add_parser("render", help="escape-time raster of a catalog map")
    r.add_argument("--map", required=True)
    r.add_argument("--viewport", type=_parse_viewport,
                   default=(-2.0, 2.0, -2.0, 2.0))
    r.add_argument("--size", type=_parse_size, default=(256, 256))
    r.add_argument("--max-iter", type=int, default=200)
    r.add_argument("--out", required=True)
    r.set_defaults(func=_cmd_render)

    ls = sub.add_parser("limit-set",
                        help="limit-set raster of an ideal polygon group")
    ls.add_argument("--ngon", type=int, required=True)
    ls.add_argument("--viewport", type=_parse_viewport,
                    default=(-1.5, 1.5, -1.5, 1.5))
    ls.add_argument("--size", type=_parse_size, default=(256, 256))
    ls.add_argument("--budget", type=int, default=200)
    ls.add_argument("--out", required=True)
    ls.set_defaults(func=_cmd_limit_set)

    cj = sub.add_parser("conjugacy",
                        help="tabulate a circle-map conjugacy as CSV")
    cj.add_argument("--config", required=True)
    cj.add_argument("--samples", type=int, default=256)
    cj.add_argument("--tol", type=float, default=1e-9)
    cj.add_argument("--out", required=True)
    cj.set_defaults(func=_cmd_conjugacy)

    ds = sub.add_parser("distortion",
                        help="scalewise distortion table of a conjugacy")
    ds.add_argument("--config", required=True)
    ds.add_argument("--k-min", type=int, default=4)
    ds.add_argument("--k-max", type=int, default=10)
    ds.add_argument("--samples", type=int, default=4096)
    ds.add_argument("--out", required=True)
    ds.set_defaults(func=_cmd_distortion)

    ba = sub.add_parser("ba-extend",
                        help="half-plane extension values on a grid")
    ba.add_argument("--config", required=True)
    ba.add_argument("--grid", type=int, default=32)
    ba.add_argument("--out", required=True)
    ba.set_defaults(func=_cmd_ba_extend)

    vc = sub.add_parser("verify-constants",
                        help="recompute six closed-form constants")
    vc.add_argument("--out", default=None)
    vc.set_defaults(func=_cmd_verify_constants)

    sfp = sub.add_parser("suffridge",
                         help="cusp/double-point/tile/tree report")
    sfp.add_argument("--degree", type=int, required=True)
    sfp.add_argument("--coeffs", default="")
    sfp.add_argument("--out", default=None)
    sfp.set_defaults(func=_cmd_suffridge)
    return p


_VALUE_FLAGS = ("--viewport", "--coeffs")


def _merge_negative_values(argv: Sequence[str]) -> List[str]:
    """Join '--viewport -2,2,-2,2' into '--viewport=-2,2,-2,2' so argparse
    does not mistake the value for an option."""
    out: List[str] = []
    skip = False
    for i, tok in enumerate(argv):
        if skip:
            skip = False
            continue
        if tok in _VALUE_FLAGS and i + 1 < len(argv) \
                and argv[i + 1].startswith("-"):
            out.append(f"{tok}={argv[i + 1]}")
            skip = True
        else:
            out.append(tok)
    return out


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = _build_parser()
    if argv is None:
        argv = sys.argv[1:]
    try:
        args = parser.parse_args(_merge_negative_values(argv))
    except SystemExit as exc:
        return 64 if exc.code not in (0, None) else 0
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 64
    if not getattr(args, "func", None):
        sys.stderr.write(parser.format_usage())
        return 64
    try:
        return args.func(args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return 64
    except (RefinementBudgetExceeded, ClassificationUnstable,
            IllConditioned) as exc:
        sys.stderr.write(f"numeric failure: {exc}\n")
        return 2
    except (ConfdynError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


def main() -> None:
    sys.exit(run())
