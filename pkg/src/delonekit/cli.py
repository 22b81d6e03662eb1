"""Command-line front end.

Subcommands: build, audit, match, analyze, measures, plot, report.
Structured inputs (densities, schedules, ball families) come from JSON
config files; flags only select files and modes.  Every run writes a
manifest echoing its exact configuration, outputs are deterministic
functions of (config, seed), and exit codes are 0 = success,
1 = audit/invariant violations found, 2 = bad input.
"""

from __future__ import annotations

import argparse
import csv
import os
import sys
from fractions import Fraction
from pathlib import Path

from . import __version__
from .construction import DeloneSet, audit, build
from .density import parse_rational
from .distortion import (BijectionTable, co_uniformity, counting_lower_bound,
                         escape_check, lipschitz_constants, order_gate,
                         regularity_constant)
from .errors import DeloneKitError, FormatError, ScheduleError
from .formats import (build_config_from_json, dump_json, load_json,
                      rational_str, read_map, read_points, write_points)
from .geometry import Box, PointSet
from .matching import MatchInstance, brute_force_min, min_lipschitz
from .measures import (cells_family, discrepancy, dyadic_family,
                       grid_measure, mass_loss, measure, normalize_patch,
                       patch_measure)
from .reporting import (save_discrepancy_figure, save_pointset_figure,
                        write_measures_csv)
from .svgplot import points_svg, series_svg


def _threads() -> int:
    try:
        return max(1, int(os.environ.get("DELONE_THREADS", "1")))
    except ValueError:
        return 1


def _manifest(command: str, args, config_echo) -> dict:
    return {
        "command": command,
        "config": config_echo,
        "seed": getattr(args, "seed", 0),
        "format": getattr(args, "format", "json"),
        "inputs": sorted(str(v) for v in vars(args).values()
                         if isinstance(v, str) and Path(v).suffix
                         and Path(v).exists()),
        "threads": _threads(),
        "version": __version__,
    }


def _write_manifest(out_path: Path, command: str, args, config_echo) -> None:
    dump_json(_manifest(command, args, config_echo), out_path)


def _rat_pair(v) -> tuple[Fraction, Fraction]:
    return (parse_rational(v[0]), parse_rational(v[1]))


# ---------------------------------------------------------------------------
# build / audit


def cmd_build(args) -> int:
    config = load_json(args.config)
    rho, schedule, window = build_config_from_json(config)
    d = build(rho, schedule, window, policy=args.policy, seed=args.seed)
    out = Path(args.out)
    write_points(d.points, out)
    report = audit(d)
    dump_json(report.to_json(), out.with_suffix(out.suffix + ".audit.json"))
    _write_manifest(out.with_suffix(out.suffix + ".manifest.json"),
                    "build", args, config)
    if not report.clean:
        print(f"audit: {len(report.violations)} violation(s)", file=sys.stderr)
        return 1
    print(f"built {len(d.points)} points -> {out}")
    return 0


def cmd_audit(args) -> int:
    config = load_json(args.config)
    rho, schedule, window = build_config_from_json(config)
    reference = build(rho, schedule, window, policy=args.policy, seed=args.seed)
    loaded = read_points(args.points)
    if loaded.denom != 1:
        raise FormatError("audited point set must be an integer lattice subset")
    d = DeloneSet(reference.schedule, reference.density, reference.window,
                  loaded, reference.fills, reference.policy, reference.seed)
    report = audit(d)
    violations = list(report.violations)
    ref_set = set(reference.points.numerators())
    got_set = set(loaded.numerators())
    for p in sorted(ref_set - got_set):
        violations.append({"category": "missing_vs_rebuild", "point": list(p)})
    for p in sorted(got_set - ref_set):
        violations.append({"category": "extra_vs_rebuild", "point": list(p)})
    payload = {"violations": violations, "stats": report.stats}
    if args.out:
        dump_json(payload, args.out)
        _write_manifest(Path(args.out).with_suffix(".manifest.json"),
                        "audit", args, config)
    else:
        import json
        payload["manifest"] = _manifest("audit", args, config)
        print(json.dumps(payload, indent=2, sort_keys=True))
    if violations:
        print(f"audit: {len(violations)} violation(s)", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# match


def _match_result_json(res, oracle=None) -> dict:
    out = {
        "assignment": [[s[0], s[1], t[0], t[1]]
                       for s, t in sorted(res.assignment.fwd.items())],
        "L_star": rational_str(res.L_star),
        "b_star": None if res.b_star is None else rational_str(res.b_star),
        "objective": rational_str(res.objective),
        "optimal": res.optimal,
        "stats": {"nodes": res.stats.nodes,
                  "seconds": round(res.stats.seconds, 6)},
    }
    if oracle is not None:
        out["oracle_objective"] = rational_str(oracle.objective)
        out["oracle_agrees"] = oracle.objective == res.objective
    return out


def _instance_from_json(obj) -> MatchInstance:
    for key in ("source", "target"):
        if key not in obj:
            raise FormatError(f"match instance missing {key!r}")
    src = PointSet([(int(p[0]), int(p[1])) for p in obj["source"]],
                   int(obj.get("denom_source", 1)))
    tgt = PointSet([(int(p[0]), int(p[1])) for p in obj["target"]],
                   int(obj.get("denom_target", 1)))
    return MatchInstance(src, tgt, mode=obj.get("mode", "lipschitz"),
                         injection=bool(obj.get("injection", False)))


def cmd_match(args) -> int:
    if args.config:
        inst = _instance_from_json(load_json(args.config))
    else:
        if not (args.source and args.target):
            raise FormatError("match needs --config or --source/--target")
        inst = MatchInstance(read_points(args.source), read_points(args.target),
                             mode=args.mode, injection=args.injection)
    source, target = inst.source, inst.target
    if args.method == "brute":
        res = brute_force_min(inst)
    else:
        res = min_lipschitz(inst, method=args.method, seed=args.seed,
                            iters=args.iters)
    oracle = brute_force_min(inst) if args.oracle and args.method != "brute" else None
    payload = _match_result_json(res, oracle)
    t = Fraction(1, target.denom)
    payload["counting_lower_bound"] = rational_str(
        counting_lower_bound(source, t, [Fraction(1), Fraction(2)]))
    if args.out:
        dump_json(payload, args.out)
        _write_manifest(Path(args.out).with_suffix(".manifest.json"),
                        "match", args, {"mode": inst.mode, "method": args.method})
    else:
        import json
        payload["manifest"] = _manifest("match", args,
                                        {"mode": inst.mode, "method": args.method})
        print(json.dumps(payload, indent=2, sort_keys=True))
    if oracle is not None and not payload["oracle_agrees"]:
        print("oracle mismatch", file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# analyze


def _default_balls(f: BijectionTable, radii) -> list:
    """Closed balls centred at target points nearest the target centroid."""
    tgts = f.target_numerators()
    cx = Fraction(sum(t[0] for t in tgts), len(tgts))
    cy = Fraction(sum(t[1] for t in tgts), len(tgts))
    ranked = sorted(tgts, key=lambda t: (max(abs(t[0] - cx), abs(t[1] - cy)), t))
    centers = ranked[:3]
    return [((Fraction(c[0], f.tgt_denom), Fraction(c[1], f.tgt_denom)), Fraction(r))
            for c in centers for r in radii]


def cmd_analyze(args) -> int:
    f = read_map(args.map)
    config = load_json(args.config) if args.config else {}
    stats = [s.strip() for s in args.stats.split(",") if s.strip()]
    radii = [parse_rational(r) for r in config.get("radii", ["1", "2", "4", "8"])]
    payload: dict = {}
    if "lipschitz" in stats:
        rep = lipschitz_constants(f, pruned=args.pruned)
        payload["lipschitz"] = {
            "L": rational_str(rep.L),
            "b": rational_str(rep.b),
            "witness_upper": [[str(c) for c in p] for p in rep.witness_upper],
            "witness_lower": [[str(c) for c in p] for p in rep.witness_lower],
        }
    if "couniformity" in stats:
        mod = co_uniformity(f, radii)
        gate = order_gate(mod, 2)
        payload["couniformity"] = {
            "samples": [[rational_str(r), rational_str(w)] for r, w in mod.samples],
            "fitted_exponent": round(mod.fitted_exponent, 6),
            "order_gate_d2": "pass" if gate else "fail",
        }
    if "regularity" in stats:
        if "balls" in config:
            balls = [(_rat_pair(b["center"]), parse_rational(b["radius"]))
                     for b in config["balls"]]
        else:
            balls = _default_balls(f, [Fraction(1), Fraction(2), Fraction(4)])
        est = regularity_constant(f, balls, search_cap=config.get("search_cap", 16))
        payload["regularity"] = {
            "C_hat": est.constant,
            "approximate": est.approximate,
            "balls": len(balls),
        }
    if args.escape:
        spec = load_json(args.escape)
        diag = escape_check(f, _rat_pair(spec["center"]),
                            [parse_rational(r) for r in spec["radii"]],
                            parse_rational(spec["L"]))
        payload["escape"] = {
            "step": rational_str(diag.step),
            "levels": [
                {"index": lv.index, "radius": rational_str(lv.radius),
                 "skipped": lv.skipped,
                 "boundary_distance": None if lv.boundary_distance is None
                 else rational_str(lv.boundary_distance),
                 "within_step": lv.within_step,
                 "annulus_ok": lv.annulus_ok}
                for lv in diag.levels],
            "boundary_violations": len(diag.boundary_violations),
            "annulus_violations": len(diag.annulus_violations),
        }
    if args.out:
        dump_json(payload, args.out)
        _write_manifest(Path(args.out).with_suffix(".manifest.json"),
                        "analyze", args, config)
    else:
        import json
        payload["manifest"] = _manifest("analyze", args, config)
        print(json.dumps(payload, indent=2, sort_keys=True))
    return 0


# ---------------------------------------------------------------------------
# measures / report


def _family_for(d: DeloneSet, level_index: int, name: str):
    if name == "cells":
        return cells_family(d, level_index)
    if name.startswith("dyadic:"):
        try:
            depth = int(name.split(":", 1)[1])
        except ValueError:
            raise FormatError(f"bad family spec {name!r}")
        return dyadic_family(depth)
    raise FormatError(f"unknown family {name!r}; use 'cells' or 'dyadic:<depth>'")


def _measure_rows_and_summary(config, args):
    rho, schedule, window = build_config_from_json(config["build"])
    d = build(rho, schedule, window, seed=args.seed)
    level_sel = config.get("level", "all")
    levels = (range(len(schedule.levels)) if level_sel == "all"
              else [int(level_sel)])
    family_name = config.get("family", "cells")
    rows = []
    summary: dict = {"levels": [], "note": ("mass loss uses an explicit query "
                                            "ball in place of a limit image")}
    patches = {}
    for li in levels:
        patch = normalize_patch(d, li)
        patches[li] = patch
        mu = patch_measure(patch)
        nu = grid_measure(patch.side)
        fam = _family_for(d, li, family_name)
        res = discrepancy(mu, rho, fam)
        for row in res.rows:
            rows.append({
                "level": patch.side,
                "rect_id": row.rect_id,
                "mu": rational_str(row.mu),
                "nu": rational_str(measure(nu, row.rect)),
                "integral": f"{row.integral:.12f}",
                "abs_error": f"{row.abs_error:.12e}",
            })
        level_summary = {
            "level_index": li,
            "side": patch.side,
            "family": family_name,
            "sup_discrepancy": res.sup_value,
            "argmax_rect": res.argmax_id,
            "patch_points": len(patch.points),
        }
        if "mass_loss" in config:
            spec = config["mass_loss"]
            q = Box(_rat_pair(spec["center"]), parse_rational(spec["radius"]))
            fmap = (read_map(config["map"]) if "map" in config
                    else patch.identity_table())
            rep = mass_loss(fmap, q, patch.side)
            level_summary["mass_loss"] = {
                "missing": len(rep.missing),
                "normalized_mass": rational_str(rep.normalized_mass),
                "band_width": rational_str(rep.band_width),
            }
        summary["levels"].append(level_summary)
    sups = [lv["sup_discrepancy"] for lv in summary["levels"]]
    summary["sup_discrepancy_nonincreasing"] = all(
        b <= a for a, b in zip(sups, sups[1:]))
    return d, patches, rows, summary


def cmd_measures(args) -> int:
    config = load_json(args.config)
    if "build" not in config:
        raise FormatError("measures config needs a 'build' section")
    _, _, rows, summary = _measure_rows_and_summary(config, args)
    out = Path(args.out)
    write_measures_csv(rows, out.with_suffix(".csv"))
    dump_json(summary, out.with_suffix(".json"))
    _write_manifest(out.with_suffix(".manifest.json"), "measures", args, config)
    if args.format == "csv":
        with open(out.with_suffix(".csv"), encoding="utf-8") as fh:
            sys.stdout.write(fh.read())
    else:
        import json
        print(json.dumps(summary, indent=2, sort_keys=True))
    return 0


def cmd_report(args) -> int:
    config = load_json(args.config)
    if "build" not in config:
        raise FormatError("report config needs a 'build' section")
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    d, patches, rows, summary = _measure_rows_and_summary(config, args)
    write_measures_csv(rows, outdir / "measures.csv")
    figures = []
    for li, patch in sorted(patches.items()):
        fig = save_pointset_figure(patch.points, outdir / f"patch_l{patch.side}.png",
                                   title=f"normalized patch, side {patch.side}")
        figures.append(fig.name)
    sides = [lv["side"] for lv in summary["levels"]]
    sups = [lv["sup_discrepancy"] for lv in summary["levels"]]
    if len(sides) >= 1:
        fig = save_discrepancy_figure(
            sides, {summary["levels"][0]["family"]: sups},
            outdir / "discrepancy.png")
        figures.append(fig.name)
    summary["figures"] = sorted(figures)
    dump_json(summary, outdir / "summary.json")
    _write_manifest(outdir / "manifest.json", "report", args, config)
    print(f"report written to {outdir}")
    return 0


# ---------------------------------------------------------------------------
# plot


def cmd_plot(args) -> int:
    src = Path(getattr(args, "in"))
    if src.suffix == ".csv":
        with open(src, newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None or len(header) < 2:
                raise FormatError("CSV needs a header and at least two columns")
            data = []
            for line in reader:
                try:
                    data.append([float(v) for v in line])
                except ValueError:
                    raise FormatError(f"non-numeric CSV row {line!r}")
        series = [(header[i], [(row[0], row[i]) for row in data])
                  for i in range(1, len(header))]
        svg = series_svg(series)
    else:
        ps = read_points(src)
        svg = points_svg(ps)
    Path(args.out).write_bytes(svg.encode("utf-8"))
    _write_manifest(Path(args.out).with_suffix(".manifest.json"), "plot", args,
                    {"input": str(src)})
    return 0


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="delonekit",
                                description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, out_required=True):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--format", choices=["json", "csv"], default="json")
        sp.add_argument("--out", required=out_required)

    b = sub.add_parser("build", help="build a point set from a config")
    b.add_argument("--config", required=True)
    b.add_argument("--policy", choices=["row_major", "seeded"], default="row_major")
    common(b)
    b.set_defaults(func=cmd_build)

    a = sub.add_parser("audit", help="audit a point-set file against a config")
    a.add_argument("--config", required=True)
    a.add_argument("--points", required=True)
    a.add_argument("--policy", choices=["row_major", "seeded"], default="row_major")
    common(a, out_required=False)
    a.set_defaults(func=cmd_audit)

    m = sub.add_parser("match", help="minimal-Lipschitz assignment")
    m.add_argument("--source")
    m.add_argument("--target")
    m.add_argument("--config", default=None,
                   help="instance JSON with inline source/target point lists")
    m.add_argument("--mode", choices=["lipschitz", "bilipschitz"],
                   default="lipschitz")
    m.add_argument("--injection", action="store_true")
    m.add_argument("--method", choices=["exact", "heuristic", "brute"],
                   default="exact")
    m.add_argument("--iters", type=int, default=200)
    m.add_argument("--oracle", action="store_true",
                   help="cross-check against brute force")
    common(m, out_required=False)
    m.set_defaults(func=cmd_match)

    an = sub.add_parser("analyze", help="distortion statistics of a map file")
    an.add_argument("--map", required=True)
    an.add_argument("--stats", default="lipschitz,regularity,couniformity")
    an.add_argument("--config", default=None,
                    help="JSON with radii / balls / search_cap")
    an.add_argument("--escape", default=None,
                    help="JSON with center / radii / L for the escape check")
    an.add_argument("--pruned", action="store_true")
    common(an, out_required=False)
    an.set_defaults(func=cmd_analyze)

    me = sub.add_parser("measures", help="counting-measure diagnostics")
    me.add_argument("--config", required=True)
    common(me)
    me.set_defaults(func=cmd_measures)

    pl = sub.add_parser("plot", help="deterministic SVG of points or CSV series")
    pl.add_argument("--in", dest="in", required=True)
    common(pl)
    pl.set_defaults(func=cmd_plot)

    rp = sub.add_parser("report", help="measures plus rendered figures")
    rp.add_argument("--config", required=True)
    rp.add_argument("--outdir", required=True)
    rp.add_argument("--seed", type=int, default=0)
    rp.add_argument("--format", choices=["json", "csv"], default="json")
    rp.set_defaults(func=cmd_report)

    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ScheduleError as exc:
        for v in exc.violations:
            print(f"error: schedule: {v}", file=sys.stderr)
        return 2
    except DeloneKitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # malformed inputs must not crash the CLI
        print(f"error: unexpected {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
