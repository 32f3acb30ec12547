"""Command-line front end.

Subcommands: scan, solve, continue, analyze, reproduce. Every output
file embeds the run configuration and the package version so a run can
be reproduced from its own artifacts. Exit codes: 0 success,
2 no-convergence, 3 integrator failure, 4 I/O error, 5 bad config.
"""

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .config import ConfigError, RunConfig, load_config, parse_potential
from .dynamics import ShootingParams, isosceles_state
from .integrate import IntegrationError, integrate_to_collinear
from .shooting import (NewtonDivergence, SolverError, energy_in_published_range,
                       find_seeds, newton_solve, scan_grid,
                       solution_record_from_json, solution_record_json)
from .analysis import (build_full_orbit, collision_report, orbit_from_record,
                       orbit_summary)
from .continuation import (SPECIAL_KINDS, SpecialPointNotFound, continue_family,
                           locate_special)

EXIT_OK = 0
EXIT_NO_CONVERGENCE = 2
EXIT_INTEGRATOR = 3
EXIT_IO = 4
EXIT_CONFIG = 5


def _resolve_config(args) -> RunConfig:
    cfg = load_config(args.config) if args.config else RunConfig()
    overrides = {}
    if getattr(args, "potential", None):
        overrides["potential"] = parse_potential(args.potential)
    if getattr(args, "jobs", None):
        overrides["jobs"] = args.jobs
    if getattr(args, "out", None):
        overrides["out_dir"] = args.out
    return cfg.override(**overrides)


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    return out

def _stamp(cfg: RunConfig) -> dict:
    return {"version": __version__, "config": cfg.to_json_dict()}


def _csv_header(cfg: RunConfig, extra: dict | None = None) -> tuple[str, ...]:
    lines = [f"version: {__version__}",
             f"config: {json.dumps(cfg.to_json_dict())}"]
    if extra:
        lines.append(f"record: {json.dumps(extra)}")
    return tuple(lines)


def cmd_scan(args) -> int:
    cfg = _resolve_config(args)
    n_y0 = args.ny or cfg.scan_n_y0
    n_v = args.nv or cfg.scan_n_v
    y0_range = (args.y0_min or cfg.scan_y0_range[0],
                args.y0_max or cfg.scan_y0_range[1])
    v_range = (args.v_min or cfg.scan_v_range[0],
               args.v_max or cfg.scan_v_range[1])
    grid = scan_grid(args.x0, y0_range, v_range, n_y0, n_v,
                     cfg.potential, cfg.integrator, jobs=cfg.jobs)
    seeds = find_seeds(grid)
    out = _out_dir(cfg)
    tag = f"x0_{args.x0:g}"
    grid.to_csv(out / f"grid_{tag}.csv", header_lines=_csv_header(cfg))
    payload = _stamp(cfg) | grid.to_json_dict()
    with open(out / f"grid_{tag}.json", "w") as fh:
        json.dump(payload, fh)
        fh.write("\n")
    seeds_payload = _stamp(cfg) | {
        "x0": args.x0,
        "seeds": [{"x0": s.x0, "y0": s.y0, "v": s.v} for s in seeds],
    }
    with open(out / f"seeds_{tag}.json", "w") as fh:
        json.dump(seeds_payload, fh, indent=2)
        fh.write("\n")
    n_fail = sum(1 for row in grid.samples for s in row if not s.ok)
    print(f"scan x0={args.x0}: {n_y0}x{n_v} cells, {n_fail} failed, "
          f"{len(seeds)} seed(s) -> {out}/seeds_{tag}.json")
    return EXIT_OK


def cmd_solve(args) -> int:
    cfg = _resolve_config(args)
    seed = ShootingParams(args.x0, args.y0, args.v)
    record = newton_solve(seed, cfg.potential, cfg.integrator,
                          tol=args.tol or cfg.newton_tol,
                          max_iter=cfg.newton_max_iter)
    if args.label:
        record = record.with_label(args.label)
    orbit = orbit_from_record(record, cfg.integrator, n_samples=cfg.orbit_samples)
    if record.potential.r_min is not None:
        record = record.with_n0(collision_report(orbit, record.potential).n0)
    out = _out_dir(cfg)
    tag = f"x0_{record.params.x0:g}_y0_{record.params.y0:.6f}"
    rec_path = out / f"solution_{tag}.json"
    payload = _stamp(cfg) | solution_record_json(record, cfg.integrator)
    with open(rec_path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")
    orbit.to_csv(out / f"orbit_{tag}.csv",
                 header_lines=_csv_header(cfg, solution_record_json(record)))
    print(f"converged: x0={record.params.x0:.9g} y0={record.params.y0:.9g} "
          f"v={record.params.v:.9g}")
    print(f"T={record.T:.6f} E={record.E:.8g} residual={record.residual_norm:.2e} "
          f"n0={record.n0}")
    if (record.potential.kind == "lj" and record.potential.b == 12.0
            and record.potential.a == 6.0
            and not energy_in_published_range(record.E)):
        print("note: energy outside the known solution range "
              "[-0.5078, 0.2955]; flagging, not rejecting")
    print(f"wrote {rec_path}")
    return EXIT_OK


def cmd_continue(args) -> int:
    cfg = _resolve_config(args)
    with open(args.record) as fh:
        record = solution_record_from_json(json.load(fh))
    label = args.label or record.series_label or "series"
    if args.steps == 0:
        series_points = [record.with_label(label)]
        out = _out_dir(cfg)
        path = out / f"series_{label}.csv"
        from .continuation import ContinuationSeries

        series = ContinuationSeries(label=label, points=series_points)
        series.to_csv(path, header_lines=_csv_header(cfg))
        print(f"steps=0: echoed input record to {path}")
        return EXIT_OK
    series = continue_family(
        record, record.potential, cfg.integrator,
        step=args.step or cfg.continuation_step,
        n_steps=args.steps or cfg.continuation_steps,
        direction=args.direction,
        tol=args.tol or cfg.newton_tol,
        x0_limits=(args.x0_min, args.x0_max) if args.x0_min and args.x0_max else None,
        label=label,
    )
    if args.n0:
        from .analysis import collision_count

        pts = [p.with_n0(collision_count(p, cfg.integrator,
                                         n_samples=cfg.orbit_samples))
               for p in series.points]
        series.points = pts
    out = _out_dir(cfg)
    path = out / f"series_{label}.csv"
    series.to_csv(path, header_lines=_csv_header(cfg))
    specials = {}
    for kind in SPECIAL_KINDS:
        try:
            rec = locate_special(series, kind, cfg.integrator)
            specials[kind] = solution_record_json(rec)
        except (SpecialPointNotFound, SolverError, IntegrationError):
            continue
    spath = out / f"series_{label}_special.json"
    with open(spath, "w") as fh:
        json.dump(_stamp(cfg) | {"label": label, "special_points": specials},
                  fh, indent=2)
        fh.write("\n")
    xs = series.x0_values()
    print(f"series {label}: {len(series.points)} points, "
          f"x0 in [{xs.min():.6g}, {xs.max():.6g}], "
          f"{len(series.fold_points)} fold(s), "
          f"{len(specials)} special point(s)")
    if series.truncation_reason:
        print(f"truncated: {series.truncation_reason}")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_analyze(args) -> int:
    cfg = _resolve_config(args)
    path = Path(args.record)
    record = _load_record_any(path)
    cfg = cfg.override(potential=record.potential)
    state0 = isosceles_state(record.params)
    t_f, _, segment = integrate_to_collinear(state0, record.potential, cfg.integrator)
    orbit = build_full_orbit(segment, t_f, n_samples=cfg.orbit_samples,
                             source=record)
    summary = orbit_summary(orbit, record.potential)
    summary["params"] = {"x0": record.params.x0, "y0": record.params.y0,
                         "v": record.params.v}
    summary["residual_norm"] = record.residual_norm
    out = _out_dir(cfg)
    opath = out / f"analysis_{path.stem}.json"
    with open(opath, "w") as fh:
        json.dump(_stamp(cfg) | summary, fh, indent=2)
        fh.write("\n")
    print(json.dumps(summary, indent=2))
    print(f"wrote {opath}")
    return EXIT_OK


def _load_record_any(path: Path):
    """Accept a solution-record JSON or an orbit CSV carrying a record header."""
    if path.suffix == ".csv":
        with open(path) as fh:
            for line in fh:
                if line.startswith("# record:"):
                    return solution_record_from_json(
                        json.loads(line.split(":", 1)[1]))
                if not line.startswith("#"):
                    break
        raise ConfigError(f"{path} carries no embedded solution record")
    with open(path) as fh:
        try:
            return solution_record_from_json(json.load(fh))
        except (json.JSONDecodeError, KeyError) as exc:
            raise ConfigError(f"{path} is not a solution record: {exc}") from exc


def cmd_reproduce(args) -> int:
    from .reproduce import run_criteria

    cfg = _resolve_config(args)
    results = run_criteria(quick=args.quick, jobs=cfg.jobs or 1,
                           out_dir=cfg.out_dir)
    return EXIT_OK if all(r.passed for r in results) else EXIT_NO_CONVERGENCE


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fig8",
        description="Figure-eight choreographies of the equal-mass planar "
                    "three-body problem: shooting solver, family "
                    "continuation, and orbit diagnostics.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--potential", help="lj | lj:b,a | homogeneous:a | "
                       "morse:a,r0 | buckingham | screened_coulomb:a")
        p.add_argument("-o", "--out", help="output directory")
        p.add_argument("--jobs", type=int, help="parallel workers")

    p = sub.add_parser("scan", help="residual grid over a (y0, v) rectangle")
    common(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0-min", type=float)
    p.add_argument("--y0-max", type=float)
    p.add_argument("--v-min", type=float)
    p.add_argument("--v-max", type=float)
    p.add_argument("--ny", type=int)
    p.add_argument("--nv", type=int)
    p.set_defaults(func=cmd_scan)

    p = sub.add_parser("solve", help="converge a seed to a solution")
    common(p)
    p.add_argument("--x0", type=float, required=True)
    p.add_argument("--y0", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--tol", type=float)
    p.add_argument("--label")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("continue", help="trace the family through a solution")
    common(p)
    p.add_argument("record", help="solution record JSON")
    p.add_argument("--direction", type=int, choices=(-1, 1), default=-1)
    p.add_argument("--steps", type=int, default=None,
                   help="series length bound (default from config)")
    p.add_argument("--step", type=float)
    p.add_argument("--tol", type=float)
    p.add_argument("--x0-min", type=float)
    p.add_argument("--x0-max", type=float)
    p.add_argument("--label")
    p.add_argument("--n0", action=argparse.BooleanOptionalAction, default=True,
                   help="annotate collision counts per point")
    p.set_defaults(func=cmd_continue)

    p = sub.add_parser("analyze", help="diagnostics for a solution record or orbit CSV")
    common(p)
    p.add_argument("record")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("reproduce", help="run the published-value checks")
    common(p)
    p.add_argument("--quick", action="store_true",
                   help="fast subset (well under five minutes)")
    p.set_defaults(func=cmd_reproduce)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NewtonDivergence as exc:
        print(f"no convergence: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_NO_CONVERGENCE
    except IntegrationError as exc:
        print(f"integrator failure: {exc}", file=sys.stderr)
        return EXIT_INTEGRATOR
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"bad arguments: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
