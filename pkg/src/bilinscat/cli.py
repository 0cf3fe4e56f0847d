"""Command line front end: ``bilinscat {scatter,scan,evolve,verify}``.

Exit codes: 0 ok, 1 verify failure, 2 config error, 3 spectral singularity,
4 numerical failure.
"""
from __future__ import annotations

import argparse
import logging
import math
import sys

from . import output
from .config import ConfigError, RunConfig, load_config
from .dynamics import FieldPair, box_grid, delta_mollifier_width, evolve, gaussian_packet
from .errors import BilinscatError, LinearSolveFailure, NonFiniteState, SpectralSingularity
from .linalg import DEFAULT_TOL
from .potential import PhysicalParams
from .scattering import ScanRecord, coefficients, s_from_reduced, scan
from .transfer import assemble_transfer, energy_point, reduce
from .verify import run_suites

EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_SINGULAR, EXIT_NUMERIC = 0, 1, 2, 3, 4

log = logging.getLogger("bilinscat")


def _emit(text: str, cfg: RunConfig | None, args) -> None:
    path = args.output or (cfg.output_path if cfg else None)
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _format(cfg: RunConfig, args) -> str:
    return args.format or cfg.output_format


def cmd_scatter(cfg: RunConfig, E: float, args) -> int:
    if not E > 0:
        raise ConfigError("--energy must be positive")
    n = cfg.n
    tol = cfg.tolerances.get("invert", DEFAULT_TOL)
    e = energy_point(E, cfg.params)
    pair = None
    try:
        pair = s_from_reduced(reduce(assemble_transfer(cfg.potential, e, cfg.params)), tol)
        rec = ScanRecord(e, coefficients(pair), pair.duality_residual,
                         "near-singular" if pair.near_singular else "ok")
        status = EXIT_OK
    except SpectralSingularity as exc:
        rec = ScanRecord(e, None, math.nan, "singular", str(exc))
        log.warning("%s", exc)
        status = EXIT_SINGULAR
    row = output.scatter_row(rec, pair, n)
    if _format(cfg, args) == "json":
        _emit(output.to_json(row), cfg, args)
    else:
        _emit(output.to_csv(output.scatter_columns(n), [row]), cfg, args)
    return status


def cmd_scan(cfg: RunConfig, args) -> int:
    if cfg.energies is None:
        raise ConfigError("scan needs an 'energies' section")
    n = cfg.n
    records = scan(cfg.potential, cfg.params, cfg.energies,
                   cfg.tolerances.get("invert", DEFAULT_TOL), workers=args.workers)
    limit = cfg.tolerances.get("duality")
    if limit is not None:
        for rec in records:
            if rec.flag == "ok" and rec.duality_residual > limit:
                log.warning("E=%s: duality residual %.3e above %.1e",
                            rec.energy.E.real, rec.duality_residual, limit)
    rows = [output.scan_row(rec, n) for rec in records]
    if _format(cfg, args) == "json":
        _emit(output.to_json({"channels": n, "records": rows}), cfg, args)
    else:
        _emit(output.to_csv(output.scan_columns(n), rows), cfg, args)
    return EXIT_OK


def _initial_fields(cfg: RunConfig) -> FieldPair:
    ev = cfg.evolve
    grid = box_grid(ev.length, ev.points)
    fields = [gaussian_packet(grid, pk.center, pk.width, pk.momentum, cfg.n, pk.channel,
                              pk.amplitude) for pk in (ev.right, ev.left)]
    return FieldPair(grid, *fields)


def cmd_evolve(cfg: RunConfig, args) -> int:
    if cfg.evolve is None:
        raise ConfigError("evolve needs an 'evolve' section")
    ev = cfg.evolve
    initial = _initial_fields(cfg)
    traj = evolve(initial, cfg.potential, cfg.params, ev.dt, ev.steps, ev.sector)
    rows = output.evolve_rows(traj)
    drift = max(abs(s.norm - traj[0].norm) for s in traj)
    width = delta_mollifier_width(initial.grid)
    if _format(cfg, args) == "json":
        _emit(output.to_json({"rows": rows, "max_norm_drift": float(output.fmt(drift)),
                              "delta_width": width}), cfg, args)
    else:
        _emit(output.to_csv(output.EVOLVE_COLUMNS, rows,
                            [f"max_norm_drift={output.fmt(drift)}",
                             f"delta_width={output.fmt(width)}"]), cfg, args)
    return EXIT_OK


def cmd_verify(seed: int, params: PhysicalParams, args) -> int:
    results = run_suites(seed, params)
    failed = [r for r in results if not r.passed]
    lines = [r.line() for r in results]
    lines.append(f"verify seed={seed}: {len(results) - len(failed)}/{len(results)} suites passed")
    text = "\n".join(lines) + "\n"
    if args.output:
        _emit(text, None, args)
    elif not args.quiet or failed:
        sys.stdout.write(text)
    return EXIT_VERIFY if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="bilinscat",
                                 description="Conjugation-free non-Hermitian 1D scattering.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--output", help="write results here instead of stdout")
    common.add_argument("--format", choices=["csv", "json"])
    common.add_argument("--quiet", action="store_true", help="suppress diagnostics")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scatter", parents=[common], help="S-matrix pair at one energy")
    p.add_argument("--config", required=True)
    p.add_argument("--energy", type=float, required=True)

    p = sub.add_parser("scan", parents=[common], help="coefficients over an energy grid")
    p.add_argument("--config", required=True)
    p.add_argument("--workers", type=int, default=1)

    p = sub.add_parser("evolve", parents=[common], help="time evolution of the field pair")
    p.add_argument("--config", required=True)

    p = sub.add_parser("verify", parents=[common], help="run seeded invariant suites")
    p.add_argument("--config", help="take units from this config (defaults otherwise)")
    p.add_argument("--seed", type=int, default=0)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.ERROR if args.quiet else logging.WARNING,
                        format="%(name)s: %(message)s", stream=sys.stderr)
    try:
        if args.command == "verify":
            params = load_config(args.config).params if args.config else PhysicalParams()
            return cmd_verify(args.seed, params, args)
        cfg = load_config(args.config)
        if args.command == "scatter":
            return cmd_scatter(cfg, args.energy, args)
        if args.command == "scan":
            return cmd_scan(cfg, args)
        return cmd_evolve(cfg, args)
    except ConfigError as exc:
        log.error("%s", exc)
        return EXIT_CONFIG
    except (LinearSolveFailure, NonFiniteState) as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC
    except SpectralSingularity as exc:
        log.error("%s", exc)
        return EXIT_SINGULAR
    except BilinscatError as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
