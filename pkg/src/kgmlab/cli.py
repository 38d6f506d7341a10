"""Command-line harness: a thin client over the experiment runners.

Configuration is a single INI file (configparser syntax, decimal numerics)
whose sections mirror the request models.  Results are written as JSON
reports and CSV tables with floats at 17 significant digits, so identical
configs reproduce byte-identical outputs.  By default requests run
in-process; --server URL sends them to a running service instead.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 hypothesis
refusal.
"""

from __future__ import annotations

import argparse
import configparser
import csv
import json
import sys
from pathlib import Path

from pydantic import ValidationError

from . import experiments
from .errors import ConfigError, HypothesisRefusedError, KgmError
from .service import schemas

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_REFUSED = 4

# column layouts of every emitted table; csv_schema.json mirrors this
CSV_COLUMNS = {
    "solve_samples": ["r", "u", "v"],
    "sweep": ["n", "p", "m0", "m1", "q", "omega", "status", "level_c",
              "max_u", "min_u", "residual1", "residual2", "newton_iters",
              "message"],
    "phase_ratio": ["n", "q", "m1", "grid_n", "mu", "ratio", "note"],
    "aubin_scan": ["n", "lam", "rho0", "grid_n", "grading", "eps",
                   "quotient", "threshold", "below_threshold"],
    "pohozaev": ["n", "q", "m1", "grid_n", "grading", "r0", "mu", "beta",
                 "lhs_mass", "lhs_curv", "R_tilde", "Q1", "Q2", "Q3",
                 "balance_residual", "mass_ratio"],
    "truncation": ["n", "q", "m1", "grid_n", "mu", "cutoff", "h1_delta"],
}


def fmt(value) -> str:
    """Deterministic cell serialization; floats at 17 significant digits."""
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "%.17g" % value
    return str(value)


def write_csv(path: Path, name: str, rows) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS[name])
        for row in rows:
            writer.writerow([fmt(row[k]) for k in CSV_COLUMNS[name]])


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(payload, fh, sort_keys=True, indent=2)
        fh.write("\n")


def load_config(path: str) -> configparser.ConfigParser:
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    found = parser.read(path)
    if not found:
        raise ConfigError(f"config file not found: {path}")
    return parser


def _floats(s: str) -> list[float]:
    return [float(tok) for tok in s.replace(",", " ").split()]


def _ints(s: str) -> list[int]:
    return [int(tok) for tok in s.replace(",", " ").split()]


def _section(cfg: configparser.ConfigParser, name: str) -> dict:
    return dict(cfg[name]) if cfg.has_section(name) else {}


def _grid_spec(cfg, args) -> dict:
    grid = _section(cfg, "grid")
    if args.grid_n is not None:
        grid["n_cells"] = str(args.grid_n)
    if args.grading is not None:
        grid["grading"] = str(args.grading)
    return grid


def build_request(command: str, cfg: configparser.ConfigParser, args):
    try:
        if command == "solve":
            return schemas.SolveRequest(
                physics=_section(cfg, "physics"),
                geometry=_section(cfg, "geometry"),
                grid=_grid_spec(cfg, args),
                mountainpass=_section(cfg, "mountainpass"),
                **_section(cfg, "solve"))
        if command == "sweep":
            return schemas.SweepRequest(
                physics=_section(cfg, "physics"),
                geometry=_section(cfg, "geometry"),
                grid=_grid_spec(cfg, args),
                mountainpass=_section(cfg, "mountainpass"),
                **{k: v for sec in ("solve", "sweep")
                   for k, v in _section(cfg, sec).items()})
        if command == "phase-ratio":
            sec = _section(cfg, "phase_ratio")
            if "dims" in sec:
                sec["dims"] = _ints(sec["dims"])
            if "mus" in sec:
                sec["mus"] = _floats(sec["mus"])
            if args.grid_n is not None:
                sec["grid_n"] = args.grid_n
            return schemas.PhaseRatioRequest(**sec)
        if command == "aubin-scan":
            sec = _section(cfg, "aubin")
            if "eps" in sec:
                sec["eps"] = _floats(sec["eps"])
            if args.grid_n is not None:
                sec["grid_n"] = args.grid_n
            if args.grading is not None:
                sec["grading"] = args.grading
            return schemas.AubinScanRequest(**sec)
        if command == "pohozaev":
            sec = _section(cfg, "pohozaev")
            if "mus" in sec:
                sec["mus"] = _floats(sec["mus"])
            if args.grid_n is not None:
                sec["grid_n"] = args.grid_n
            if args.grading is not None:
                sec["grading"] = args.grading
            return schemas.PohozaevRequest(**sec)
        if command == "gauge-check":
            sec = _section(cfg, "gauge_check")
            if "lambdas" in sec:
                sec["lambdas"] = _floats(sec["lambdas"])
            if args.grid_n is not None:
                sec["grid_n"] = args.grid_n
            return schemas.GaugeCheckRequest(**sec)
    except (ValidationError, ValueError, KeyError) as exc:
        raise ConfigError(f"invalid configuration: {exc}") from exc
    raise ConfigError(f"unknown command {command}")


_ENDPOINTS = {
    "solve": ("/solve", schemas.SolveResponse),
    "sweep": ("/sweep", schemas.SweepResponse),
    "phase-ratio": ("/phase-ratio", schemas.PhaseRatioResponse),
    "aubin-scan": ("/aubin-scan", schemas.AubinScanResponse),
    "pohozaev": ("/pohozaev", schemas.PohozaevResponse),
    "gauge-check": ("/gauge-check", schemas.GaugeCheckResponse),
}

_RUNNERS = {
    "solve": experiments.run_solve,
    "sweep": experiments.run_sweep,
    "phase-ratio": experiments.run_phase_ratio,
    "aubin-scan": experiments.run_aubin_scan,
    "pohozaev": experiments.run_pohozaev,
    "gauge-check": experiments.run_gauge_check,
}


def dispatch(command: str, request, server: str | None):
    if server is None:
        return _RUNNERS[command](request)
    import httpx
    path, response_model = _ENDPOINTS[command]
    reply = httpx.post(server.rstrip("/") + path,
                       json=request.model_dump(), timeout=None)
    if reply.status_code == 422:
        detail = reply.json().get("detail", "")
        if isinstance(detail, str) and detail.startswith("refused"):
            raise HypothesisRefusedError(detail)
        raise ConfigError(f"server rejected request: {detail}")
    reply.raise_for_status()
    return response_model.model_validate(reply.json())


def write_outputs(command: str, request, response, out: Path) -> int:
    out.mkdir(parents=True, exist_ok=True)
    if command == "solve":
        payload = response.model_dump(exclude={"samples"})
        write_json(out / "solve_report.json", payload)
        if response.samples is not None:
            rows = [{"r": r, "u": u, "v": v} for r, u, v in zip(
                response.samples.r, response.samples.u, response.samples.v)]
            write_csv(out / "solve_samples.csv", "solve_samples", rows)
        if response.status == "refused":
            return EXIT_REFUSED
        if response.status != "ok":
            return EXIT_SOLVER
        return EXIT_OK
    if command == "sweep":
        phys = request.physics
        rows = []
        for row in response.rows:
            d = row.model_dump()
            d.update(n=phys.n, p=phys.p, m0=phys.m0, m1=phys.m1, q=phys.q)
            rows.append(d)
        write_csv(out / "sweep.csv", "sweep", rows)
        write_json(out / "sweep_report.json", response.model_dump())
        return EXIT_OK
    if command == "phase-ratio":
        rows = [dict(row.model_dump(), q=request.q, m1=request.m1,
                     grid_n=request.grid_n) for row in response.rows]
        write_csv(out / "phase_ratio.csv", "phase_ratio", rows)
        return EXIT_OK
    if command == "aubin-scan":
        rows = [dict(row.model_dump(), n=request.n, lam=request.lam,
                     rho0=request.rho0, grid_n=request.grid_n,
                     grading=request.grading, threshold=response.threshold)
                for row in response.rows]
        write_csv(out / "aubin_scan.csv", "aubin_scan", rows)
        return EXIT_OK
    if command == "pohozaev":
        rows = [dict(row.model_dump(), n=request.n, q=request.q, m1=request.m1,
                     grid_n=request.grid_n, grading=request.grading)
                for row in response.rows]
        write_csv(out / "pohozaev.csv", "pohozaev", rows)
        write_json(out / "pohozaev_report.json",
                   {"C_n": response.C_n, "n": request.n})
        return EXIT_OK
    if command == "gauge-check":
        rows = [dict(row.model_dump(), n=request.n, q=request.q, m1=request.m1,
                     grid_n=request.grid_n, mu=request.mu)
                for row in response.truncation]
        write_csv(out / "truncation.csv", "truncation", rows)
        write_json(out / "gauge_check.json",
                   response.model_dump(exclude={"truncation"}))
        return EXIT_OK
    raise ConfigError(f"unknown command {command}")


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kgmlab",
        description="Experiments on the electrostatic matter-gauge system")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        p = sub.add_parser(name)
        p.add_argument("--config", required=True, help="INI experiment config")
        p.add_argument("--out", default=".", help="output directory")
        p.add_argument("--grid-n", type=int, default=None,
                       help="override the grid cell count")
        p.add_argument("--grading", type=float, default=None,
                       help="override the grid grading exponent")
        p.add_argument("--quiet", action="store_true")
        p.add_argument("--server", default=None,
                       help="POST to a running service instead of solving in-process")
    return parser


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        request = build_request(args.command, cfg, args)
        response = dispatch(args.command, request, args.server)
        code = write_outputs(args.command, request, response, Path(args.out))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except HypothesisRefusedError as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return EXIT_REFUSED
    except KgmError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    if not args.quiet:
        status = getattr(response, "status", "ok")
        print(f"{args.command}: {status} (outputs in {args.out})")
    return code


if __name__ == "__main__":
    sys.exit(main())
