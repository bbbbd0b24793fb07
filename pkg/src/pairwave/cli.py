"""Command line entry point.

    pairwave run <config.json> [--no-cache]
    pairwave hartree|riccati|spectrum|fock-verify <config.json>
    pairwave sweep <g|N> <start:stop:count> <config.json> [--jobs J]

Exit codes: 0 all enabled checks pass, 1 some check fails, 2 invalid
configuration, 3 solver failure (a partial report is written),
4 missing upstream stage.
"""
from __future__ import annotations

import argparse
import copy
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import config as config_mod
from . import pipeline as pl
from . import serialize
from .errors import DependencyError, InvalidConfiguration, PairwaveError

log = logging.getLogger("pairwave")

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_SOLVER, EXIT_DEPENDENCY = 0, 1, 2, 3, 4


class SolverFailure(Exception):
    def __init__(self, report, cause):
        super().__init__(str(cause))
        self.report = report
        self.cause = cause


def _outdir(cfg) -> Path:
    return Path(cfg["output"]["directory"])


def _write_outputs(cfg, report: dict, files: dict) -> None:
    out = _outdir(cfg)
    formats = cfg["output"]["formats"]
    for name, text in files.items():
        if name.endswith(".csv") and "csv" not in formats:
            continue
        if name.endswith(".json") and "json" not in formats:
            continue
        serialize.write_text_atomic(out / name, text)
    # the report is always written; it carries the exit status
    serialize.write_json(out / "report.json", report)


def _finish(cfg, report: dict, timer: pl.Timer) -> dict:
    report["checks"] = pl.evaluate_checks(cfg, report)
    report["status"] = pl.overall(report["checks"])
    report["timing"] = {k: v for k, v in sorted(timer.times.items())}
    return report


def _spectrum_csv(E) -> str:
    return serialize.csv_text(["j", "E_j"], [(j + 1, float(e)) for j, e in enumerate(E)])


# ----------------------------------------------------------------------------
# stage helpers shared by run and the stage subcommands


def _riccati_stage(cfg, qm, cache, timer):
    """(riccati report, kernel, files) from cache or a fresh solve."""
    if cache.has("riccati"):
        rep = cache.load("riccati", "riccati.json")
        files = {n: cache.load_text("riccati", n) for n in ("kernel.json", "convergence.csv")}
        k = serialize.kernel_from_payload(cache.load("riccati", "kernel.json"))
        return rep, k, files
    with timer("riccati"):
        res = pl.run_riccati(cfg, qm)
    rep = pl.riccati_report(res, qm)
    raw = pl.riccati_files(res, rep, qm)
    cache.store("riccati", raw)
    files = {n: (v if isinstance(v, str) else serialize.dumps(v)) for n, v in raw.items()
             if n != "riccati.json"}
    # downstream stages see the kernel exactly as it was written
    k = serialize.kernel_from_payload(raw["kernel.json"])
    return rep, k, files


def _spectrum_and_fock(cfg, qm, k, report, timer, fock=True):
    with timer("spectrum"):
        spec, ex = pl.run_spectrum(qm, k)
        report["riccati"]["flips"] = pl.run_flips(cfg, qm, k, ex.E)
    report["spectrum"] = spec
    if fock:
        with timer("fock"):
            report["fock"] = pl.run_fock(cfg, qm, k, ex)
    return ex


def cmd_run(cfg, use_cache=True) -> int:
    cache = pl.Cache(cfg, enabled=use_cache)
    timer = pl.Timer()
    report: dict = {"config": cfg}
    files: dict = {}
    try:
        sol = pl.load_or_run_hartree(cfg, cache, timer)
        report["condensate"] = pl.condensate_report(sol)
        qm = pl.quadratic_model(cfg, sol)
        rep, k, rfiles = _riccati_stage(cfg, qm, cache, timer)
        report["riccati"] = rep
        files.update(rfiles)
        ex = _spectrum_and_fock(cfg, qm, k, report, timer)
        files["spectrum.csv"] = _spectrum_csv(ex.E)
    except (InvalidConfiguration, DependencyError):
        raise
    except PairwaveError as exc:
        raise SolverFailure(_finish(cfg, report, timer), exc) from exc
    _finish(cfg, report, timer)
    _write_outputs(cfg, report, files)
    return EXIT_OK if report["status"] == "pass" else EXIT_CHECK


def cmd_stage(cfg, stage: str) -> int:
    cache = pl.Cache(cfg)
    timer = pl.Timer()
    report: dict = {"config": cfg}
    files: dict = {}
    try:
        if stage == "hartree":
            sol = pl.load_or_run_hartree(cfg, cache, timer)
            report["condensate"] = pl.condensate_report(sol)
        else:
            cache.require("hartree")
            sol = pl.condensate_from_payload(cache.load("hartree", "condensate.json"))
            report["condensate"] = pl.condensate_report(sol)
            qm = pl.quadratic_model(cfg, sol)
            if stage == "riccati":
                rep, k, files = _riccati_stage(cfg, qm, cache, timer)
                report["riccati"] = rep
            else:
                cache.require("riccati")
                rep, k, files = _riccati_stage(cfg, qm, cache, timer)
                report["riccati"] = rep
                ex = _spectrum_and_fock(cfg, qm, k, report, timer, fock=(stage == "fock-verify"))
                files["spectrum.csv"] = _spectrum_csv(ex.E)
    except DependencyError:
        raise
    except PairwaveError as exc:
        raise SolverFailure(_finish(cfg, report, timer), exc) from exc
    _finish(cfg, report, timer)
    if "fock" not in report:
        # stages that did not run the Fock checks do not report them
        report["checks"] = {n: s for n, s in report["checks"].items() if not n.startswith("fock_")}
        report["status"] = pl.overall(report["checks"])
    _write_outputs(cfg, report, files)
    return EXIT_OK if report["status"] == "pass" else EXIT_CHECK


# ----------------------------------------------------------------------------
# sweep


def parse_grid(text: str) -> np.ndarray:
    try:
        a, b, n = text.split(":")
        start, stop, count = float(a), float(b), int(n)
    except ValueError:
        raise InvalidConfiguration(f"grid must be start:stop:count, got {text!r}") from None
    if count < 1:
        raise InvalidConfiguration("grid count must be positive")
    return np.linspace(start, stop, count)


def _sweep_point(args):
    cfg, param, value = args
    cfg = copy.deepcopy(cfg)
    cfg["model"][param] = value
    try:
        cfg = config_mod.validate({s: v for s, v in cfg.items()})
        sol = pl.run_hartree(cfg)
        qm = pl.quadratic_model(cfg, sol)
        solver = cfg["riccati"]["solver"]
        cfg["riccati"]["solver"] = "variational" if solver == "all" else solver
        res = pl.run_riccati(cfg, qm)
        k = res["kernels"][res["principal"]].k
        spec, _ = pl.run_spectrum(qm, k)
        return np.asarray(spec["E"], dtype=float), None
    except PairwaveError as exc:
        return None, f"{param}={value}: {exc}"


def cmd_sweep(cfg, param: str, grid: str, jobs: int = 1) -> int:
    if param not in ("g", "N"):
        raise InvalidConfiguration(f"sweep parameter must be g or N, got {param!r}")
    values = parse_grid(grid)
    if param == "N":
        if np.any(values != np.round(values)) or np.any(values < 1):
            raise InvalidConfiguration("N grid must contain positive integers")
        values = [int(v) for v in values]
    else:
        if np.any(values < 0):
            raise InvalidConfiguration("g grid must be nonnegative")
        values = [float(v) for v in values]
    tasks = [(cfg, param, v) for v in values]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_sweep_point, tasks))
    else:
        results = [_sweep_point(t) for t in tasks]
    M = cfg["basis"]["M"]
    rows, errors = [], []
    for v, (E, err) in zip(values, results):
        if err is not None:
            errors.append(err)
            E = np.full(M - 1, np.nan)
        for j, e in enumerate(E):
            rows.append((v, j + 1, float(e)))
    serialize.write_csv(_outdir(cfg) / f"sweep_{param}.csv", ["param", "j", "E_j"], rows)
    for err in errors:
        log.error("sweep point failed: %s", err)
    return EXIT_SOLVER if errors else EXIT_OK


# ----------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="pairwave",
                                description="Pair-excitation spectrum of a trapped Bose gas.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    r = sub.add_parser("run", help="full pipeline")
    r.add_argument("config")
    r.add_argument("--no-cache", action="store_true", help="ignore and do not write the cache")
    for name in ("hartree", "riccati", "spectrum", "fock-verify"):
        s = sub.add_parser(name, help=f"{name} stage from cached upstream results")
        s.add_argument("config")
    s = sub.add_parser("sweep", help="spectrum over a grid of g or N")
    s.add_argument("param")
    s.add_argument("grid", help="start:stop:count")
    s.add_argument("config")
    s.add_argument("--jobs", type=int, default=1)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        cfg = config_mod.load(args.config)
        if args.command == "run":
            return cmd_run(cfg, use_cache=not args.no_cache)
        if args.command == "sweep":
            return cmd_sweep(cfg, args.param, args.grid, args.jobs)
        return cmd_stage(cfg, args.command)
    except InvalidConfiguration as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DependencyError as exc:
        print(f"dependency error ({exc.stage}): {exc}", file=sys.stderr)
        return EXIT_DEPENDENCY
    except SolverFailure as exc:
        report = exc.report
        report["error"] = {"type": type(exc.cause).__name__, "message": str(exc.cause)}
        report["status"] = "fail"
        serialize.write_json(_outdir(report["config"]) / "report.json", report)
        print(f"solver failure: {exc.cause}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
