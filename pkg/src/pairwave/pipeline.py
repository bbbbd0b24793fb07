"""End-to-end pipeline: stages, content-addressed cache and report assembly.

Every stage result that downstream stages need is cached under
``<output>/cache/<stage>-<hash>/`` where the hash covers exactly the
configuration sections the stage depends on.
"""
from __future__ import annotations

import json
import time
from itertools import combinations_with_replacement
from pathlib import Path

import numpy as np

from . import serialize
from .condensate import CondensateSolution, solve_hartree
from .config import stage_hash
from .errors import DependencyError
from .excitations import (build_symplectic, excitation_spectrum, flip_spectrum_residual,
                          solve_fetter, spectral_union_residual, untruncated_null_residual,
                          verify_uv_relations)
from .focksector import (bogoliubov_gap_check, conjugation_scaling_check, construct_eigenvector,
                         ground_state_depletion, theorem2_check, verify_projector_lemmas)
from .model import build_model, check_gap_condition, depletion_bound_report
from .riccati import (flip_branch, pack_kernel, solve_riccati_bdg, solve_riccati_greedy,
                      solve_riccati_variational)
from .spectral import TrapModel, build_basis

# pass thresholds for the report
THRESHOLDS = {
    "riccati_residual": 1e-8,
    "cross_solver": 1e-6,
    "identities": 1e-8,
    "similarity": 1e-10,
    "theorem2": 1e-8,
    "construct": 1e-8,
    "projectors": 1e-12,
    "scaling_ratio": (1.3, 3.0),
    "bogoliubov_gap": 0.05,
    "ccr": 1e-10,
}

SOLVER_ORDER = ("variational", "greedy", "bdg")


def _status(ok: bool) -> str:
    return "pass" if ok else "fail"


def _finite_max(values) -> float:
    vals = [float(v) for v in values]
    return max(vals) if vals else 0.0


# ----------------------------------------------------------------------------
# cache


class Cache:
    def __init__(self, cfg: dict, enabled: bool = True):
        self.root = Path(cfg["output"]["directory"]) / "cache"
        self.cfg = cfg
        self.enabled = enabled

    def path(self, stage: str) -> Path:
        return self.root / f"{stage}-{stage_hash(self.cfg, stage)}"

    def has(self, stage: str) -> bool:
        return self.enabled and (self.path(stage) / "done").exists()

    def load(self, stage: str, name: str) -> dict:
        return json.loads((self.path(stage) / name).read_text())

    def load_text(self, stage: str, name: str) -> str:
        return (self.path(stage) / name).read_text()

    def store(self, stage: str, files: dict) -> None:
        if not self.enabled:
            return
        d = self.path(stage)
        for name, obj in files.items():
            text = obj if isinstance(obj, str) else serialize.dumps(obj)
            serialize.write_text_atomic(d / name, text)
        serialize.write_text_atomic(d / "done", "")

    def require(self, stage: str) -> None:
        if not self.has(stage):
            raise DependencyError(
                f"missing upstream artifact: run the '{stage}' stage first", stage=stage)


# ----------------------------------------------------------------------------
# stages


def problem(cfg):
    b = cfg["basis"]
    m = cfg["model"]
    basis = build_basis(b["M"], b["Q"])
    model = TrapModel(omega=m["omega"], g=m["g"], sigma=m["sigma"], N=m["N"])
    return model, basis


def run_hartree(cfg) -> CondensateSolution:
    model, basis = problem(cfg)
    h = cfg["hartree"]
    return solve_hartree(model, basis, tol=h["tol"], max_iter=h["max_iter"], alpha=h["alpha"])


def condensate_payload(sol: CondensateSolution) -> dict:
    phi = np.asarray(sol.phi, dtype=complex)
    return {"phi": [[z.real, z.imag] for z in phi], "mu": sol.mu, "E_H": sol.E_H,
            "residual": sol.residual, "iterations": sol.iterations, "N": sol.N,
            "trace": [list(t) for t in sol.trace]}


def condensate_from_payload(p: dict) -> CondensateSolution:
    arr = np.array(p["phi"], dtype=float)
    phi = arr[:, 0] + 1j * arr[:, 1]
    if np.all(arr[:, 1] == 0):
        phi = arr[:, 0].copy()
    return CondensateSolution(phi=phi, mu=float(p["mu"]), E_H=float(p["E_H"]),
                              residual=float(p["residual"]), iterations=int(p["iterations"]),
                              N=int(p["N"]), trace=[tuple(t) for t in p["trace"]])


def condensate_report(sol: CondensateSolution) -> dict:
    return {"mu": sol.mu, "E_H": sol.E_H, "residual": sol.residual,
            "iterations": sol.iterations}


def quadratic_model(cfg, sol):
    model, basis = problem(cfg)
    return build_model(sol, model, basis)


def run_riccati(cfg, qm) -> dict:
    """Gap check followed by the selected solvers."""
    r = cfg["riccati"]
    gap = check_gap_condition(qm, restarts=r["restarts"], seed=r["seed"])
    names = SOLVER_ORDER if r["solver"] == "all" else (r["solver"],)
    kernels = {}
    for name in names:
        if name == "variational":
            kernels[name] = solve_riccati_variational(qm, tol=r["tol"], max_iter=r["max_iter"])
        elif name == "greedy":
            kernels[name] = solve_riccati_greedy(qm, restarts=r["restarts"], seed=r["seed"],
                                                 tol=max(r["tol"], 1e-10))
        else:
            kernels[name] = solve_riccati_bdg(qm)
    return {"gap": gap, "kernels": kernels, "principal": names[0]}


def riccati_report(res, qm) -> dict:
    kernels = res["kernels"]
    principal = kernels[res["principal"]]
    solvers = {}
    for name, pk in kernels.items():
        solvers[name] = {"residual": pk.riccati_residual, "op_norm": pk.op_norm,
                         "energy": pk.energy, "iterations": len(pk.trace)}
    dist = {f"{res['principal']}-{name}": float(np.linalg.norm(principal.k - pk.k, 2))
            for name, pk in kernels.items() if name != res["principal"]}
    gap = res["gap"]
    return {
        "principal": res["principal"],
        "gap": {"c_estimate": gap.c_estimate, "certificate": gap.certificate,
                "c_exact": gap.c_exact},
        "depletion_bound": depletion_bound_report(qm, gap.c_exact),
        "solvers": solvers,
        "distances": dist,
    }


def run_spectrum(qm, k) -> tuple[dict, object]:
    ex = excitation_spectrum(qm, k)
    uv = verify_uv_relations(ex.u, ex.v, k, qm.phi)
    sysm = build_symplectic(qm, k)
    fet = solve_fetter(sysm)
    out = {
        "E": ex.E,
        "identities": dict(ex.residuals),
        "uv_relations": uv,
        "similarity": sysm.similarity_residual(),
        "union": spectral_union_residual(qm, k),
        "null_vector": untruncated_null_residual(qm),
        "fetter_vs_hph": float(np.max(np.abs(np.sort(fet.E.real) - ex.E))),
    }
    return out, ex


def run_flips(cfg, qm, k, E) -> list:
    """Saddle branches for each configured 1-based label, one at a time."""
    base = pack_kernel(k, qm, "principal")
    rows = []
    for j in cfg["riccati"]["flip"]:
        pk = flip_branch(base, [j], qm)
        rows.append({"index": int(j), "residual": pk.riccati_residual, "op_norm": pk.op_norm,
                     "spectrum_map": flip_spectrum_residual(qm, pk.k, E, [j])})
    return rows


def run_fock(cfg, qm, k, ex) -> dict:
    f = cfg["fock"]
    m, N = f["m"], f["N"]
    out: dict = {"m": m, "N": N}
    if f["theorem2"]:
        t2 = theorem2_check(qm, k, ex, m, N)
        out["theorem2"] = {"max_deviation": t2.max_deviation, "max_imag": t2.max_imag,
                           "nonnormality": t2.nonnormality}
    if f["construct"]:
        worst = 0.0
        count = 0
        for n in range(N + 1):
            for sel in combinations_with_replacement(range(1, m), n):
                worst = max(worst, construct_eigenvector(qm, k, ex, m, N, sel).residual)
                count += 1
        out["construct"] = {"selections": count, "max_residual": worst}
    if f["projectors"]:
        out["projectors"] = verify_projector_lemmas(m, N)
    if f["scaling"]:
        rows = conjugation_scaling_check(qm, k, ex, m, f["scaling_N"])
        dev = [r["deviation"] for r in rows]
        ratios = [dev[i] / dev[i + 1] if dev[i + 1] > 0 else float("nan")
                  for i in range(len(dev) - 1)]
        out["scaling"] = {"table": rows, "ratios": ratios}
        out["depletion"] = ground_state_depletion(qm, k, ex, m, f["scaling_N"][-1])
    if f["bogoliubov"]:
        out["bogoliubov"] = bogoliubov_gap_check(qm, k, ex, m, f["N_cap"])
    return out


# ----------------------------------------------------------------------------
# checks


def evaluate_checks(cfg, report: dict) -> dict:
    T = THRESHOLDS
    checks: dict = {}
    cond = report.get("condensate")
    if cond is not None:
        checks["hartree_residual"] = _status(cond["residual"] < 10 * cfg["hartree"]["tol"] + 1e-12)
    ric = report.get("riccati")
    if ric is not None:
        checks["gap_condition"] = _status(ric["gap"]["c_exact"] > 0)
        for name, s in ric["solvers"].items():
            checks[f"riccati_{name}"] = _status(s["residual"] < T["riccati_residual"]
                                                 and s["op_norm"] < 1)
        if ric["distances"]:
            checks["cross_solver"] = _status(max(ric["distances"].values()) < T["cross_solver"])
        for fl in ric.get("flips", []):
            checks[f"flip_{fl['index']}"] = _status(
                fl["residual"] < T["riccati_residual"] and fl["op_norm"] > 1
                and fl["spectrum_map"] < T["identities"])
    sp = report.get("spectrum")
    if sp is not None:
        ids = list(sp["identities"].values()) + list(sp["uv_relations"].values())
        checks["spectral_identities"] = _status(_finite_max(ids) < T["identities"])
        checks["similarity"] = _status(sp["similarity"] < T["similarity"]
                                       and sp["union"] < T["identities"]
                                       and sp["null_vector"] < T["identities"])
    fk = report.get("fock")
    f = cfg["fock"]
    if fk is None:
        for name in ("theorem2", "construct", "projectors", "scaling", "bogoliubov"):
            checks[f"fock_{name}"] = "skipped"
        return checks
    for name in ("theorem2", "construct", "projectors", "scaling", "bogoliubov"):
        if not f[name]:
            checks[f"fock_{name}"] = "skipped"
    if "theorem2" in fk:
        t = fk["theorem2"]
        checks["fock_theorem2"] = _status(max(t["max_deviation"], t["max_imag"]) < T["theorem2"])
    if "construct" in fk:
        checks["fock_construct"] = _status(fk["construct"]["max_residual"] < T["construct"])
    if "projectors" in fk:
        checks["fock_projectors"] = _status(_finite_max(fk["projectors"].values()) < T["projectors"])
    if "scaling" in fk:
        dev = [r["deviation"] for r in fk["scaling"]["table"]]
        if max(dev) < 1e-12:  # k = 0: the conjugation is the identity
            ok = True
        else:
            lo, hi = T["scaling_ratio"]
            ok = all(lo <= r <= hi for r in fk["scaling"]["ratios"])
        checks["fock_scaling"] = _status(ok)
    if "bogoliubov" in fk:
        b = fk["bogoliubov"]
        checks["fock_bogoliubov"] = _status(b["lowest_gap_rel_error_full"] < T["bogoliubov_gap"]
                                            and b["ccr"] < T["ccr"])
    return checks


def overall(checks: dict) -> str:
    return "fail" if any(v == "fail" for v in checks.values()) else "pass"


# ----------------------------------------------------------------------------
# orchestration


class Timer:
    def __init__(self):
        self.times: dict = {}

    def __call__(self, name):
        timer = self

        class _T:
            def __enter__(self):
                self.t0 = time.perf_counter()

            def __exit__(self, *exc):
                timer.times[name] = time.perf_counter() - self.t0

        return _T()


def load_or_run_hartree(cfg, cache: Cache, timer: Timer) -> CondensateSolution:
    if cache.has("hartree"):
        return condensate_from_payload(cache.load("hartree", "condensate.json"))
    with timer("hartree"):
        sol = run_hartree(cfg)
    cache.store("hartree", {"condensate.json": condensate_payload(sol)})
    return sol


def riccati_files(res, rep, qm) -> dict:
    principal = res["kernels"][res["principal"]]
    trace = principal.trace or [(0, principal.energy, principal.riccati_residual)]
    return {
        "kernel.json": serialize.kernel_payload(principal.k),
        "riccati.json": rep,
        "convergence.csv": serialize.csv_text(
            ["iter", "energy", "residual"],
            [(int(t[0]), float(t[1]), float(t[2])) for t in trace]),
    }
