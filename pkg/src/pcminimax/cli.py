"""Batch front-end: ``pcminimax solve|verify|sweep --config cfg.json [--out dir] [--threads n]``.

Exit codes: 0 success, 1 verification failure, 2 invalid config,
3 numerical failure.  ``PCMINIMAX_SEED`` overrides the Monte Carlo seed.
"""
from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .blocking import (FourierBlockCoefficients, TailModel, WeightFunction, block_function,
                       check_summability, fourier_coefficients, load_weight_csv)
from .eigensolve import NumericalError, top_eigenpair, write_trace_csv
from .leastfav import (build_least_favorable, spectral_density, trace_power,
                       verify_factorization, write_spectral_csv)
from .montecarlo import mc_mse, upper_bound_grid
from .operator import assemble_QN, hankel_tail_norm, truncation_defect_bound, write_operator_csv

log = logging.getLogger("pcminimax")

SEED_ENV = "PCMINIMAX_SEED"
EXIT_OK, EXIT_VERIFY, EXIT_CONFIG, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    weight: dict
    K: int
    J: int
    N_list: list
    P: float
    period_T: float = 1.0
    quad_nodes: int | None = None
    tol: float = 1e-10
    max_iter: int | None = None
    eig_seed: int = 0
    replicates: int = 100_000
    mc_seed: int = 1
    output_dir: Path = Path("out")
    tail: TailModel = field(default_factory=TailModel)
    operator_csv: bool = False
    spectral_csv: bool = False
    spectral_grid: int = 256
    trace_csv: bool = False
    base_dir: Path = Path(".")

    @property
    def N(self) -> int:
        return self.N_list[-1]


def _require(cond: bool, name: str, msg: str) -> None:
    if not cond:
        raise ConfigError(f"{name}: {msg}")


def _int(raw: dict, name: str, default=None, minimum: int = 0):
    val = raw.get(name, default)
    _require(val is not None, name, "is required")
    _require(isinstance(val, int) and not isinstance(val, bool), name, f"must be an integer, got {val!r}")
    _require(val >= minimum, name, f"must be >= {minimum}, got {val}")
    return val


def _float(raw: dict, name: str, default=None, positive: bool = True):
    val = raw.get(name, default)
    _require(isinstance(val, (int, float)) and not isinstance(val, bool), name, f"must be a number, got {val!r}")
    _require(math.isfinite(val) and (val > 0 or not positive), name, f"must be positive and finite, got {val}")
    return float(val)


def parse_config(raw: dict, base_dir: Path = Path(".")) -> ExperimentConfig:
    """Validate a config dictionary; every problem raises :class:`ConfigError` naming the field."""
    _require(isinstance(raw, dict), "config", "must be a JSON object")
    weight = raw.get("weight")
    _require(isinstance(weight, dict) and "kind" in weight, "weight", "must be an object with a 'kind'")
    if "csv" in weight:
        csv_path = (base_dir / weight["csv"]).resolve()
        _require(csv_path.is_file(), "weight.csv", f"file not found: {csv_path}")
    K = _int(raw, "K", minimum=1)
    J = _int(raw, "J", minimum=1)
    if "N_list" in raw:
        N_list = raw["N_list"]
        _require(isinstance(N_list, list) and N_list, "N_list", "must be a nonempty list")
        for n in N_list:
            _require(isinstance(n, int) and n >= 0, "N_list", f"entries must be nonnegative integers, got {n!r}")
        _require(all(a < b for a, b in zip(N_list, N_list[1:])), "N_list", "must be strictly ascending")
    else:
        N_list = [_int(raw, "N", minimum=0)]
    _require(N_list[-1] + 1 <= J, "J", f"must be >= N+1 = {N_list[-1] + 1}")
    eig = raw.get("eigensolver", {})
    mc = raw.get("montecarlo", {})
    out = raw.get("outputs", {})
    _require(isinstance(eig, dict), "eigensolver", "must be an object")
    _require(isinstance(mc, dict), "montecarlo", "must be an object")
    tail_raw = raw.get("decay_hint", {"kind": "none"})
    try:
        tail = TailModel(tail_raw.get("kind", "none"), float(tail_raw.get("rate", 0.0)))
    except (ValueError, AttributeError, TypeError) as exc:
        raise ConfigError(f"decay_hint: {exc}") from None
    mc_seed = mc.get("seed", 1)
    if os.environ.get(SEED_ENV):
        try:
            mc_seed = int(os.environ[SEED_ENV])
        except ValueError:
            raise ConfigError(f"{SEED_ENV}: must be an integer") from None
    cfg = ExperimentConfig(
        weight=weight,
        K=K,
        J=J,
        N_list=list(N_list),
        P=_float(raw, "P"),
        period_T=_float(raw, "period_T", 1.0),
        quad_nodes=raw.get("quad_nodes"),
        tol=_float(eig, "tol", 1e-10),
        max_iter=eig.get("max_iter"),
        eig_seed=_int(eig, "seed", 0),
        replicates=_int(mc, "replicates", 100_000, minimum=1),
        mc_seed=int(mc_seed),
        output_dir=base_dir / raw.get("output_dir", "out"),
        tail=tail,
        operator_csv=bool(out.get("operator_csv", False)),
        spectral_csv=bool(out.get("spectral_csv", False)),
        spectral_grid=_int(out, "spectral_grid", 256, minimum=1),
        trace_csv=bool(out.get("trace_csv", False)),
        base_dir=base_dir,
    )
    if cfg.quad_nodes is not None:
        _require(isinstance(cfg.quad_nodes, int) and cfg.quad_nodes >= 2 * K, "quad_nodes",
                 f"must be an integer >= 2K = {2 * K}")
    # build once so weight parameter errors surface as config errors
    build_coefficients(cfg)
    return cfg


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config: file not found: {path}")
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config: invalid JSON ({exc})") from None
    return parse_config(raw, path.parent)


def _weight_from_entry(entry: dict, base_dir: Path) -> WeightFunction:
    kind = entry["kind"]
    params = {k: v for k, v in entry.items() if k != "kind"}
    try:
        if kind == "sampled-grid":
            if "csv" in params:
                return load_weight_csv(base_dir / params["csv"])
            return WeightFunction.sampled_grid(params["t"], params["values"])
        if kind == "exponential-decay":
            return WeightFunction.exponential_decay(**params)
        if kind == "windowed-cosine":
            return WeightFunction.windowed_cosine(**params)
        if kind == "indicator":
            return WeightFunction.indicator(**params)
        if kind == "piecewise-constant":
            return WeightFunction.piecewise_constant(**params)
    except (TypeError, ValueError, KeyError, OSError) as exc:
        raise ConfigError(f"weight: {exc}") from None
    raise ConfigError(f"weight.kind: unknown kind {kind!r}")


def build_coefficients(cfg: ExperimentConfig) -> FourierBlockCoefficients:
    """Block Fourier coefficients for the configured weight.

    Besides the weight kinds, ``{"kind": "coefficients", "real": [[...]], "imag": [[...]]}``
    supplies a ``(K, J)`` coefficient table directly.
    """
    entry = cfg.weight
    if entry["kind"] == "coefficients":
        try:
            arr = np.asarray(entry["real"], dtype=float)
            if "imag" in entry:
                arr = arr + 1j * np.asarray(entry["imag"], dtype=float)
        except (KeyError, ValueError, TypeError) as exc:
            raise ConfigError(f"weight.real/imag: {exc}") from None
        arr = np.atleast_2d(arr)
        _require(arr.shape == (cfg.K, cfg.J), "weight.real", f"must have shape (K, J) = ({cfg.K}, {cfg.J})")
        return FourierBlockCoefficients(arr, cfg.period_T)
    weight = _weight_from_entry(entry, cfg.base_dir)
    try:
        weight.check_integrable()
    except ValueError as exc:
        raise ConfigError(f"weight: {exc}") from None
    bf = block_function(weight, cfg.period_T, cfg.J)
    return fourier_coefficients(bf, cfg.K, cfg.quad_nodes)


# ---- serialization ------------------------------------------------------
def _encode(obj: Any) -> str:
    if isinstance(obj, bool) or obj is None:
        return json.dumps(obj)
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        return format(x, ".17g") if math.isfinite(x) else "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, dict):
        items = [f"{json.dumps(str(k))}: {_encode(v)}" for k, v in obj.items()]
        return "{" + ", ".join(items) + "}"
    if isinstance(obj, (list, tuple, np.ndarray)):
        return "[" + ", ".join(_encode(v) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps(obj: Any) -> str:
    """JSON with every float written to 17 significant digits."""
    return _encode(obj) + "\n"


def _fmt(x) -> str:
    return format(float(x), ".17g") if isinstance(x, (float, np.floating)) else str(x)


# ---- pipelines -----------------------------------------------------------
def _solve_core(cfg: ExperimentConfig, N: int, c: FourierBlockCoefficients | None = None):
    c = build_coefficients(cfg) if c is None else c
    op = assemble_QN(c, N)
    pair, gap = top_eigenpair(op, tol=cfg.tol, max_iter=cfg.max_iter, seed=cfg.eig_seed)
    if not pair.converged:
        raise NumericalError(f"power iteration did not converge in {pair.iterations} iterations "
                             f"(residual {pair.residual:.3e})")
    return c, op, pair, gap


def cmd_solve(cfg: ExperimentConfig, out_dir: Path | None = None) -> dict:
    """Minimax value ``P*nu_N**2`` and least-favorable model; writes ``solve.json``."""
    N = cfg.N
    c, op, pair, gap = _solve_core(cfg, N)
    warnings = []
    if pair.value == 0.0:
        warnings.append("weight has zero coefficients through block N; minimax value is 0")
    if pair.degenerate:
        warnings.append("top eigenvalue is degenerate; the least-favorable process is not unique")
    adm = check_summability(c, cfg.tail)
    if not adm.passed:
        warnings.append(f"admissibility: {adm.diagnosis}")
    for w in warnings:
        log.warning(w)
    model = build_least_favorable(pair, cfg.P, N, c.K)
    lambdas = -np.pi + 2 * np.pi * np.arange(cfg.spectral_grid) / cfg.spectral_grid
    samples = spectral_density(model, lambdas)
    report = {
        "N": N,
        "K": c.K,
        "J": c.J,
        "P": cfg.P,
        "period_T": cfg.period_T,
        "nu2": pair.value,
        "value": cfg.P * pair.value,
        "eigen_gap": gap,
        "degenerate": pair.degenerate,
        "iterations": pair.iterations,
        "residual": pair.residual,
        "converged": pair.converged,
        "upper_bound": cfg.P * upper_bound_grid(c, N, max(4096, 2 * (N + 1))),
        "admissibility": {
            "sum_norms": adm.sum_norms,
            "sum_weighted_sq": adm.sum_weighted_sq,
            "tail_sum_norms": adm.tail_sum_norms,
            "tail_weighted_sq": adm.tail_weighted_sq,
            "passed": adm.passed,
            "diagnosis": adm.diagnosis,
            "truncation_residuals": c.truncation_residuals(),
        },
        "least_favorable": {
            "order": model.order,
            "M": model.M,
            "block_norms": np.linalg.norm(model.g.reshape(model.order + 1, -1), axis=1),
            "power": model.power(),
            "trace_power": trace_power(model),
            "factorization_residual": verify_factorization(samples),
        },
        "warnings": warnings,
    }
    out = Path(out_dir) if out_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "solve.json").write_text(dumps(report), encoding="utf-8")
    if cfg.operator_csv:
        write_operator_csv(op, out / "operator.csv")
    if cfg.spectral_csv:
        write_spectral_csv(samples, out / "spectral.csv")
    if cfg.trace_csv:
        write_trace_csv(pair, out / "trace.csv")
    return report


def cmd_verify(cfg: ExperimentConfig, out_dir: Path | None = None, threads: int = 1,
               target_override: float | None = None, threshold: float = 4.0):
    """Monte Carlo check of the saddle value; writes ``verify.json``.

    Returns ``(report, exit_code)``.  ``target_override`` replaces the
    eigenvalue target and exists for testing the failure path.
    """
    N = cfg.N
    c, op, pair, _ = _solve_core(cfg, N)
    model = build_least_favorable(pair, cfg.P, N, c.K)
    target = cfg.P * pair.value if target_override is None else float(target_override)
    mc = mc_mse(model, c, N, cfg.replicates, cfg.mc_seed, target=target, workers=threads)
    report = mc.to_dict()
    report["threshold"] = threshold
    report["passed"] = mc.passed(threshold)
    out = Path(out_dir) if out_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    (out / "verify.json").write_text(dumps(report), encoding="utf-8")
    return mc, (EXIT_OK if mc.passed(threshold) else EXIT_VERIFY)


SWEEP_COLUMNS = ["N", "nu2", "value", "gap", "tail_norm", "defect_bound", "delta_prev"]


def cmd_sweep(cfg: ExperimentConfig, out_dir: Path | None = None, timing: bool = False) -> list[dict]:
    """One row per horizon in ``N_list``; writes ``sweep.csv``.

    ``runtime`` is only written with ``timing=True`` so default output stays
    byte-reproducible.
    """
    c = build_coefficients(cfg)
    rows = []
    prev = None
    for N in cfg.N_list:
        start = time.perf_counter()
        _, _, pair, gap = _solve_core(cfg, N, c)
        tail = hankel_tail_norm(c, N, cfg.tail if cfg.tail.kind != "none" else None)
        row = {
            "N": N,
            "nu2": pair.value,
            "value": cfg.P * pair.value,
            "gap": gap if gap is not None else math.nan,
            "tail_norm": tail,
            "defect_bound": truncation_defect_bound(pair.value, tail),
            "delta_prev": abs(pair.value - prev) if prev is not None else math.nan,
        }
        if timing:
            row["runtime"] = time.perf_counter() - start
        prev = pair.value
        rows.append(row)
    out = Path(out_dir) if out_dir is not None else cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)
    cols = SWEEP_COLUMNS + (["runtime"] if timing else [])
    lines = [",".join(cols)] + [",".join(_fmt(r[k]) for k in cols) for r in rows]
    (out / "sweep.csv").write_text("\n".join(lines) + "\n", encoding="utf-8")
    return rows


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pcminimax", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_ in (("solve", "minimax value and least-favorable model"),
                        ("verify", "Monte Carlo check of the saddle value"),
                        ("sweep", "convergence of nu_N^2 over the N_list horizons")):
        p = sub.add_parser(name, help=help_)
        p.add_argument("--config", required=True, help="experiment config (JSON)")
        p.add_argument("--out", default=None, help="output directory (overrides output_dir)")
        p.add_argument("--threads", type=int, default=1, help="worker threads for Monte Carlo")
        if name == "sweep":
            p.add_argument("--timing", action="store_true", help="add a runtime column")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    try:
        cfg = load_config(args.config)
        if args.threads < 1:
            raise ConfigError("--threads: must be >= 1")
    except ConfigError as exc:
        log.error("invalid config: %s", exc)
        return EXIT_CONFIG
    out = Path(args.out) if args.out else None
    try:
        if args.command == "solve":
            rep = cmd_solve(cfg, out)
            print(dumps({"nu2": rep["nu2"], "value": rep["value"]}), end="")
            return EXIT_OK
        if args.command == "verify":
            rep, code = cmd_verify(cfg, out, threads=args.threads)
            print(dumps(rep.to_dict()), end="")
            return code
        cmd_sweep(cfg, out, timing=args.timing)
        return EXIT_OK
    except NumericalError as exc:
        log.error("numerical failure: %s", exc)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
