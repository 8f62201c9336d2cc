"""Simulation of the least-favorable sequence and Monte Carlo checks of the saddle value.

Innovations come from a counter-based generator: every draw is a hash of
``(seed, replicate, s, m)`` pushed through Box-Muller, so a value never depends
on which range or which chunk of replicates was requested alongside it.
"""
from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .blocking import FourierBlockCoefficients, frequency_map
from .leastfav import MovingAverageModel

__all__ = [
    "InnovationStream",
    "SequenceRealization",
    "MonteCarloReport",
    "PCPathEnsemble",
    "PCCovariance",
    "counter_normals",
    "simulate_innovations",
    "realize_sequence",
    "optimal_estimate",
    "functional_value",
    "population_mse",
    "mc_mse",
    "synthesize_pc_path",
    "empirical_pc_covariance",
    "upper_bound_grid",
    "write_path_csv",
]

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
CHUNK = 4096


def _mix(x: np.ndarray) -> np.ndarray:
    # splitmix64 finalizer
    x = (x ^ (x >> np.uint64(30))) * _M1
    x = (x ^ (x >> np.uint64(27))) * _M2
    return x ^ (x >> np.uint64(31))


def _as_u64(x) -> np.ndarray:
    # two's-complement reinterpretation keeps negative indices distinct
    return np.asarray(x, dtype=np.int64).view(np.uint64)


def _uniform(seed, replicate, s, m, lane) -> np.ndarray:
    with np.errstate(over="ignore"):
        h = _mix(_as_u64(seed) + _GOLDEN)
        for x in (replicate, s, m, lane):
            h = _mix(h ^ (_as_u64(x) + _GOLDEN))
    # 53 random bits mapped into (0, 1]
    return ((h >> np.uint64(11)).astype(np.float64) + 1.0) * 2.0 ** -53


def counter_normals(seed: int, replicate, s, m, complex_: bool = True) -> np.ndarray:
    """Unit-variance Gaussian at each broadcast ``(replicate, s, m)`` index.

    Complex draws are circularly symmetric with ``E|z|**2 = 1``; real draws
    have variance 1.
    """
    replicate, s, m = np.broadcast_arrays(*(np.asarray(x, dtype=np.int64) for x in (replicate, s, m)))
    u1 = _uniform(seed, replicate, s, m, 0)
    u2 = _uniform(seed, replicate, s, m, 1)
    r = np.sqrt(-2.0 * np.log(u1))
    theta = 2.0 * np.pi * u2
    if complex_:
        return (r * np.cos(theta) + 1j * r * np.sin(theta)) / math.sqrt(2.0)
    return r * np.cos(theta)


@dataclass
class InnovationStream:
    """Innovations ``eps_m(s)``; ``values[r, s - s_min, m]``."""

    seed: int
    s_min: int
    s_max: int
    M: int
    values: np.ndarray
    first_replicate: int = 0

    @property
    def replicates(self) -> int:
        return self.values.shape[0]

    def covers(self, lo: int, hi: int) -> bool:
        return lo > hi or (self.s_min <= lo and hi <= self.s_max)

    def at(self, s) -> np.ndarray:
        return self.values[:, np.asarray(s) - self.s_min, :]


def simulate_innovations(seed: int, s_min: int, s_max: int, M: int = 1, replicates: int = 1,
                         first_replicate: int = 0, complex_: bool = True) -> InnovationStream:
    if s_min > s_max:
        raise ValueError(f"empty innovation range [{s_min}, {s_max}]")
    if M < 1 or replicates < 1:
        raise ValueError("M and replicates must be positive")
    r = np.arange(first_replicate, first_replicate + replicates)[:, None, None]
    s = np.arange(s_min, s_max + 1)[None, :, None]
    m = np.arange(M)[None, None, :]
    vals = counter_normals(seed, r, s, m, complex_=complex_)
    return InnovationStream(int(seed), int(s_min), int(s_max), int(M), vals, int(first_replicate))


@dataclass
class SequenceRealization:
    """Block vectors ``zeta[r, j - j_min, k-1]``."""

    j_min: int
    j_max: int
    zeta: np.ndarray

    def block(self, j: int) -> np.ndarray:
        return self.zeta[:, j - self.j_min, :]


def _convolve(model: MovingAverageModel, noise: InnovationStream, j_min: int, j_max: int,
              s_cap: int | None) -> SequenceRealization:
    if j_min > j_max:
        raise ValueError("empty block range")
    if noise.M != model.M:
        raise ValueError(f"noise has M={noise.M}, model needs M={model.M}")
    hi = j_max if s_cap is None else min(j_max, s_cap)
    if not noise.covers(j_min - model.order, hi):
        raise ValueError(f"innovations cover [{noise.s_min}, {noise.s_max}], "
                         f"need [{j_min - model.order}, {hi}]")
    j = np.arange(j_min, j_max + 1)
    zeta = np.zeros((noise.replicates, len(j), model.K), dtype=complex)
    for p in range(model.order + 1):
        s = j - p
        keep = s <= (j_max if s_cap is None else s_cap)
        if not np.any(keep):
            continue
        eps = noise.at(s[keep])
        zeta[:, keep, :] += eps @ model.g[p].T
    return SequenceRealization(j_min, j_max, zeta)


def realize_sequence(model: MovingAverageModel, noise: InnovationStream, j_min: int,
                     j_max: int) -> SequenceRealization:
    """``zeta_j = sum_{p=0}^{order} g(p) eps(j - p)`` for ``j_min <= j <= j_max``."""
    return _convolve(model, noise, j_min, j_max, None)


def optimal_estimate(model: MovingAverageModel, noise: InnovationStream, j_min: int,
                     j_max: int) -> SequenceRealization:
    """Same convolution restricted to past innovations ``s <= -1``."""
    return _convolve(model, noise, j_min, j_max, -1)


def functional_value(c: FourierBlockCoefficients, r: SequenceRealization, N: int) -> np.ndarray:
    """``sum_{j=0}^{N} sum_k a_kj zeta_kj`` per replicate (no conjugation)."""
    if r.j_min > 0 or r.j_max < N:
        raise ValueError(f"realization covers [{r.j_min}, {r.j_max}], need [0, {N}]")
    if N + 1 > c.J or r.zeta.shape[2] != c.K:
        raise ValueError("coefficients and realization shapes differ")
    z = r.zeta[:, -r.j_min:N + 1 - r.j_min, :]
    return np.einsum("rjk,kj->r", z, c.coeffs[:, :N + 1])


def population_mse(model: MovingAverageModel, c: FourierBlockCoefficients, N: int) -> float:
    """Exact ``E|A_N zeta - A_N_hat zeta|**2`` from the innovation weights.

    The error equals ``sum_{s=0}^{N} h(s) eps(s)`` with
    ``h(s) = sum_{j=s}^{N} a_j^T g(j - s)``, hence ``sum_s |h(s)|**2``.
    """
    total = 0.0
    for s in range(N + 1):
        h = np.zeros(model.M, dtype=complex)
        for j in range(s, N + 1):
            if j - s <= model.order:
                h += c.coeffs[:, j] @ model.g[j - s]
        total += float(np.sum(np.abs(h) ** 2))
    return total


@dataclass
class MonteCarloReport:
    replicates: int
    mse: float
    stderr: float
    target: float
    z_score: float
    seed: int
    N: int
    K: int
    P: float

    def passed(self, threshold: float = 4.0) -> bool:
        return abs(self.z_score) <= threshold

    def to_dict(self) -> dict:
        return asdict(self)


def _use_real_noise(model: MovingAverageModel, c: FourierBlockCoefficients) -> bool:
    return c.is_real() and model.is_real()


def mc_mse(model: MovingAverageModel, c: FourierBlockCoefficients, N: int, replicates: int,
           seed: int, target: float | None = None, workers: int = 1,
           complex_: bool | None = None) -> MonteCarloReport:
    """Simulated mean-square error of the optimal estimate of ``A_N zeta``.

    Replicates are processed in fixed chunks of 4096; results are assembled
    by replicate index, so the report does not depend on ``workers``.
    ``target`` defaults to :func:`population_mse`.
    """
    if replicates < 1:
        raise ValueError("replicates must be positive")
    if complex_ is None:
        complex_ = not _use_real_noise(model, c)
    if not complex_:
        model = MovingAverageModel(model.g.real, model.P)
    if target is None:
        target = population_mse(model, c, N)

    def run(start: int) -> np.ndarray:
        n = min(CHUNK, replicates - start)
        noise = simulate_innovations(seed, -model.order, N, model.M, n, start, complex_)
        zeta = realize_sequence(model, noise, 0, N)
        zeta_hat = optimal_estimate(model, noise, 0, N)
        err = functional_value(c, zeta, N) - functional_value(c, zeta_hat, N)
        return np.abs(err) ** 2

    starts = range(0, replicates, CHUNK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    sq = np.concatenate(parts)
    mse = float(np.mean(sq))
    stderr = float(np.std(sq, ddof=1) / math.sqrt(replicates)) if replicates > 1 else math.inf
    z = (mse - target) / stderr if stderr > 0 else (0.0 if mse == target else math.inf)
    return MonteCarloReport(int(replicates), mse, stderr, float(target), float(z), int(seed),
                            int(N), int(c.K), float(model.P))


@dataclass
class PCPathEnsemble:
    """Paths ``zeta(t)`` sampled at ``t = j*T + i*T/u_grid``; ``values[r, t_index]``."""

    t: np.ndarray
    values: np.ndarray
    period_T: float
    u_grid: int


def synthesize_pc_path(model: MovingAverageModel, period_T: float, noise: InnovationStream,
                       j_min: int, j_max: int, u_grid: int) -> PCPathEnsemble:
    """``zeta(u + jT) = sum_k zeta_kj e_k(u)`` on a uniform ``u`` grid per block."""
    K = model.K
    if u_grid < 2 * K:
        raise ValueError(f"u_grid={u_grid} is below 2K={2 * K}")
    seq = realize_sequence(model, noise, j_min, j_max)
    u = period_T * np.arange(u_grid) / u_grid
    basis = np.exp(2j * np.pi * np.outer(frequency_map(K), u) / period_T) / math.sqrt(period_T)
    vals = np.einsum("rjk,ku->rju", seq.zeta, basis).reshape(noise.replicates, -1)
    t = (np.arange(j_min, j_max + 1)[:, None] * period_T + u[None, :]).ravel()
    return PCPathEnsemble(t, vals, float(period_T), int(u_grid))


def write_path_csv(paths: PCPathEnsemble, path, replicate: int = 0) -> Path:
    """One replicate of the ensemble as ``t,real,imag`` lines."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["t", "real", "imag"])
        for t, z in zip(paths.t, paths.values[replicate]):
            writer.writerow([repr(float(t)), repr(float(z.real)), repr(float(z.imag))])
    return path


@dataclass
class PCCovariance:
    cov: np.ndarray
    defect: float
    max_z: float
    shift: int


def empirical_pc_covariance(paths: PCPathEnsemble, min_ensemble: int = 1000) -> PCCovariance:
    """Sample covariance ``K(t_a, t_b) = E zeta(t_a) conj(zeta(t_b))`` and its period defect.

    The defect compares ``K(t_a, t_b)`` with ``K(t_a + T, t_b + T)`` over every
    pair for which both fit on the grid; ``max_z`` is the worst defect in units
    of its own standard error.
    """
    X = paths.values
    R, L = X.shape
    if R < min_ensemble:
        raise ValueError(f"ensemble of {R} paths is below the minimum {min_ensemble}")
    if not np.any(X):
        raise ValueError("degenerate ensemble: all paths are zero")
    shift = paths.u_grid
    if L <= shift:
        raise ValueError("paths must span more than one period")
    cov = X.T @ X.conj() / R
    n = L - shift
    A = X[:, :n]
    B = X[:, shift:]
    diff_mean = (A.T @ A.conj() - B.T @ B.conj()) / R
    sq = np.zeros((n, n))
    for lo in range(0, R, CHUNK):
        a, b = A[lo:lo + CHUNK], B[lo:lo + CHUNK]
        d = a[:, :, None] * a.conj()[:, None, :] - b[:, :, None] * b.conj()[:, None, :]
        sq += np.sum(np.abs(d - diff_mean) ** 2, axis=0)
    se = np.sqrt(sq / (R - 1) / R)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, np.abs(diff_mean) / se, np.where(np.abs(diff_mean) > 0, np.inf, 0.0))
    return PCCovariance(cov, float(np.max(np.abs(diff_mean))), float(np.max(z)), shift)


def upper_bound_grid(c: FourierBlockCoefficients, N: int, grid_size: int = 4096) -> float:
    """``max_lam |sum_{j=0}^{N} a_j exp(i j lam)|**2`` over a uniform grid."""
    if grid_size < 2 * (N + 1):
        raise ValueError(f"grid_size={grid_size} is below 2(N+1)={2 * (N + 1)}")
    if N + 1 > c.J:
        raise ValueError(f"N={N} needs {N + 1} coefficient blocks, only {c.J} available")
    lam = -np.pi + 2 * np.pi * np.arange(grid_size) / grid_size
    phases = np.exp(1j * np.outer(np.arange(N + 1), lam))
    vals = c.coeffs[:, :N + 1] @ phases
    return float(np.max(np.sum(np.abs(vals) ** 2, axis=0)))
