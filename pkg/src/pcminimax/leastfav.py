"""Least-favorable one-sided moving average and its spectral density."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .eigensolve import Eigenpair
from .operator import BlockOperator

__all__ = [
    "MovingAverageModel",
    "SpectralDensitySample",
    "build_least_favorable",
    "spectral_density",
    "verify_factorization",
    "psd_margin",
    "trace_power",
    "quadratic_value",
    "write_spectral_csv",
]


@dataclass
class MovingAverageModel:
    """``zeta_j = sum_{p=0}^{order} g[p] @ eps(j - p)`` with ``g`` of shape ``(order+1, K, M)``."""

    g: np.ndarray
    P: float

    def __post_init__(self):
        self.g = np.asarray(self.g, dtype=complex)
        if self.g.ndim == 2:
            self.g = self.g[:, :, None]
        if self.g.ndim != 3:
            raise ValueError("g must have shape (order+1, K, M)")

    @property
    def order(self) -> int:
        return self.g.shape[0] - 1

    @property
    def K(self) -> int:
        return self.g.shape[1]

    @property
    def M(self) -> int:
        return self.g.shape[2]

    def power(self) -> float:
        """``sum_p |g(p)|_F**2``."""
        return float(np.sum(np.abs(self.g) ** 2))

    def is_real(self, tol: float = 1e-12) -> bool:
        scale = max(float(np.max(np.abs(self.g))), 1e-300)
        return bool(np.max(np.abs(self.g.imag)) <= tol * scale)

    def lag_covariance(self, h: int = 0) -> np.ndarray:
        """``E zeta_{j+h} zeta_j^*`` for unit-variance innovations."""
        out = np.zeros((self.K, self.K), dtype=complex)
        for p in range(max(h, 0), self.order + 1):
            if 0 <= p - h <= self.order:
                out += self.g[p] @ self.g[p - h].conj().T
        return out


@dataclass
class SpectralDensitySample:
    lam: float
    f: np.ndarray
    G: np.ndarray


def build_least_favorable(e: Eigenpair, P: float, N: int, K: int,
                          normalize_phase: bool = True) -> MovingAverageModel:
    """Moving-average coefficients from the top eigenvector of ``Q_N``.

    Block ``p`` of the eigenvector, conjugated and scaled by ``sqrt(P)``,
    becomes the single column of ``g(p)``.  With ``normalize_phase`` the
    global phase is fixed so the largest-modulus entry (first one on ties)
    is real and positive, which keeps real problems real.
    """
    if not e.converged:
        raise ValueError("eigenpair did not converge; refusing to build a model from it")
    if not P > 0:
        raise ValueError("power P must be positive")
    v = np.asarray(e.vector, dtype=complex)
    if v.shape != ((N + 1) * K,):
        raise ValueError(f"eigenvector length {v.shape[0]} does not match (N+1)*K = {(N + 1) * K}")
    v = v / np.linalg.norm(v)
    if normalize_phase:
        i = int(np.argmax(np.abs(v) > (1 - 1e-9) * np.max(np.abs(v))))
        v = v * (abs(v[i]) / v[i])
    g = np.conj(v).reshape(N + 1, K, 1) * math.sqrt(P)
    return MovingAverageModel(g, float(P))


def _transfer(model: MovingAverageModel, lambdas: np.ndarray) -> np.ndarray:
    s = np.arange(model.order + 1)
    phases = np.exp(-1j * np.outer(lambdas, s))
    return np.einsum("ls,skm->lkm", phases, model.g)


def spectral_density(model: MovingAverageModel, lambdas) -> list[SpectralDensitySample]:
    """``f(lam) = G(lam) G(lam)^*`` with ``G(lam) = sum_s g(s) exp(-i s lam)``."""
    lambdas = np.atleast_1d(np.asarray(lambdas, dtype=float))
    G = _transfer(model, lambdas)
    f = G @ G.conj().transpose(0, 2, 1)
    return [SpectralDensitySample(float(lam), f[i], G[i]) for i, lam in enumerate(lambdas)]


def verify_factorization(samples) -> float:
    """Largest Frobenius residual ``|f - G G^*|`` over the samples."""
    worst = 0.0
    for smp in samples:
        worst = max(worst, float(np.linalg.norm(smp.f - smp.G @ smp.G.conj().T)))
    return worst


def psd_margin(samples) -> float:
    """Smallest eigenvalue of the Hermitian part of ``f`` over its trace, minimized over samples.

    Values above ``-1e-10`` count as positive semidefinite.
    """
    worst = math.inf
    for smp in samples:
        herm = 0.5 * (smp.f + smp.f.conj().T)
        tr = max(float(np.trace(herm).real), 1e-300)
        worst = min(worst, float(np.linalg.eigvalsh(herm)[0]) / tr)
    return worst


def trace_power(model: MovingAverageModel, grid_size: int | None = None) -> float:
    """``(1/2pi) int Tr f(lam) dlam`` by the uniform rule on ``[-pi, pi)``.

    ``Tr f`` is a trigonometric polynomial of degree ``order``, so the rule is
    exact once ``grid_size >= 2*(order+1)``.
    """
    need = 2 * (model.order + 1)
    if grid_size is None:
        grid_size = need
    if grid_size < need:
        raise ValueError(f"grid_size={grid_size} is below the exactness bound {need}")
    lambdas = -np.pi + 2 * np.pi * np.arange(grid_size) / grid_size
    G = _transfer(model, lambdas)
    return float(np.sum(np.abs(G) ** 2) / grid_size)


def quadratic_value(op: BlockOperator, model: MovingAverageModel) -> float:
    """``sum_{k,n,m,p,q} g_km(p) conj(g_nm(q)) Q_kn(p, q)``.

    For the least-favorable model this equals ``P * nu_N**2``.
    """
    if model.order != op.N or model.K != op.K:
        raise ValueError("model and operator shapes differ")
    Q = op.matrix.reshape(op.N + 1, op.K, op.N + 1, op.K)
    val = np.einsum("pkm,qnm,pkqn->", model.g, model.g.conj(), Q)
    return float(val.real)


def write_spectral_csv(samples, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["lambda", "k", "n", "real", "imag"])
        for smp in samples:
            K = smp.f.shape[0]
            for k in range(K):
                for n in range(K):
                    z = smp.f[k, n]
                    writer.writerow([repr(smp.lam), k + 1, n + 1, repr(float(z.real)), repr(float(z.imag))])
    return path
