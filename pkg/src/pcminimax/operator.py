"""Hermitian block operators built from block Fourier coefficients.

Flat layout is block-major: row/column ``p*K + (k-1)`` addresses block ``p``,
basis index ``k``.  Every operator is kept in two forms:

* ``matrix``: the explicit Hermitian array,
* ``factor``: a block-Hankel array ``A`` with ``Q = A @ A.conj().T`` whose
  column ``s`` holds the stacked vectors ``a_{p+s}``, ``p = 0..N``.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .blocking import FourierBlockCoefficients, TailModel, check_summability

__all__ = [
    "BlockOperator",
    "MirrorMatrix",
    "hankel_factor",
    "assemble_QN",
    "assemble_DN",
    "assemble_Q_truncated",
    "matvec",
    "flat_index",
    "write_operator_csv",
    "hankel_tail_norm",
    "truncation_defect_bound",
]


def flat_index(p: int, k: int, K: int) -> int:
    """Flat position of block ``p``, basis index ``k`` (1-based)."""
    return p * K + (k - 1)


@dataclass
class BlockOperator:
    """``(N+1)K``-dimensional Hermitian PSD operator with its Hankel factor."""

    N: int
    K: int
    matrix: np.ndarray
    factor: np.ndarray

    @property
    def dim(self) -> int:
        return (self.N + 1) * self.K

    def block(self, p: int, q: int) -> np.ndarray:
        K = self.K
        return self.matrix[p * K:(p + 1) * K, q * K:(q + 1) * K]

    def frobenius_norm(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def max_row_sum(self) -> float:
        return float(np.max(np.sum(np.abs(self.matrix), axis=1))) if self.dim else 0.0


@dataclass
class MirrorMatrix:
    """Block matrix with ``D(p, q) = sum_s a_{N-p+s} a_{N-q+s}^*``."""

    N: int
    K: int
    matrix: np.ndarray

    def block(self, p: int, q: int) -> np.ndarray:
        K = self.K
        return self.matrix[p * K:(p + 1) * K, q * K:(q + 1) * K]


def _check_horizon(c: FourierBlockCoefficients, N: int, what: str = "N") -> None:
    if int(N) != N or N < 0:
        raise ValueError(f"{what} must be a nonnegative integer, got {N}")
    if N + 1 > c.J:
        raise ValueError(f"{what}={N} needs {N + 1} coefficient blocks, only {c.J} available")


def hankel_factor(coeffs: np.ndarray, rows: int, last: int) -> np.ndarray:
    """Block-Hankel factor with ``rows`` block rows using blocks ``0..last``.

    Entry ``[p*K + k, s]`` is ``coeffs[k, p+s]`` when ``p + s <= last`` and 0
    otherwise; there are ``last + 1`` columns.
    """
    K = coeffs.shape[0]
    A = np.zeros((rows * K, last + 1), dtype=complex)
    for p in range(rows):
        width = last + 1 - p
        if width > 0:
            A[p * K:(p + 1) * K, :width] = coeffs[:, p:last + 1]
    return A


def _block_sums(coeffs: np.ndarray, rows: int, last: int, mirror: bool = False) -> np.ndarray:
    """Explicit ``sum_s a_{p+s} a_{q+s}^*`` over ``p+s, q+s <= last``, blocks ``p, q < rows``.

    Terms are accumulated in ascending ``s`` so that Hermitian symmetry and the
    mirror relation hold bit for bit.  ``mirror=True`` stores block ``(p, q)``
    at position ``(last-p, last-q)`` while computing it from the mirrored indices.
    """
    K = coeffs.shape[0]
    out = np.zeros((rows * K, rows * K), dtype=complex)
    for P in range(rows):
        for Qb in range(rows):
            p, q = (last - P, last - Qb) if mirror else (P, Qb)
            block = np.zeros((K, K), dtype=complex)
            for s in range(last - max(p, q) + 1):
                block += np.outer(coeffs[:, p + s], coeffs[:, q + s].conj())
            out[P * K:(P + 1) * K, Qb * K:(Qb + 1) * K] = block
    # fused multiply-adds can leave 1e-17 asymmetries; averaging with the adjoint removes them exactly
    return 0.5 * (out + out.conj().T)


def assemble_QN(c: FourierBlockCoefficients, N: int) -> BlockOperator:
    """Operator ``Q_N`` for the functional over blocks ``0..N``.

    ``Q_N[p*K + k-1, q*K + n-1] = sum_{s=0}^{min(N-p, N-q)} a_{k,s+p} conj(a_{n,s+q})``.
    """
    _check_horizon(c, N)
    A = hankel_factor(c.coeffs, N + 1, N)
    return BlockOperator(N, c.K, _block_sums(c.coeffs, N + 1, N), A)


def assemble_DN(c: FourierBlockCoefficients, N: int) -> MirrorMatrix:
    """``D_N(p, q) = sum_{s=0}^{min(p, q)} a_{N-p+s} a_{N-q+s}^*``.

    The summation range makes ``D_N(N-p, N-q) = Q_N(p, q)`` hold exactly.
    """
    _check_horizon(c, N)
    K = c.K
    a = c.coeffs
    D = np.zeros(((N + 1) * K, (N + 1) * K), dtype=complex)
    for p in range(N + 1):
        for q in range(N + 1):
            block = np.zeros((K, K), dtype=complex)
            for s in range(min(p, q) + 1):
                block += np.outer(a[:, N - p + s], a[:, N - q + s].conj())
            D[p * K:(p + 1) * K, q * K:(q + 1) * K] = block
    return MirrorMatrix(N, K, 0.5 * (D + D.conj().T))


def assemble_Q_truncated(c: FourierBlockCoefficients, P_max: int) -> BlockOperator:
    """Infinite-horizon operator restricted to blocks ``0..P_max``.

    The inner sum runs over every retained coefficient block, so it stops at
    ``s = J - 1 - max(p, q)``.
    """
    _check_horizon(c, P_max, "P_max")
    A = hankel_factor(c.coeffs, P_max + 1, c.J - 1)
    return BlockOperator(P_max, c.K, _block_sums(c.coeffs, P_max + 1, c.J - 1), A)


def matvec(op: BlockOperator, v: np.ndarray, factored: bool = True) -> np.ndarray:
    """``Q v`` through the factor (default) or the explicit matrix."""
    v = np.asarray(v, dtype=complex)
    if v.shape[0] != op.dim:
        raise ValueError(f"vector length {v.shape[0]} does not match operator dimension {op.dim}")
    if factored:
        return op.factor @ (op.factor.conj().T @ v)
    return op.matrix @ v


def write_operator_csv(op, path) -> Path:
    """Dump the explicit matrix as ``row,col,real,imag`` lines."""
    path = Path(path)
    M = op.matrix
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["row", "col", "real", "imag"])
        for r in range(M.shape[0]):
            for col in range(M.shape[1]):
                z = M[r, col]
                writer.writerow([r, col, repr(float(z.real)), repr(float(z.imag))])
    return path


def hankel_tail_norm(c: FourierBlockCoefficients, N: int, tail_model: TailModel | None = None) -> float:
    """Hilbert-Schmidt norm of the Hankel entries dropped by truncating at ``N``.

    ``sqrt(sum_{j>N} (j+1) |a_j|**2)`` over the retained blocks, plus the
    extrapolated tail past block ``J-1`` when a decay hint is given.
    """
    norms = c.block_norms()
    j = np.arange(len(norms))
    inside = float(np.sum(((j + 1) * norms ** 2)[j > N]))
    beyond = check_summability(c, tail_model).tail_weighted_sq if tail_model else 0.0
    return float(np.sqrt(inside + beyond))


def truncation_defect_bound(nu2_N: float, tail_norm: float) -> float:
    """Bound on ``|nu**2 - nu_N**2|`` given the dropped Hankel norm ``t``.

    The top eigenvalue is the squared operator norm of the Hankel factor and
    the norm moves by at most ``t``, so the defect is at most ``t*(2*nu_N + t)``.
    """
    t = tail_norm
    return float(t * (2.0 * np.sqrt(max(nu2_N, 0.0)) + t))
