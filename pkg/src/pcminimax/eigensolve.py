"""Greatest eigenvalue of the block operators.

``power_iteration`` is matrix-free (it only calls ``matvec``) and is the
production path; ``dense_hermitian_eigen`` is a cyclic Jacobi solver used as
an independent oracle on small instances.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .operator import BlockOperator, matvec

__all__ = [
    "Eigenpair",
    "NumericalError",
    "power_iteration",
    "dense_hermitian_eigen",
    "jacobi_eigh",
    "top_eigen_gap",
    "top_eigenpair",
    "write_trace_csv",
]

ORACLE_CAP = 512
JACOBI_MAX_DIM = 128
DEGENERATE_GAP = 1e-8


class NumericalError(RuntimeError):
    """Raised when an iteration produces NaN/inf."""


@dataclass
class Eigenpair:
    value: float
    vector: np.ndarray
    residual: float = 0.0
    iterations: int = 0
    converged: bool = True
    trace: list = field(default_factory=list, repr=False)
    degenerate: bool = False


def _unit_start(dim: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return v / np.linalg.norm(v)


def power_iteration(op, tol: float = 1e-10, max_iter: int | None = None,
                    seed: int = 0, factored: bool = True) -> Eigenpair:
    """Top eigenpair of a Hermitian PSD operator by power iteration.

    Stops when the Rayleigh quotient moves by at most ``tol*max(1, rho)`` and
    the residual ``|Qv - rho v|`` is at most ``sqrt(tol)*rho``.  If
    ``max_iter`` (default ``100*dim``) runs out, the last iterate is returned
    with ``converged=False``.  ``op`` may be a :class:`BlockOperator` or a
    plain Hermitian array.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if isinstance(op, BlockOperator):
        dim = op.dim
        apply = lambda v: matvec(op, v, factored=factored)  # noqa: E731
    else:
        M = np.asarray(op, dtype=complex)
        dim = M.shape[0]
        apply = lambda v: M @ v  # noqa: E731
    if max_iter is None:
        max_iter = 100 * max(dim, 1)

    v = _unit_start(dim, seed)
    w = apply(v)
    if not np.all(np.isfinite(w)):
        raise NumericalError("operator application produced non-finite values")
    rho = float(np.vdot(v, w).real)
    wnorm = float(np.linalg.norm(w))
    if wnorm == 0.0:
        return Eigenpair(0.0, v, 0.0, 1, True, [(1, 0.0, 0.0)])
    trace = []
    for it in range(1, max_iter + 1):
        v_next = w / wnorm
        w = apply(v_next)
        if not np.all(np.isfinite(w)):
            raise NumericalError(f"non-finite values at iteration {it}")
        rho_next = float(np.vdot(v_next, w).real)
        residual = float(np.linalg.norm(w - rho_next * v_next))
        trace.append((it, rho_next, residual))
        v, wnorm = v_next, float(np.linalg.norm(w))
        done = (abs(rho_next - rho) <= tol * max(1.0, rho_next)
                and residual <= math.sqrt(tol) * rho_next)
        rho = rho_next
        if done or wnorm == 0.0:
            return Eigenpair(max(rho, 0.0), v, residual, it, True, trace)
    return Eigenpair(max(rho, 0.0), v, residual, max_iter, False, trace)


def jacobi_eigh(H: np.ndarray, tol: float = 1e-12, max_sweeps: int = 60):
    """Eigen-decomposition of a Hermitian matrix by cyclic complex Jacobi rotations.

    Returns ``(values, vectors)`` in ascending order like ``numpy.linalg.eigh``.
    Sweeps stop once the off-diagonal Frobenius norm is below ``tol*|H|_F``.
    """
    A = np.array(H, dtype=complex)
    n = A.shape[0]
    V = np.eye(n, dtype=complex)
    scale = np.linalg.norm(A)
    if n < 2 or scale == 0.0:
        return np.real(np.diag(A)).copy(), V
    for _ in range(max_sweeps):
        off = float(np.linalg.norm(A - np.diag(np.diag(A))))
        if off <= tol * scale:
            break
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                mag = abs(apq)
                if mag <= 1e-300 or mag < 1e-18 * scale:
                    continue
                # phase-rotate to a real off-diagonal element, then a real Jacobi step
                phase = apq / mag
                app, aqq = A[p, p].real, A[q, q].real
                theta = (aqq - app) / (2.0 * mag)
                t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                # J acts on columns p, q: [c, s*phase; -s*conj(phase), c]
                cp = A[:, p].copy()
                cq = A[:, q]
                A[:, p] = c * cp - s * np.conj(phase) * cq
                A[:, q] = s * phase * cp + c * cq
                rp = A[p, :].copy()
                rq = A[q, :]
                A[p, :] = c * rp - s * phase * rq
                A[q, :] = s * np.conj(phase) * rp + c * rq
                A[p, q] = A[q, p] = 0.0
                vp = V[:, p].copy()
                vq = V[:, q]
                V[:, p] = c * vp - s * np.conj(phase) * vq
                V[:, q] = s * phase * vp + c * vq
    values = np.real(np.diag(A))
    order = np.argsort(values, kind="stable")
    return values[order], V[:, order]


def dense_hermitian_eigen(op, cap: int = ORACLE_CAP) -> list[Eigenpair]:
    """Full spectrum of an explicit operator, descending.

    Cyclic Jacobi up to dimension 128, LAPACK ``eigh`` from there to ``cap``
    (pure-Python rotations get too slow).
    """
    M = op.matrix if isinstance(op, BlockOperator) else np.asarray(op, dtype=complex)
    n = M.shape[0]
    if n > cap:
        raise ValueError(f"dimension {n} exceeds the dense oracle cap {cap}")
    if n <= JACOBI_MAX_DIM:
        values, vectors = jacobi_eigh(M)
    else:
        values, vectors = np.linalg.eigh(M)
    pairs = []
    for i in range(n - 1, -1, -1):
        vec = vectors[:, i]
        res = float(np.linalg.norm(M @ vec - values[i] * vec))
        pairs.append(Eigenpair(float(values[i]), vec, res, 0, True))
    return pairs


def top_eigen_gap(spectrum) -> float:
    """``lambda_1 - lambda_2`` of a descending spectrum; 0 for a single value."""
    vals = [e.value if isinstance(e, Eigenpair) else float(e) for e in spectrum]
    if not vals:
        raise ValueError("empty spectrum")
    if len(vals) == 1:
        return 0.0
    return vals[0] - vals[1]


def top_eigenpair(op: BlockOperator, tol: float = 1e-10, max_iter: int | None = None,
                  seed: int = 0, cap: int = ORACLE_CAP) -> tuple[Eigenpair, float | None]:
    """Power iteration cross-checked against the dense oracle when it fits.

    Returns the eigenpair and the top gap (``None`` above the oracle cap).  A
    degenerate top (gap below ``1e-8*lambda_1``) or a stalled iteration
    falls back to the oracle's first eigenvector, flagged on the result.
    """
    pair = power_iteration(op, tol=tol, max_iter=max_iter, seed=seed)
    if op.dim > cap:
        return pair, None
    spectrum = dense_hermitian_eigen(op, cap=cap)
    gap = top_eigen_gap(spectrum)
    lead = spectrum[0]
    degenerate = op.dim > 1 and gap < DEGENERATE_GAP * max(lead.value, 0.0)
    if (degenerate or not pair.converged) and lead.value > 0:
        return Eigenpair(max(lead.value, 0.0), lead.vector, lead.residual, pair.iterations,
                         True, pair.trace, degenerate), gap
    pair.degenerate = degenerate
    return pair, gap


def write_trace_csv(pair: Eigenpair, path) -> Path:
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(["iter", "rayleigh", "residual"])
        for it, rho, res in pair.trace:
            writer.writerow([it, repr(rho), repr(res)])
    return path
