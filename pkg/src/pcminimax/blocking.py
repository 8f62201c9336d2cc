"""Blocking of a weight function into period-T pieces and their Fourier coefficients.

A weight ``a(t)`` on ``[0, inf)`` is cut into blocks ``a_j(u) = a(u + j*T)``,
``u in [0, T)``, and every block is expanded in the orthonormal exponential
basis

    e_k(u) = T**-0.5 * exp(2j*pi*m(k)*u/T),   m(k) = (-1)**k * (k // 2),

so that k = 1, 2, 3, 4, 5, ... carries the frequencies 0, +1, -1, +2, -2, ...
Coefficients are stored as a complex ``(K, J)`` array with row ``k - 1`` and
column ``j``.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

__all__ = [
    "WeightFunction",
    "BlockedFunction",
    "FourierBlockCoefficients",
    "TailModel",
    "AdmissibilityReport",
    "frequency_map",
    "block_function",
    "fourier_coefficients",
    "check_summability",
    "load_weight_csv",
]

KINDS = (
    "sampled-grid",
    "piecewise-constant",
    "exponential-decay",
    "windowed-cosine",
    "indicator",
)


def frequency_map(K: int) -> np.ndarray:
    """Integer frequencies ``m(k)`` for basis indices ``k = 1..K``."""
    k = np.arange(1, K + 1)
    return ((-1) ** k) * (k // 2)


def _exp_integral(alpha: np.ndarray, lo: float, hi: float) -> np.ndarray:
    """Integral of ``exp(alpha*u)`` over ``[lo, hi]`` for complex ``alpha``."""
    alpha = np.asarray(alpha, dtype=complex)
    width = hi - lo
    if width <= 0.0:
        return np.zeros_like(alpha)
    out = np.empty_like(alpha)
    small = np.abs(alpha * width) < 1e-8
    a = alpha[~small]
    out[~small] = np.exp(a * lo) * np.expm1(a * width) / a
    # second-order Taylor keeps the small-alpha branch at double precision
    a = alpha[small]
    out[small] = np.exp(a * lo) * width * (1.0 + a * width / 2.0 + (a * width) ** 2 / 6.0)
    return out


@dataclass(frozen=True)
class WeightFunction:
    """Time-domain weight ``a(t)``, ``t >= 0``.

    Use the classmethod constructors rather than filling ``params`` by hand.
    ``support_end`` is ``inf`` for weights without compact support.
    """

    kind: str
    params: dict = field(default_factory=dict)
    support_end: float = math.inf

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}; expected one of {KINDS}")

    # ---- constructors -------------------------------------------------
    @classmethod
    def exponential_decay(cls, rate: float, amplitude: float = 1.0) -> "WeightFunction":
        if rate <= 0:
            raise ValueError("exponential-decay needs rate > 0")
        return cls("exponential-decay", {"rate": float(rate), "amplitude": float(amplitude)})

    @classmethod
    def windowed_cosine(cls, frequency: float, window: float, amplitude: float = 1.0,
                        phase: float = 0.0) -> "WeightFunction":
        """``amplitude * cos(2*pi*frequency*t + phase)`` on ``[0, window)``."""
        if not window > 0 or not math.isfinite(window):
            raise ValueError("windowed-cosine needs a finite window > 0")
        params = {"frequency": float(frequency), "window": float(window),
                  "amplitude": float(amplitude), "phase": float(phase)}
        return cls("windowed-cosine", params, support_end=float(window))

    @classmethod
    def indicator(cls, start: float, end: float, amplitude: float = 1.0) -> "WeightFunction":
        if not 0 <= start < end or not math.isfinite(end):
            raise ValueError("indicator needs 0 <= start < end < inf")
        return cls("indicator", {"start": float(start), "end": float(end),
                                 "amplitude": float(amplitude)}, support_end=float(end))

    @classmethod
    def piecewise_constant(cls, breaks: Sequence[float], values: Sequence[float]) -> "WeightFunction":
        """``values[i]`` on ``[breaks[i], breaks[i+1])``, zero elsewhere."""
        breaks = np.asarray(breaks, dtype=float)
        values = np.asarray(values, dtype=float)
        if breaks.ndim != 1 or len(breaks) != len(values) + 1:
            raise ValueError("piecewise-constant needs len(breaks) == len(values) + 1")
        if breaks[0] < 0 or np.any(np.diff(breaks) <= 0) or not np.isfinite(breaks[-1]):
            raise ValueError("breaks must be finite, nonnegative and strictly increasing")
        return cls("piecewise-constant", {"breaks": breaks, "values": values},
                   support_end=float(breaks[-1]))

    @classmethod
    def sampled_grid(cls, t: Sequence[float], values: Sequence[float]) -> "WeightFunction":
        """Linear interpolation of samples on a uniform grid; zero past the last sample."""
        t = np.asarray(t, dtype=float)
        values = np.asarray(values, dtype=float)
        if t.ndim != 1 or t.shape != values.shape or len(t) < 2:
            raise ValueError("sampled-grid needs matching 1-d t and values with >= 2 samples")
        step = np.diff(t)
        if step[0] <= 0 or not np.allclose(step, step[0], rtol=1e-9, atol=0):
            raise ValueError("sampled-grid needs a uniform, increasing time grid")
        if t[0] < 0:
            raise ValueError("sampled-grid times must be >= 0")
        return cls("sampled-grid", {"t": t, "values": values, "step": float(step[0])},
                   support_end=float(t[-1]))

    # ---- evaluation ---------------------------------------------------
    def __call__(self, t, side: str = "right") -> np.ndarray:
        """Evaluate ``a(t)``. ``side="left"`` returns left limits at jumps."""
        t = np.asarray(t, dtype=float)
        if np.any(t < 0):
            raise ValueError("weight functions are defined for t >= 0 only")
        p = self.params
        if self.kind == "exponential-decay":
            return p["amplitude"] * np.exp(-p["rate"] * t)
        if self.kind == "windowed-cosine":
            inside = _in_interval(t, 0.0, p["window"], side)
            return np.where(inside, p["amplitude"] * np.cos(2 * np.pi * p["frequency"] * t + p["phase"]), 0.0)
        if self.kind == "indicator":
            return np.where(_in_interval(t, p["start"], p["end"], side), p["amplitude"], 0.0)
        if self.kind == "piecewise-constant":
            out = np.zeros_like(t)
            for lo, hi, v in zip(p["breaks"][:-1], p["breaks"][1:], p["values"]):
                out = np.where(_in_interval(t, lo, hi, side), v, out)
            return out
        # sampled-grid
        grid, vals = p["t"], p["values"]
        inside = (t >= grid[0]) & (t <= grid[-1])
        return np.where(inside, np.interp(t, grid, vals), 0.0)

    def l1_norm(self) -> float:
        """``int_0^inf |a(t)| dt``."""
        p = self.params
        if self.kind == "exponential-decay":
            return abs(p["amplitude"]) / p["rate"]
        if self.kind == "indicator":
            return abs(p["amplitude"]) * (p["end"] - p["start"])
        if self.kind == "piecewise-constant":
            return float(np.sum(np.abs(p["values"]) * np.diff(p["breaks"])))
        # oscillating or sampled kinds: dense trapezoid is adequate for a bound check
        t = np.linspace(0.0, self.support_end, 20001)
        return float(np.trapezoid(np.abs(self(t)), t))

    def check_integrable(self, bound: float = 1e6) -> float:
        norm = self.l1_norm()
        if not math.isfinite(norm) or norm > bound:
            raise ValueError(f"weight is not integrable within bound {bound}: |a|_1 = {norm}")
        return norm

    # ---- closed-form block coefficients ---------------------------------
    @property
    def has_closed_form(self) -> bool:
        return self.kind != "sampled-grid"

    def block_coefficients(self, j: int, T: float, freqs: np.ndarray) -> np.ndarray:
        """Exact ``<a_j, e_k>`` for every frequency in ``freqs``."""
        omega = -2j * np.pi * np.asarray(freqs, dtype=float) / T
        scale = T ** -0.5
        p = self.params
        t0 = j * T
        if self.kind == "exponential-decay":
            r = p["rate"]
            return scale * p["amplitude"] * np.exp(-r * t0) * _exp_integral(omega - r, 0.0, T)
        if self.kind == "windowed-cosine":
            nu = 2 * np.pi * p["frequency"]
            hi = min(T, p["window"] - t0)
            plus = np.exp(1j * (nu * t0 + p["phase"])) * _exp_integral(omega + 1j * nu, 0.0, hi)
            minus = np.exp(-1j * (nu * t0 + p["phase"])) * _exp_integral(omega - 1j * nu, 0.0, hi)
            return scale * p["amplitude"] * 0.5 * (plus + minus)
        if self.kind == "indicator":
            pieces = [(p["start"], p["end"], p["amplitude"])]
        else:
            pieces = zip(p["breaks"][:-1], p["breaks"][1:], p["values"])
        out = np.zeros(len(omega), dtype=complex)
        for lo, hi, v in pieces:
            lo_u, hi_u = max(0.0, lo - t0), min(T, hi - t0)
            if hi_u > lo_u:
                out += v * _exp_integral(omega, lo_u, hi_u)
        return scale * out


def _in_interval(t, lo, hi, side):
    if side == "left":
        return (t > lo) & (t <= hi)
    return (t >= lo) & (t < hi)


@dataclass(frozen=True)
class BlockedFunction:
    """``a`` cut into ``J`` blocks of length ``period_T``."""

    weight: WeightFunction
    period_T: float
    J: int

    def evaluate(self, j: int, u, side: str = "right") -> np.ndarray:
        if not 0 <= j < self.J:
            raise IndexError(f"block {j} outside 0..{self.J - 1}")
        return self.weight(np.asarray(u, dtype=float) + j * self.period_T, side=side)

    @property
    def blocks(self) -> list[Callable]:
        return [lambda u, j=j, **kw: self.evaluate(j, u, **kw) for j in range(self.J)]

    def is_zero_block(self, j: int) -> bool:
        return j * self.period_T >= self.weight.support_end


def block_function(a: WeightFunction, T: float, J: int) -> BlockedFunction:
    """Cut ``a`` into ``J`` period-``T`` blocks."""
    if not T > 0 or not math.isfinite(T):
        raise ValueError(f"period T must be a positive finite number, got {T}")
    if int(J) != J or J < 1:
        raise ValueError(f"block count J must be a positive integer, got {J}")
    # fail early if the weight cannot be evaluated at the block origins
    probe = a(np.arange(J) * T)
    if not np.all(np.isfinite(probe)):
        raise ValueError("weight function evaluates to a non-finite value")
    return BlockedFunction(a, float(T), int(J))


@dataclass
class FourierBlockCoefficients:
    """Coefficients ``a_{kj}``; ``coeffs[k-1, j]``."""

    coeffs: np.ndarray
    period_T: float = 1.0

    def __post_init__(self):
        self.coeffs = np.atleast_2d(np.asarray(self.coeffs, dtype=complex))
        if self.coeffs.ndim != 2:
            raise ValueError("coefficients must be a (K, J) array")

    @classmethod
    def from_blocks(cls, blocks: Sequence, period_T: float = 1.0) -> "FourierBlockCoefficients":
        """Build from a list of per-block vectors ``a_j`` (each of length K)."""
        return cls(np.column_stack([np.atleast_1d(b) for b in blocks]), period_T)

    @property
    def K(self) -> int:
        return self.coeffs.shape[0]

    @property
    def J(self) -> int:
        return self.coeffs.shape[1]

    @property
    def frequency_map(self) -> np.ndarray:
        return frequency_map(self.K)

    def block(self, j: int) -> np.ndarray:
        return self.coeffs[:, j]

    def block_norms(self) -> np.ndarray:
        return np.linalg.norm(self.coeffs, axis=0)

    def is_real(self) -> bool:
        return bool(np.all(self.coeffs.imag == 0))

    def scaled(self, c: float) -> "FourierBlockCoefficients":
        return FourierBlockCoefficients(self.coeffs * c, self.period_T)

    def truncation_residuals(self, last: int = 2) -> np.ndarray:
        """Norms of the last ``last`` retained blocks."""
        return self.block_norms()[-last:]


def fourier_coefficients(bf: BlockedFunction, K: int, quad_nodes: int | None = None,
                         method: str = "auto") -> FourierBlockCoefficients:
    """Project every block onto the first ``K`` basis functions.

    Parameters
    ----------
    bf : BlockedFunction
    K : int
        Number of basis functions.
    quad_nodes : int, optional
        Trapezoid intervals per block, must be at least ``2*K``.
        Defaults to ``max(256, 8*K)``.
    method : {"auto", "exact", "quadrature"}
        ``"auto"`` uses closed forms whenever the weight kind has one.
    """
    if int(K) != K or K < 1:
        raise ValueError(f"K must be a positive integer, got {K}")
    if quad_nodes is None:
        quad_nodes = max(256, 8 * K)
    if quad_nodes < 2 * K:
        raise ValueError(f"quad_nodes={quad_nodes} is below the 2K={2 * K} safeguard")
    if method not in ("auto", "exact", "quadrature"):
        raise ValueError(f"unknown method {method!r}")
    exact = method == "exact" or (method == "auto" and bf.weight.has_closed_form)
    if exact and not bf.weight.has_closed_form:
        raise ValueError(f"no closed form for weight kind {bf.weight.kind!r}")

    T = bf.period_T
    freqs = frequency_map(K)
    coeffs = np.zeros((K, bf.J), dtype=complex)
    if not exact:
        u = np.linspace(0.0, T, quad_nodes + 1)
        w = np.full(quad_nodes + 1, T / quad_nodes)
        w[0] = w[-1] = T / (2 * quad_nodes)
        basis = np.exp(-2j * np.pi * np.outer(freqs, u) / T) * (w * T ** -0.5)
    for j in range(bf.J):
        if bf.is_zero_block(j):
            continue
        if exact:
            coeffs[:, j] = bf.weight.block_coefficients(j, T, freqs)
        else:
            vals = bf.evaluate(j, u[:-1])
            vals = np.append(vals, bf.evaluate(j, u[-1:], side="left"))
            coeffs[:, j] = basis @ vals
    return FourierBlockCoefficients(coeffs, T)


@dataclass(frozen=True)
class TailModel:
    """Decay hint for the block norms beyond the truncation.

    ``kind="geometric"``: ``|a_j| ~ C * rate**j`` (0 < rate < 1).
    ``kind="power"``: ``|a_j| ~ C * (j+1)**-rate``.
    ``kind="none"``: no extrapolation, partial sums only.
    """

    kind: str = "none"
    rate: float = 0.0

    def __post_init__(self):
        if self.kind not in ("none", "geometric", "power"):
            raise ValueError(f"unknown tail model {self.kind!r}")
        if self.kind == "geometric" and not 0 <= self.rate < 1:
            raise ValueError("geometric tail needs 0 <= rate < 1")


@dataclass
class AdmissibilityReport:
    block_norms: np.ndarray
    sum_norms: float
    sum_weighted_sq: float
    tail_sum_norms: float
    tail_weighted_sq: float
    passed: bool
    diagnosis: str = ""

    @property
    def total_sum_norms(self) -> float:
        return self.sum_norms + self.tail_sum_norms

    @property
    def total_weighted_sq(self) -> float:
        return self.sum_weighted_sq + self.tail_weighted_sq


def check_summability(c: FourierBlockCoefficients, tail_model: TailModel | None = None,
                      bounds: tuple[float, float] = (1e6, 1e6)) -> AdmissibilityReport:
    """Partial sums of ``|a_j|`` and ``(j+1)|a_j|**2`` with a tail estimate.

    Never raises; a divergent tail or an exceeded bound shows up as
    ``passed=False`` with a diagnosis string.
    """
    tail_model = tail_model or TailModel()
    norms = c.block_norms()
    J = len(norms)
    j = np.arange(J)
    s1 = float(np.sum(norms))
    s2 = float(np.sum((j + 1) * norms ** 2))
    last = norms[-1]
    t1 = t2 = 0.0
    problems = []
    if tail_model.kind == "geometric" and last > 0:
        r = tail_model.rate
        # anchored at the last retained block: |a_{J-1+i}| = last * r**i
        t1 = last * r / (1 - r)
        r2 = r * r
        # sum_{i>=1} (J+i) r2**i
        t2 = last ** 2 * (J * r2 / (1 - r2) + r2 / (1 - r2) ** 2)
    elif tail_model.kind == "power" and last > 0:
        alpha = tail_model.rate
        if alpha <= 1:
            t1 = math.inf
            problems.append(f"sum |a_j| diverges: power tail exponent {alpha} <= 1")
        else:
            # integral bound of C (j+1)**-alpha from J+1
            C = last * J ** alpha
            t1 = C * (J + 1) ** (1 - alpha) / (alpha - 1)
        if 2 * alpha - 1 <= 1:
            t2 = math.inf
            problems.append(f"sum (j+1)|a_j|^2 diverges: power tail exponent {alpha} <= 1")
        else:
            C = last * J ** alpha
            t2 = C ** 2 * (J + 1) ** (2 - 2 * alpha) / (2 * alpha - 2)
    if s1 + t1 > bounds[0]:
        problems.append(f"sum |a_j| = {s1 + t1} exceeds bound {bounds[0]}")
    if s2 + t2 > bounds[1]:
        problems.append(f"sum (j+1)|a_j|^2 = {s2 + t2} exceeds bound {bounds[1]}")
    return AdmissibilityReport(norms, s1, s2, t1, t2, not problems, "; ".join(problems))


def load_weight_csv(path) -> WeightFunction:
    """Read a ``t,value`` CSV on a uniform grid into a sampled-grid weight."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        header = [h.strip() for h in next(reader)]
        if header != ["t", "value"]:
            raise ValueError(f"{path}: expected header 't,value', got {','.join(header)!r}")
        rows = [(float(r[0]), float(r[1])) for r in reader if r]
    t, v = zip(*rows) if rows else ((), ())
    return WeightFunction.sampled_grid(t, v)
