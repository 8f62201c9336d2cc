"""Acceptance gate: one PASS/FAIL line per criterion.

Run ``pytest tests/test_acceptance.py -s`` to see the lines inline; they are
also repeated in the terminal summary.
"""
import math
import time

import numpy as np

from conftest import brute_force_QN
from pcminimax.blocking import (FourierBlockCoefficients, TailModel, WeightFunction, block_function,
                                fourier_coefficients)
from pcminimax.cli import cmd_verify, parse_config
from pcminimax.eigensolve import dense_hermitian_eigen, power_iteration
from pcminimax.leastfav import build_least_favorable, quadratic_value, trace_power
from pcminimax.montecarlo import (empirical_pc_covariance, mc_mse, simulate_innovations,
                                  synthesize_pc_path, upper_bound_grid)
from pcminimax.operator import assemble_DN, assemble_QN, hankel_tail_norm, truncation_defect_bound

GOLDEN = (3 + math.sqrt(5)) / 2


def least_favorable(c, N, P):
    op = assemble_QN(c, N)
    top = dense_hermitian_eigen(op)[0]
    return op, top, build_least_favorable(top, P, N, c.K)


def test_c01_operator_brute_force(corpus, report_criterion):
    start = time.perf_counter()
    worst = 0.0
    for c, N in corpus:
        worst = max(worst, float(np.max(np.abs(assemble_QN(c, N).matrix - brute_force_QN(c.coeffs, N)))))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-14 and elapsed < 5.0
    assert report_criterion(1, "operator vs brute force", ok,
                            f"max abs error {worst:.2e} (<= 1e-14), {elapsed:.2f}s (< 5s)")


def test_c02_mirror_identity(corpus, report_criterion):
    exact = True
    worst = 0.0
    for c, N in corpus:
        Q = assemble_QN(c, N)
        D = assemble_DN(c, N)
        for p in range(N + 1):
            for q in range(N + 1):
                exact &= bool(np.array_equal(D.block(N - p, N - q), Q.block(p, q)))
        eq = np.linalg.eigvalsh(Q.matrix)
        ed = np.linalg.eigvalsh(D.matrix)
        worst = max(worst, float(np.max(np.abs(eq - ed))))
    ok = exact and worst <= 1e-10
    assert report_criterion(2, "mirror identity", ok,
                            f"blocks bit-identical={exact}, spectra max diff {worst:.2e} (<= 1e-10)")


def test_c03_eigensolver_oracle(corpus, report_criterion):
    worst = 0.0
    for c, N in corpus:
        op = assemble_QN(c, N)
        oracle = dense_hermitian_eigen(op)[0].value
        pair = power_iteration(op)
        worst = max(worst, abs(pair.value - oracle) / oracle)
    fixture = power_iteration(np.array([[2.0, 1.0], [1.0, 1.0]])).value
    fixture_err = abs(fixture - GOLDEN)
    ok = worst <= 1e-9 and fixture_err <= 1e-10
    assert report_criterion(3, "power iteration vs dense oracle", ok,
                            f"max rel error {worst:.2e} (<= 1e-9), fixture error {fixture_err:.2e} (<= 1e-10)")


def test_c04_value_chain(corpus, report_criterion):
    worst = 0.0
    P = 3.0
    for c, N in corpus:
        op = assemble_QN(c, N)
        pair = power_iteration(op)
        model = build_least_favorable(pair, P, N, c.K)
        target = P * pair.value
        worst = max(worst, abs(quadratic_value(op, model) - target) / target)
    ok = worst <= 1e-10
    assert report_criterion(4, "quadratic form equals P*nu_N^2", ok, f"max rel error {worst:.2e} (<= 1e-10)")


def _mc_fixtures():
    scalar = FourierBlockCoefficients([[1.0, 1.0]])
    rng = np.random.default_rng(77)
    rand = FourierBlockCoefficients(rng.standard_normal((2, 4)) + 1j * rng.standard_normal((2, 4)))
    bf = block_function(WeightFunction.exponential_decay(math.log(2.0)), 1.0, 9)
    geo = fourier_coefficients(bf, 2)
    return [("scalar N=1", scalar, 1), ("random K=2 N=3", rand, 3), ("geometric decay N=8", geo, 8)]


def test_c05_monte_carlo_saddle(report_criterion):
    lines = []
    ok = True
    for i, (name, c, N) in enumerate(_mc_fixtures()):
        start = time.perf_counter()
        op = assemble_QN(c, N)
        pair = power_iteration(op)
        model = build_least_favorable(pair, 1.0, N, c.K)
        rep = mc_mse(model, c, N, 100_000, seed=2024 + i, target=pair.value)
        elapsed = time.perf_counter() - start
        ok &= rep.passed(4.0) and elapsed < 60.0
        lines.append(f"{name} z={rep.z_score:+.2f} in {elapsed:.1f}s")
    assert report_criterion(5, "Monte Carlo MSE within 4 SE at 1e5 replicates", ok, "; ".join(lines))


def test_c06_power_normalization(corpus, report_criterion):
    worst = 0.0
    P = 0.7
    for c, N in corpus:
        _, _, model = least_favorable(c, N, P)
        worst = max(worst, abs(trace_power(model) - P) / P)
    ok = worst <= 1e-12
    assert report_criterion(6, "trace power equals P", ok, f"max rel error {worst:.2e} (<= 1e-12)")


def test_c07_upper_bound(corpus, report_criterion):
    worst = -math.inf
    P = 2.0
    for c, N in corpus:
        nu2 = dense_hermitian_eigen(assemble_QN(c, N))[0].value
        bound = upper_bound_grid(c, N, 4096)
        worst = max(worst, (P * nu2 - P * bound) / (P * bound))
    ok = worst <= 1e-12
    assert report_criterion(7, "P*nu_N^2 below the grid bound", ok,
                            f"max (value-bound)/bound {worst:.2e} (<= 0 up to rounding)")


def test_c08_convergence_sweep(report_criterion):
    bf = block_function(WeightFunction.exponential_decay(math.log(2.0)), 1.0, 25)
    c = fourier_coefficients(bf, 3)
    tail = TailModel("geometric", 0.5)
    Ns = [2, 4, 8, 16, 24]
    nu2 = {N: power_iteration(assemble_QN(c, N)).value for N in Ns}
    rel = abs(nu2[16] - nu2[24]) / nu2[24]
    monotone = all(nu2[a] <= nu2[b] * (1 + 1e-12) for a, b in zip(Ns, Ns[1:]))
    within = all(nu2[24] - nu2[N] <= truncation_defect_bound(nu2[N], hankel_tail_norm(c, N, tail))
                 for N in Ns[:-1])
    ok = rel < 1e-6 and monotone and within
    assert report_criterion(8, "nu_N^2 converges for 2^-j decay", ok,
                            f"|nu16-nu24|/nu24 = {rel:.2e} (< 1e-6), nondecreasing={monotone}, "
                            f"within tail bound={within}")


def test_c09_pc_periodicity(report_criterion):
    rng = np.random.default_rng(5)
    c = FourierBlockCoefficients(rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)))
    _, _, model = least_favorable(c, 1, 1.0)
    noise = simulate_innovations(99, -model.order, 2, replicates=10_000)
    paths = synthesize_pc_path(model, 1.0, noise, 0, 2, u_grid=8)
    cov = empirical_pc_covariance(paths)
    ok = cov.max_z <= 5.0
    assert report_criterion(9, "PC covariance periodic", ok,
                            f"max defect {cov.defect:.2e}, worst |defect|/SE {cov.max_z:.2f} (<= 5)")


def test_c10_verify_determinism(tmp_path, report_criterion):
    rng = np.random.default_rng(6)
    a = rng.standard_normal((2, 4))
    raw = {"weight": {"kind": "coefficients", "real": a.tolist(), "imag": (0.5 * a[:, ::-1]).tolist()},
           "K": 2, "J": 4, "N": 3, "P": 1.0, "montecarlo": {"replicates": 100_000, "seed": 3}}
    cfg = parse_config(raw, tmp_path)
    cmd_verify(cfg, tmp_path / "t1", threads=1)
    cmd_verify(cfg, tmp_path / "t4", threads=4)
    one = (tmp_path / "t1" / "verify.json").read_bytes()
    four = (tmp_path / "t4" / "verify.json").read_bytes()
    ok = one == four
    assert report_criterion(10, "verify report independent of threads", ok,
                            f"byte-identical={ok} ({len(one)} bytes)")
