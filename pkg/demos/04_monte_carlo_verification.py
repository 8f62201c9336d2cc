"""Checking the saddle value by simulation.

Draw innovations, build the least-favorable sequence and the estimate from
past innovations, and compare the mean-square error with P * nu_N^2.  The
same model also drives a periodically correlated path whose covariance is
invariant under a shift by one period.
"""
import numpy as np

from pcminimax import (FourierBlockCoefficients, assemble_QN, build_least_favorable,
                       empirical_pc_covariance, mc_mse, population_mse, simulate_innovations,
                       synthesize_pc_path, top_eigenpair, upper_bound_grid)

rng = np.random.default_rng(3)
N, K, P = 3, 2, 1.5
c = FourierBlockCoefficients(rng.standard_normal((K, N + 1)) + 1j * rng.standard_normal((K, N + 1)))
pair, _ = top_eigenpair(assemble_QN(c, N))
model = build_least_favorable(pair, P, N, K)

print("target P*nu^2      %.8f" % (P * pair.value))
print("exact population   %.8f" % population_mse(model, c, N))
rep = mc_mse(model, c, N, replicates=100_000, seed=1, target=P * pair.value, workers=4)
print("simulated          %.8f +- %.8f  (z = %+.2f, passed=%s)" % (rep.mse, rep.stderr, rep.z_score, rep.passed()))
print("spectral bound     %.8f" % (P * upper_bound_grid(c, N)))

noise = simulate_innovations(7, -N, 2, replicates=10_000)
paths = synthesize_pc_path(model, 1.0, noise, 0, 2, u_grid=8)
cov = empirical_pc_covariance(paths)
print("periodicity defect %.3e (worst %.2f standard errors)" % (cov.defect, cov.max_z))
