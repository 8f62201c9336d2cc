"""Convergence of nu_N^2 as the horizon grows.

For block norms decaying like 2^-j the truncated values settle quickly; the
gap to the next horizon stays under the bound built from the dropped Hankel
entries.
"""
import math

from pcminimax import (TailModel, WeightFunction, assemble_QN, block_function, fourier_coefficients,
                       hankel_tail_norm, power_iteration, truncation_defect_bound)

c = fourier_coefficients(block_function(WeightFunction.exponential_decay(math.log(2.0)), T=1.0, J=25), 3)
tail = TailModel("geometric", 0.5)

prev = None
print("%4s %20s %12s %12s" % ("N", "nu_N^2", "delta", "bound"))
for N in (2, 4, 8, 16, 24):
    nu2 = power_iteration(assemble_QN(c, N)).value
    bound = truncation_defect_bound(nu2, hankel_tail_norm(c, N, tail))
    delta = float("nan") if prev is None else nu2 - prev
    print("%4d %20.15f %12.3e %12.3e" % (N, nu2, delta, bound))
    prev = nu2
