"""Blocking a weight function into per-period Fourier coefficients.

A weight a(t) on [0, inf) is cut into blocks a_j(u) = a(u + jT), u in [0, T),
and each block is expanded in the basis exp(2 pi i m u / T) / sqrt(T) with
frequencies ordered 0, +1, -1, +2, ...
"""
import math

import numpy as np

from pcminimax import (TailModel, WeightFunction, block_function, check_summability,
                       fourier_coefficients, frequency_map)

T, J, K = 1.0, 8, 5

# exponential decay: block norms fall off like exp(-rate*T) per block
w = WeightFunction.exponential_decay(rate=math.log(2.0))
c = fourier_coefficients(block_function(w, T=T, J=J), K)

print("frequencies:", frequency_map(K))
print("block norms:", np.round(c.block_norms(), 6))
print("ratio of successive norms:", np.round(c.block_norms()[1:] / c.block_norms()[:-1], 6))

# the closed form and the trapezoid rule agree
bf = block_function(w, T=T, J=J)
exact = fourier_coefficients(bf, K, method="exact").coeffs
quad = fourier_coefficients(bf, K, quad_nodes=2 ** 14, method="quadrature").coeffs
print("closed form vs trapezoid, max diff: %.2e" % np.max(np.abs(exact - quad)))

# summability with the geometric tail extrapolated past block J-1
rep = check_summability(c, TailModel("geometric", 0.5))
print("sum |a_j| = %.6f, sum (j+1)|a_j|^2 = %.6f, passed=%s"
      % (rep.total_sum_norms, rep.total_weighted_sq, rep.passed))

# a harmonic tail is flagged rather than silently accepted
slow = fourier_coefficients(block_function(WeightFunction.sampled_grid(
    np.linspace(0, 20, 2001), 1 / (1 + np.linspace(0, 20, 2001))), T, 20), 1)
print("harmonic tail:", check_summability(slow, TailModel("power", 1.0)).diagnosis)
