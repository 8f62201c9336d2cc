"""The least-favorable moving average and its spectral density.

The top eigenvector of Q_N, conjugated and scaled by sqrt(P), gives the
coefficients g(0..N) of a one-sided moving average; its spectral density
f = G G^* integrates to P.
"""
import numpy as np

from pcminimax import (WeightFunction, assemble_QN, block_function, build_least_favorable,
                       fourier_coefficients, psd_margin, quadratic_value, spectral_density,
                       top_eigenpair, trace_power, verify_factorization)

P, N, K = 2.0, 4, 3
w = WeightFunction.windowed_cosine(frequency=1.5, window=5.0, amplitude=1.0)
c = fourier_coefficients(block_function(w, T=1.0, J=N + 1), K)
op = assemble_QN(c, N)
pair, gap = top_eigenpair(op)
model = build_least_favorable(pair, P, N, K)

print("nu_N^2 = %.10f, minimax value P*nu_N^2 = %.10f" % (pair.value, P * pair.value))
print("quadratic form of the model    = %.10f" % quadratic_value(op, model))
print("sum |g(p)|^2 = %.12f, trace power = %.12f" % (model.power(), trace_power(model)))

lam = np.linspace(-np.pi, np.pi, 9, endpoint=False)
samples = spectral_density(model, lam)
print("factorization residual %.1e, psd margin %.1e" % (verify_factorization(samples), psd_margin(samples)))
for s in samples:
    print("lambda=%+.3f  Tr f=%.6f" % (s.lam, np.trace(s.f).real))
