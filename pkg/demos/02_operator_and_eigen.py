"""Assembling Q_N and finding its greatest eigenvalue.

Q_N is Hermitian and positive semidefinite; it factors as A A^* with a
block-Hankel A, so power iteration never needs the explicit matrix.
"""
import math

import numpy as np

from pcminimax import (FourierBlockCoefficients, assemble_DN, assemble_QN, dense_hermitian_eigen,
                       power_iteration, top_eigenpair)

# scalar fixture a = (1, 1): Q_1 = [[2, 1], [1, 1]], top eigenvalue (3 + sqrt 5) / 2
c = FourierBlockCoefficients([[1.0, 1.0]])
op = assemble_QN(c, 1)
print(op.matrix.real)
pair = power_iteration(op)
print("power iteration: %.15f after %d steps" % (pair.value, pair.iterations))
print("golden value:    %.15f" % ((3 + math.sqrt(5)) / 2))

# the mirrored matrix D_N carries the same blocks in reverse order
D = assemble_DN(c, 1)
print("D_1 =", D.matrix.real.tolist())

# a complex K=3 example checked against the Jacobi oracle
rng = np.random.default_rng(0)
c = FourierBlockCoefficients(rng.standard_normal((3, 6)) + 1j * rng.standard_normal((3, 6)))
op = assemble_QN(c, 5)
spectrum = dense_hermitian_eigen(op)
pair, gap = top_eigenpair(op)
print("dim %d: power %.12f, oracle %.12f, gap %.4f" % (op.dim, pair.value, spectrum[0].value, gap))
print("Rayleigh trace (first 5):", [round(r, 8) for _, r, _ in pair.trace[:5]])
