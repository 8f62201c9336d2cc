"""Minimax estimation of linear functionals of periodically correlated processes.

Typical pipeline::

    bf = block_function(WeightFunction.exponential_decay(1.0), T=1.0, J=12)
    c = fourier_coefficients(bf, K=3)
    op = assemble_QN(c, N=8)
    pair = power_iteration(op)
    model = build_least_favorable(pair, P=1.0, N=8, K=3)
    report = mc_mse(model, c, N=8, replicates=100_000, seed=1)
"""
from .blocking import (AdmissibilityReport, BlockedFunction, FourierBlockCoefficients, TailModel,
                       WeightFunction, block_function, check_summability, fourier_coefficients,
                       frequency_map, load_weight_csv)
from .eigensolve import (Eigenpair, NumericalError, dense_hermitian_eigen, jacobi_eigh,
                         power_iteration, top_eigen_gap, top_eigenpair)
from .leastfav import (MovingAverageModel, SpectralDensitySample, build_least_favorable,
                       psd_margin, quadratic_value, spectral_density, trace_power,
                       verify_factorization)
from .montecarlo import (InnovationStream, MonteCarloReport, PCPathEnsemble, SequenceRealization,
                         counter_normals, empirical_pc_covariance, functional_value, mc_mse,
                         optimal_estimate, population_mse, realize_sequence, simulate_innovations,
                         synthesize_pc_path, upper_bound_grid, write_path_csv)
from .operator import (BlockOperator, MirrorMatrix, assemble_DN, assemble_Q_truncated, assemble_QN,
                       flat_index, hankel_tail_norm, matvec, truncation_defect_bound)

__version__ = "0.1.0"
