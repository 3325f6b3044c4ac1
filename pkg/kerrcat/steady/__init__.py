from kerrcat.steady.exact import (
    FSeries, SteadyStateResult, reduced_params, steady_density_matrix, steady_moment, steady_wigner,
    steady_wigner_grid,
)
from kerrcat.steady.hypergeometric import FCoefficientTable, ReducedParams, f_coefficients, hyp2f1_neg_int

__all__ = [
    'FSeries', 'SteadyStateResult', 'reduced_params', 'steady_density_matrix', 'steady_moment',
    'steady_wigner', 'steady_wigner_grid', 'FCoefficientTable', 'ReducedParams', 'f_coefficients',
    'hyp2f1_neg_int',
]
