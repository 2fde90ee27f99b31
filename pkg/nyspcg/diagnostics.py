from . import _nyspcg as _module

# spectral quantities
effective_dimension = _module.effective_dimension
p_stable_rank = _module.p_stable_rank
recommended_sketch_size = _module.recommended_sketch_size
sketch_and_solve_sketch_size = _module.sketch_and_solve_sketch_size

# condition numbers
ConditionBounds = _module.ConditionBounds
condition_bounds = _module.condition_bounds
exact_condition_number = _module.exact_condition_number
preconditioned_matrix = _module.preconditioned_matrix

# inverse discrepancies
expected_inverse_error_bound = _module.expected_inverse_error_bound
inverse_perturbation_bound = _module.inverse_perturbation_bound
optimal_inverse_discrepancy = _module.optimal_inverse_discrepancy

# sketch size lemma
LemmaCheck = _module.LemmaCheck
LemmaViolation = _module.LemmaViolation
key_lemma_check = _module.key_lemma_check
