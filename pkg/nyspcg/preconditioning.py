from . import _nyspcg as _module

NystromPreconditioner = _module.NystromPreconditioner
OptimalPreconditioner = _module.OptimalPreconditioner
Preconditioner = _module.Preconditioner
apply = _module.apply
apply_inverse = _module.apply_inverse
build_preconditioner = _module.build_preconditioner
optimal_preconditioner = _module.optimal_preconditioner
sketch_and_solve = _module.sketch_and_solve
woodbury_inverse_apply = _module.woodbury_inverse_apply
