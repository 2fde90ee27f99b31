from . import _nyspcg as _module

# capabilities
ColumnAccessible = _module.ColumnAccessible
LinearOperator = _module.LinearOperator
UnsupportedCapabilityError = _module.UnsupportedCapabilityError
has_column_access = _module.has_column_access
require_column_access = _module.require_column_access

# operators
DenseOperator = _module.DenseOperator
GramRidgeOperator = _module.GramRidgeOperator
IdentityOperator = _module.IdentityOperator
KernelOperator = _module.KernelOperator
RegularizedOperator = _module.RegularizedOperator
SparseOperator = _module.SparseOperator

# constructors
as_operator = _module.as_operator
gaussian_kernel = _module.gaussian_kernel
gram_ridge = _module.gram_ridge
matvec = _module.matvec
regularize = _module.regularize
to_dense_oracle = _module.to_dense_oracle

# kernel ridge regression
RegularizerConvention = _module.RegularizerConvention
krr_shift = _module.krr_shift

# synthetic spectra
SpectrumProfile = _module.SpectrumProfile
random_orthogonal = _module.random_orthogonal
synthesize_operator = _module.synthesize_operator

# files
MatrixFormat = _module.MatrixFormat
MatrixFormatError = _module.MatrixFormatError
load_matrix = _module.load_matrix
write_matrix = _module.write_matrix
