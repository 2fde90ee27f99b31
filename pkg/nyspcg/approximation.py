from . import _nyspcg as _module

NystromApproximation = _module.NystromApproximation
NystromConstructionError = _module.NystromConstructionError

# sketches
SketchKind = _module.SketchKind
SketchPair = _module.SketchPair
column_sketch = _module.column_sketch
extend_sketch = _module.extend_sketch
gaussian_sketch = _module.gaussian_sketch

# constructions
column_sampling_nystrom = _module.column_sampling_nystrom
nystrom_definitional = _module.nystrom_definitional
randomized_nystrom = _module.randomized_nystrom
stable_nystrom = _module.stable_nystrom

# error bounds
ErrorBoundForm = _module.ErrorBoundForm
expected_error_bound = _module.expected_error_bound
