from __future__ import annotations

from typing import Final

CHOLESKY_RETRIES: Final[int] = 3
DEFAULT_ERROR_TAU: Final[float] = 30.0
DEFAULT_MAX_ITERATIONS: Final[int] = 500
DEFAULT_POWER_ITERATIONS: Final[int] = 5
DEFAULT_RATIO_TAU: Final[float] = 10.0
DEFAULT_TOLERANCE: Final[float] = 1e-10
DEFLATION_THRESHOLD: Final[float] = 1e-12
DENSE_ORACLE_CAP: Final[int] = 2000
KERNEL_DENSE_CAP: Final[int] = 20_000
KERNEL_MATVEC_BLOCK_SIZE: Final[int] = 1024
POSTERIOR_SAFETY_FACTOR: Final[float] = 1.1
# adaptive stopping also requires lambda_ell <= tau * mu / 11
SMALL_EIGENVALUE_DIVISOR: Final[float] = 11.0
SHIFT_ESCALATION: Final[float] = 10.0
THREADS_ENVIRONMENT_VARIABLE: Final[str] = 'NPCG_THREADS'

assert DEFLATION_THRESHOLD > 0, DEFLATION_THRESHOLD
assert SHIFT_ESCALATION > 1, SHIFT_ESCALATION
