from collections.abc import Callable

import numpy as np


def energy_norm(matrix: np.ndarray, vector: np.ndarray, /) -> float:
    return float(np.sqrt(max(vector @ (matrix @ vector), 0.0)))


def to_energy_error_recorder(
    matrix: np.ndarray, solution: np.ndarray, /
) -> tuple[list[float], Callable[[np.ndarray], None]]:
    """Returns relative errors in the norm of ``matrix`` and their recorder.

    The recorder is meant to be passed as a solver callback.
    """
    scale = energy_norm(matrix, solution)
    errors: list[float] = []

    def record(iterate: np.ndarray) -> None:
        errors.append(energy_norm(matrix, iterate - solution) / scale)

    return errors, record
