# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Utilities.
"""

import decimal
from numbers import Integral, Real
from typing import Union

import numpy as np
import scipy.linalg as la
from qiskit.quantum_info.operators.predicates import is_unitary_matrix


def format_params(value, digit=3):
    """Round a parameter value in decimal arithmetic to avoid float rounding issues."""
    with decimal.localcontext() as ctx:
        ctx.rounding = decimal.ROUND_HALF_EVEN
        round_val = round(decimal.Decimal(value), digit)
    return float(round_val)


def format_csv_value(value) -> str:
    """Text for one CSV cell: 12 significant digits, no negative zero."""
    if value is None:
        return ""
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return str(int(value))
    if isinstance(value, Integral):
        return str(int(value))
    if isinstance(value, Real):
        value = float(value)
        if value == 0.0:
            return "0"
        return f"{value:.12g}"
    raise TypeError(f"Cannot format {type(value).__name__} as a CSV value.")


def wrap_quasienergy(eps: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
    """Map quasi-energies in units of the drive frequency onto (-1/2, 1/2]."""
    wrapped = eps - np.ceil(np.asarray(eps) - 0.5) + 0.0
    if np.ndim(wrapped) == 0:
        return float(wrapped)
    return wrapped


def hermitian_expm(hamiltonian: np.ndarray, time: float) -> np.ndarray:
    """``exp(-i H t)`` of a Hermitian matrix from its eigen-decomposition."""
    vals, vecs = la.eigh(hamiltonian)
    return (vecs * np.exp(-1j * vals * time)) @ vecs.conj().T


def unitarity_error(matrix: np.ndarray) -> float:
    """Largest entry of ``|M^dagger M - 1|``."""
    matrix = np.asarray(matrix)
    return float(np.max(np.abs(matrix.conj().T @ matrix - np.eye(matrix.shape[0]))))


def is_unitary(matrix: np.ndarray, atol: float = 1e-12) -> bool:
    """Unitarity predicate with an absolute tolerance."""
    return bool(is_unitary_matrix(np.asarray(matrix), rtol=0.0, atol=atol))
