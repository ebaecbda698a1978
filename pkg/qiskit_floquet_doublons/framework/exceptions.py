# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Exceptions.
"""

from typing import Optional

from qiskit.exceptions import QiskitError


class FloquetDoublonError(QiskitError):
    """Base class for errors raised by this package."""


class LatticeError(FloquetDoublonError, ValueError):
    """Lattice geometry or drive gauge is inconsistent."""


class ConfigError(FloquetDoublonError, ValueError):
    """Invalid run configuration.

    Args:
        message: Human readable description.
        field: Name of the offending configuration field.
    """

    def __init__(self, message: str, field: Optional[str] = None):
        if field is not None:
            message = f"{field}: {message}"
        super().__init__(message)
        self.field = field


class NoSolutionError(FloquetDoublonError):
    """The doublon decoupling condition has no real solution."""


class OutOfRangeError(FloquetDoublonError):
    """No hopping angle maps onto the requested effective angle."""


class GapClosingError(FloquetDoublonError):
    """A quasi-energy window is not isolated on the momentum grid."""


class EigensolverError(FloquetDoublonError):
    """Eigen-decomposition residual exceeds tolerance."""


class ValidationError(FloquetDoublonError):
    """A check of the oracle suite failed."""
