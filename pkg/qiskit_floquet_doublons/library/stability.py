# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Stability of two doublons on a coupled link.

Two doublons on neighbouring sites of a coupled link are described on the basis
``{|D>, |T_a>, |T_b>, |Q_a>, |Q_b>}``: the two doublons, a triplet plus a single
particle on either site, and all four particles on either site. With three and
four body terms ``U'`` and ``U''`` the on-site energies are ``2U``,
``H_T = U' + 3U`` and ``H_Q = U'' + 4U' + 6U``. The decay probability after one
coupled step of duration ``tau = theta / J`` is ``1 - |<D|exp(-i H tau)|D>|^2``.
"""

import logging
from dataclasses import dataclass
from typing import List, Sequence, Tuple

import lmfit
import numpy as np

from qiskit_floquet_doublons.framework.exceptions import OutOfRangeError
from qiskit_floquet_doublons.framework.utils import hermitian_expm
from .two_particle import decoupling_ratio, effective_parameters

logger = logging.getLogger(__name__)

QUAD_BASIS = ("D", "T_a", "T_b", "Q_a", "Q_b")


@dataclass(frozen=True)
class QuadHamiltonian:
    """Two doublon Hamiltonian of one coupled link, energies in absolute units."""

    j: float
    u: float
    u3: float
    u4: float

    @property
    def h_t(self) -> float:
        """Triplet energy ``U' + 3U``."""
        return self.u3 + 3 * self.u

    @property
    def h_q(self) -> float:
        """Quadruplet energy ``U'' + 4U' + 6U``."""
        return self.u4 + 4 * self.u3 + 6 * self.u

    @property
    def matrix(self) -> np.ndarray:
        """5x5 Hermitian matrix on :data:`QUAD_BASIS`."""
        ham = np.diag([2 * self.u, self.h_t, self.h_t, self.h_q, self.h_q]).astype(float)
        ham[0, 1] = ham[1, 0] = -np.sqrt(6) * self.j
        ham[0, 2] = ham[2, 0] = -np.sqrt(6) * self.j
        ham[1, 3] = ham[3, 1] = -2 * self.j
        ham[2, 4] = ham[4, 2] = -2 * self.j
        return ham


@dataclass(frozen=True)
class DecayResult:
    """Decay probability of two doublons at one decoupling point."""

    theta_prime: float
    k: int
    p_dec: float
    theta: float = 0.0
    u_over_j: float = 0.0
    u3: float = 0.0
    u4: float = 0.0

    def __json_encode__(self):
        return self.__dict__.copy()

    @classmethod
    def __json_decode__(cls, value):
        return cls(**value)


@dataclass(frozen=True)
class SweepResult:
    """Rows of a decay sweep and the grid points that could not be inverted."""

    rows: Tuple[DecayResult, ...]
    skipped: Tuple[Tuple[int, float], ...] = ()

    def curve(self, k: int) -> List[DecayResult]:
        """Rows of one ``k`` ordered by ``theta'``."""
        return [row for row in self.rows if row.k == k]


@dataclass(frozen=True)
class TuningResult:
    """Three and four body couplings minimizing the decay probability."""

    u3: float
    u4: float
    p_dec_min: float
    grid_p_dec_min: float
    theta_prime: float = 0.0
    k: int = 0
    theta: float = 0.0

    def __json_encode__(self):
        return self.__dict__.copy()

    @classmethod
    def __json_decode__(cls, value):
        return cls(**value)


def build_quad_hamiltonian(j: float, u: float, u3: float = 0.0, u4: float = 0.0) -> QuadHamiltonian:
    """Create the two doublon Hamiltonian."""
    ham = QuadHamiltonian(float(j), float(u), float(u3), float(u4))
    if not np.allclose(ham.matrix, ham.matrix.T.conj()):
        raise ValueError("Two doublon Hamiltonian is not Hermitian.")
    return ham


def decay_probability(
    theta: float,
    k: int,
    u3: float = 0.0,
    u4: float = 0.0,
    u_sign: int = 1,
) -> DecayResult:
    """Probability that two coupled doublons do not survive one step.

    ``U`` follows from the decoupling condition for ``theta`` and ``k``.

    Raises:
        NoSolutionError: When ``theta > k pi / 2``.
    """
    if theta == 0:
        return DecayResult(0.0, int(k), 0.0, 0.0, 0.0, float(u3), float(u4))
    u_over_j = u_sign * decoupling_ratio(theta, k)
    solution = effective_parameters(theta, k, u_sign=u_sign)
    ham = build_quad_hamiltonian(1.0, u_over_j, u3, u4)
    prop = hermitian_expm(ham.matrix, theta)
    p_dec = float(np.clip(1.0 - np.abs(prop[0, 0]) ** 2, 0.0, 1.0))
    return DecayResult(
        theta_prime=solution.theta_prime,
        k=int(k),
        p_dec=p_dec,
        theta=float(theta),
        u_over_j=float(u_over_j),
        u3=float(u3),
        u4=float(u4),
    )


def invert_theta_prime(theta_prime: float, k: int, u_sign: int = 1) -> float:
    """Hopping angle in ``(0, min(pi, k pi / 2)]`` whose effective angle is ``theta_prime``.

    Raises:
        OutOfRangeError: When no such hopping angle exists for ``k``.
    """
    if k < 1:
        raise OutOfRangeError(f"k must be a positive integer, got {k}.")
    sign = 1 if u_sign > 0 else -1
    theta_max = min(np.pi, k * np.pi / 2)
    r_min = np.sqrt(max(0.0, k**2 - (2 * theta_max / np.pi) ** 2))
    for n in range(-k - 2, k + 3):
        r = sign * (2 * (theta_prime + n * np.pi) / np.pi - k % 2)
        if not r_min - 1e-12 <= r < k:
            continue
        theta = 0.5 * np.pi * np.sqrt(max(0.0, k**2 - r**2))
        if not 0 < theta <= theta_max + 1e-12:
            continue
        theta = min(theta, theta_max)
        solution = effective_parameters(theta, k, u_sign=u_sign)
        mismatch = abs(np.angle(np.exp(2j * (solution.theta_prime - theta_prime)))) / 2
        if mismatch < 1e-9:
            return float(theta)
    raise OutOfRangeError(
        f"No hopping angle maps to theta'/pi={theta_prime / np.pi:.6g} for k={k}."
    )


def sweep_pdec(
    k_list: Sequence[int],
    theta_prime_grid: Sequence[float],
    u3: float = 0.0,
    u4: float = 0.0,
    u_sign: int = 1,
) -> SweepResult:
    """Decay probability along ``theta'`` for each ``k``, ordered by ``k`` then ``theta'``."""
    rows = []
    skipped = []
    for k in sorted(k_list):
        for theta_prime in sorted(theta_prime_grid):
            try:
                theta = invert_theta_prime(theta_prime, k, u_sign=u_sign)
            except OutOfRangeError:
                logger.debug("Skipping k=%d theta'/pi=%.6g: not invertible.", k, theta_prime / np.pi)
                skipped.append((int(k), float(theta_prime)))
                continue
            result = decay_probability(theta, k, u3, u4, u_sign=u_sign)
            rows.append(
                DecayResult(
                    float(theta_prime),
                    result.k,
                    result.p_dec,
                    result.theta,
                    result.u_over_j,
                    result.u3,
                    result.u4,
                )
            )
    return SweepResult(tuple(rows), tuple(skipped))


def tune_interactions(
    theta_prime: float,
    k: int,
    search_box: Sequence[Sequence[float]] = ((0.0, 2.0), (0.0, 2.0)),
    grid_points: int = 41,
    u_sign: int = 1,
    refine: bool = True,
    xtol: float = 1e-8,
    ftol: float = 1e-10,
    max_iterations: int = 2000,
) -> TuningResult:
    """Minimize the decay probability over ``(U', U'')`` inside a box.

    A regular grid scan locates the best cell, which is then refined with a bounded
    Nelder-Mead search. The better of both points is returned.

    Args:
        theta_prime: Effective hopping angle.
        k: Decoupling integer.
        search_box: ``[[u3_lo, u3_hi], [u4_lo, u4_hi]]``.
        grid_points: Points per axis of the scan.
        u_sign: Sign of the two body interaction.
        refine: Run the local refinement.
        xtol: Simplex tolerance on the couplings.
        ftol: Simplex tolerance on the decay probability.
        max_iterations: Iteration limit of the refinement.

    Raises:
        OutOfRangeError: When ``theta_prime`` cannot be reached for ``k``.
    """
    theta = invert_theta_prime(theta_prime, k, u_sign=u_sign)
    (u3_lo, u3_hi), (u4_lo, u4_hi) = search_box

    def _p_dec(u3, u4):
        return decay_probability(theta, k, u3, u4, u_sign=u_sign).p_dec

    u3_grid = np.linspace(u3_lo, u3_hi, grid_points)
    u4_grid = np.linspace(u4_lo, u4_hi, grid_points)
    landscape = np.array([[_p_dec(u3, u4) for u4 in u4_grid] for u3 in u3_grid])
    i3, i4 = np.unravel_index(np.argmin(landscape), landscape.shape)
    best = (float(u3_grid[i3]), float(u4_grid[i4]), float(landscape[i3, i4]))
    grid_min = best[2]
    logger.debug("Grid minimum P_dec=%.6g at U'=%.6g U''=%.6g.", grid_min, best[0], best[1])

    if refine and (u3_lo < u3_hi or u4_lo < u4_hi):
        params = lmfit.Parameters()
        params.add("u3", value=best[0], min=u3_lo, max=u3_hi, vary=u3_lo < u3_hi)
        params.add("u4", value=best[1], min=u4_lo, max=u4_hi, vary=u4_lo < u4_hi)

        def _objective(pars):
            return _p_dec(pars["u3"].value, pars["u4"].value)

        fit = lmfit.minimize(
            _objective,
            params,
            method="nelder",
            options={"maxiter": max_iterations, "xatol": xtol, "fatol": ftol},
        )
        u3_fit = float(np.clip(fit.params["u3"].value, u3_lo, u3_hi))
        u4_fit = float(np.clip(fit.params["u4"].value, u4_lo, u4_hi))
        p_fit = _p_dec(u3_fit, u4_fit)
        logger.debug(
            "Refined P_dec=%.6g at U'=%.6g U''=%.6g (%d evaluations).",
            p_fit,
            u3_fit,
            u4_fit,
            fit.nfev,
        )
        if p_fit < best[2]:
            best = (u3_fit, u4_fit, p_fit)

    return TuningResult(
        u3=best[0],
        u4=best[1],
        p_dec_min=best[2],
        grid_p_dec_min=grid_min,
        theta_prime=float(theta_prime),
        k=int(k),
        theta=float(theta),
    )


def perturbation_scan(
    tuned: TuningResult,
    fraction: float = 0.1,
    u_sign: int = 1,
) -> List[Tuple[float, float, float]]:
    """Decay probabilities with either tuned coupling scaled by ``1 +- fraction``."""
    out = []
    for u3_scale, u4_scale in ((1 + fraction, 1), (1 - fraction, 1), (1, 1 + fraction), (1, 1 - fraction)):
        u3, u4 = tuned.u3 * u3_scale, tuned.u4 * u4_scale
        out.append((u3, u4, decay_probability(tuned.theta, tuned.k, u3, u4, u_sign=u_sign).p_dec))
    return out

