# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Exact two boson Floquet evolution.

States live in the symmetric pair basis ``|l1 l2>`` with ``l1 <= l2``. A coupled
link ``i -> j`` with both particles on it evolves with the closed-form three level
block over ``{|ii>, |ij>, |jj>}`` of the interacting two-site problem

.. math::

    H = -\\sqrt{2} J (e^{i\\phi} |ii\\rangle\\langle ij| + e^{i\\phi} |ij\\rangle\\langle jj| + h.c.)
        + U (|ii\\rangle\\langle ii| + |jj\\rangle\\langle jj|),

with ``gamma = U tau`` and ``gamma' = sqrt(gamma^2 + 16 theta^2)``. The doublon
cannot dissociate during a step when ``gamma'`` is a multiple of ``2 pi``, which
fixes ``U / J`` for an integer ``k``. The doublon subspace then evolves like a
single particle with hopping angle ``theta'`` and phase ``2 phi``.
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from qiskit_floquet_doublons.framework.exceptions import NoSolutionError
from qiskit_floquet_doublons.framework.lattice import HoppingSchedule, HoppingStep
from qiskit_floquet_doublons.framework.utils import hermitian_expm, unitarity_error
from .single_particle import apply_step, hopping_block

logger = logging.getLogger(__name__)


class TwoParticleBasis:
    """Symmetric two boson basis over ``n_sites`` sites.

    Basis states are ordered pairs ``(l1, l2)`` with ``l1 <= l2`` in row-major order,
    ``(0, 0), (0, 1), ..., (0, N-1), (1, 1), ...``.
    """

    def __init__(self, n_sites: int):
        self.n_sites = int(n_sites)
        l1, l2 = np.triu_indices(self.n_sites)
        self.pairs = np.stack([l1, l2], axis=1)
        self._index = np.full((self.n_sites, self.n_sites), -1, dtype=int)
        self._index[l1, l2] = np.arange(len(l1))
        self._index[l2, l1] = np.arange(len(l1))
        self.doublon_indices = self._index[np.arange(self.n_sites), np.arange(self.n_sites)]

    @property
    def dim(self) -> int:
        """Number of basis states, ``N (N + 1) / 2``."""
        return len(self.pairs)

    def index(self, l1: int, l2: int) -> int:
        """Basis index of the pair, in either order."""
        return int(self._index[l1, l2])

    def pair(self, index: int) -> Tuple[int, int]:
        """Sites ``(l1, l2)`` of a basis index, ``l1 <= l2``."""
        l1, l2 = self.pairs[index]
        return int(l1), int(l2)

    def is_doublon(self) -> np.ndarray:
        """Mask of basis states with both particles on one site."""
        return self.pairs[:, 0] == self.pairs[:, 1]

    def __repr__(self):
        return f"TwoParticleBasis(n_sites={self.n_sites})"


@dataclass(frozen=True)
class PairBlock:
    """Closed-form step unitary of two bosons on one coupled link.

    The stored entries exclude the global factor ``exp(-i gamma / 2)``.
    """

    theta: float
    gamma: float
    phi: float
    gamma_prime: float
    u11: complex
    u12: complex
    u13: complex
    u22: complex

    def matrix(self) -> np.ndarray:
        """3x3 unitary on ``(|ii>, |ij>, |jj>)``."""
        e1 = np.exp(1j * self.phi)
        e2 = np.exp(2j * self.phi)
        block = np.array(
            [
                [self.u11, self.u12 * e1, self.u13 * e2],
                [self.u12 * np.conj(e1), self.u22, self.u12 * e1],
                [self.u13 * np.conj(e2), self.u12 * np.conj(e1), self.u11],
            ],
            dtype=complex,
        )
        return np.exp(-0.5j * self.gamma) * block


class Branch(str, Enum):
    """Sign in front of the square root of the effective angle."""

    PLUS = "plus"
    MINUS = "minus"


@dataclass(frozen=True)
class DecouplingSolution:
    """Interaction and effective doublon drive at a decoupling point.

    Angles are in radians. ``u_over_j`` carries the sign of the interaction.
    """

    k: int
    theta: float
    u_over_j: float
    theta_prime: float
    phi_prime: float
    branch: Branch

    @property
    def gamma(self) -> float:
        """Interaction phase per step ``U tau``."""
        return self.u_over_j * self.theta

    def __json_encode__(self):
        return {
            "k": self.k,
            "theta": self.theta,
            "u_over_j": self.u_over_j,
            "theta_prime": self.theta_prime,
            "phi_prime": self.phi_prime,
            "branch": Branch(self.branch).value,
        }

    @classmethod
    def __json_decode__(cls, value):
        value = dict(value)
        value["branch"] = Branch(value["branch"])
        return cls(**value)


@dataclass(frozen=True)
class AsymptoteRow:
    """Comparison of the exact effective angle with the strong interaction limit."""

    k: int
    u_over_j: float
    theta_prime_distance: float
    predicted: float
    relative_error: float
    j_eff_ratio: float


@dataclass(frozen=True)
class AsymptoteReport:
    """Rows of :func:`strong_u_asymptote_check` sorted by ``k``."""

    theta: float
    rows: Tuple[AsymptoteRow, ...]

    @property
    def converging(self) -> bool:
        """True when the relative error decreases and ``J_eff |U| / 2`` increases with ``k``."""
        errors = [row.relative_error for row in self.rows]
        ratios = [row.j_eff_ratio for row in self.rows]
        return all(b < a for a, b in zip(errors, errors[1:])) and all(
            b > a for a, b in zip(ratios, ratios[1:])
        )


def pair_block(theta: float, gamma: float, phi: float = 0.0) -> PairBlock:
    """Step unitary of a doubly occupied coupled link.

    ``sin(gamma'/2) / gamma'`` is evaluated through ``sinc`` so that ``gamma' = 0``
    takes its limit ``1/2``.
    """
    gamma_prime = float(np.sqrt(gamma**2 + 16 * theta**2))
    half = 0.5 * np.sinc(gamma_prime / (2 * np.pi))
    cos_half = np.cos(0.5 * gamma_prime)
    phase = np.exp(-0.5j * gamma)
    u11 = 0.5 * (phase + cos_half - 1j * gamma * half)
    u12 = 1j * 2 * np.sqrt(2) * theta * half
    u13 = 0.5 * (-phase + cos_half - 1j * gamma * half)
    u22 = cos_half + 1j * gamma * half
    return PairBlock(float(theta), float(gamma), float(phi), gamma_prime, u11, u12, u13, u22)


def decoupling_ratio(theta: float, k: int) -> float:
    """Non-negative ``U / J`` with ``(U/J)^2 = 4 k^2 / (theta/pi)^2 - 16``.

    Raises:
        NoSolutionError: When ``theta > k pi / 2`` or ``theta <= 0``.
    """
    return 2 * np.pi * _root(theta, k) / theta


def _root(theta: float, k: int) -> float:
    """``r = sqrt(k^2 - (2 theta / pi)^2)``, so that ``gamma = 2 pi r``."""
    if k < 1 or int(k) != k:
        raise NoSolutionError(f"k must be a positive integer, got {k}.")
    if theta <= 0:
        raise NoSolutionError(f"Hopping angle must be positive, got {theta}.")
    rhs = k**2 - (2 * theta / np.pi) ** 2
    if rhs < 0:
        if rhs > -1e-12:
            return 0.0
        raise NoSolutionError(
            f"No decoupling for theta/pi={theta / np.pi:.6g} and k={k}: theta exceeds k pi / 2."
        )
    return float(np.sqrt(rhs))


def branch_angles(theta: float, k: int) -> Dict[Branch, float]:
    """Both candidate effective angles, reduced to [0, pi)."""
    r = _root(theta, k)
    return {
        Branch.PLUS: float(np.mod(0.5 * np.pi * (k % 2 + r), np.pi)),
        Branch.MINUS: float(np.mod(0.5 * np.pi * (k % 2 - r), np.pi)),
    }


def reduced_doublon_block(theta: float, gamma: float, phi: float = 0.0) -> np.ndarray:
    """Restriction of :func:`pair_block` to ``(|ii>, |jj>)``."""
    return pair_block(theta, gamma, phi).matrix()[np.ix_([0, 2], [0, 2])]


def _branch_residual(block: np.ndarray, theta_prime: float) -> float:
    ref = hopping_block(theta_prime, 0.0)
    scale = np.trace(ref.conj().T @ block) / 2
    return float(np.linalg.norm(block - scale * ref))


def effective_parameters(
    theta: float,
    k: int,
    phi: float = 0.0,
    u_sign: int = 1,
) -> DecouplingSolution:
    """Decoupling interaction and effective doublon drive.

    Both branches of the effective angle are evaluated and the one whose two-site
    doublon unitary matches the exact reduced block at the decoupling point is kept;
    ties go to ``plus``.

    Args:
        theta: Hopping angle.
        k: Decoupling integer.
        phi: Uniform link phase.
        u_sign: ``+1`` for repulsive, ``-1`` for attractive interactions.

    Raises:
        NoSolutionError: When the decoupling condition has no real root.
    """
    u_over_j = u_sign * decoupling_ratio(theta, k)
    block = reduced_doublon_block(theta, u_over_j * theta)
    candidates = branch_angles(theta, k)
    residuals = {branch: _branch_residual(block, angle) for branch, angle in candidates.items()}
    branch = Branch.PLUS
    if residuals[Branch.MINUS] < residuals[Branch.PLUS] - 1e-12:
        branch = Branch.MINUS
    logger.debug(
        "theta/pi=%.6g k=%d: branch residuals plus=%.3g minus=%.3g, selected %s.",
        theta / np.pi,
        k,
        residuals[Branch.PLUS],
        residuals[Branch.MINUS],
        branch.value,
    )
    return DecouplingSolution(
        k=int(k),
        theta=float(theta),
        u_over_j=float(u_over_j),
        theta_prime=candidates[branch],
        phi_prime=float(2 * phi),
        branch=branch,
    )


def decoupling_table(
    theta: float,
    k_values: Sequence[int],
    u_sign: int = 1,
) -> List[DecouplingSolution]:
    """Solutions for each ``k``; values without a real root are skipped."""
    rows = []
    for k in k_values:
        try:
            rows.append(effective_parameters(theta, k, u_sign=u_sign))
        except NoSolutionError as ex:
            logger.debug("Skipping k=%d: %s", k, ex)
    return rows


def strong_u_asymptote_check(theta: float, k_list: Sequence[int]) -> AsymptoteReport:
    """Compare effective angles with the strong coupling value ``2 theta / (U/J)``.

    The distance of ``theta'`` from the nearest multiple of ``pi`` approaches
    ``2 J theta / |U|``, i.e. an effective doublon hopping ``J_eff = 2 J^2 / |U|``.
    """
    rows = []
    for k in sorted(k_list):
        solution = effective_parameters(theta, k)
        distance = min(solution.theta_prime, np.pi - solution.theta_prime)
        u_abs = abs(solution.u_over_j)
        predicted = 2 * theta / u_abs
        rows.append(
            AsymptoteRow(
                k=int(k),
                u_over_j=solution.u_over_j,
                theta_prime_distance=float(distance),
                predicted=float(predicted),
                relative_error=float(abs(distance - predicted) / predicted),
                j_eff_ratio=float(distance / theta * u_abs / 2),
            )
        )
    return AsymptoteReport(float(theta), tuple(rows))


def _single_amplitudes(step: HoppingStep, theta: float) -> Dict[int, List[Tuple[int, complex]]]:
    """Outgoing single particle amplitudes ``site -> [(target, amplitude), ...]`` of coupled sites."""
    c, s = np.cos(theta), np.sin(theta)
    out = {}
    for link in step.links:
        out[link.i] = [(link.i, c), (link.j, 1j * s * np.exp(-1j * link.phase))]
        out[link.j] = [(link.j, c), (link.i, 1j * s * np.exp(1j * link.phase))]
    return out


def two_particle_step_unitary(
    step: HoppingStep,
    theta: float,
    gamma: float,
    basis: TwoParticleBasis,
) -> sp.csr_matrix:
    """Sparse step unitary over the symmetric pair basis.

    Both particles on one link evolve with :func:`pair_block`. Particles on distinct
    links, or one of them idle, evolve independently. An idle doublon picks up
    ``exp(-i gamma)`` and an idle pair of distinct sites is unchanged.
    """
    singles = _single_amplitudes(step, theta)
    link_of = {}
    for link in step.links:
        link_of[link.i] = link
        link_of[link.j] = link
    blocks = {}

    rows, cols, vals = [], [], []
    for col, (l1, l2) in enumerate(basis.pairs):
        l1, l2 = int(l1), int(l2)
        link = link_of.get(l1)
        if link is not None and link_of.get(l2) is link:
            # both particles on the same link
            if link not in blocks:
                blocks[link] = pair_block(theta, gamma, link.phase).matrix()
            block = blocks[link]
            local = [basis.index(link.i, link.i), basis.index(link.i, link.j), basis.index(link.j, link.j)]
            src = local.index(col)
            for dst, row in enumerate(local):
                rows.append(row)
                cols.append(col)
                vals.append(block[dst, src])
            continue
        if l1 == l2:
            rows.append(col)
            cols.append(col)
            vals.append(np.exp(-1j * gamma))
            continue
        for a, amp_a in singles.get(l1, [(l1, 1.0)]):
            for b, amp_b in singles.get(l2, [(l2, 1.0)]):
                rows.append(basis.index(a, b))
                cols.append(col)
                vals.append(amp_a * amp_b)

    matrix = sp.coo_matrix(
        (np.asarray(vals, dtype=complex), (rows, cols)), shape=(basis.dim, basis.dim)
    ).tocsr()
    return matrix


def two_particle_step_unitaries(
    schedule: HoppingSchedule,
    theta: float,
    gamma: float,
    basis: Optional[TwoParticleBasis] = None,
) -> List[sp.csr_matrix]:
    """Step unitaries of one period in time order."""
    basis = basis or TwoParticleBasis(schedule.lattice.n_sites)
    return [two_particle_step_unitary(step, theta, gamma, basis) for step in schedule.steps]


def two_particle_floquet(
    schedule: HoppingSchedule,
    theta: float,
    gamma: float,
    basis: Optional[TwoParticleBasis] = None,
) -> np.ndarray:
    """Dense period operator over the pair basis."""
    basis = basis or TwoParticleBasis(schedule.lattice.n_sites)
    matrix = np.eye(basis.dim, dtype=complex)
    for step_op in two_particle_step_unitaries(schedule, theta, gamma, basis):
        matrix = step_op @ matrix
    logger.debug("Two particle Floquet operator dim=%d theta=%.6g gamma=%.6g.", basis.dim, theta, gamma)
    return np.asarray(matrix)


def doublon_projected_floquet(
    schedule: HoppingSchedule,
    theta: float,
    gamma: float,
    basis: Optional[TwoParticleBasis] = None,
) -> np.ndarray:
    """Period operator restricted to the doublon states ``|ll>``, indexed by site."""
    basis = basis or TwoParticleBasis(schedule.lattice.n_sites)
    full = two_particle_floquet(schedule, theta, gamma, basis)
    idx = basis.doublon_indices
    return full[np.ix_(idx, idx)]


def doublon_leakage(projected: np.ndarray) -> float:
    """Largest probability that a doublon leaves the doublon subspace in one period."""
    kept = np.sum(np.abs(projected) ** 2, axis=0)
    return float(max(0.0, np.max(1.0 - kept)))


def effective_doublon_floquet(
    schedule: HoppingSchedule,
    solution: DecouplingSolution,
) -> np.ndarray:
    """Doublon period operator of the effective single particle model.

    Each step rotates coupled doublon pairs with angle ``theta'`` and phase ``2 phi``,
    times ``exp(-i gamma) exp(i theta')``; idle doublons pick up ``exp(-i gamma)``.
    Under decoupling this equals :func:`doublon_projected_floquet` exactly.
    """
    doubled = schedule.with_scaled_phases(2.0)
    n_sites = schedule.lattice.n_sites
    matrix = np.eye(n_sites, dtype=complex)
    coupled_phase = np.exp(1j * solution.theta_prime)
    for step in doubled.steps:
        apply_step(matrix, step, solution.theta_prime)
        coupled = sorted({site for link in step.links for site in link.sites})
        matrix[coupled] *= coupled_phase
    matrix *= np.exp(-1j * solution.gamma * doubled.n_steps)
    return matrix


def two_particle_hamiltonian(
    step: HoppingStep,
    u_over_j: float,
    basis: TwoParticleBasis,
) -> np.ndarray:
    """Full step Hamiltonian ``-sum(e^{i phi} a_i^+ a_j + h.c.) + U/2 sum n (n - 1)``.

    Built from occupation numbers; used as an exponentiation reference.
    """
    ham = np.zeros((basis.dim, basis.dim), dtype=complex)
    for col, (l1, l2) in enumerate(basis.pairs):
        occ = {}
        for site in (int(l1), int(l2)):
            occ[site] = occ.get(site, 0) + 1
        ham[col, col] += 0.5 * u_over_j * sum(n * (n - 1) for n in occ.values())
        for link in step.links:
            for dst, src, amp in (
                (link.i, link.j, np.exp(1j * link.phase)),
                (link.j, link.i, np.exp(-1j * link.phase)),
            ):
                n_src = occ.get(src, 0)
                if n_src == 0:
                    continue
                n_dst = occ.get(dst, 0)
                new = dict(occ)
                new[src] -= 1
                new[dst] = n_dst + 1
                sites = [s for s, n in sorted(new.items()) for _ in range(n)]
                row = basis.index(*sites)
                ham[row, col] -= amp * np.sqrt(n_src) * np.sqrt(n_dst + 1)
    return ham


def reference_step_unitary(
    step: HoppingStep,
    theta: float,
    u_over_j: float,
    basis: TwoParticleBasis,
) -> np.ndarray:
    """``exp(-i H theta)`` of :func:`two_particle_hamiltonian`."""
    return hermitian_expm(two_particle_hamiltonian(step, u_over_j, basis), theta)


def step_unitarity_error(step_op) -> float:
    """Unitarity error of a sparse or dense step operator."""
    dense = step_op.toarray() if sp.issparse(step_op) else np.asarray(step_op)
    return unitarity_error(dense)
