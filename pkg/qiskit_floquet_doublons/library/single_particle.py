# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Single particle Floquet operators, quasi-energy spectra and band topology.

A step with hopping angle ``theta`` couples each linked pair ``i -> j`` with phase
``phi`` through the closed-form block

.. math::

    \\begin{pmatrix} \\cos\\theta & i \\sin\\theta e^{i\\phi} \\\\
    i \\sin\\theta e^{-i\\phi} & \\cos\\theta \\end{pmatrix},

generated by ``H = -(e^{i phi} |i><j| + h.c.)`` over ``tau = theta`` in units of ``J``.
Sites in no link idle. The period operator is the time-ordered product, last step
leftmost.

Bloch operators on wrapped lattices attach ``exp(i k . w)`` to every link with
boundary winding ``w``; ``k`` is the phase per lattice unit cell.
"""

import logging
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg as la

from qiskit_floquet_doublons.framework.exceptions import (
    EigensolverError,
    GapClosingError,
    LatticeError,
)
from qiskit_floquet_doublons.framework.lattice import HoppingSchedule, HoppingStep, LatticeSpec
from qiskit_floquet_doublons.framework.utils import (
    hermitian_expm,
    unitarity_error,
    wrap_quasienergy,
)

logger = logging.getLogger(__name__)

Momentum = Tuple[float, float]

EIGEN_RESIDUAL_TOL = 1e-8
EDGE_THRESHOLD = 0.5


@dataclass(frozen=True, eq=False)
class StepUnitary:
    """Unitary of one hopping step over the site basis."""

    matrix: np.ndarray
    theta: float


@dataclass(frozen=True, eq=False)
class FloquetOperator:
    """Unitary of one drive period over the site basis."""

    matrix: np.ndarray
    period: Optional[float] = None
    k: Momentum = (0.0, 0.0)

    @property
    def dim(self) -> int:
        """Hilbert space dimension."""
        return self.matrix.shape[0]


@dataclass(frozen=True, eq=False)
class QuasiEnergySpectrum:
    """Quasi-energies in units of the drive frequency and their eigenvectors.

    ``quasienergies`` is sorted ascending and ``vectors[:, n]`` belongs to
    ``quasienergies[n]``.
    """

    quasienergies: np.ndarray
    vectors: np.ndarray
    k_y: Optional[float] = None

    @property
    def entries(self) -> List[Tuple[Optional[float], int, float, np.ndarray]]:
        """Rows ``(k_y, state index, quasi-energy, eigenvector)``."""
        return [
            (self.k_y, n, float(eps), self.vectors[:, n])
            for n, eps in enumerate(self.quasienergies)
        ]


@dataclass(frozen=True)
class SpectrumRow:
    """One eigenstate of a cylinder spectrum."""

    k_y: float
    band_index: int
    quasienergy: float
    edge_weight: float


def hopping_block(theta: float, phi: float) -> np.ndarray:
    """2x2 step unitary of one link on the basis ``(i, j)``."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [c, 1j * s * np.exp(1j * phi)],
            [1j * s * np.exp(-1j * phi), c],
        ],
        dtype=complex,
    )


def link_phase(link, k: Momentum = (0.0, 0.0)) -> float:
    """Hopping phase of a link including the Bloch phase of its winding."""
    return link.phase + k[0] * link.winding[0] + k[1] * link.winding[1]


def _step_arrays(step: HoppingStep, k: Momentum):
    i_idx = np.array([link.i for link in step.links], dtype=int)
    j_idx = np.array([link.j for link in step.links], dtype=int)
    phases = np.array([link_phase(link, k) for link in step.links], dtype=float)
    return i_idx, j_idx, phases


def step_unitary(
    step: HoppingStep,
    theta: float,
    n_sites: int,
    k: Momentum = (0.0, 0.0),
) -> StepUnitary:
    """Dense unitary of one step.

    Args:
        step: Links active during the step.
        theta: Hopping angle.
        n_sites: Number of lattice sites.
        k: Bloch momentum per unit cell, used on wrapped lattices.
    """
    matrix = np.eye(n_sites, dtype=complex)
    apply_step(matrix, step, theta, k)
    return StepUnitary(matrix, float(theta))


def apply_step(
    vectors: np.ndarray,
    step: HoppingStep,
    theta: float,
    k: Momentum = (0.0, 0.0),
) -> np.ndarray:
    """Apply a step unitary in place to the rows of ``vectors`` and return it.

    ``vectors`` is a site-indexed state or a matrix whose first axis is the site.
    """
    if not step.links:
        return vectors
    i_idx, j_idx, phases = _step_arrays(step, k)
    c, s = np.cos(theta), np.sin(theta)
    upper = 1j * s * np.exp(1j * phases)
    lower = 1j * s * np.exp(-1j * phases)
    if vectors.ndim > 1:
        upper = upper[:, None]
        lower = lower[:, None]
    rows_i = vectors[i_idx].copy()
    rows_j = vectors[j_idx].copy()
    vectors[i_idx] = c * rows_i + upper * rows_j
    vectors[j_idx] = lower * rows_i + c * rows_j
    return vectors


def step_hamiltonian(
    step: HoppingStep,
    n_sites: int,
    k: Momentum = (0.0, 0.0),
) -> np.ndarray:
    """Hermitian generator ``-sum(e^{i phi} |i><j| + h.c.)`` of one step."""
    ham = np.zeros((n_sites, n_sites), dtype=complex)
    for link in step.links:
        amp = np.exp(1j * link_phase(link, k))
        ham[link.i, link.j] -= amp
        ham[link.j, link.i] -= np.conj(amp)
    return ham


def floquet_operator(
    schedule: HoppingSchedule,
    theta: Optional[float] = None,
    k: Momentum = (0.0, 0.0),
) -> FloquetOperator:
    """Period operator ``S_N ... S_1`` of a schedule.

    Args:
        schedule: Drive schedule.
        theta: Hopping angle. Defaults to the schedule's ``tau``.
        k: Bloch momentum per unit cell.
    """
    theta = _resolve_theta(schedule, theta)
    matrix = np.eye(schedule.lattice.n_sites, dtype=complex)
    for step in schedule.steps:
        apply_step(matrix, step, theta, k)
    if logger.isEnabledFor(logging.DEBUG):
        logger.debug(
            "Floquet operator dim=%d theta=%.6g k=%s unitarity error %.3g.",
            matrix.shape[0],
            theta,
            k,
            unitarity_error(matrix),
        )
    return FloquetOperator(matrix, period=schedule.n_steps * theta, k=tuple(k))


def bloch_floquet_operator(
    schedule: HoppingSchedule,
    theta: Optional[float],
    k_y: float,
    k_x: float = 0.0,
) -> FloquetOperator:
    """Reduced period operator of a y-periodic schedule at Bloch momentum ``k_y``.

    The lattice of the schedule is the unit cell. ``k_x`` acts only on tori.

    Raises:
        LatticeError: When the schedule's lattice does not wrap along y.
    """
    spec = schedule.lattice
    if not spec.wraps_y:
        raise LatticeError(
            f"Bloch reduction needs a lattice periodic along y, got boundary '{spec.boundary.value}'."
        )
    if k_x and not spec.wraps_x:
        raise LatticeError("k_x requires a torus.")
    return floquet_operator(schedule, theta, k=(float(k_x), float(k_y)))


def quasienergies(
    op,
    k_y: Optional[float] = None,
) -> QuasiEnergySpectrum:
    """Quasi-energies ``-arg(lambda) / 2 pi`` in (-1/2, 1/2] and eigenvectors.

    Raises:
        EigensolverError: When the Schur form is not diagonal to 1e-8 or the
            eigen-equation residual exceeds 1e-8.
    """
    matrix = op.matrix if isinstance(op, FloquetOperator) else np.asarray(op, dtype=complex)
    tri, vecs = la.schur(matrix, output="complex")
    evals = np.diag(tri)
    off_diagonal = np.max(np.abs(np.triu(tri, 1))) if tri.shape[0] > 1 else 0.0
    residual = np.max(np.abs(matrix @ vecs - vecs * evals)) if tri.size else 0.0
    if max(off_diagonal, residual) > EIGEN_RESIDUAL_TOL:
        raise EigensolverError(
            f"Eigen-decomposition residual {max(off_diagonal, residual):.3g} exceeds "
            f"{EIGEN_RESIDUAL_TOL}; operator is not normal."
        )
    eps = wrap_quasienergy(-np.angle(evals) / (2 * np.pi))
    eps = np.atleast_1d(eps)
    order = np.argsort(eps, kind="stable")
    return QuasiEnergySpectrum(eps[order], vecs[:, order], k_y=k_y)


def edge_columns(spec: LatticeSpec) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Outermost two columns on the left and right edges."""
    left = tuple(sorted({0, min(1, spec.lx - 1)}))
    right = tuple(sorted({spec.lx - 2, spec.lx - 1}))
    return left, right


def _column_weights(state: np.ndarray, spec: LatticeSpec) -> np.ndarray:
    prob = np.abs(np.asarray(state)) ** 2
    return prob.reshape(spec.ly, spec.lx).sum(axis=0)


def edge_weight(state: np.ndarray, spec: LatticeSpec) -> float:
    """Probability on the outermost two columns of both x edges."""
    cols = _column_weights(state, spec)
    left, right = edge_columns(spec)
    return float(cols[sorted(set(left) | set(right))].sum())


def classify_edge(state: np.ndarray, spec: LatticeSpec) -> Optional[str]:
    """``"left"`` or ``"right"`` when at least half the weight sits on that edge."""
    cols = _column_weights(state, spec)
    left, right = edge_columns(spec)
    if cols[list(left)].sum() >= EDGE_THRESHOLD:
        return "left"
    if cols[list(right)].sum() >= EDGE_THRESHOLD:
        return "right"
    return None


def momentum_grid(n_points: int) -> np.ndarray:
    """``n_points`` momenta ``2 pi m / n_points`` covering one Bloch period."""
    return 2 * np.pi * np.arange(n_points) / n_points


def cylinder_spectrum(
    schedule: HoppingSchedule,
    theta: Optional[float],
    k_points: int = 64,
) -> List[SpectrumRow]:
    """Spectrum rows over a ``k_y`` grid, sorted by ``k_y`` then quasi-energy."""
    spec = schedule.lattice
    rows = []
    for k_y in momentum_grid(k_points):
        spectrum = quasienergies(bloch_floquet_operator(schedule, theta, k_y), k_y=k_y)
        for band, eps in enumerate(spectrum.quasienergies):
            rows.append(
                SpectrumRow(
                    float(k_y),
                    band,
                    float(eps),
                    edge_weight(spectrum.vectors[:, band], spec),
                )
            )
    return rows


def in_window(eps: np.ndarray, window: Sequence[float]) -> np.ndarray:
    """Mask of quasi-energies inside the half-open window ``(lo, hi]``.

    A window with ``lo > hi`` wraps through the zone edge.
    """
    lo, hi = window
    eps = np.asarray(eps)
    if lo < hi:
        return (eps > lo) & (eps <= hi)
    return (eps > lo) | (eps <= hi)


def band_windows(quasienergies_: np.ndarray, gap_threshold: float) -> List[Tuple[float, float]]:
    """Windows between spectral gaps wider than ``gap_threshold`` on the zone circle.

    Windows are cut at gap midpoints. Without at least two such gaps the whole zone
    ``(-1/2, 1/2]`` is returned.
    """
    eps = np.sort(np.asarray(quasienergies_, dtype=float).ravel())
    if eps.size == 0:
        return [(-0.5, 0.5)]
    gaps = np.diff(np.append(eps, eps[0] + 1.0))
    cuts = sorted(
        wrap_quasienergy(eps[n] + 0.5 * gaps[n]) for n in np.flatnonzero(gaps > gap_threshold)
    )
    if len(cuts) < 2:
        return [(-0.5, 0.5)]
    windows = [(cuts[n], cuts[n + 1]) for n in range(len(cuts) - 1)]
    windows.append((cuts[-1], cuts[0]))
    return windows


def _window_states(
    schedule: HoppingSchedule,
    theta: float,
    window: Sequence[float],
    grid: int,
) -> np.ndarray:
    ks = momentum_grid(grid)
    dim = schedule.lattice.n_sites
    states = None
    for ix, k_x in enumerate(ks):
        for iy, k_y in enumerate(ks):
            spectrum = quasienergies(bloch_floquet_operator(schedule, theta, k_y, k_x=k_x))
            selected = spectrum.vectors[:, in_window(spectrum.quasienergies, window)]
            if states is None:
                states = np.zeros((grid, grid, dim, selected.shape[1]), dtype=complex)
            if selected.shape[1] != states.shape[-1]:
                raise GapClosingError(
                    f"Window {tuple(window)} holds {selected.shape[1]} states at "
                    f"k=({k_x:.4f}, {k_y:.4f}) but {states.shape[-1]} at k=(0, 0)."
                )
            states[ix, iy] = selected
    return states


def _link_variables(states: np.ndarray, axis: int) -> np.ndarray:
    overlap = np.einsum("xyam,xyan->xymn", states.conj(), np.roll(states, -1, axis=axis))
    link = np.linalg.det(overlap)
    norms = np.abs(link)
    if np.any(norms < 1e-12):
        raise GapClosingError("Vanishing link variable; the momentum grid is too coarse.")
    return link / norms


def chern_on_grid(
    schedule: HoppingSchedule,
    theta: Optional[float],
    window: Sequence[float],
    grid: int,
) -> float:
    """Lattice field-strength Chern number of a window on a ``grid x grid`` torus.

    Returns the raw sum of plaquette field strengths over ``2 pi``, which is an
    integer up to rounding.
    """
    theta = _resolve_theta(schedule, theta)
    states = _window_states(schedule, theta, window, grid)
    if states.shape[-1] == 0:
        return 0.0
    u_x = _link_variables(states, axis=0)
    u_y = _link_variables(states, axis=1)
    field = np.angle(u_x * np.roll(u_y, -1, axis=0) * np.conj(np.roll(u_x, -1, axis=1)) * np.conj(u_y))
    return float(np.sum(field) / (2 * np.pi))


def chern_number(
    schedule: HoppingSchedule,
    theta: Optional[float],
    window: Sequence[float],
    grid: int = 32,
    check_refinement: bool = True,
) -> int:
    """Chern number of the states whose quasi-energy lies in ``window``.

    Args:
        schedule: Schedule on a torus; the torus is the magnetic unit cell.
        theta: Hopping angle.
        window: Half-open quasi-energy window ``(lo, hi]`` in units of the drive frequency.
        grid: Momentum points per direction.
        check_refinement: Also evaluate on a ``2 * grid`` mesh and compare.

    Raises:
        LatticeError: When the lattice is not a torus.
        GapClosingError: When the number of states in the window changes across the grid.
    """
    if not schedule.lattice.wraps_x:
        raise LatticeError("Chern numbers need a torus unit cell.")
    raw = chern_on_grid(schedule, theta, window, grid)
    value = int(np.round(raw))
    if abs(raw - value) > 1e-6:
        warnings.warn(
            f"Chern sum {raw:.6f} is not an integer on a {grid}x{grid} grid.",
            UserWarning,
        )
    if not check_refinement:
        return value
    fine = int(np.round(chern_on_grid(schedule, theta, window, 2 * grid)))
    logger.debug("Chern window %s: grid %d -> %d, grid %d -> %d.", window, grid, value, 2 * grid, fine)
    if fine != value:
        warnings.warn(
            f"Chern number changed from {value} to {fine} on refining the grid "
            f"{grid} -> {2 * grid}; reporting the finer value.",
            UserWarning,
        )
    return fine


def trotter_error(schedule: HoppingSchedule, theta: Optional[float] = None) -> float:
    """Spectral norm distance between the period operator and ``exp(-i H_avg T)``."""
    theta = _resolve_theta(schedule, theta)
    n_sites = schedule.lattice.n_sites
    total = sum(step_hamiltonian(step, n_sites) for step in schedule.steps)
    reference = hermitian_expm(total, theta)
    return float(np.linalg.norm(floquet_operator(schedule, theta).matrix - reference, ord=2))


def site_state(spec: LatticeSpec, x: int, y: int) -> np.ndarray:
    """Particle localized on ``(x, y)``."""
    state = np.zeros(spec.n_sites, dtype=complex)
    state[spec.site_index(x, y)] = 1.0
    return state


def evolve_single_particle(
    state: np.ndarray,
    schedule: HoppingSchedule,
    theta: Optional[float],
    n_periods: int,
) -> np.ndarray:
    """Stroboscopic states, one row per period from ``t = 0`` to ``t = n_periods T``."""
    theta = _resolve_theta(schedule, theta)
    out = np.empty((n_periods + 1, len(state)), dtype=complex)
    current = np.array(state, dtype=complex)
    out[0] = current
    for n in range(1, n_periods + 1):
        for step in schedule.steps:
            apply_step(current, step, theta)
        out[n] = current
    return out


def _resolve_theta(schedule: HoppingSchedule, theta: Optional[float]) -> float:
    if theta is None:
        if schedule.tau is None:
            raise ValueError("Hopping angle not given and schedule has no tau.")
        return float(schedule.tau)
    return float(theta)
