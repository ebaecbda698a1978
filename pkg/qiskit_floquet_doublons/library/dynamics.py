# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Stroboscopic two particle dynamics and doublon observables.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from qiskit_floquet_doublons.framework.io import write_csv, write_json
from qiskit_floquet_doublons.framework.lattice import HoppingSchedule, LatticeSpec
from .two_particle import TwoParticleBasis, two_particle_step_unitaries

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class Trajectory:
    """Snapshots of a two particle state.

    ``times`` are in units of the drive period and strictly increasing; ``states[n]``
    is the state at ``times[n]``.
    """

    basis: TwoParticleBasis
    times: np.ndarray
    states: np.ndarray
    stride: int = 1
    metadata: Dict[str, Any] = field(default_factory=dict)

    def densities(self) -> np.ndarray:
        """Doublon density of every snapshot, shape ``(snapshots, sites)``."""
        return np.abs(self.states[:, self.basis.doublon_indices]) ** 2

    def overlaps(self) -> np.ndarray:
        """Doublon subspace overlap of every snapshot."""
        return self.densities().sum(axis=1)

    def norms(self) -> np.ndarray:
        """Norm of every snapshot."""
        return np.linalg.norm(self.states, axis=1)

    def stroboscopic(self) -> "Trajectory":
        """Snapshots at whole periods only."""
        keep = np.isclose(self.times, np.round(self.times))
        return Trajectory(self.basis, self.times[keep], self.states[keep], self.stride, self.metadata)


def doublon_state(basis: TwoParticleBasis, site: int) -> np.ndarray:
    """Both particles on ``site``."""
    state = np.zeros(basis.dim, dtype=complex)
    state[basis.index(site, site)] = 1.0
    return state


def product_state(basis: TwoParticleBasis, phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
    """Normalized symmetrized state ``a^+(phi1) a^+(phi2) |0>``."""
    phi1 = np.asarray(phi1, dtype=complex)
    phi2 = np.asarray(phi2, dtype=complex)
    l1, l2 = basis.pairs[:, 0], basis.pairs[:, 1]
    coeff = phi1[l1] * phi2[l2] + phi1[l2] * phi2[l1]
    doublon = l1 == l2
    coeff[doublon] = np.sqrt(2) * phi1[l1[doublon]] * phi2[l1[doublon]]
    norm = np.linalg.norm(coeff)
    if norm == 0:
        raise ValueError("Orbitals give a vanishing two boson state.")
    return coeff / norm


def evolve(
    initial: np.ndarray,
    schedule: HoppingSchedule,
    theta: float,
    gamma: float,
    n_periods: int,
    stride: int = 1,
    step_snapshots: bool = False,
    basis: Optional[TwoParticleBasis] = None,
) -> Trajectory:
    """Apply the step unitaries period by period.

    Args:
        initial: Normalized state over the pair basis.
        schedule: Drive schedule.
        theta: Hopping angle.
        gamma: Interaction phase per step ``U tau``.
        n_periods: Number of periods.
        stride: Record a snapshot every ``stride`` periods; ``t = 0`` is always recorded.
        step_snapshots: Also record after every step of the recorded periods.
        basis: Pair basis, created when omitted.

    Returns:
        Trajectory of snapshots.
    """
    basis = basis or TwoParticleBasis(schedule.lattice.n_sites)
    if len(initial) != basis.dim:
        raise ValueError(f"State of length {len(initial)} does not match basis dimension {basis.dim}.")
    step_ops = two_particle_step_unitaries(schedule, theta, gamma, basis)
    n_steps = len(step_ops)
    state = np.array(initial, dtype=complex)
    times = [0.0]
    states = [state.copy()]
    for period in range(1, n_periods + 1):
        record = period % stride == 0
        for s, step_op in enumerate(step_ops, start=1):
            state = step_op @ state
            if step_snapshots and record and s < n_steps:
                times.append(period - 1 + s / n_steps)
                states.append(state.copy())
        if record:
            times.append(float(period))
            states.append(state.copy())
    logger.debug(
        "Evolved %d periods, %d snapshots, final norm %.15f.",
        n_periods,
        len(states),
        np.linalg.norm(state),
    )
    return Trajectory(basis, np.asarray(times), np.asarray(states), stride=stride)


def doublon_density(state: np.ndarray, basis: TwoParticleBasis) -> np.ndarray:
    """Per site probability ``A_l = |<ll|psi>|^2``."""
    return np.abs(np.asarray(state)[basis.doublon_indices]) ** 2


def doublon_overlap(state: np.ndarray, basis: TwoParticleBasis) -> float:
    """Weight of the state in the doublon subspace."""
    return float(np.sum(doublon_density(state, basis)))


def amplitude_matrix(state: np.ndarray, basis: TwoParticleBasis) -> np.ndarray:
    """Symmetric matrix of ``|<l1 l2|psi>|^2``; off-diagonal weight is split in half."""
    prob = np.abs(np.asarray(state)) ** 2
    l1, l2 = basis.pairs[:, 0], basis.pairs[:, 1]
    out = np.zeros((basis.n_sites, basis.n_sites))
    off = l1 != l2
    out[l1[off], l2[off]] = 0.5 * prob[off]
    out[l2[off], l1[off]] = 0.5 * prob[off]
    out[l1[~off], l1[~off]] = prob[~off]
    return out


def coefficient_matrix(state: np.ndarray, basis: TwoParticleBasis) -> np.ndarray:
    """First quantized symmetric coefficients, unit Frobenius norm for a normalized state."""
    state = np.asarray(state, dtype=complex)
    l1, l2 = basis.pairs[:, 0], basis.pairs[:, 1]
    out = np.zeros((basis.n_sites, basis.n_sites), dtype=complex)
    off = l1 != l2
    out[l1[off], l2[off]] = state[off] / np.sqrt(2)
    out[l2[off], l1[off]] = state[off] / np.sqrt(2)
    out[l1[~off], l1[~off]] = state[~off]
    return out


def schmidt_entropy(state: np.ndarray, basis: TwoParticleBasis) -> float:
    """Entanglement entropy in nats between the two particles."""
    svals = np.linalg.svd(coefficient_matrix(state, basis), compute_uv=False)
    weights = svals**2
    weights = weights[weights > 1e-16] / np.sum(weights)
    return float(max(0.0, -np.sum(weights * np.log(weights))))


def interior_weight(density: np.ndarray, spec: LatticeSpec) -> float:
    """Density on sites more than one site away from every edge."""
    grid = np.asarray(density).reshape(spec.ly, spec.lx)
    return float(grid[2:-2, 2:-2].sum())


def centroid_angle(density: np.ndarray, spec: LatticeSpec) -> float:
    """Argument of the density centroid about the lattice centre.

    Returns ``nan`` when the density carries no weight.
    """
    grid = np.asarray(density).reshape(spec.ly, spec.lx)
    total = grid.sum()
    if total <= 0:
        return float("nan")
    ys, xs = np.mgrid[0 : spec.ly, 0 : spec.lx]
    x_bar = float((grid * xs).sum() / total) - (spec.lx - 1) / 2
    y_bar = float((grid * ys).sum() / total) - (spec.ly - 1) / 2
    return float(np.arctan2(y_bar, x_bar))


def centroid_angles(trajectory: Trajectory, spec: LatticeSpec) -> np.ndarray:
    """Unwrapped centroid angles of the stroboscopic doublon densities.

    Decreasing values mean clockwise motion. Snapshots without doublon weight
    give ``nan`` and are skipped by the unwrapping.
    """
    angles = np.array([centroid_angle(d, spec) for d in trajectory.stroboscopic().densities()])
    finite = np.isfinite(angles)
    angles[finite] = np.unwrap(angles[finite])
    return angles


def trajectory_document(
    trajectory: Trajectory,
    metadata: Optional[Dict[str, Any]] = None,
    store_amplitudes: bool = False,
) -> Dict[str, Any]:
    """JSON-compatible trajectory document."""
    snapshots = []
    for time, state in zip(trajectory.times, trajectory.states):
        density = doublon_density(state, trajectory.basis)
        entry = {
            "t_over_T": float(time),
            "doublon_overlap": float(density.sum()),
            "norm": float(np.linalg.norm(state)),
            "doublon_density": [float(v) for v in density],
        }
        if store_amplitudes:
            entry["amplitude_matrix"] = [
                float(v) for v in amplitude_matrix(state, trajectory.basis).ravel()
            ]
        snapshots.append(entry)
    meta = dict(trajectory.metadata)
    meta.update(metadata or {})
    meta["stride"] = trajectory.stride
    return {"metadata": meta, "snapshots": snapshots}


def write_trajectory(
    path: str,
    trajectory: Trajectory,
    metadata: Optional[Dict[str, Any]] = None,
    store_amplitudes: bool = False,
):
    """Write the trajectory document."""
    write_json(path, trajectory_document(trajectory, metadata, store_amplitudes))


def density_rows(trajectory: Trajectory, spec: LatticeSpec) -> List[list]:
    """Rows ``(t_over_T, x, y, doublon_density)`` sorted by time then site."""
    rows = []
    for time, density in zip(trajectory.times, trajectory.densities()):
        for site, value in enumerate(density):
            x, y = spec.coordinates(site)
            rows.append([float(time), x, y, float(value)])
    return rows


def write_density_grids(path: str, trajectory: Trajectory, spec: LatticeSpec) -> int:
    """Write all density grids to one CSV file."""
    return write_csv(
        path, ["t_over_T", "x", "y", "doublon_density"], density_rows(trajectory, spec)
    )
