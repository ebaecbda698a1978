# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Brute force equivalence checks of the closed-form engines.
"""

import logging
import time
from dataclasses import dataclass, replace
from typing import Callable, Dict, Optional, Sequence, Tuple

import numpy as np

from qiskit_floquet_doublons.framework import lattice
from qiskit_floquet_doublons.framework.exceptions import ConfigError
from qiskit_floquet_doublons.framework.lattice import (
    Boundary,
    HoppingSchedule,
    HoppingStep,
    LatticeSpec,
    validate_schedule,
)
from qiskit_floquet_doublons.framework.utils import hermitian_expm
from . import dynamics, single_particle, two_particle

logger = logging.getLogger(__name__)

ORACLE_SEED = 20240611
ORACLE_TUPLES = 20
ORACLE_TOL = 1e-10


@dataclass(frozen=True)
class CheckResult:
    """Outcome of one check."""

    name: str
    passed: bool
    seconds: float
    detail: str = ""

    def line(self) -> str:
        """``PASS name seconds`` summary."""
        status = "PASS" if self.passed else "FAIL"
        text = f"{status} {self.name} {self.seconds:.3f}s"
        if self.detail:
            text += f" ({self.detail})"
        return text


@dataclass(frozen=True)
class ValidationReport:
    """Results of :func:`run_validation` in execution order."""

    results: Tuple[CheckResult, ...]

    @property
    def passed(self) -> bool:
        """True when every check passed."""
        return all(result.passed for result in self.results)

    def failures(self) -> Tuple[CheckResult, ...]:
        """Checks that failed."""
        return tuple(result for result in self.results if not result.passed)


def _pair_hamiltonian(gamma_over_tau: float, phi: float) -> np.ndarray:
    hop = -np.sqrt(2) * np.exp(1j * phi)
    return np.array(
        [
            [gamma_over_tau, hop, 0],
            [np.conj(hop), 0, hop],
            [0, np.conj(hop), gamma_over_tau],
        ],
        dtype=complex,
    )


def _random_tuples(rng: np.random.Generator, count: int):
    thetas = rng.uniform(0.1, np.pi, count)
    u_values = rng.uniform(-5.0, 5.0, count)
    phis = rng.uniform(0.0, 2 * np.pi, count)
    return zip(thetas, u_values, phis)


def check_pair_block(seed: int = ORACLE_SEED, count: int = ORACLE_TUPLES) -> Tuple[bool, str]:
    """Closed-form pair block against exponentiation of the two-site Hamiltonian."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for theta, u_over_j, phi in _random_tuples(rng, count):
        exact = hermitian_expm(_pair_hamiltonian(u_over_j, phi), theta)
        block = two_particle.pair_block(theta, u_over_j * theta, phi).matrix()
        worst = max(worst, float(np.max(np.abs(block - exact))))
    return worst < ORACLE_TOL, f"max error {worst:.2e}"


def _randomize_phases(schedule: HoppingSchedule, rng: np.random.Generator) -> HoppingSchedule:
    steps = []
    for step in schedule.steps:
        links = [replace(link, phase=float(rng.uniform(0, 2 * np.pi))) for link in step.links]
        steps.append(HoppingStep(tuple(links), label=step.label))
    return replace(schedule, steps=tuple(steps))


def check_step_assembly(seed: int = ORACLE_SEED, count: int = ORACLE_TUPLES) -> Tuple[bool, str]:
    """Assembled two particle steps against the full Hamiltonian on a 3x3 lattice."""
    rng = np.random.default_rng(seed + 1)
    base = lattice.build_afi_schedule(LatticeSpec(3, 3, Boundary.OPEN))
    basis = two_particle.TwoParticleBasis(base.lattice.n_sites)
    worst = 0.0
    for theta, u_over_j, _ in _random_tuples(rng, count):
        schedule = _randomize_phases(base, rng)
        for step in schedule.steps:
            fast = two_particle.two_particle_step_unitary(step, theta, u_over_j * theta, basis)
            exact = two_particle.reference_step_unitary(step, theta, u_over_j, basis)
            worst = max(worst, float(np.max(np.abs(fast.toarray() - exact))))
    return worst < ORACLE_TOL, f"max error {worst:.2e}"


def check_factorization(
    theta: float = np.pi / 4, n_periods: int = 24, alpha: float = 0.5
) -> Tuple[bool, str]:
    """Without interaction a doublon stays a product of identical single particle states."""
    spec = LatticeSpec(9, 6, Boundary.OPEN)
    schedule = lattice.build_hhf_schedule(spec, alpha)
    basis = two_particle.TwoParticleBasis(spec.n_sites)
    start = spec.site_index(0, 0)
    traj = dynamics.evolve(dynamics.doublon_state(basis, start), schedule, theta, 0.0, n_periods, basis=basis)
    single = single_particle.evolve_single_particle(
        single_particle.site_state(spec, 0, 0), schedule, theta, n_periods
    )
    worst = 0.0
    entropy = 0.0
    for state, orbital in zip(traj.states, single):
        density = np.abs(orbital) ** 2
        diff = dynamics.amplitude_matrix(state, basis) - np.outer(density, density)
        worst = max(worst, float(np.max(np.abs(diff))))
        entropy = max(entropy, dynamics.schmidt_entropy(state, basis))
    return worst < ORACLE_TOL and entropy < ORACLE_TOL, f"max error {worst:.2e}, entropy {entropy:.2e}"


def check_confinement(theta: float = 0.8 * np.pi, k: int = 2) -> Tuple[bool, str]:
    """At a decoupling point doublons never dissociate and follow the effective model."""
    schedule = lattice.build_afi_schedule(LatticeSpec(6, 4, Boundary.OPEN))
    solution = two_particle.effective_parameters(theta, k)
    projected = two_particle.doublon_projected_floquet(schedule, theta, solution.gamma)
    leakage = two_particle.doublon_leakage(projected)
    mismatch = float(
        np.max(np.abs(projected - two_particle.effective_doublon_floquet(schedule, solution)))
    )
    return leakage < ORACLE_TOL and mismatch < ORACLE_TOL, f"leakage {leakage:.2e}, model error {mismatch:.2e}"


def check_chirality() -> Tuple[bool, str]:
    """At full transfer a particle in the bottom-left corner moves up the left edge."""
    spec = LatticeSpec(6, 4, Boundary.OPEN)
    schedule = lattice.build_afi_schedule(spec)
    final = single_particle.evolve_single_particle(
        single_particle.site_state(spec, 0, 0), schedule, np.pi / 2, 1
    )[-1]
    weight = float(np.abs(final[spec.site_index(0, 1)]) ** 2)
    return weight > 1 - ORACLE_TOL, f"weight on (0, 1) is {weight:.6f}"


def check_chern_refinement(grid: int = 32) -> Tuple[bool, str]:
    """Flux one half Chern numbers agree between two grids and are opposite."""
    schedule = lattice.build_hhf_schedule(LatticeSpec(2, 2, Boundary.TORUS), 0.5)
    theta = np.pi / 4
    values = []
    for window in ((0.0, 0.5), (-0.5, 0.0)):
        coarse = int(np.round(single_particle.chern_on_grid(schedule, theta, window, grid)))
        fine = int(np.round(single_particle.chern_on_grid(schedule, theta, window, 2 * grid)))
        if coarse != fine:
            return False, f"window {window}: {coarse} on {grid}, {fine} on {2 * grid}"
        values.append(fine)
    passed = values[0] != 0 and values[0] == -values[1]
    return passed, f"chern numbers {values}"


def check_schedules() -> Tuple[bool, str]:
    """Built-in schedules are site disjoint and cover each link once."""
    schedules = [
        lattice.build_afi_schedule(LatticeSpec(6, 4, Boundary.OPEN)),
        lattice.build_hhf_schedule(LatticeSpec(6, 4, Boundary.OPEN), 0.5),
        lattice.build_afi_schedule(LatticeSpec(4, 4, Boundary.TORUS)),
        lattice.build_afi_schedule(LatticeSpec(6, 2, Boundary.CYLINDER_Y)),
    ]
    for schedule in schedules:
        report = validate_schedule(schedule, require_coverage=True)
        if not report.valid:
            return False, str(report)
    return True, f"{len(schedules)} schedules"


DEFAULT_CHECKS: Dict[str, Callable[[], Tuple[bool, str]]] = {
    "pair_block": check_pair_block,
    "step_assembly": check_step_assembly,
    "factorization": check_factorization,
    "confinement": check_confinement,
    "chirality": check_chirality,
    "chern_refinement": check_chern_refinement,
    "schedules": check_schedules,
}


def run_validation(names: Optional[Sequence[str]] = None) -> ValidationReport:
    """Run the named checks, or all of them, and time each.

    A check raising an exception counts as failed.

    Raises:
        ConfigError: When a name is not a known check.
    """
    names = list(names) if names is not None else list(DEFAULT_CHECKS)
    unknown = [name for name in names if name not in DEFAULT_CHECKS]
    if unknown:
        raise ConfigError(
            f"unknown checks {unknown}, choose from {list(DEFAULT_CHECKS)}", field="check"
        )
    results = []
    for name in names:
        check = DEFAULT_CHECKS[name]
        start = time.perf_counter()
        try:
            passed, detail = check()
        except Exception as ex:  # pylint: disable=broad-except
            passed, detail = False, f"{type(ex).__name__}: {ex}"
        elapsed = time.perf_counter() - start
        result = CheckResult(name, bool(passed), elapsed, detail)
        logger.info(result.line())
        results.append(result)
    return ValidationReport(tuple(results))
