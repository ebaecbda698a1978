# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Workflows behind the command line subcommands.

Each workflow takes a validated :class:`.RunConfig`, exposes numerical knobs as
experiment options, writes its result files and returns analysis results.
"""

import json
import logging
import os
from dataclasses import dataclass, field
from typing import List

import numpy as np
from qiskit_experiments.framework import AnalysisResultData, ExperimentEncoder, Options

from qiskit_floquet_doublons.framework.config import RunConfig
from qiskit_floquet_doublons.framework.io import write_csv, write_json
from qiskit_floquet_doublons.framework.lattice import schedule_hash
from qiskit_floquet_doublons.framework.utils import format_params
from . import dynamics, oracles, single_particle, stability, two_particle

logger = logging.getLogger(__name__)


@dataclass
class WorkflowResult:
    """Analysis results, written files and printable summary lines."""

    analysis_results: List[AnalysisResultData] = field(default_factory=list)
    files: List[str] = field(default_factory=list)
    lines: List[str] = field(default_factory=list)

    def value(self, name: str):
        """Value of the named analysis result."""
        for result in self.analysis_results:
            if result.name == name:
                return result.value
        raise KeyError(name)


class FloquetWorkflow:
    """Base class of the command workflows."""

    command = ""

    def __init__(self, config: RunConfig, output_dir: str = "."):
        config.validate(self.command)
        self.config = config
        self.output_dir = output_dir
        self._experiment_options = self._default_experiment_options()

    @classmethod
    def _default_experiment_options(cls) -> Options:
        return Options()

    @property
    def experiment_options(self) -> Options:
        """Numerical options of this workflow."""
        return self._experiment_options

    def set_experiment_options(self, **fields):
        """Set options; unknown names raise ``AttributeError``."""
        for name in fields:
            if not hasattr(self._experiment_options, name):
                raise AttributeError(
                    f"Options field {name} is not valid for {type(self).__name__}"
                )
        self._experiment_options.update_options(**fields)

    def _path(self, filename: str) -> str:
        return os.path.join(self.output_dir, filename)

    def run(self) -> WorkflowResult:
        """Compute, write files and return the results."""
        raise NotImplementedError


class SpectrumWorkflow(FloquetWorkflow):
    """Cylinder quasi-energy spectrum with edge weights."""

    command = "spectrum"

    @classmethod
    def _default_experiment_options(cls) -> Options:
        options = super()._default_experiment_options()
        options.update_options(filename="spectrum.csv", edge_threshold=0.5)
        return options

    def run(self) -> WorkflowResult:
        schedule = self.config.build_schedule()
        rows = single_particle.cylinder_spectrum(schedule, self.config.theta, self.config.k_points)
        rows.sort(key=lambda row: (row.k_y, row.quasienergy))
        path = self._path(self.experiment_options.filename)
        write_csv(
            path,
            ["k_y", "band_index", "quasienergy_over_omega", "edge_weight"],
            [[row.k_y, row.band_index, row.quasienergy, row.edge_weight] for row in rows],
        )
        n_edge = sum(row.edge_weight >= self.experiment_options.edge_threshold for row in rows)
        eps = np.array([row.quasienergy for row in rows])
        result = WorkflowResult(files=[path])
        result.analysis_results.append(AnalysisResultData("n_states", len(rows)))
        result.analysis_results.append(AnalysisResultData("n_edge_states", int(n_edge)))
        result.analysis_results.append(
            AnalysisResultData("quasienergy_range", [float(eps.min()), float(eps.max())])
        )
        result.lines.append(
            f"{len(rows)} states over {self.config.k_points} momenta, {n_edge} edge states -> {path}"
        )
        return result


class ChernWorkflow(FloquetWorkflow):
    """Chern numbers of quasi-energy windows on a torus."""

    command = "chern"

    @classmethod
    def _default_experiment_options(cls) -> Options:
        options = super()._default_experiment_options()
        options.update_options(filename="chern.csv", check_refinement=True, window_grid=8)
        return options

    def windows(self, schedule) -> List[List[float]]:
        """Configured windows, or windows between gaps found on a coarse momentum grid."""
        if self.config.chern_windows is not None:
            return [list(map(float, w)) for w in self.config.chern_windows]
        ks = single_particle.momentum_grid(self.experiment_options.window_grid)
        eps = [
            single_particle.quasienergies(
                single_particle.bloch_floquet_operator(schedule, self.config.theta, k_y, k_x=k_x)
            ).quasienergies
            for k_x in ks
            for k_y in ks
        ]
        return [
            list(w)
            for w in single_particle.band_windows(np.concatenate(eps), self.config.gap_threshold)
        ]

    def run(self) -> WorkflowResult:
        schedule = self.config.build_schedule()
        grid = self.config.chern_grid
        rows = []
        result = WorkflowResult()
        for lo, hi in self.windows(schedule):
            chern = single_particle.chern_number(
                schedule,
                self.config.theta,
                (lo, hi),
                grid=grid,
                check_refinement=self.experiment_options.check_refinement,
            )
            rows.append([lo, hi, chern, grid])
            result.lines.append(f"window ({lo:.6g}, {hi:.6g}]: chern number {chern}")
        path = self._path(self.experiment_options.filename)
        write_csv(path, ["window_lo", "window_hi", "chern_number", "grid"], rows)
        result.files.append(path)
        result.analysis_results.append(
            AnalysisResultData("chern_numbers", [int(row[2]) for row in rows])
        )
        return result


class DecoupleWorkflow(FloquetWorkflow):
    """Decoupling interaction and effective doublon drive."""

    command = "decouple"

    @classmethod
    def _default_experiment_options(cls) -> Options:
        options = super()._default_experiment_options()
        options.update_options(k_max=None, as_json=False, filename="decoupling.csv")
        return options

    def run(self) -> WorkflowResult:
        config = self.config
        solution = two_particle.effective_parameters(
            config.theta, config.k_index, phi=config.phi, u_sign=config.u_sign
        )
        result = WorkflowResult()
        result.analysis_results.append(AnalysisResultData("decoupling_solution", solution))
        if self.experiment_options.as_json:
            result.lines.append(json.dumps(solution, cls=ExperimentEncoder, sort_keys=True, indent=2))
        else:
            result.lines.append(
                f"k={solution.k} U/J={format_params(solution.u_over_j, 6)} "
                f"theta'/pi={format_params(solution.theta_prime / np.pi, 6)} "
                f"phi'/pi={format_params(solution.phi_prime / np.pi, 6)} branch={solution.branch.value}"
            )
        k_max = self.experiment_options.k_max
        if k_max is not None:
            table = two_particle.decoupling_table(
                config.theta, range(1, int(k_max) + 1), u_sign=config.u_sign
            )
            rows = [
                [s.k, s.theta / np.pi, s.u_over_j, s.theta_prime / np.pi, s.branch.value]
                for s in table
            ]
            path = self._path(self.experiment_options.filename)
            write_csv(path, ["k", "theta_over_pi", "u_over_j", "theta_prime_over_pi", "branch"], rows)
            result.files.append(path)
            for row in rows:
                result.lines.append(
                    f"k={row[0]} U/J={row[2]:.6f} theta'/pi={row[3]:.6f} branch={row[4]}"
                )
        return result


class EvolveWorkflow(FloquetWorkflow):
    """Doublon trajectory from a single site."""

    command = "evolve"

    @classmethod
    def _default_experiment_options(cls) -> Options:
        options = super()._default_experiment_options()
        options.update_options(
            trajectory_filename="trajectory.json",
            density_filename="densities.csv",
        )
        return options

    def interaction(self) -> float:
        """``U / J`` of the run."""
        config = self.config
        if config.k_index is not None:
            return config.u_sign * two_particle.decoupling_ratio(config.theta, config.k_index)
        return float(config.u_over_j)

    def run(self) -> WorkflowResult:
        config = self.config
        schedule = config.build_schedule()
        spec = schedule.lattice
        u_over_j = self.interaction()
        basis = two_particle.TwoParticleBasis(spec.n_sites)
        start = spec.site_index(*config.initial_site)
        trajectory = dynamics.evolve(
            dynamics.doublon_state(basis, start),
            schedule,
            config.theta,
            u_over_j * config.theta,
            config.periods,
            stride=config.stride,
            step_snapshots=config.step_snapshots,
            basis=basis,
        )
        metadata = {
            "schedule_hash": schedule_hash(schedule),
            "model": config.model,
            "alpha": config.flux,
            "theta_over_pi": config.theta_over_pi,
            "u_over_j": u_over_j,
            "lx": spec.lx,
            "ly": spec.ly,
            "boundary": spec.boundary.value,
            "initial_site": list(config.initial_site),
            "periods": config.periods,
        }
        trajectory_path = self._path(self.experiment_options.trajectory_filename)
        density_path = self._path(self.experiment_options.density_filename)
        dynamics.write_trajectory(
            trajectory_path, trajectory, metadata, store_amplitudes=config.store_amplitudes
        )
        dynamics.write_density_grids(density_path, trajectory, spec)

        overlaps = trajectory.overlaps()
        result = WorkflowResult(files=[trajectory_path, density_path])
        for time, overlap in zip(trajectory.times, overlaps):
            result.lines.append(f"t/T={time:g} O_d={overlap:.6f}")
        result.analysis_results.append(AnalysisResultData("doublon_overlap", overlaps.tolist()))
        result.analysis_results.append(AnalysisResultData("min_doublon_overlap", float(overlaps.min())))
        result.analysis_results.append(
            AnalysisResultData("norm_error", float(np.max(np.abs(trajectory.norms() - 1))))
        )
        return result


class StabilityWorkflow(FloquetWorkflow):
    """Decay probability sweeps and interaction tuning."""

    command = "stability"

    @classmethod
    def _default_experiment_options(cls) -> Options:
        options = super()._default_experiment_options()
        options.update_options(
            filename="stability.csv",
            tuning_filename="tuning.json",
            grid_points=41,
            xtol=1e-8,
            ftol=1e-10,
            max_iterations=2000,
        )
        return options

    def run(self) -> WorkflowResult:
        config = self.config
        sweep = stability.sweep_pdec(
            config.k_list,
            config.theta_prime_values(),
            config.u3_over_j,
            config.u4_over_j,
            u_sign=config.u_sign,
        )
        rows = [
            [
                row.k,
                row.theta_prime / np.pi,
                row.theta / np.pi,
                row.u_over_j,
                row.u3,
                row.u4,
                row.p_dec,
            ]
            for row in sweep.rows
        ]
        path = self._path(self.experiment_options.filename)
        write_csv(
            path,
            [
                "k",
                "theta_prime_over_pi",
                "theta_over_pi",
                "u_over_j",
                "u3_over_j",
                "u4_over_j",
                "p_dec",
            ],
            rows,
        )
        result = WorkflowResult(files=[path])
        result.analysis_results.append(AnalysisResultData("sweep", sweep.rows))
        result.analysis_results.append(AnalysisResultData("skipped_points", len(sweep.skipped)))
        for k in sorted(set(config.k_list)):
            curve = sweep.curve(k)
            if curve:
                best = min(curve, key=lambda row: row.p_dec)
                result.lines.append(
                    f"k={k}: {len(curve)} points, min P_dec={best.p_dec:.6g} "
                    f"at theta'/pi={best.theta_prime / np.pi:.4f}"
                )
            else:
                result.lines.append(f"k={k}: no invertible points")
        if sweep.skipped:
            result.lines.append(f"skipped {len(sweep.skipped)} points outside the invertible range")

        if config.tune:
            opts = self.experiment_options
            tuned = stability.tune_interactions(
                config.theta_prime_over_pi * np.pi,
                config.k_index,
                config.search_box,
                grid_points=opts.grid_points,
                u_sign=config.u_sign,
                xtol=opts.xtol,
                ftol=opts.ftol,
                max_iterations=opts.max_iterations,
            )
            tuning_path = self._path(opts.tuning_filename)
            write_json(tuning_path, tuned)
            result.files.append(tuning_path)
            result.analysis_results.append(AnalysisResultData("tuning", tuned))
            result.lines.append(
                f"tuned U'/J={tuned.u3:.6f} U''/J={tuned.u4:.6f} P_dec={tuned.p_dec_min:.6g}"
            )
        return result


class ValidateWorkflow(FloquetWorkflow):
    """Oracle equivalence suite."""

    command = "validate"

    @classmethod
    def _default_experiment_options(cls) -> Options:
        options = super()._default_experiment_options()
        options.update_options(checks=None)
        return options

    def run(self) -> WorkflowResult:
        report = oracles.run_validation(self.experiment_options.checks)
        result = WorkflowResult()
        result.lines.extend(check.line() for check in report.results)
        result.analysis_results.append(AnalysisResultData("validation_passed", report.passed))
        result.analysis_results.append(
            AnalysisResultData("failed_checks", [check.name for check in report.failures()])
        )
        return result


WORKFLOWS = {
    workflow.command: workflow
    for workflow in (
        SpectrumWorkflow,
        ChernWorkflow,
        DecoupleWorkflow,
        EvolveWorkflow,
        StabilityWorkflow,
        ValidateWorkflow,
    )
}


def run_workflow(command: str, config: RunConfig, output_dir: str = ".", **options) -> WorkflowResult:
    """Run the workflow of ``command`` with experiment options."""
    workflow = WORKFLOWS[command](config, output_dir)
    if options:
        workflow.set_experiment_options(**options)
    return workflow.run()

