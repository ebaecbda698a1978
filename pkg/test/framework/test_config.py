# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Tests for the run configuration
"""

import os

import numpy as np

from test.base import CONFIG_ROOT, SHIPPED_CONFIGURATIONS, FloquetTestCase
from qiskit_floquet_doublons.framework.config import RunConfig
from qiskit_floquet_doublons.framework.exceptions import ConfigError, LatticeError
from qiskit_floquet_doublons.framework.lattice import Boundary, schedule_hash


class TestRunConfig(FloquetTestCase):
    """Loading, merging and validating configurations."""

    def test_defaults_evolve(self):
        """The default configuration is a valid doublon run once k is given."""
        config = RunConfig(k_index=2)
        config.validate("evolve")
        self.assertAlmostEqual(config.theta, 0.8 * np.pi)
        self.assertEqual(config.lattice_spec().n_sites, 54)

    def test_unknown_key(self):
        """Unknown keys are reported with their name."""
        with self.assertRaises(ConfigError) as ctx:
            RunConfig.from_dict({"lx": 4, "lz": 3})
        self.assertEqual(ctx.exception.field, "lz")
        self.assertIn("lz", str(ctx.exception))

    def test_malformed_json(self):
        """Broken documents raise a configuration error."""
        with self.assertRaises(ConfigError):
            RunConfig.from_json("{lx: 4")
        with self.assertRaises(ConfigError):
            RunConfig.from_json("[1, 2]")

    def test_missing_file(self):
        """An unreadable path is a configuration error."""
        with self.assertRaises(ConfigError):
            RunConfig.load(os.path.join(self.make_output_dir(), "absent.json"))

    def test_load_and_dump(self):
        """Files round trip through canonical JSON."""
        config = RunConfig(model="hhf", alpha=0.25, initial_site=[2, 1], k_list=[2, 3])
        self.assertEqual(config.initial_site, (2, 1))
        path = os.path.join(self.make_output_dir(), "run.json")
        with open(path, "w", encoding="utf-8") as fp:
            fp.write(config.to_json())
        self.assertEqual(RunConfig.load(path), config)
        self.assertTrue(config.to_json().endswith("\n"))
        self.assertRoundTripSerializable(config)

    def test_read_document_keeps_explicit_keys(self):
        """Raw documents contain only the keys written in the file."""
        path = os.path.join(self.make_output_dir(), "partial.json")
        with open(path, "w", encoding="utf-8") as fp:
            fp.write('{"lx": 9, "theta_over_pi": 0.5}')
        self.assertEqual(RunConfig.read_document(path), {"lx": 9, "theta_over_pi": 0.5})

    def test_merged_ignores_none(self):
        """Overrides of None keep the existing value."""
        config = RunConfig(lx=4).merged(lx=None, ly=8, theta_over_pi=0.5)
        self.assertEqual((config.lx, config.ly, config.theta_over_pi), (4, 8, 0.5))
        with self.assertRaises(ConfigError):
            config.merged(spin=1)

    def test_flux(self):
        """Flux is zero for the plain drive and one half by default otherwise."""
        self.assertEqual(RunConfig().flux, 0.0)
        self.assertEqual(RunConfig(model="hhf").flux, 0.5)
        self.assertEqual(RunConfig(model="hhf", alpha=0.25).flux, 0.25)

    def test_build_schedule(self):
        """The schedule carries the hopping angle as step duration."""
        config = RunConfig(model="hhf", alpha=0.25, lx=4, ly=4, theta_over_pi=0.25)
        schedule = config.build_schedule()
        self.assertAlmostEqual(schedule.tau, np.pi / 4)
        self.assertEqual(schedule.metadata["alpha"], 0.25)
        self.assertEqual(schedule_hash(schedule), schedule_hash(config.build_schedule()))

    def test_theta_prime_values(self):
        """The sweep grid is given as start, stop and count in units of pi."""
        values = RunConfig(theta_prime_grid=[0.1, 0.5, 5]).theta_prime_values()
        np.testing.assert_allclose(values, np.pi * np.array([0.1, 0.2, 0.3, 0.4, 0.5]))

    def test_command_boundaries(self):
        """Spectra need a cylinder, Chern numbers a torus and dynamics open edges."""
        with self.assertRaises(ConfigError) as ctx:
            RunConfig(boundary="open").validate("spectrum")
        self.assertEqual(ctx.exception.field, "boundary")
        RunConfig(boundary="cylinder_y", lx=10, ly=2).validate("spectrum")
        with self.assertRaises(ConfigError):
            RunConfig(boundary="cylinder_y", lx=4, ly=2).validate("chern")
        RunConfig(model="hhf", boundary="torus", lx=2, ly=2).validate("chern")
        with self.assertRaises(ConfigError):
            RunConfig(boundary="torus", lx=4, ly=4, k_index=1).validate("evolve")

    def test_inconsistent_lattice(self):
        """An odd periodic dimension is a lattice error."""
        with self.assertRaises(LatticeError):
            RunConfig(boundary="cylinder_y", lx=4, ly=3).validate("spectrum")

    def test_evolve_interaction_choice(self):
        """Exactly one of k and U must be given."""
        with self.assertRaises(ConfigError):
            RunConfig().validate("evolve")
        with self.assertRaises(ConfigError):
            RunConfig(k_index=2, u_over_j=3.0).validate("evolve")
        RunConfig(u_over_j=3.15).validate("evolve")

    def test_evolve_ranges(self):
        """Periods, stride and the initial site are checked."""
        with self.assertRaises(ConfigError) as ctx:
            RunConfig(k_index=2, periods=0).validate("evolve")
        self.assertEqual(ctx.exception.field, "periods")
        with self.assertRaises(ConfigError) as ctx:
            RunConfig(k_index=2, initial_site=(9, 0)).validate("evolve")
        self.assertEqual(ctx.exception.field, "initial_site")
        with self.assertRaises(ConfigError) as ctx:
            RunConfig(k_index=2, theta_over_pi=0.0).validate("evolve")
        self.assertEqual(ctx.exception.field, "theta_over_pi")

    def test_decouple_requires_k(self):
        """The decoupling command needs an integer k."""
        with self.assertRaises(ConfigError) as ctx:
            RunConfig().validate("decouple")
        self.assertEqual(ctx.exception.field, "k_index")
        with self.assertRaises(ConfigError):
            RunConfig(k_index=0).validate("decouple")

    def test_stability_checks(self):
        """Sweep lists, grids and the tuning box are checked."""
        RunConfig().validate("stability")
        with self.assertRaises(ConfigError):
            RunConfig(k_list=[]).validate("stability")
        with self.assertRaises(ConfigError):
            RunConfig(theta_prime_grid=[0.5, 0.2, 4]).validate("stability")
        with self.assertRaises(ConfigError) as ctx:
            RunConfig(tune=True).validate("stability")
        self.assertEqual(ctx.exception.field, "k_index")
        with self.assertRaises(ConfigError) as ctx:
            RunConfig(tune=True, k_index=2, search_box=[[1, 0], [0, 2]]).validate("stability")
        self.assertEqual(ctx.exception.field, "search_box")

    def test_unknown_command(self):
        """Only the known commands validate."""
        with self.assertRaises(ConfigError):
            RunConfig().validate("plot")

    def test_boundary_enum_accepted(self):
        """Boundary values may be given as the enum."""
        RunConfig(boundary=Boundary.CYLINDER_Y, lx=4, ly=2).validate("spectrum")

    def test_shipped_configurations(self):
        """The configuration files in configs/ load and validate."""
        self.assertEqual(sorted(os.listdir(CONFIG_ROOT)), sorted(SHIPPED_CONFIGURATIONS))
        for name, command in SHIPPED_CONFIGURATIONS.items():
            with self.subTest(name=name):
                RunConfig.load(os.path.join(CONFIG_ROOT, name)).validate(command)

    def test_shipped_parameters(self):
        """The doublon and flux configurations sit at their documented working points."""
        detuned = RunConfig.load(os.path.join(CONFIG_ROOT, "doublon_detuned.json"))
        self.assertAlmostEqual(detuned.u_over_j, 3.15)
        self.assertIsNone(detuned.k_index)
        free = RunConfig.load(os.path.join(CONFIG_ROOT, "doublon_hhf.json"))
        self.assertEqual(free.model, "hhf")
        self.assertAlmostEqual(free.theta_over_pi, 0.25)
        self.assertEqual(free.u_over_j, 0.0)
        self.assertIsNone(free.k_index)
        cylinder = RunConfig.load(os.path.join(CONFIG_ROOT, "hhf_cylinder.json"))
        self.assertAlmostEqual(cylinder.theta_over_pi, 0.25)
        self.assertAlmostEqual(cylinder.flux, 0.5)
