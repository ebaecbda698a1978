# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Tests for doublon pair stability and interaction tuning
"""

import json

import numpy as np

from test.base import FloquetTestCase
from qiskit_floquet_doublons.framework.exceptions import NoSolutionError, OutOfRangeError
from qiskit_floquet_doublons.library import stability


class TestQuadHamiltonian(FloquetTestCase):
    """Two doublons on one coupled link."""

    def test_energies(self):
        """Triplet and quadruplet energies include the multi body terms."""
        ham = stability.build_quad_hamiltonian(1.0, 3.0, 10.0, 0.0)
        self.assertEqual(ham.h_t, 19.0)
        self.assertEqual(ham.h_q, 58.0)
        matrix = ham.matrix
        self.assertMatrixClose(matrix, matrix.T)
        self.assertAlmostEqual(matrix[0, 1], -np.sqrt(6))
        self.assertAlmostEqual(matrix[1, 3], -2.0)
        self.assertEqual(matrix[0, 3], 0.0)


class TestDecay(FloquetTestCase):
    """Decay probability at decoupling points."""

    def test_working_point(self):
        """Without multi body terms a fraction of the pairs decays."""
        result = stability.decay_probability(0.8 * np.pi, 2)
        self.assertAlmostEqual(result.p_dec, 0.0812, delta=2e-3)
        self.assertAlmostEqual(result.u_over_j, 3.0)
        self.assertAlmostEqual(result.theta_prime / np.pi, 0.6)

    def test_three_body_term_suppresses_decay(self):
        """A large three body term detunes the triplets."""
        bare = stability.decay_probability(0.8 * np.pi, 2).p_dec
        detuned = stability.decay_probability(0.8 * np.pi, 2, u3=10.0).p_dec
        self.assertLess(detuned, bare)

    def test_tuned_couplings(self):
        """Small three and four body terms nearly remove the decay."""
        result = stability.decay_probability(0.8 * np.pi, 2, u3=0.45, u4=1.0)
        self.assertLess(result.p_dec, 3e-4)

    def test_zero_angle(self):
        """No hopping means no decay."""
        self.assertEqual(stability.decay_probability(0.0, 2).p_dec, 0.0)

    def test_zero_angle_is_valid_json(self):
        """The no-hopping row carries finite values only."""
        result = stability.decay_probability(0.0, 2)
        self.assertEqual(result.u_over_j, 0.0)
        document = json.loads(json.dumps(result.__json_encode__(), allow_nan=False))
        self.assertEqual(document["k"], 2)

    def test_unsolvable(self):
        """Decoupling must exist for the angle."""
        with self.assertRaises(NoSolutionError):
            stability.decay_probability(0.8 * np.pi, 1)

    def test_serialize(self):
        """Decay results survive a JSON round trip."""
        self.assertRoundTripSerializable(stability.decay_probability(0.8 * np.pi, 2, u3=1.0))


class TestInversion(FloquetTestCase):
    """Hopping angle from an effective angle."""

    def test_known_points(self):
        """Inversion recovers the hopping angles of known solutions."""
        for theta_prime_over_pi, k, expected in ((0.6, 2, 0.8), (0.5, 1, 0.5), (0.8, 2, 0.6)):
            with self.subTest(theta_prime_over_pi=theta_prime_over_pi, k=k):
                theta = stability.invert_theta_prime(theta_prime_over_pi * np.pi, k)
                self.assertAlmostEqual(theta / np.pi, expected)

    def test_out_of_range(self):
        """For k = 1 angles below pi / 2 are never reached."""
        with self.assertRaises(OutOfRangeError):
            stability.invert_theta_prime(0.3 * np.pi, 1)
        with self.assertRaises(OutOfRangeError):
            stability.invert_theta_prime(0.3 * np.pi, 0)


class TestSweep(FloquetTestCase):
    """Sweeps over the effective angle."""

    def test_sweep_order_and_skips(self):
        """Rows are ordered by k then angle, unreachable points are skipped."""
        grid = np.linspace(0.3, 0.9, 7) * np.pi
        sweep = stability.sweep_pdec([2, 1], grid)
        ks = [row.k for row in sweep.rows]
        self.assertEqual(ks, sorted(ks))
        self.assertTrue(all(k == 1 for k, _ in sweep.skipped))
        self.assertEqual(len(sweep.curve(2)), 7)
        angles = [row.theta_prime for row in sweep.curve(2)]
        self.assertEqual(angles, sorted(angles))

    def test_three_body_sweep_is_stable(self):
        """With U' = 10 decay stays small over the effective angle range."""
        sweep = stability.sweep_pdec([2, 3, 4], np.linspace(0.3, 0.95, 27) * np.pi, u3=10.0)
        self.assertTrue(all(sweep.curve(k) for k in (2, 3, 4)))
        self.assertLess(max(row.p_dec for row in sweep.rows), 0.30)
        k1 = stability.sweep_pdec([1], np.linspace(0.65, 0.95, 13) * np.pi, u3=10.0)
        self.assertEqual(len(k1.rows), 13)
        self.assertLess(max(row.p_dec for row in k1.rows), 0.30)

    def test_bare_sweep_has_low_point(self):
        """Some angle near the working point decays by less than ten percent."""
        sweep = stability.sweep_pdec([2], np.linspace(0.4, 0.6, 11) * np.pi)
        self.assertLess(min(row.p_dec for row in sweep.rows), 0.1)


class TestTuning(FloquetTestCase):
    """Minimization over three and four body couplings."""

    def test_tune_working_point(self):
        """Tuning reaches the grid optimum or better."""
        tuned = stability.tune_interactions(0.6 * np.pi, 2, [[0.0, 2.0], [0.0, 2.0]])
        reference = stability.decay_probability(0.8 * np.pi, 2, u3=0.45, u4=1.0).p_dec
        self.assertLessEqual(tuned.p_dec_min, tuned.grid_p_dec_min)
        self.assertLessEqual(tuned.p_dec_min, reference + 1e-15)
        self.assertLessEqual(tuned.p_dec_min, 2.5e-4)
        self.assertAlmostEqual(tuned.theta / np.pi, 0.8)
        self.assertRoundTripSerializable(tuned)

        for u3, u4, p_dec in stability.perturbation_scan(tuned, 0.1):
            with self.subTest(u3=u3, u4=u4):
                self.assertGreaterEqual(p_dec, tuned.p_dec_min - 1e-12)

    def test_degenerate_box(self):
        """A single point box evaluates that point."""
        tuned = stability.tune_interactions(0.6 * np.pi, 2, [[0.0, 0.0], [0.0, 0.0]], grid_points=3)
        self.assertEqual((tuned.u3, tuned.u4), (0.0, 0.0))
        self.assertAlmostEqual(tuned.p_dec_min, stability.decay_probability(0.8 * np.pi, 2).p_dec)
