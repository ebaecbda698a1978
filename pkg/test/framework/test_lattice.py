# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Tests for lattice geometry and hopping schedules
"""

import os

import numpy as np

from test.base import FloquetTestCase
from qiskit_floquet_doublons.framework.exceptions import LatticeError
from qiskit_floquet_doublons.framework.lattice import (
    AFI_STEP_ORDER,
    Boundary,
    HoppingSchedule,
    HoppingStep,
    LatticeSpec,
    Link,
    build_afi_schedule,
    build_hhf_schedule,
    load_schedule,
    plaquette_flux,
    reorder_steps,
    save_schedule,
    schedule_hash,
    validate_schedule,
)


class TestLatticeSpec(FloquetTestCase):
    """Lattice indexing and boundary conditions."""

    def test_site_index_round_trip(self):
        """Sites are indexed row major from the bottom-left corner."""
        spec = LatticeSpec(9, 6)
        self.assertEqual(spec.n_sites, 54)
        self.assertEqual(spec.site_index(0, 0), 0)
        self.assertEqual(spec.site_index(8, 0), 8)
        self.assertEqual(spec.site_index(0, 1), 9)
        self.assertEqual(spec.coordinates(spec.site_index(4, 3)), (4, 3))

    def test_outside_site(self):
        """Coordinates outside the lattice are rejected."""
        spec = LatticeSpec(3, 3)
        with self.assertRaises(LatticeError):
            spec.site_index(3, 0)
        with self.assertRaises(LatticeError):
            spec.coordinates(9)

    def test_invalid_dimensions(self):
        """Too small or odd periodic dimensions raise."""
        with self.assertRaises(LatticeError):
            LatticeSpec(1, 4)
        with self.assertRaises(LatticeError):
            LatticeSpec(4, 3, Boundary.CYLINDER_Y)
        with self.assertRaises(LatticeError):
            LatticeSpec(3, 4, Boundary.TORUS)
        with self.assertRaises(LatticeError):
            LatticeSpec(4, 4, "mobius")

    def test_boundary_from_string(self):
        """Boundary names are accepted in place of the enum."""
        spec = LatticeSpec(4, 2, "cylinder_y")
        self.assertIs(spec.boundary, Boundary.CYLINDER_Y)
        self.assertTrue(spec.wraps_y)
        self.assertFalse(spec.wraps_x)

    def test_neighbors(self):
        """Open lattices drop links across the edge, periodic ones wind."""
        open_spec = LatticeSpec(3, 2)
        self.assertIsNone(open_spec.neighbor(2, "x"))
        self.assertEqual(open_spec.neighbor(0, "y"), (3, (0, 0)))
        torus = LatticeSpec(2, 2, Boundary.TORUS)
        self.assertEqual(torus.neighbor(1, "x"), (0, (1, 0)))
        self.assertEqual(torus.neighbor(2, "y"), (0, (0, 1)))
        self.assertEqual(len(torus.nearest_neighbor_links()), 8)

    def test_infer_winding_prefers_direct_link(self):
        """On a two site wide torus the direct link wins."""
        torus = LatticeSpec(2, 2, Boundary.TORUS)
        self.assertEqual(torus.infer_winding(0, 1), (0, 0))
        self.assertEqual(torus.infer_winding(1, 0), (0, 0))
        self.assertIsNone(LatticeSpec(4, 4).infer_winding(0, 5))

    def test_serialize(self):
        """Lattice specs survive a JSON round trip."""
        self.assertRoundTripSerializable(LatticeSpec(6, 4, Boundary.TORUS))


class TestSchedules(FloquetTestCase):
    """Built-in drives and schedule validation."""

    def test_afi_link_counts(self):
        """Every nearest-neighbor link of an open lattice is driven once."""
        schedule = build_afi_schedule(LatticeSpec(6, 4))
        self.assertEqual(schedule.n_steps, 4)
        self.assertEqual([step.label for step in schedule.steps], list(AFI_STEP_ORDER))
        self.assertEqual(len(schedule.links()), 38)
        self.assertTrue(validate_schedule(schedule, require_coverage=True).valid)

    def test_afi_two_by_two(self):
        """A 2x2 plaquette has one link in each step."""
        schedule = build_afi_schedule(LatticeSpec(2, 2))
        self.assertEqual([len(step.links) for step in schedule.steps], [1, 1, 1, 1])

    def test_periodic_coverage(self):
        """Torus and cylinder drives cover the seam links."""
        for spec in (LatticeSpec(4, 4, Boundary.TORUS), LatticeSpec(6, 2, Boundary.CYLINDER_Y)):
            with self.subTest(boundary=spec.boundary):
                report = validate_schedule(build_afi_schedule(spec), require_coverage=True)
                self.assertTrue(report.valid, msg=str(report))

    def test_steps_are_site_disjoint(self):
        """No site takes part in two links of one step."""
        schedule = build_hhf_schedule(LatticeSpec(5, 5), 0.25)
        for step in schedule.steps:
            sites = [site for link in step.links for site in link.sites]
            self.assertEqual(len(sites), len(set(sites)))

    def test_hhf_flux(self):
        """Each plaquette encloses flux 2 pi alpha."""
        alpha = 0.25
        schedule = build_hhf_schedule(LatticeSpec(6, 4), alpha)
        for x in range(5):
            for y in range(3):
                flux = plaquette_flux(schedule, x, y)
                self.assertAlmostEqual(np.mod(flux, 2 * np.pi), 2 * np.pi * alpha)

    def test_afi_has_no_flux(self):
        """The plain drive carries no phases."""
        schedule = build_afi_schedule(LatticeSpec(4, 4))
        self.assertEqual(plaquette_flux(schedule, 1, 1), 0.0)

    def test_hhf_incommensurate_torus(self):
        """A torus rejects flux that does not fit its width."""
        build_hhf_schedule(LatticeSpec(2, 2, Boundary.TORUS), 0.5)
        with self.assertRaises(LatticeError):
            build_hhf_schedule(LatticeSpec(2, 2, Boundary.TORUS), 0.25)

    def test_validation_reports(self):
        """Overlapping, dangling and non-neighbor links are reported."""
        spec = LatticeSpec(3, 2)
        steps = (
            HoppingStep((Link(0, 1), Link(1, 2))),
            HoppingStep((Link(0, 2),)),
            HoppingStep((Link(0, 99),)),
        )
        report = validate_schedule(HoppingSchedule(spec, steps))
        kinds = [issue.kind for issue in report.issues]
        self.assertFalse(report.valid)
        self.assertIn("overlap", kinds)
        self.assertIn("non_neighbor", kinds)
        self.assertIn("dangling", kinds)

    def test_missing_step_breaks_coverage(self):
        """Dropping a colour leaves links undriven."""
        schedule = build_afi_schedule(LatticeSpec(4, 4))
        partial = HoppingSchedule(schedule.lattice, schedule.steps[:3])
        report = validate_schedule(partial, require_coverage=True)
        self.assertTrue(report.issues)
        self.assertTrue(all(issue.kind == "coverage" for issue in report.issues))
        self.assertTrue(validate_schedule(partial).valid)

    def test_self_link(self):
        """A link needs two distinct sites."""
        with self.assertRaises(LatticeError):
            Link(3, 3)

    def test_timing(self):
        """Period and frequency follow from the step duration."""
        schedule = build_afi_schedule(LatticeSpec(2, 2))
        self.assertIsNone(schedule.period)
        timed = schedule.with_tau(0.5)
        self.assertEqual(timed.period, 2.0)
        self.assertAlmostEqual(timed.omega, np.pi)

    def test_reorder_steps(self):
        """Steps can be rearranged by label."""
        schedule = build_afi_schedule(LatticeSpec(4, 4))
        order = tuple(reversed(AFI_STEP_ORDER))
        reordered = reorder_steps(schedule, order)
        self.assertEqual(tuple(step.label for step in reordered.steps), order)
        self.assertNotEqual(schedule_hash(schedule), schedule_hash(reordered))

    def test_scaled_phases(self):
        """Scaling by zero removes all phases."""
        schedule = build_hhf_schedule(LatticeSpec(4, 4), 0.25).with_scaled_phases(0.0)
        self.assertTrue(all(link.phase == 0.0 for link in schedule.links()))

    def test_hash_is_stable(self):
        """Equal schedules hash equally, different flux does not."""
        spec = LatticeSpec(4, 4)
        self.assertEqual(
            schedule_hash(build_hhf_schedule(spec, 0.25)),
            schedule_hash(build_hhf_schedule(spec, 0.25)),
        )
        self.assertNotEqual(
            schedule_hash(build_hhf_schedule(spec, 0.25)),
            schedule_hash(build_hhf_schedule(spec, 0.5)),
        )

    def test_document_round_trip(self):
        """Schedules written to disk read back unchanged."""
        schedule = build_hhf_schedule(LatticeSpec(4, 4, Boundary.TORUS), 0.5).with_tau(0.3)
        path = os.path.join(self.make_output_dir(), "schedule.json")
        save_schedule(schedule, path)
        self.assertEqual(load_schedule(path), schedule)
        self.assertRoundTripSerializable(schedule)

    def test_document_infers_winding(self):
        """Hand written entries without winding pick it up from the lattice."""
        document = {
            "lattice": {"lx": 4, "ly": 4, "boundary": "cylinder_y"},
            "steps": [[[0, 4, 0.0]], [[12, 0, 0.0]]],
        }
        schedule = HoppingSchedule.from_document(document)
        self.assertEqual(schedule.steps[0].links[0].winding, (0, 0))
        self.assertEqual(schedule.steps[1].links[0].winding, (0, 1))
        self.assertTrue(validate_schedule(schedule).valid)
