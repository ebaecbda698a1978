# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Square lattice geometry and stepped hopping drives.

Sites are indexed row-major, ``index = x + lx * y``, with the origin in the
bottom-left corner. A period of the drive is split into steps; during a step
only the links of that step are active and each site takes part in at most one
link. The built-in drives use four link colours defined by the parity of
``x + y`` of the link's tail site:

* ``x_even`` / ``x_odd``: links along +x whose left site has even / odd parity,
* ``y_even`` / ``y_odd``: links along +y whose lower site has even / odd parity.

Links are oriented: a :class:`Link` ``i -> j`` always points along +x or +y,
and its ``phase`` multiplies the hopping term ``a_i^dagger a_j``.
"""

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Iterable, List, Optional, Tuple

import numpy as np

from .exceptions import LatticeError

logger = logging.getLogger(__name__)

Winding = Tuple[int, int]

AXES = ("x", "y")

# Time order of the link colours within one period. Under this order a particle
# at full transfer (theta = pi/2) starting in the bottom-left corner moves up the
# left edge, i.e. edge transport is clockwise.
AFI_STEP_ORDER = ("y_odd", "x_odd", "y_even", "x_even")


class Boundary(str, Enum):
    """Boundary conditions of the lattice."""

    OPEN = "open"
    CYLINDER_Y = "cylinder_y"
    TORUS = "torus"


@dataclass(frozen=True)
class LatticeSpec:
    """Square lattice of ``lx`` by ``ly`` sites.

    Args:
        lx: Number of sites along x.
        ly: Number of sites along y.
        boundary: Boundary condition. ``cylinder_y`` wraps y only, ``torus`` wraps both.

    Raises:
        LatticeError: When the dimensions are too small or not commensurate with the
            period-2 link pattern across a wrapped direction.
    """

    lx: int
    ly: int
    boundary: Boundary = Boundary.OPEN

    def __post_init__(self):
        try:
            object.__setattr__(self, "boundary", Boundary(self.boundary))
        except ValueError as ex:
            raise LatticeError(f"Unknown boundary condition '{self.boundary}'.") from ex
        for name in ("lx", "ly"):
            value = getattr(self, name)
            if isinstance(value, bool) or int(value) != value:
                raise LatticeError(f"{name} must be an integer, got {value!r}.")
            object.__setattr__(self, name, int(value))
            if getattr(self, name) < 2:
                raise LatticeError(f"{name} must be at least 2, got {value}.")
        if self.wraps_y and self.ly % 2:
            raise LatticeError(f"ly must be even when y is periodic, got {self.ly}.")
        if self.wraps_x and self.lx % 2:
            raise LatticeError(f"lx must be even when x is periodic, got {self.lx}.")

    @property
    def wraps_x(self) -> bool:
        """Whether x is periodic."""
        return self.boundary == Boundary.TORUS

    @property
    def wraps_y(self) -> bool:
        """Whether y is periodic."""
        return self.boundary in (Boundary.CYLINDER_Y, Boundary.TORUS)

    @property
    def n_sites(self) -> int:
        """Number of lattice sites."""
        return self.lx * self.ly

    def site_index(self, x: int, y: int) -> int:
        """Row-major index of the site at ``(x, y)``."""
        if not (0 <= x < self.lx and 0 <= y < self.ly):
            raise LatticeError(f"Site ({x}, {y}) is outside a {self.lx}x{self.ly} lattice.")
        return x + self.lx * y

    def coordinates(self, site: int) -> Tuple[int, int]:
        """Inverse of :meth:`site_index`."""
        if not 0 <= site < self.n_sites:
            raise LatticeError(f"Site index {site} is outside the lattice.")
        return site % self.lx, site // self.lx

    def neighbor(self, site: int, axis: str) -> Optional[Tuple[int, Winding]]:
        """Neighbor one step along ``+axis`` and the boundary winding of that link.

        Returns ``None`` when the link would leave an open lattice.
        """
        x, y = self.coordinates(site)
        if axis == "x":
            if x + 1 < self.lx:
                return self.site_index(x + 1, y), (0, 0)
            if self.wraps_x:
                return self.site_index(0, y), (1, 0)
            return None
        if axis == "y":
            if y + 1 < self.ly:
                return self.site_index(x, y + 1), (0, 0)
            if self.wraps_y:
                return self.site_index(x, 0), (0, 1)
            return None
        raise LatticeError(f"Unknown axis '{axis}'.")

    def nearest_neighbor_links(self) -> List[Tuple[int, int, Winding]]:
        """All oriented nearest-neighbor links ``(i, j, winding)`` of the lattice."""
        links = []
        for site in range(self.n_sites):
            for axis in AXES:
                found = self.neighbor(site, axis)
                if found is not None:
                    links.append((site, found[0], found[1]))
        return links

    def infer_winding(self, i: int, j: int) -> Optional[Winding]:
        """Winding of a link ``i -> j`` given without boundary information.

        Direct links take precedence over links across a periodic boundary.
        """
        candidates = []
        for axis in AXES:
            forward = self.neighbor(i, axis)
            if forward is not None and forward[0] == j:
                candidates.append(forward[1])
            backward = self.neighbor(j, axis)
            if backward is not None and backward[0] == i:
                candidates.append((-backward[1][0], -backward[1][1]))
        if not candidates:
            return None
        return min(candidates, key=lambda w: abs(w[0]) + abs(w[1]))

    def is_link(self, i: int, j: int, winding: Winding) -> bool:
        """Whether ``i -> j`` with the given winding joins nearest neighbors."""
        for axis in AXES:
            forward = self.neighbor(i, axis)
            if forward is not None and forward == (j, tuple(winding)):
                return True
            backward = self.neighbor(j, axis)
            if backward is not None and backward[0] == i:
                if (-backward[1][0], -backward[1][1]) == tuple(winding):
                    return True
        return False

    def __json_encode__(self):
        return {"lx": self.lx, "ly": self.ly, "boundary": self.boundary.value}

    @classmethod
    def __json_decode__(cls, value):
        return cls(**value)


@dataclass(frozen=True)
class Link:
    """A hopping link ``i -> j`` carrying the phase of ``a_i^dagger a_j``."""

    i: int
    j: int
    phase: float = 0.0
    winding: Winding = (0, 0)

    def __post_init__(self):
        if self.i == self.j:
            raise LatticeError(f"Link joins site {self.i} to itself.")
        object.__setattr__(self, "winding", tuple(int(w) for w in self.winding))

    @property
    def sites(self) -> Tuple[int, int]:
        """End points of the link."""
        return self.i, self.j

    def to_entry(self) -> list:
        """Schedule document entry ``[i, j, phase]`` or ``[i, j, phase, wx, wy]``."""
        entry = [self.i, self.j, float(self.phase)]
        if self.winding != (0, 0):
            entry.extend(self.winding)
        return entry


@dataclass(frozen=True)
class HoppingStep:
    """Links active during one sub-period."""

    links: Tuple[Link, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "links", tuple(self.links))


@dataclass(frozen=True)
class HoppingSchedule:
    """Ordered steps of one drive period on a lattice.

    ``tau`` is the step duration in units where ``J = 1``, which equals the hopping
    angle. It is optional; operators take the angle explicitly.
    """

    lattice: LatticeSpec
    steps: Tuple[HoppingStep, ...]
    tau: Optional[float] = None
    metadata: Dict[str, float] = field(default_factory=dict, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))

    @property
    def n_steps(self) -> int:
        """Number of steps ``N`` per period."""
        return len(self.steps)

    @property
    def period(self) -> Optional[float]:
        """Drive period ``T = N tau``."""
        if self.tau is None:
            return None
        return self.n_steps * self.tau

    @property
    def omega(self) -> Optional[float]:
        """Drive frequency ``2 pi / T``."""
        if not self.period:
            return None
        return 2 * np.pi / self.period

    def links(self) -> List[Link]:
        """All links of the period in step order."""
        return [link for step in self.steps for link in step.links]

    def with_tau(self, tau: float) -> "HoppingSchedule":
        """Copy with the step duration set."""
        return replace(self, tau=float(tau))

    def with_scaled_phases(self, factor: float) -> "HoppingSchedule":
        """Copy with every link phase multiplied by ``factor``, wrapped to [0, 2 pi)."""
        steps = []
        for step in self.steps:
            links = [replace(link, phase=_wrap_phase(factor * link.phase)) for link in step.links]
            steps.append(HoppingStep(links, label=step.label))
        return replace(self, steps=tuple(steps))

    def to_document(self) -> dict:
        """Plain JSON-compatible schedule document."""
        return {
            "lattice": self.lattice.__json_encode__(),
            "tau": self.tau,
            "labels": [step.label for step in self.steps],
            "steps": [[link.to_entry() for link in step.links] for step in self.steps],
        }

    @classmethod
    def from_document(cls, document: dict) -> "HoppingSchedule":
        """Build a schedule from :meth:`to_document` output or a hand written document.

        Entries may omit the winding, in which case it is inferred from the lattice.
        """
        lattice = LatticeSpec(**document["lattice"])
        labels = document.get("labels") or [""] * len(document["steps"])
        steps = []
        for label, entries in zip(labels, document["steps"]):
            links = []
            for entry in entries:
                i, j, phase = int(entry[0]), int(entry[1]), float(entry[2])
                if len(entry) >= 5:
                    winding = (int(entry[3]), int(entry[4]))
                else:
                    inside = 0 <= i < lattice.n_sites and 0 <= j < lattice.n_sites
                    winding = (lattice.infer_winding(i, j) if inside else None) or (0, 0)
                links.append(Link(i, j, phase, winding))
            steps.append(HoppingStep(links, label=label))
        return cls(lattice, tuple(steps), tau=document.get("tau"))

    def __json_encode__(self):
        return self.to_document()

    @classmethod
    def __json_decode__(cls, value):
        return cls.from_document(value)


@dataclass(frozen=True)
class ScheduleIssue:
    """A defect found by :func:`validate_schedule`."""

    kind: str
    step: Optional[int]
    sites: Tuple[int, ...]
    message: str


@dataclass(frozen=True)
class ScheduleReport:
    """Result of :func:`validate_schedule`."""

    issues: Tuple[ScheduleIssue, ...] = ()

    @property
    def valid(self) -> bool:
        """True when no issue was found."""
        return not self.issues

    def __str__(self):
        if self.valid:
            return "schedule valid"
        return "\n".join(issue.message for issue in self.issues)


def _wrap_phase(phase: float) -> float:
    return float(np.mod(phase, 2 * np.pi))


def _colour_step(
    spec: LatticeSpec,
    label: str,
    alpha: float = 0.0,
) -> HoppingStep:
    axis, parity = label.split("_")
    parity = 0 if parity == "even" else 1
    links = []
    for site in range(spec.n_sites):
        x, y = spec.coordinates(site)
        if (x + y) % 2 != parity:
            continue
        found = spec.neighbor(site, axis)
        if found is None:
            continue
        phase = _wrap_phase(2 * np.pi * alpha * x) if axis == "y" else 0.0
        links.append(Link(site, found[0], phase, found[1]))
    return HoppingStep(tuple(links), label=label)


def build_afi_schedule(spec: LatticeSpec) -> HoppingSchedule:
    """Four-step drive with trivial hopping phases.

    Links leaving an open lattice are dropped, so boundary sites idle in some steps.
    """
    steps = tuple(_colour_step(spec, label) for label in AFI_STEP_ORDER)
    logger.debug(
        "Built AFI schedule on %s: %s links per step.",
        spec,
        [len(step.links) for step in steps],
    )
    return HoppingSchedule(spec, steps)


def build_hhf_schedule(spec: LatticeSpec, alpha: float) -> HoppingSchedule:
    """Four-step drive with flux ``alpha`` per plaquette.

    Every +y link ``i -> j`` carries the phase ``2 pi alpha x_i``; x links carry none.

    Raises:
        LatticeError: On a torus when ``alpha * lx`` is not an integer, since the flux
            through plaquettes across the x seam would then differ.
    """
    if spec.wraps_x and not np.isclose(alpha * spec.lx, np.round(alpha * spec.lx)):
        raise LatticeError(
            f"Flux alpha={alpha} is not commensurate with a torus of lx={spec.lx}."
        )
    steps = tuple(_colour_step(spec, label, alpha=alpha) for label in AFI_STEP_ORDER)
    return HoppingSchedule(spec, steps, metadata={"alpha": float(alpha)})


def validate_schedule(schedule: HoppingSchedule, require_coverage: bool = False) -> ScheduleReport:
    """Report structural defects of a schedule.

    Args:
        schedule: Schedule to inspect.
        require_coverage: Also require every lattice link to appear exactly once per period.

    Returns:
        Report listing overlapping sites within a step, site indices outside the lattice,
        links between non-neighbors and, optionally, missing or repeated links.
    """
    spec = schedule.lattice
    issues = []
    seen = {}
    for step_index, step in enumerate(schedule.steps):
        used = {}
        for link in step.links:
            bad = [s for s in link.sites if not 0 <= s < spec.n_sites]
            if bad:
                issues.append(
                    ScheduleIssue(
                        "dangling",
                        step_index,
                        tuple(bad),
                        f"step {step_index}: link {link.i}->{link.j} uses sites outside the lattice",
                    )
                )
                continue
            for site in link.sites:
                if site in used:
                    issues.append(
                        ScheduleIssue(
                            "overlap",
                            step_index,
                            (site,),
                            f"step {step_index}: site {site} appears in more than one link",
                        )
                    )
                used[site] = link
            if not spec.is_link(link.i, link.j, link.winding):
                issues.append(
                    ScheduleIssue(
                        "non_neighbor",
                        step_index,
                        link.sites,
                        f"step {step_index}: sites {link.i} and {link.j} are not neighbors",
                    )
                )
                continue
            key = _undirected_key(spec, link)
            seen[key] = seen.get(key, 0) + 1

    if require_coverage:
        for i, j, winding in spec.nearest_neighbor_links():
            count = seen.get((i, j, winding), 0)
            if count != 1:
                issues.append(
                    ScheduleIssue(
                        "coverage",
                        None,
                        (i, j),
                        f"link {i}->{j} winding {winding} appears {count} times per period",
                    )
                )
    return ScheduleReport(tuple(issues))


def _undirected_key(spec: LatticeSpec, link: Link) -> Tuple[int, int, Winding]:
    for axis in AXES:
        found = spec.neighbor(link.i, axis)
        if found == (link.j, link.winding):
            return link.i, link.j, link.winding
    return link.j, link.i, (-link.winding[0], -link.winding[1])


def plaquette_flux(schedule: HoppingSchedule, x: int, y: int) -> float:
    """Oriented phase sum around the plaquette whose lower-left corner is ``(x, y)``.

    The plaquette is traversed counter-clockwise; a link traversed along its own
    orientation contributes ``+phase``.
    """
    spec = schedule.lattice
    phases = {}
    for link in schedule.links():
        phases[_undirected_key(spec, link)] = (
            link.phase if _undirected_key(spec, link)[0] == link.i else -link.phase
        )

    def _edge(site, axis):
        found = spec.neighbor(site, axis)
        if found is None:
            raise LatticeError(f"Plaquette at ({x}, {y}) leaves the lattice.")
        key = (site, found[0], found[1])
        if key not in phases:
            raise LatticeError(f"Link {key} is not driven by the schedule.")
        return phases[key], found[0]

    origin = spec.site_index(x, y)
    bottom, right_site = _edge(origin, "x")
    right, _ = _edge(right_site, "y")
    left, top_site = _edge(origin, "y")
    top, _ = _edge(top_site, "x")
    return float(bottom + right - top - left)


def schedule_hash(schedule: HoppingSchedule) -> str:
    """SHA-256 of the canonical schedule document."""
    text = json.dumps(schedule.to_document(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def save_schedule(schedule: HoppingSchedule, path: str):
    """Write a schedule document."""
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(schedule.to_document(), fp, sort_keys=True, indent=2)
        fp.write("\n")


def load_schedule(path: str) -> HoppingSchedule:
    """Read a schedule document."""
    with open(path, "r", encoding="utf-8") as fp:
        return HoppingSchedule.from_document(json.load(fp))


def steps_by_label(schedule: HoppingSchedule) -> Dict[str, HoppingStep]:
    """Steps keyed by colour label."""
    return {step.label: step for step in schedule.steps}


def reorder_steps(schedule: HoppingSchedule, order: Iterable[str]) -> HoppingSchedule:
    """Copy with the steps arranged in the given label order."""
    by_label = steps_by_label(schedule)
    return replace(schedule, steps=tuple(by_label[label] for label in order))
