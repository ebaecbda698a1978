# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Run configuration.
"""

import dataclasses
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .exceptions import ConfigError
from .lattice import (
    Boundary,
    HoppingSchedule,
    LatticeSpec,
    build_afi_schedule,
    build_hhf_schedule,
)

logger = logging.getLogger(__name__)

MODELS = ("afi", "hhf")
COMMANDS = ("spectrum", "chern", "decouple", "evolve", "stability", "validate")


@dataclass
class RunConfig:
    """Parameters of one command line run.

    Angles are given in units of pi and energies in units of the hopping ``J``.
    Either ``k_index`` (the interaction then follows from the decoupling condition)
    or ``u_over_j`` sets the on-site interaction of two-particle runs.
    """

    model: str = "afi"
    lx: int = 9
    ly: int = 6
    boundary: str = "open"
    theta_over_pi: float = 0.8
    k_index: Optional[int] = None
    u_over_j: Optional[float] = None
    u_sign: int = 1
    u3_over_j: float = 0.0
    u4_over_j: float = 0.0
    alpha: Optional[float] = None
    phi_over_pi: float = 0.0
    periods: int = 40
    initial_site: Tuple[int, int] = (0, 0)
    stride: int = 1
    k_points: int = 64
    chern_grid: int = 32
    chern_windows: Optional[List[List[float]]] = None
    gap_threshold: float = 0.02
    k_list: List[int] = field(default_factory=lambda: [1, 2, 3, 4])
    theta_prime_grid: List[float] = field(default_factory=lambda: [0.02, 0.98, 49])
    theta_prime_over_pi: float = 0.6
    search_box: List[List[float]] = field(default_factory=lambda: [[0.0, 2.0], [0.0, 2.0]])
    tune: bool = False
    step_snapshots: bool = False
    store_amplitudes: bool = False

    def __post_init__(self):
        self.initial_site = tuple(self.initial_site)

    @classmethod
    def field_names(cls) -> List[str]:
        """Names of all configuration fields."""
        return [f.name for f in dataclasses.fields(cls)]

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        """Create a configuration, rejecting unknown keys."""
        known = set(cls.field_names())
        for key in data:
            if key not in known:
                raise ConfigError("unknown configuration key", field=key)
        return cls(**data)

    @staticmethod
    def parse_document(text: str) -> Dict[str, Any]:
        """Parse JSON text into the dictionary of explicitly given fields."""
        try:
            data = json.loads(text)
        except json.JSONDecodeError as ex:
            raise ConfigError(f"malformed JSON ({ex})") from ex
        if not isinstance(data, dict):
            raise ConfigError("configuration document must be a JSON object")
        return data

    @staticmethod
    def read_document(path: str) -> Dict[str, Any]:
        """Read a JSON configuration file without applying defaults."""
        try:
            with open(path, "r", encoding="utf-8") as fp:
                text = fp.read()
        except OSError as ex:
            raise ConfigError(f"cannot read configuration file {path} ({ex})") from ex
        return RunConfig.parse_document(text)

    @classmethod
    def from_json(cls, text: str) -> "RunConfig":
        """Parse a JSON configuration document."""
        return cls.from_dict(cls.parse_document(text))

    @classmethod
    def load(cls, path: str) -> "RunConfig":
        """Read a JSON configuration file."""
        return cls.from_dict(cls.read_document(path))

    def to_dict(self) -> Dict[str, Any]:
        """Plain dictionary of all fields."""
        data = dataclasses.asdict(self)
        data["initial_site"] = list(self.initial_site)
        return data

    def to_json(self) -> str:
        """Canonical JSON text with sorted keys."""
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"

    def merged(self, **overrides) -> "RunConfig":
        """Copy with the given fields replaced; ``None`` values are ignored."""
        updates = {key: value for key, value in overrides.items() if value is not None}
        known = set(self.field_names())
        for key in updates:
            if key not in known:
                raise ConfigError("unknown configuration key", field=key)
        return dataclasses.replace(self, **updates)

    @property
    def theta(self) -> float:
        """Hopping angle in radians."""
        return float(self.theta_over_pi) * np.pi

    @property
    def phi(self) -> float:
        """Uniform drive phase in radians."""
        return float(self.phi_over_pi) * np.pi

    @property
    def flux(self) -> float:
        """Flux per plaquette of the drive."""
        if self.model == "afi":
            return 0.0
        return 0.5 if self.alpha is None else float(self.alpha)

    def lattice_spec(self) -> LatticeSpec:
        """Lattice described by this configuration."""
        return LatticeSpec(self.lx, self.ly, Boundary(self.boundary))

    def build_schedule(self) -> HoppingSchedule:
        """Drive schedule of the configured model with ``tau`` set to the hopping angle."""
        spec = self.lattice_spec()
        if self.model == "hhf":
            schedule = build_hhf_schedule(spec, self.flux)
        else:
            schedule = build_afi_schedule(spec)
        return schedule.with_tau(self.theta)

    def theta_prime_values(self) -> np.ndarray:
        """Grid of effective hopping angles in radians."""
        start, stop, num = self.theta_prime_grid
        return np.linspace(float(start), float(stop), int(num)) * np.pi

    def validate(self, command: str):
        """Check the fields used by ``command``.

        Raises:
            ConfigError: Naming the first offending field.
            LatticeError: When the lattice dimensions are inconsistent.
        """
        if command not in COMMANDS:
            raise ConfigError(f"unknown command '{command}'")
        if self.model not in MODELS:
            raise ConfigError(f"must be one of {MODELS}, got '{self.model}'", field="model")
        try:
            Boundary(self.boundary)
        except ValueError as ex:
            raise ConfigError(f"unknown boundary '{self.boundary}'", field="boundary") from ex
        if self.u_sign not in (1, -1):
            raise ConfigError("must be +1 or -1", field="u_sign")
        _check_positive_int(self.k_points, "k_points")
        if not isinstance(self.chern_grid, int) or self.chern_grid < 2:
            raise ConfigError("must be an integer of at least 2", field="chern_grid")
        if self.k_index is not None:
            _check_positive_int(self.k_index, "k_index")

        if command in ("spectrum", "chern"):
            self._check_lattice()
            if not 0.0 <= self.theta_over_pi <= 1.0:
                raise ConfigError("must lie in [0, 1]", field="theta_over_pi")
            required = Boundary.CYLINDER_Y if command == "spectrum" else Boundary.TORUS
            if Boundary(self.boundary) != required:
                raise ConfigError(
                    f"{command} requires boundary '{required.value}'", field="boundary"
                )
            if self.chern_windows is not None:
                for window in self.chern_windows:
                    if len(window) != 2 or not all(-0.5 <= w <= 0.5 for w in window):
                        raise ConfigError(
                            "windows are [lo, hi] pairs within [-0.5, 0.5]",
                            field="chern_windows",
                        )
            if self.gap_threshold <= 0:
                raise ConfigError("must be positive", field="gap_threshold")

        elif command == "decouple":
            self._check_theta()
            if self.k_index is None:
                raise ConfigError("required by decouple", field="k_index")

        elif command == "evolve":
            self._check_lattice()
            self._check_theta()
            if Boundary(self.boundary) != Boundary.OPEN:
                raise ConfigError("evolve requires open boundaries", field="boundary")
            if (self.k_index is None) == (self.u_over_j is None):
                raise ConfigError(
                    "exactly one of k_index and u_over_j must be given", field="u_over_j"
                )
            _check_positive_int(self.periods, "periods")
            _check_positive_int(self.stride, "stride")
            x, y = self.initial_site
            if not (0 <= x < self.lx and 0 <= y < self.ly):
                raise ConfigError("site lies outside the lattice", field="initial_site")

        elif command == "stability":
            if not self.k_list or any(
                not isinstance(k, int) or isinstance(k, bool) or k < 1 for k in self.k_list
            ):
                raise ConfigError("must be a non-empty list of positive integers", field="k_list")
            if len(self.theta_prime_grid) != 3:
                raise ConfigError("must be [start, stop, num]", field="theta_prime_grid")
            start, stop, num = self.theta_prime_grid
            if not (0.0 <= start <= stop < 1.0) or int(num) != num or num < 1:
                raise ConfigError(
                    "requires 0 <= start <= stop < 1 and an integer count",
                    field="theta_prime_grid",
                )
            if self.tune:
                if self.k_index is None:
                    raise ConfigError("required by --tune", field="k_index")
                if not 0.0 < self.theta_prime_over_pi < 1.0:
                    raise ConfigError("must lie in (0, 1)", field="theta_prime_over_pi")
                box = np.asarray(self.search_box, dtype=float)
                if box.shape != (2, 2) or np.any(box[:, 0] > box[:, 1]):
                    raise ConfigError(
                        "must be [[u3_lo, u3_hi], [u4_lo, u4_hi]] with lo <= hi",
                        field="search_box",
                    )
        logger.debug("Configuration valid for %s.", command)

    def _check_theta(self):
        if not 0.0 < self.theta_over_pi <= 1.0:
            raise ConfigError("must lie in (0, 1]", field="theta_over_pi")

    def _check_lattice(self):
        for name in ("lx", "ly"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 2:
                raise ConfigError("must be an integer of at least 2", field=name)
        self.lattice_spec()

    def __json_encode__(self):
        return self.to_dict()

    @classmethod
    def __json_decode__(cls, value):
        return cls.from_dict(value)


def _check_positive_int(value, name):
    if not isinstance(value, int) or isinstance(value, bool) or value < 1:
        raise ConfigError(f"must be a positive integer, got {value!r}", field=name)
