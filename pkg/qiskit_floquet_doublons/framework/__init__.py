# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Floquet Lattice Framework.

Lattice geometry, hopping schedules, run configuration and result file writers.
"""

from .exceptions import (
    FloquetDoublonError,
    LatticeError,
    ConfigError,
    NoSolutionError,
    OutOfRangeError,
    GapClosingError,
    EigensolverError,
    ValidationError,
)
from .lattice import (
    Boundary,
    LatticeSpec,
    Link,
    HoppingStep,
    HoppingSchedule,
    ScheduleIssue,
    ScheduleReport,
    build_afi_schedule,
    build_hhf_schedule,
    validate_schedule,
    plaquette_flux,
    schedule_hash,
    save_schedule,
    load_schedule,
)
from .config import RunConfig
from .io import write_csv, write_json, read_json
from .utils import format_params, format_csv_value, wrap_quasienergy
