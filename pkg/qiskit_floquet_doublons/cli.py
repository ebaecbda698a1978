# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Command line interface.
"""

import argparse
import logging
import sys
from typing import List, Optional

from qiskit_floquet_doublons.framework.config import RunConfig
from qiskit_floquet_doublons.framework.exceptions import (
    ConfigError,
    EigensolverError,
    FloquetDoublonError,
    GapClosingError,
    LatticeError,
    NoSolutionError,
    OutOfRangeError,
    ValidationError,
)
from qiskit_floquet_doublons.library.experiments import WORKFLOWS
from qiskit_floquet_doublons.version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_CONFIG = 2
EXIT_NO_SOLUTION = 3
EXIT_FAILURE = 4

# Geometry a command falls back to before the configuration file and flags apply.
COMMAND_DEFAULTS = {
    "spectrum": {"boundary": "cylinder_y", "lx": 100, "ly": 2, "theta_over_pi": 0.6},
    "chern": {"model": "hhf", "boundary": "torus", "lx": 2, "ly": 2, "theta_over_pi": 0.25},
}

# (flag, config field, argparse keywords)
PHYSICS_FLAGS = [
    ("--model", "model", {"choices": ["afi", "hhf"]}),
    ("--lx", "lx", {"type": int}),
    ("--ly", "ly", {"type": int}),
    ("--boundary", "boundary", {"choices": ["open", "cylinder_y", "torus"]}),
    ("--theta-over-pi", "theta_over_pi", {"type": float}),
    ("--k-index", "k_index", {"type": int}),
    ("--u-over-j", "u_over_j", {"type": float}),
    ("--u-sign", "u_sign", {"type": int, "choices": [1, -1]}),
    ("--u3-over-j", "u3_over_j", {"type": float}),
    ("--u4-over-j", "u4_over_j", {"type": float}),
    ("--alpha", "alpha", {"type": float}),
    ("--phi-over-pi", "phi_over_pi", {"type": float}),
    ("--periods", "periods", {"type": int}),
    ("--initial-site", "initial_site", {"type": int, "nargs": 2, "metavar": ("X", "Y")}),
    ("--stride", "stride", {"type": int}),
    ("--k-points", "k_points", {"type": int}),
    ("--chern-grid", "chern_grid", {"type": int}),
    ("--gap-threshold", "gap_threshold", {"type": float}),
    ("--k-list", "k_list", {"type": int, "nargs": "+"}),
    (
        "--theta-prime-grid",
        "theta_prime_grid",
        {"type": float, "nargs": 3, "metavar": ("START", "STOP", "NUM")},
    ),
    ("--theta-prime-over-pi", "theta_prime_over_pi", {"type": float}),
    ("--tune", "tune", {"action": "store_const", "const": True}),
    ("--step-snapshots", "step_snapshots", {"action": "store_const", "const": True}),
    ("--store-amplitudes", "store_amplitudes", {"action": "store_const", "const": True}),
]


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one sub-parser per command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON run configuration file.")
    common.add_argument("--output", default=".", help="Directory for result files.")
    common.add_argument(
        "-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging."
    )
    for flag, dest, kwargs in PHYSICS_FLAGS:
        common.add_argument(flag, dest=dest, default=None, **kwargs)

    parser = argparse.ArgumentParser(
        prog="floquet-doublons",
        description="Floquet lattice simulations of single particles and doublons.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("spectrum", parents=[common], help="Cylinder quasi-energy spectrum.")
    sub.add_parser("chern", parents=[common], help="Chern numbers on a torus.")
    decouple = sub.add_parser("decouple", parents=[common], help="Decoupling condition.")
    decouple.add_argument("--json", action="store_true", help="Print the solution as JSON.")
    decouple.add_argument("--k-max", type=int, default=None, help="Print a table for k = 1..K_MAX.")
    sub.add_parser("evolve", parents=[common], help="Doublon trajectory.")
    sub.add_parser("stability", parents=[common], help="Doublon pair decay sweeps.")
    validate = sub.add_parser("validate", parents=[common], help="Oracle equivalence checks.")
    validate.add_argument(
        "--check", action="append", default=None, help="Run only the named check."
    )
    return parser


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Defaults, then command defaults, then the file, then flags."""
    config = RunConfig(**COMMAND_DEFAULTS.get(args.command, {}))
    if args.config:
        config = config.merged(**RunConfig.read_document(args.config))
    overrides = {dest: getattr(args, dest) for _, dest, _ in PHYSICS_FLAGS}
    return config.merged(**overrides)


def _configure_logging(verbosity: int):
    level = logging.WARNING
    if verbosity == 1:
        level = logging.INFO
    elif verbosity >= 2:
        level = logging.DEBUG
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger("qiskit_floquet_doublons").setLevel(level)


def _workflow_options(args: argparse.Namespace) -> dict:
    if args.command == "decouple":
        return {"as_json": args.json, "k_max": args.k_max}
    if args.command == "validate" and args.check:
        return {"checks": args.check}
    return {}


def main(argv: Optional[List[str]] = None) -> int:
    """Run the command line and return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    _configure_logging(args.verbose)

    try:
        config = resolve_config(args)
        logger.debug("Resolved configuration for %s: %s", args.command, config.to_dict())
        workflow = WORKFLOWS[args.command](config, args.output)
        options = _workflow_options(args)
        if options:
            workflow.set_experiment_options(**options)
        result = workflow.run()
    except (ConfigError, LatticeError) as ex:
        print(f"configuration error: {ex}", file=sys.stderr)
        return EXIT_CONFIG
    except (NoSolutionError, OutOfRangeError) as ex:
        print(f"no solution: {ex}", file=sys.stderr)
        return EXIT_NO_SOLUTION
    except (GapClosingError, EigensolverError, ValidationError) as ex:
        print(f"numerical failure: {ex}", file=sys.stderr)
        return EXIT_FAILURE
    except FloquetDoublonError as ex:
        print(f"error: {ex}", file=sys.stderr)
        return EXIT_ERROR

    for line in result.lines:
        print(line)
    if args.command == "validate" and not result.value("validation_passed"):
        return EXIT_FAILURE
    return EXIT_OK
