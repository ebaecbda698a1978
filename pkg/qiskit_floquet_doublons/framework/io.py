# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.
"""
Result file writers.

Output files are deterministic: the same inputs always give byte-identical files.
"""

import csv
import json
import logging
import os
from typing import Any, Iterable, Sequence

from qiskit_experiments.framework import ExperimentDecoder, ExperimentEncoder

from .utils import format_csv_value

logger = logging.getLogger(__name__)


def write_csv(path: str, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> int:
    """Write rows under a fixed header.

    Returns:
        Number of data rows written.
    """
    count = 0
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8", newline="") as fp:
        writer = csv.writer(fp, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"Row {row} does not match header {header}.")
            writer.writerow([format_csv_value(value) for value in row])
            count += 1
    logger.info("Wrote %d rows to %s.", count, path)
    return count


def write_json(path: str, document: Any):
    """Write a JSON document with the experiment encoder and sorted keys."""
    _ensure_parent(path)
    with open(path, "w", encoding="utf-8") as fp:
        json.dump(document, fp, cls=ExperimentEncoder, sort_keys=True, indent=2)
        fp.write("\n")
    logger.info("Wrote %s.", path)


def read_json(path: str) -> Any:
    """Read a document written by :func:`write_json`."""
    with open(path, "r", encoding="utf-8") as fp:
        return json.load(fp, cls=ExperimentDecoder)


def _ensure_parent(path: str):
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
