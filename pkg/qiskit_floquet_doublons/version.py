# This code is licensed under the Apache License, Version 2.0. You may
# obtain a copy of this license in the LICENSE.txt file in the root directory
# of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
#
# Any modifications or derivative works of this code must retain this
# copyright notice, and modified files need to carry a notice indicating
# that they have been altered from the originals.

"""Package version, with the git revision appended for development checkouts."""

import os
import subprocess

ROOT_DIR = os.path.dirname(os.path.abspath(__file__))

with open(os.path.join(ROOT_DIR, "VERSION.txt"), "r", encoding="utf-8") as version_file:
    VERSION = version_file.read().strip()


def _git(*args: str) -> str:
    env = {key: os.environ[key] for key in ("SYSTEMROOT", "PATH") if key in os.environ}
    env.update(LANGUAGE="C", LANG="C", LC_ALL="C")
    proc = subprocess.run(
        ["git", *args],
        stdout=subprocess.PIPE,
        stderr=subprocess.PIPE,
        env=env,
        cwd=os.path.dirname(ROOT_DIR),
        check=False,
    )
    if proc.returncode > 0:
        raise OSError(proc.stderr.decode("ascii", "replace"))
    return proc.stdout.strip().decode("ascii")


def get_version_info() -> str:
    """Release version, or ``<version>.dev0+<sha>`` off a tagged commit."""
    if not os.path.exists(os.path.join(os.path.dirname(ROOT_DIR), ".git")):
        return VERSION
    try:
        if _git("tag", "-l", "--points-at", "HEAD"):
            return VERSION
        return f"{VERSION}.dev0+{_git('rev-parse', 'HEAD')[:7]}"
    except OSError:
        return VERSION


__version__ = get_version_info()
