# This file is part of climabm, a spatial agent-based model of a
# climate-exposed economy.
#
# climabm is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License version 3
# as published by the Free Software Foundation.
#
# climabm is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with climabm.  If not, see <https://www.gnu.org/licenses/>.
"""
Runs the climabm test suites:

    python -m climabm.testsuite                 # unit
    python -m climabm.testsuite -s integration -s regression
"""
import os
import sys
import unittest

from climabm.cli import Cli
from climabm.logging import make_logger

HERE = os.path.dirname(__file__)
SUITES = ("unit", "integration", "regression")


def load(name):
    start_dir = os.path.join(HERE, name)
    return unittest.defaultTestLoader.discover(start_dir=start_dir, top_level_dir=start_dir)


def main(suites=[], out_file="stdout", failfast=False):
    """Run climabm test suites.

Parameters:

* `-s, --suites`: A suite to run, repeatable: `unit` (the default),
`integration` or `regression` (the five-seed baseline vs hazard
experiment, several minutes)
* `-o, --out-file`: Where to write the results. Defaults to `stdout`
* `-f, --failfast`: Stop at the first failure"""
    names = suites or ["unit"]
    unknown = [name for name in names if name not in SUITES]
    if unknown:
        print("unknown suite: {}".format(", ".join(unknown)), file=sys.stderr)
        return 2
    suite = unittest.TestSuite(load(name) for name in names)
    if out_file == "stdout":
        runner = unittest.TextTestRunner(stream=sys.stdout, failfast=failfast)
        return 0 if runner.run(suite).wasSuccessful() else 1
    with open(out_file, "w") as fp:
        runner = unittest.TextTestRunner(stream=fp, failfast=failfast)
        return 0 if runner.run(suite).wasSuccessful() else 1


if __name__ == "__main__":
    cli = Cli(main=main, description=main.__doc__, prog="climabm.testsuite")
    try:
        sys.exit(cli.run())
    except SystemExit:
        raise
    except Exception:
        make_logger("testsuite").exception("Test run aborted")
        raise
