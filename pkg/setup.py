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
import os
from setuptools import setup


# Utility function to read the README file.
# Used for the long_description.
def read(fname):
    with open(os.path.join(os.path.dirname(__file__), fname), "rb")as fin:
        return fin.read()

setup(
    name="climabm",
    version="0.1.0",
    description=(
        "A spatial agent-based model of an economy exposed to "
        "climate hazards, with evolving firm strategies"
    ),
    license="GPLv3",
    keywords="agent-based model climate flood hazard supply chain evolution",
    python_requires=">=3.8",
    install_requires=[
        "numpy",
        "networkx",
        "pandas>=1.5",
        "openpyxl",
        "matplotlib",
        "colorama",
        "mock",
    ],
    packages=[
        'climabm',
        'climabm.agents',
        'climabm.cli',
        'climabm.config',
        'climabm.engine',
        'climabm.evolution',
        'climabm.hashes',
        'climabm.hazard',
        'climabm.logging',
        'climabm.markets',
        'climabm.pprint',
        'climabm.scenario',
        'climabm.testsuite',
        'climabm.testsuite.unit',
        'climabm.testsuite.integration',
        'climabm.testsuite.regression',
        'climabm.timestamp',
    ],
    entry_points={
        'console_scripts': [
            'climabm = climabm.scenario:main',
        ],
    },
    include_package_data=True,
    long_description=read('README.md').decode(),
    long_description_content_type="text/markdown",
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Topic :: Scientific/Engineering",
        "License :: OSI Approved :: GNU General Public License v3 (GPLv3)",
    ],
)
