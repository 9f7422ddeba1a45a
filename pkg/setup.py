#!/usr/bin/env python3

"""
This file is part of FSOLink.

FSOLink is free software: you can redistribute it and/or modify
it under the terms of the GNU General Public License as published by
the Free Software Foundation, either version 3 of the License, or
(at your option) any later version.

FSOLink is distributed in the hope that it will be useful,
but WITHOUT ANY WARRANTY; without even the implied warranty of
MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
GNU General Public License for more details.

You should have received a copy of the GNU General Public License
along with FSOLink. If not, see <https://www.gnu.org/licenses/>.
"""

REQUIREMENTS = ["numpy>=1.22", "scipy>=1.8", "numba>=0.56", "pandas>=1.4"]

try:
    from cx_Freeze import setup, Executable

    setup(
        name="FSOLink",
        version="1.0",
        description="FSOLink - a coherent LEO-to-ground optical link simulator",
        author="FSOLink developers",
        executables=[Executable("fsolink/__main__.py", target_name="fsolink.exe")]
    )

except ImportError:
    from setuptools import find_packages, setup

    setup(
        name="FSOLink",
        version="1.0",
        description="FSOLink - a coherent LEO-to-ground optical link simulator",
        author="FSOLink developers",
        license="GPLv3",
        packages=find_packages(exclude=["tests"]),
        python_requires=">=3.9",
        install_requires=REQUIREMENTS,
        extras_require={"test": ["pytest"], "docs": ["sphinx", "sphinx_rtd_theme"]},
        entry_points={"console_scripts": ["fsolink=fsolink.fsolink:main"]}
    )
