#!/usr/bin/env python3

from setuptools import setup
from setuptools import find_packages


setup(
    name="horoflow",
    description="Volume-preserving capillary flow in a hyperbolic horoball",
    author="HoroFlow Developers",
    test_suite="test",
    license="BSD",
    python_requires="~=3.8",
    install_requires=[
        "numpy",
        "scipy",
        "pyyaml",
        "numba",
    ],
    packages=find_packages(exclude=("test*", "sim*", "doc*", "configs*", "examples*")),
    include_package_data=True,
    entry_points={
        "console_scripts": [
            "horoflow=horoflow.experiment:main",
        ],
    },
)
