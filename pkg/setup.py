#!/usr/bin/env python3

from setuptools import find_packages, setup

setup(
    name="relaynet",
    version="0.1.0",
    description="Relay chain simulator: null-space behavioural control of support "
    "robots keeping a roaming agent linked to a base over a multi-hop network",
    install_requires=[
        "dataclasses_json",
        "networkx",
        "numpy",
        "omegaconf",
        "pandas",
        "pyyaml",
        "scipy",
        "tqdm",
    ],
    tests_require=[
        "pytest",
    ],
    python_requires=">=3.8",
    packages=find_packages(exclude=("tests", "tests.*")),
    package_data={"relaynet.cli": ["configs/*.yaml"]},
    entry_points={
        "console_scripts": [
            "relaynet=relaynet.cli.cli:main",
        ],
    },
)
