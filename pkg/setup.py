# Copyright Sierra

from setuptools import find_packages, setup

setup(
    name="ccnx_migrate",
    version="0.1.0",
    description="VM migration over Content Centric Networking, in a discrete-event simulator",
    long_description=open("README.md").read(),
    packages=find_packages(exclude=["tests", "tests.*"]),
    include_package_data=True,
    install_requires=[
        "pydantic>=2.0.0",
        "termcolor>=2.4.0",
        "numpy>=1.26.4",
        "simpy>=4.1.1",
    ],
    extras_require={
        "test": ["pytest>=8.0.0"],
    },
    entry_points={
        "console_scripts": ["ccnx-migrate=ccnx_migrate.cli:main"],
    },
)
