"""Setup file for the alphaform package (optional, for local development)."""
from setuptools import setup, find_packages

setup(
    name="alphaform",
    version="1.0.0",
    packages=find_packages(exclude=["tests", "examples", "examples.*"]),
    install_requires=[
        "pydantic==2.5.0",
        "sympy==1.12",
        "networkx==3.2.1",
    ],
    entry_points={
        "console_scripts": ["alphaform=alphaform.main:main"],
    },
)
