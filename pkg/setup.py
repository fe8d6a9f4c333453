"""Setup configuration for dmrsense"""

from setuptools import setup, find_packages

with open("README.md", "r", encoding="utf-8") as f:
    long_description = f.read()

setup(
    name="dmrsense",
    version="0.1.0",
    author="dmrsense developers",
    description="DMRS-based OFDM range and velocity sensing simulator",
    long_description=long_description,
    long_description_content_type="text/markdown",
    packages=find_packages(include=["dmrsense", "dmrsense.*"]),
    python_requires=">=3.8",
    install_requires=[
        "click>=8.0.0",
        "numpy>=1.21.0",
        "scipy>=1.7.0",
    ],
    entry_points={
        "console_scripts": [
            "dmrsense=dmrsense.cli:main",
        ],
    },
    classifiers=[
        "Development Status :: 3 - Alpha",
        "Intended Audience :: Science/Research",
        "License :: OSI Approved :: MIT License",
        "Programming Language :: Python :: 3",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Topic :: Scientific/Engineering",
    ],
)
