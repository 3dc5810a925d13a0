#!/usr/bin/env python3
# 🌀 Eidosian Trajectory Forge - Package Setup
"""
Traj Forge - Package Setup

Configures the Traj Forge package for distribution. Kept alongside
pyproject.toml for tools that still call ``setup.py`` directly.
"""

from pathlib import Path

from setuptools import find_packages, setup

HERE = Path(__file__).parent

# The version lives in traj_forge/version.py; read it without importing the package
version_ns: dict = {}
exec((HERE / "src" / "traj_forge" / "version.py").read_text(encoding="utf-8"), version_ns)
version = version_ns["PEP440_VERSION"]

readme_file = HERE / "README.md"
long_description = (
    readme_file.read_text(encoding="utf-8")
    if readme_file.exists()
    else "Synthetic visual-SLAM sequence generator with automatically verified labels"
)

install_requires = [
    "numpy>=1.24.0",
    "scipy>=1.10.0",
    "pyyaml>=6.0.1",
    "colorama>=0.4.6",
    "tqdm>=4.66.0",
]

extras_require = {
    "dev": [
        "pytest>=7.0.0",
        "pytest-cov>=3.0.0",
        "black>=23.0.0",
        "isort>=5.10.0",
        "mypy>=1.0.0",
        "flake8>=6.0.0",
        "types-PyYAML>=6.0.0",
    ]
}

if __name__ == "__main__":
    setup(
        name="traj_forge",
        version=version,
        description="Synthetic visual-SLAM sequence generator with automatically verified labels",
        long_description=long_description,
        long_description_content_type="text/markdown",
        author="Lloyd Handyside",
        author_email="ace1928@gmail.com",
        maintainer="Lloyd Handyside",
        maintainer_email="ace1928@gmail.com",
        project_urls={
            "Source": "https://github.com/Ace1928/traj_forge",
            "Issue Tracker": "https://github.com/Ace1928/traj_forge/issues",
        },
        packages=find_packages(where="src", exclude=["tests", "tests.*"]),
        package_dir={"": "src"},
        classifiers=[
            "Development Status :: 3 - Alpha",
            "Intended Audience :: Science/Research",
            "License :: OSI Approved :: MIT License",
            "Programming Language :: Python :: 3",
            "Programming Language :: Python :: 3.9",
            "Programming Language :: Python :: 3.10",
            "Programming Language :: Python :: 3.11",
            "Programming Language :: Python :: 3.12",
            "Topic :: Scientific/Engineering :: Image Recognition",
        ],
        python_requires=">=3.9",
        install_requires=install_requires,
        extras_require=extras_require,
        entry_points={
            "console_scripts": [
                "traj-forge=traj_forge:main",
            ],
        },
        zip_safe=False,
    )
