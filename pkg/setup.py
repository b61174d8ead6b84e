#! /usr/bin/env python
#
import setuptools

# get version
exec(open("fcmstab/_version.py").read())
DESCRIPTION = "fcmstab: learned Nitsche stabilization for the finite cell method"
DISTNAME = "fcmstab"
MAINTAINER = "fcmstab developers"
MAINTAINER_EMAIL = ""
URL = ""
LICENSE = ""
DOWNLOAD_URL = ""
VERSION = __version__
PYTHON_REQUIRES = ">=3.8"


# Fetch ReadMe
with open("README.md", "r") as fh:
    LONG_DESCRIPTION = fh.read()

# Use requirements.txt to set the install_requires
with open("requirements.txt") as f:
    INSTALL_REQUIRES = [line.strip() for line in f if line.strip()]

# Fetch dev requirements files (including documentation)
with open("requirements-dev.txt") as f:
    dev_requirements = [line.strip() for line in f if line.strip()]

with open("docs/requirements.txt") as f:
    doc_requirements = [line.strip() for line in f if line.strip()]

dev_requirements += doc_requirements

EXTRAS_REQUIRES = {"dev": dev_requirements}


CLASSIFIERS = [
    "Intended Audience :: Science/Research",
    "Programming Language :: Python :: 3.8",
    "Programming Language :: Python :: 3.9",
    "Programming Language :: Python :: 3.10",
    "Programming Language :: Python :: 3.11",
    "Topic :: Scientific/Engineering :: Mathematics",
    "Topic :: Scientific/Engineering :: Artificial Intelligence",
    "Operating System :: OS Independent",
]

ENTRY_POINTS = {"console_scripts": ["fcmstab=fcmstab.cli:main"]}


if __name__ == "__main__":
    from setuptools import setup

    setup(
        name=DISTNAME,
        author=MAINTAINER,
        author_email=MAINTAINER_EMAIL,
        maintainer=MAINTAINER,
        maintainer_email=MAINTAINER_EMAIL,
        description=DESCRIPTION,
        long_description=LONG_DESCRIPTION,
        long_description_content_type="text/markdown",
        license=LICENSE,
        url=URL,
        version=VERSION,
        download_url=DOWNLOAD_URL,
        python_requires=PYTHON_REQUIRES,
        install_requires=INSTALL_REQUIRES,
        extras_require=EXTRAS_REQUIRES,
        packages=setuptools.find_packages(include=["fcmstab", "fcmstab.*"]),
        classifiers=CLASSIFIERS,
        entry_points=ENTRY_POINTS,
    )
