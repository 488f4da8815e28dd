#!/usr/bin/env python3

from setuptools import setup, find_packages
from pathlib import Path


readme = Path(__file__).parent / "README.md"
# Keep these alphabetical, if possible
deps = [
    "addict>=2",
    "alive-progress>=2",
    "appdirs",
    "asteval",
    "docopt",
    "jinja2",
    "more-itertools",
    "numpy>=1.22",
    "pyyaml>=3.10",
    "scipy>=1.8",
    ]
bdeps = [
    'setuptools-scm>=3.3.0',
    'wheel',
    ]
tdeps = [
    'pytest',
    'pytest-subtests',
    'tox',
    ]
scmver = {
    'write_to': 'src/schrolab/version.py',
    'fallback_version': 'UNKNOWN',
    }
classifiers = [
    "Development Status :: 3 - Alpha",
    "Intended Audience :: Science/Research",
    "Natural Language :: English",
    "Operating System :: OS Independent",
    "Programming Language :: Python :: 3",
    "Topic :: Scientific/Engineering :: Mathematics",
    ]

setup(name="schrolab",
      packages=find_packages("src"),
      package_dir={'': "src"},
      include_package_data=True,
      package_data={'schrolab': ['config/*.yaml', 'templates/*.j2']},
      install_requires=deps,
      setup_requires=bdeps,
      tests_require=tdeps,
      use_scm_version=scmver,
      author="Andrew Vant",
      author_email="ajvant@gmail.com",
      description="Spectral laboratory for Schrodinger evolution on model "
                  "manifolds: maximal functions, Strichartz and local "
                  "smoothing probes.",
      long_description=readme.read_text(),
      long_description_content_type='text/markdown',
      classifiers=classifiers,
      zip_safe=False,
      keywords="schrodinger spectral strichartz maximal-function",
      test_suite="test",
      entry_points={"console_scripts": ["schrolab = schrolab.cli:main"]},
      )
