# -*- coding: utf-8 -*-
import sys

if sys.version_info < (3, 9):

    error = """
    gradid only supports Python 3.9 and above.\n\nPlease upgrade your Python and try again,\nor make sure you are using the pip3 command!
    """

    print(error)
    sys.exit(1)

from setuptools import setup, find_packages
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

# Get the long description from the README file
with open(path.join(here, 'README.md'), encoding='utf-8') as f:
    readme = f.read()

setup(
    name='gradid',
    version='0.1.0',
    description='Monte-Carlo gradient identities for Gaussians, Gaussian '
    'variance-mean mixtures and exponential families, checked against '
    'quadrature oracles',
    long_description=readme,
    long_description_content_type='text/markdown',
    keywords='gradient estimation reparameterization Monte Carlo',
    packages=find_packages(exclude=['contrib', 'docs', 'tests', 'examples']),
    python_requires='>=3.9',
    classifiers=[
        'Programming Language :: Python :: 3 :: Only',
        'Programming Language :: Python :: 3.9',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: 3.12',
        ],
    install_requires=['tinydb>=4', 'tqdm', 'numpy>=1.21', 'xarray', 'click>=7',
                      'scipy>=1.8'],
    extras_require={
        'dev': ['check-manifest'],
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'gradid=gradid:cli',
        ],
    },
)
