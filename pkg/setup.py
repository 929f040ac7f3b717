"""A setuptools based setup module.

See:
https://packaging.python.org/en/latest/distributing.html
"""

from setuptools import setup, find_packages
from codecs import open
from os import path

here = path.abspath(path.dirname(__file__))

with open(path.join(here, 'README.rst'), encoding='utf-8') as f:
    long_description = f.read()

with open(path.join(here, 'requirements.txt')) as f:
    requirements = f.read().splitlines()

setup(
    name='scipion-degenflow',
    version='1.0.0',
    description='A Scipion plugin for degenerate elliptic flux problems, their regularity and traffic plans',
    long_description=long_description,
    author='degenflow developers',
    keywords='scipion scipion-3 pde traffic',
    packages=find_packages(exclude=['examples', 'examples.*']),
    install_requires=requirements,
    include_package_data=True,
    package_data={
       'degenflow': ['configs/*.json'],
    },
    entry_points={
        'pyworkflow.plugin': 'degenflow = degenflow',
        'console_scripts': 'degenflow = degenflow.cli:main',
    }
)
