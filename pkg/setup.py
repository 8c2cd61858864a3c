from setuptools import setup, find_packages
import os


here = os.path.abspath(os.path.dirname(__file__))
with open(os.path.join(here, 'README.rst'), encoding='utf-8') as f:
    long_description = f.read()
with open(os.path.join(here, 'requirements.txt'), encoding='utf-8') as f:
    install_requires = [line.strip() for line in f if line.strip()]


setup(
    name='cutgraph',
    version='1.0.0',
    author='cutgraph developers',
    description='Modular (cut) Bayesian inference on DAG models',
    long_description=long_description,
    license='GPLv3',
    keywords='bayesian modular inference cut distribution graphical model',
    packages=find_packages(exclude=('tests', 'tests.*')),
    package_data={'cutgraph.data': ['model.schema.json', 'models/*.json']},
    include_package_data=True,
    install_requires=install_requires,
    extras_require={'test': ['pytest', 'hypothesis']},
    entry_points={
        'console_scripts': ['cutgraph = cutgraph.cli:main'],
    },
    classifiers=[
        'Programming Language :: Python :: 3.7',
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'Topic :: Scientific/Engineering',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)'
    ]
)
