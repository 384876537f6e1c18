import os
from setuptools import setup


def read(fname):
    return open(os.path.join(os.path.dirname(__file__), fname)).read()


setup(
    name='jetflow',
    version='0.1.0',
    description='jetflowlib : Riemannian geometry, energy foliations and '
                'non-standard Lagrangians of autonomous second-order ODEs',
    long_description=read('README.md'),
    long_description_content_type='text/markdown',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Intended Audience :: Science/Research',
        'Operating System :: POSIX :: Linux',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics'],
    keywords='ode jet-bundle riemannian-geometry lagrangian first-integral',
    python_requires='>=3.8',
    packages=['jetflowlib'],
    package_dir={'jetflowlib': 'jetflowlib'},
    install_requires=['numpy', 'scipy'],
    extras_require={
        'plot': ['matplotlib'],
        'test': ['pytest', 'matplotlib']},
    entry_points={
        'console_scripts': ['jetflow = jetflowlib.cli:main']})
