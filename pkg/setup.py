#!/usr/bin/env python

from setuptools import setup, find_packages

from kronprec.version import get_version


readme = open('README').read()

long_description = """
kronprec %s

----

%s

----

For more information, please see the documentation in ``docs/`` or execute
``kronprec --help``.
""" % (get_version('short'), readme)

setup(
    name='kronprec',
    version=get_version('short'),
    description='Tikhonov deblurring with CG and a half-precision Kronecker SVD preconditioner.',
    long_description=long_description,
    packages=find_packages(exclude=['tests']),
    test_suite='nose.collector',
    tests_require=['pynose', 'fudge'],
    install_requires=['numpy >=1.17', 'scipy >=1.4', 'pyyaml',
                      'Pillow >=7.0'],
    python_requires='>=3.8',
    entry_points={
        'console_scripts': [
            'kronprec = kronprec.main:main',
        ]
    },
    classifiers=[
          'Development Status :: 3 - Alpha',
          'Environment :: Console',
          'Intended Audience :: Science/Research',
          'License :: OSI Approved :: BSD License',
          'Operating System :: OS Independent',
          'Programming Language :: Python',
          'Programming Language :: Python :: 3',
          'Topic :: Scientific/Engineering :: Image Processing',
          'Topic :: Scientific/Engineering :: Mathematics',
    ],
)
