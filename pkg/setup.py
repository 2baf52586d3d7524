import os
from setuptools import setup

try:
    import pypandoc
    long_description = pypandoc.convert('README.md', 'rst', format='md')
except(IOError, ImportError):
    long_description = open('README.md').read()

ep = {
    'console_scripts': ['fracbench = fracbench.bench_cli:main']
}

setup(
    name = 'fracbench',
    packages=['fracbench'],
    entry_points=ep,
    version = '0.1.0',
    description = ('Fractional calculus numerics and convergence '
                   'benchmarks.'),
    license = 'MIT',
    keywords = ['fractional calculus', 'wavelets', 'stable distributions',
                'optimization'],
    include_package_data=True,
    long_description=long_description,
    install_requires=['numpy', 'scipy', 'pandas', 'PyWavelets'],
    extras_require={'test': ['pytest']},
    classifiers=[
        'Development Status :: 2 - Pre-Alpha',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: MIT License',
        'Natural Language :: English',
        'Programming Language :: Python :: 3',
        'Topic :: Scientific/Engineering :: Mathematics',
   ]
)
