import json
import os

from setuptools import setup, find_packages


def get_setup_version(reponame):
    """
    Helper to get the current version from either git describe or the
    .version file (if available).
    """
    basepath = os.path.split(__file__)[0]
    version_file_path = os.path.join(basepath, reponame, '.version')
    try:
        from param import version
    except ImportError:
        version = None
    if version is not None:
        return version.Version.setup_version(basepath, reponame, archive_commit="$Format:%h$")
    else:
        print("WARNING: param>=1.12.0 unavailable. If you are installing a package, this warning can safely be ignored. If you are creating a package or otherwise operating in a git repository, you should install param>=1.12.0.")
        return json.load(open(version_file_path))['version_string']


########## dependencies ##########

install_requires = [
    'param >=1.12.0',
    'numpy >=1.17',
    'scipy >=1.5.3',
    'pandas',
    'packaging',
    'tomli; python_version < "3.11"',
    'holoviews >=1.14.0',
    'colorcet >=2',
    'bokeh >=2.0.0',
]

extras_require = {
    'tests': [
        'flake8',
        'parameterized',
        'pytest',
        'pytest-cov',
    ],
    'doc': [
        'sphinx',
        'pydata-sphinx-theme <0.9.0',
        'sphinx-copybutton',
    ]
}

# until pyproject.toml/equivalent is widely supported (setup_requires
# doesn't work well with pip)
extras_require['build'] = [
    'param >=1.12.0',
    'setuptools'
]

extras_require['all'] = sorted(set(sum(extras_require.values(), [])))

########## metadata for setuptools ##########

setup_args = dict(
    name='qbm',
    version=get_setup_version("qbm"),
    description='Exact decoherence of a free quantum Brownian particle in a harmonic heat bath.',
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    packages=find_packages(),
    include_package_data=True,
    platforms=['Windows', 'Mac OS X', 'Linux'],
    license='BSD',
    classifiers = [
        "License :: OSI Approved :: BSD License",
        "Development Status :: 4 - Beta",
        "Programming Language :: Python :: 3.8",
        "Programming Language :: Python :: 3.9",
        "Programming Language :: Python :: 3.10",
        "Programming Language :: Python :: 3.11",
        "Operating System :: OS Independent",
        "Intended Audience :: Science/Research",
        "Natural Language :: English",
        "Topic :: Scientific/Engineering :: Physics"],
    python_requires=">=3.8",
    install_requires=install_requires,
    extras_require=extras_require,
    tests_require=extras_require['tests'],
    entry_points={
        'console_scripts': [
            'qbm = qbm.cli:main',
        ],
    },
)


if __name__ == '__main__':
    setup(**setup_args)
