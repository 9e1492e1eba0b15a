import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "ntksketch._fwht_cy",
                ["src/ntksketch/_fwht_cy.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Without Cython the package installs pure-Python; the transform core
    # falls back to the numpy implementation at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
