"""Builds the optional compiled projection kernels (rerm._hot).

The package works without the extension: rerm.kernels falls back to the
pure-numpy implementation when the import fails.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "rerm._hot",
                ["src/rerm/_hot.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
