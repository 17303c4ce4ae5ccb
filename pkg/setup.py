"""Build hook for the optional compiled kernel extension.

The package works without the extension: repokg._kernels falls back to the
pure-Python implementations when the compiled module is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "repokg._kernels._ckernels",
                ["src/repokg/_kernels/_ckernels.pyx"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
