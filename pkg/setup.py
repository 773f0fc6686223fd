"""Build script for the optional compiled event kernel.

The package works without the extension (a pure-Python kernel is selected
at import time), so a failed compile only costs speed, not correctness.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "tasring.kernel._fast",
                ["src/tasring/kernel/_fast.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

setup(ext_modules=extensions)
