"""Build script: compiles the optional fast-path kernel extension.

The package is fully functional without the extension; a pure-Python
implementation of the same kernels is selected at import time when the
compiled module is missing.  Set SPIRALRES_NO_EXTENSION=1 to skip the
compile entirely.
"""

import os
import warnings

from setuptools import setup, Extension
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """Try to build the extension; fall back to pure Python on failure."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing entirely
            warnings.warn(f"skipping compiled kernels ({exc}); "
                          "pure-Python backend will be used")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            warnings.warn(f"failed to compile {ext.name} ({exc}); "
                          "pure-Python backend will be used")


def make_ext_modules():
    if os.environ.get("SPIRALRES_NO_EXTENSION") == "1":
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "spiralres.kernels._fastpath",
        sources=["src/spiralres/kernels/_fastpath.pyx"],
        extra_compile_args=["-O3"],
    )
    return cythonize(
        [ext],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )


setup(
    ext_modules=make_ext_modules(),
    cmdclass={"build_ext": OptionalBuildExt},
)
