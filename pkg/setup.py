"""Build script: compiles the optional Cython kernel core.

The package is fully functional without the extension (a pure-Python/NumPy
fallback is selected at import time), so a failed extension build degrades
to a warning instead of aborting the install. Set REPOGRAPH_SKIP_EXT=1 to
skip the extension entirely.
"""

import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    """build_ext that tolerates a missing compiler toolchain."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001 - any toolchain failure is non-fatal
            sys.stderr.write(f"warning: kernel extension not built ({exc}); "
                             "falling back to pure-Python kernels\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            sys.stderr.write(f"warning: {ext.name} not built ({exc}); "
                             "falling back to pure-Python kernels\n")


def extensions():
    if os.environ.get("REPOGRAPH_SKIP_EXT") == "1":
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    ext = Extension(
        "repograph._kernels._ckernels",
        ["src/repograph/_kernels/_ckernels.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3, quiet=True)


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
