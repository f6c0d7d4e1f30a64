"""Build script for the optional compiled kernel backend.

The package is pure Python by default; if Cython and a C compiler are
available, the scalar kernels in ``lmaudit._core_cy`` are compiled for a
large speedup on the simulation-heavy paths.  When either is missing the
build quietly falls back to the pure-Python backend, which implements the
same algorithms.

``-ffp-contract=off`` keeps the compiled arithmetic bit-for-bit identical
to the pure-Python backend (no fused multiply-adds), so both backends
produce identical random streams and identical reports.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    """Build the extension if possible, otherwise continue without it."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: compiled backend skipped ({exc}); using pure Python")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # pragma: no cover - toolchain dependent
            print(f"warning: {ext.name} skipped ({exc}); using pure Python")


def _extensions():
    if os.environ.get("LMAUDIT_SKIP_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:  # pragma: no cover - cython not installed
        return []
    ext = Extension(
        "lmaudit._core_cy",
        ["src/lmaudit/_core_cy.pyx"],
        extra_compile_args=["-O2", "-ffp-contract=off"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=_extensions(), cmdclass={"build_ext": _OptionalBuildExt})
