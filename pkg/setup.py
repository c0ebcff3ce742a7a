"""Build script: compiles the optional expression-kernel extension.

The package works without the extension (a vectorised numpy backend is
selected at import time), so a failed compile only prints a warning.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class _OptionalBuildExt(build_ext):
    """Degrade to the pure-python backend when no C toolchain is available."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # toolchain missing entirely
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        print(
            f"warning: building the compiled kernel failed ({exc}); "
            "bloch_wco will fall back to the pure-python backend",
            file=sys.stderr,
        )


ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("bloch_wco._core", ["src/bloch_wco/_core.pyx"])],
        language_level="3",
    )
except Exception as exc:  # Cython unavailable
    print(f"warning: cython unavailable ({exc}); skipping compiled kernel", file=sys.stderr)

setup(ext_modules=ext_modules, cmdclass={"build_ext": _OptionalBuildExt})
