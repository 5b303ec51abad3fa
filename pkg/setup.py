"""Build script for the optional compiled ADM kernel.

The package works without the extension (a pure-numpy fallback is selected
at import time); the Cython kernel just removes per-iteration Python
overhead from the hot solver loop.
"""

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Build the extension if a toolchain is available, else warn and skip."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, headers, ...
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            self._warn(exc)

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            f"casseg: compiled ADM kernel not built ({exc}); "
            "falling back to the pure-Python solver loop"
        )


def _extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    exts = [
        Extension(
            "casseg._admcore",
            ["src/casseg/_admcore.pyx"],
            extra_compile_args=["-O3"],
        )
    ]
    return cythonize(
        exts,
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "initializedcheck": False,
        },
    )


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
