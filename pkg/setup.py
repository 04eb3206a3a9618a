"""Build script for the optional compiled kernel extension.

The package works without the extension (a NumPy fallback is selected at
import time), so a missing compiler or Cython only costs speed, not
functionality.
"""

import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """Degrade to the pure-Python fallback when compilation fails.

    The kernel is compiled for the installing machine, so it first tries
    host-tuned flags; if the compiler rejects them it retries with plain
    optimization before giving up on the extension entirely.
    """

    def run(self):
        try:
            super().run()
        except Exception as exc:  # compiler missing, etc.
            self._warn(exc)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception:
            pruned = [a for a in ext.extra_compile_args if a == "-O3"]
            if pruned != ext.extra_compile_args:
                ext.extra_compile_args = pruned
                try:
                    super().build_extension(ext)
                    return
                except Exception as exc:
                    self._warn(exc)
                    return
            self._warn(sys.exc_info()[1])

    @staticmethod
    def _warn(exc):
        import warnings

        warnings.warn(
            "otclust: compiled kernels unavailable (%s); "
            "falling back to the pure-Python implementation" % (exc,)
        )


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [
            Extension(
                "otclust._kernels",
                ["src/otclust/_kernels.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )


setup(ext_modules=_extensions(), cmdclass={"build_ext": optional_build_ext})
