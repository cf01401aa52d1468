"""Build the optional compiled core; the package still works without it."""
import os
import sys

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """A failed compile leaves the pure-Python core in charge instead of aborting the install."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            sys.stderr.write(f"warning: compiled core not built ({exc}); using pure Python\n")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            sys.stderr.write(f"warning: {ext.name} not built ({exc}); using pure Python\n")


ext_modules = []
if os.environ.get("GSAT_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("gsat._core", ["src/gsat/_core.pyx"], extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules, cmdclass={"build_ext": optional_build_ext})
