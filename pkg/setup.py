"""Build the optional compiled kernels; the package works without them."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("DICTPR_NO_EXT", "") in ("", "0"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "dictpr._ckernels",
                    ["src/dictpr/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        ext_modules = []

def _optional_build_ext():
    from setuptools.command.build_ext import build_ext

    class build_ext_optional(build_ext):
        def run(self):
            try:
                super().run()
            except Exception as exc:  # compiler missing or failed
                print(f"warning: compiled kernels not built ({exc}); using numpy fallback")

        def build_extension(self, ext):
            try:
                super().build_extension(ext)
            except Exception as exc:
                print(f"warning: failed to build {ext.name} ({exc}); using numpy fallback")

    return build_ext_optional

setup(ext_modules=ext_modules, cmdclass={"build_ext": _optional_build_ext()})
