"""Build script. The compiled kernel is optional: if Cython or a C compiler is
missing the package installs pure-Python and nfsec._core falls back to numpy."""
import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("NFSEC_NO_EXT") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext = Extension(
            "nfsec._core._kernel",
            sources=["src/nfsec/_core/_kernel.pyx"],
            include_dirs=[numpy.get_include()],
            define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            extra_compile_args=["-O3"],
        )
        ext_modules = cythonize([ext], language_level=3)
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
