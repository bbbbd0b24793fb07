"""Build the optional compiled Fock-space kernel.

If Cython or a C compiler is missing the package still installs and falls
back to the pure-Python kernel at import time.
"""
from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        Extension("pairwave.focksector._core",
                  ["src/pairwave/focksector/_core.pyx"],
                  include_dirs=[numpy.get_include()],
                  define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")]),
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build environment dependent
    print(f"skipping compiled kernel: {exc}")

setup(ext_modules=ext_modules)
