"""Build script.

Compiles the pair-rotation kernel as a C extension when Cython and a C
compiler are available.  The extension is optional: if the build fails or
Cython is missing, the package installs anyway and falls back to the numpy
implementation in ``dmcvqkd._butterfly_py`` (selected at import time).
"""
from setuptools import Extension, setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    pass
else:
    ext = Extension(
        "dmcvqkd._butterfly",
        sources=["src/dmcvqkd/_butterfly.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        # -ffp-contract=off: no FMA contraction, so the compiled kernel is
        # bit-identical to the numpy fallback
        extra_compile_args=["-O3", "-ffp-contract=off"],
    )
    ext.optional = True  # never hard-fail the install
    ext_modules = cythonize([ext], language_level="3")

setup(ext_modules=ext_modules)
