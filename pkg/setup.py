"""Build script: compiles the optional Cython kernel extension.

The extension is marked optional; if it cannot be built (no compiler, no
Cython), the install still succeeds and the package falls back to the pure
Python kernels in nonnormal_lab._pykernels.

-ffp-contract=off (no fused multiply-add contraction) and
-fno-builtin-sincos (no sincos() fusion, which rounds differently from
separate libm sin/cos calls) keep the compiled arithmetic bit-identical to
the pure Python reference.
"""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext = Extension(
        "nonnormal_lab._fastkernels",
        ["src/nonnormal_lab/_fastkernels.pyx"],
        include_dirs=[numpy.get_include()],
        extra_compile_args=[
            "-O2",
            "-ffp-contract=off",
            "-fno-builtin-sin",
            "-fno-builtin-cos",
            "-fno-builtin-sincos",
        ],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        optional=True,
    )
    ext_modules = cythonize([ext], compiler_directives={"language_level": 3})

setup(ext_modules=ext_modules)
