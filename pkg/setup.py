import numpy
from setuptools import Extension, setup
from Cython.Build import cythonize

# The compiled kernels must reproduce the pure-Python reference bit for bit:
# -ffp-contract=off blocks FMA contraction, -fno-builtin keeps libm calls
# opaque (otherwise gcc fuses sin/cos pairs into sincos, which can differ by
# one ulp from the separate calls CPython makes).
ext_modules = cythonize(
    [
        Extension(
            "stable_exit._ckernels",
            ["src/stable_exit/_ckernels.pyx"],
            include_dirs=[numpy.get_include()],
            extra_compile_args=["-O3", "-ffp-contract=off", "-fno-builtin"],
        )
    ],
    language_level=3,
)

setup(ext_modules=ext_modules)
