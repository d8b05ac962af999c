from setuptools import Extension, setup
from Cython.Build import cythonize

# No -ffast-math: the compiled kernel must round exactly like the pure-Python
# fallback so both backends produce bit-identical allocations.
extensions = [
    Extension(
        "velorank._kernels.fixedpoint",
        ["src/velorank/_kernels/fixedpoint.pyx"],
        extra_compile_args=["-O3"],
    )
]

setup(
    ext_modules=cythonize(
        extensions,
        compiler_directives={"language_level": "3"},
    )
)
