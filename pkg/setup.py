import numpy
from setuptools import Extension, setup

# The compiled kernel core is optional: if Cython or a C compiler is missing,
# the package installs anyway and falls back to the numpy implementation
# (dphase._pycore) selected at import time.
try:
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "dphase._core",
                ["src/dphase/_core.pyx"],
                include_dirs=[numpy.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    extensions = []

for ext in extensions:
    ext.optional = True

setup(ext_modules=extensions)
