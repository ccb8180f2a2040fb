import os

from setuptools import Extension, setup

# LEVYEM_NO_EXT=1 skips the compiled core; the package then runs on the numpy fallback.
ext_modules = []
if not os.environ.get("LEVYEM_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "levyem._core",
                    ["src/levyem/_core.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
