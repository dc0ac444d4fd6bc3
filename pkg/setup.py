import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("ESFI_PURE_PYTHON") != "1":
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("esfi._dp54c", ["src/esfi/_dp54c.pyx"])],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=ext_modules)
