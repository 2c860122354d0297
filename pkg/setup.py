import os

from setuptools import setup

ext_modules = []
if os.environ.get("UCQRES_NO_EXT") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "ucqres._kernels",
                    ["src/ucqres/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False, "wraparound": False},
        )
    except ImportError:
        # no Cython or numpy at build time: the pure-Python fallback is used
        ext_modules = []

setup(ext_modules=ext_modules)
