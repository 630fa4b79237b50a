"""Build the optional compiled kernels.

The package works without them; ``collabanon._kernels`` falls back to the
pure-Python implementation when the extension is missing.
"""

import os

from setuptools import setup

ext_modules = []
if os.environ.get("COLLABANON_NO_EXT", "") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "collabanon._kernels._mindfs",
                    ["src/collabanon/_kernels/_mindfs.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3", "boundscheck": False},
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
