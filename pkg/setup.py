import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("GTDKIT_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "gtdkit.kernel._ctape",
                    ["src/gtdkit/kernel/_ctape.pyx"],
                    extra_compile_args=["-O3"],
                    optional=True,
                )
            ],
            language_level=3,
        )
    except ImportError:
        # no Cython: install with the pure-Python kernel only
        ext_modules = []

setup(ext_modules=ext_modules)
