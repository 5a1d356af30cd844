import os

from setuptools import Extension, setup

# The compiled edit-distance kernel is optional: finhyp.distance falls back to
# the pure-Python twin when the extension is absent. Set FINHYP_PURE_PYTHON=1
# at build time to skip compilation entirely.
ext_modules = []
if os.environ.get("FINHYP_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "finhyp._editdist",
                    ["src/finhyp/_editdist.pyx"],
                    optional=True,
                )
            ],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
