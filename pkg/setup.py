"""Build the compiled search kernel; without Cython the package falls back
to the pure-Python kernel."""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("FREEKNOTS_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension(
                "freeknots._kernel",
                ["src/freeknots/_kernel.pyx"],
                # keep a*b+c unfused so results match the Python kernel bit for bit
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )],
            compiler_directives={"language_level": 3},
        )

setup(ext_modules=ext_modules)
