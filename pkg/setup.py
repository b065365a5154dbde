from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/msrdc/_scan.pyx"],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    # Without Cython the package still installs; the pure-Python scan
    # backend is selected at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
