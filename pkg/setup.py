"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension; the pure-Python
kernels are used as a fallback when the compiled module is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "retrobleu._kernels._core",
                sources=["src/retrobleu/_kernels/_core.pyx"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=ext_modules)
