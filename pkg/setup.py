"""Build the optional compiled matching kernel.

The extension is optional: without Cython or a C compiler the package
installs and runs on the pure-Python kernel.
"""

import os

from setuptools import setup


def extensions():
    if os.environ.get("SCGMINE_NO_EXT"):
        return []
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    ext = Extension(
        "scgmine._match",
        ["src/scgmine/_match.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    return cythonize([ext], compiler_directives={"language_level": "3"})


setup(ext_modules=extensions())
