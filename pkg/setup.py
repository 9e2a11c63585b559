"""Build hook for the optional compiled kernels.

Without Cython (or a C compiler) the package installs as pure Python and
``irc_game.kernels`` falls back to ``_kernels_py``.
"""
from setuptools import setup

try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("irc_game._ckernels", ["src/irc_game/_ckernels.pyx"],
                   include_dirs=[np.get_include()], extra_compile_args=["-O2"])],
        compiler_directives={"language_level": "3"},
    )
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
