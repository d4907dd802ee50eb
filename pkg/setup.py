import os

import numpy as np
from setuptools import setup, Extension
from Cython.Build import cythonize

ext = Extension(
    "simforge._kernels._rs_cython",
    ["src/simforge/_kernels/_rs_cython.pyx"],
    include_dirs=[np.get_include()],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

# SIMFORGE_NO_EXT=1 installs pure-python; the package selects the numpy
# kernel backend at import when the extension is absent.
if os.environ.get("SIMFORGE_NO_EXT") == "1":
    ext_modules = []
else:
    ext_modules = cythonize(ext, compiler_directives={"language_level": "3"})

setup(ext_modules=ext_modules)
