"""Build script: compiles the traversal kernels unless the toolchain is missing.

The package works without the compiled extension (a pure-Python fallback is
selected at import time), so a failed build only costs speed.
"""

import sys

import numpy as np
from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/rulelp/_pathcore.pyx",
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - toolchain-dependent
    print(f"warning: skipping compiled kernels ({exc}); "
          "falling back to pure Python at runtime", file=sys.stderr)
    ext_modules = []

setup(
    ext_modules=ext_modules,
    include_dirs=[np.get_include()],
)
