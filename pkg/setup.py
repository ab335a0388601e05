"""Build script: optionally compiles the event-loop kernel to a C extension.

The canonical kernel source is src/mpsched/_loop.py (plain Python). When
Cython is available it is copied to a build staging area and compiled as the
twin module mpsched._loop_c; the engine picks the compiled twin at import
time and falls back to the pure module otherwise. Without Cython the package
installs as pure Python.
"""

import shutil
from pathlib import Path

from setuptools import setup

try:
    from Cython.Build import cythonize
    from setuptools import Extension
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    here = Path(__file__).resolve().parent
    kernel = here / "src" / "mpsched" / "_loop.py"
    stage = here / "build" / "_kernel_twin"
    stage.mkdir(parents=True, exist_ok=True)
    twin = stage / "_loop_c.py"
    shutil.copyfile(kernel, twin)
    ext_modules = cythonize(
        [Extension("mpsched._loop_c", [str(twin)])],
        language_level="3",
        compiler_directives={"boundscheck": False, "initializedcheck": False},
    )

setup(ext_modules=ext_modules)
