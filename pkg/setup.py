import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("PSEUDOMECH_PURE_PYTHON", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("pseudomech._kernels", ["src/pseudomech/_kernels.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
