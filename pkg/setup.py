import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("LBFLOW_NO_EXT", "") != "1":
    try:
        import numpy
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [
                Extension(
                    "lbflow.kernels._ckernel",
                    ["src/lbflow/kernels/_ckernel.pyx"],
                    include_dirs=[numpy.get_include()],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        # no Cython or numpy at build time: the pure-Python kernels are used
        ext_modules = []

setup(ext_modules=ext_modules)
