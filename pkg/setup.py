from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "opcontact.kernels._core",
                ["src/opcontact/kernels/_core.pyx"],
                language="c++",
                extra_compile_args=["-O3", "-std=c++17"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # no Cython: fall back to the pure-python kernels at import time
    ext_modules = []

setup(ext_modules=ext_modules)
