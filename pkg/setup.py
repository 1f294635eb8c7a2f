"""Build the optional compiled kernels; the package works without them."""

from setuptools import Extension, setup

try:
    import numpy
    from Cython.Build import cythonize
except ImportError:
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("ioinfra._kernels", ["src/ioinfra/_kernels.pyx"],
                   include_dirs=[numpy.get_include()], optional=True)],
        compiler_directives={"language_level": 3},
    )

setup(ext_modules=ext_modules)
