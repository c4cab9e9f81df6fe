from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # fall back to the numpy kernel
    ext_modules = []
else:
    ext_modules = cythonize(
        [Extension("rrdps.mc._ckernel", ["src/rrdps/mc/_ckernel.pyx"], optional=True)],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
