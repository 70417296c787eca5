from setuptools import Extension, setup
from Cython.Build import cythonize

extensions = [
    Extension(
        name="decreach._kernels._core",
        sources=["src/decreach/_kernels/_core.pyx"],
    )
]

setup(ext_modules=cythonize(extensions, language_level="3"))
