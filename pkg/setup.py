from setuptools import setup, Extension
from Cython.Build import cythonize

ext = Extension(
    "glintprobe._kernels_cy",
    ["src/glintprobe/_kernels_cy.pyx"],
)

setup(
    ext_modules=cythonize([ext], language_level=3),
)
