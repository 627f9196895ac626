import glob

from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("TUMORSYNTH_BUILD_JOBS", default=4).install()

# The extension compiles the whole core; the cmake build is the primary path
# for the CLI and test binaries, this one only produces the wheel.
ext = Pybind11Extension(
    "tumorsynth._core",
    sorted(glob.glob("src/*.cpp")) + ["python/module.cpp"],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
