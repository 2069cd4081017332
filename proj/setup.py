from pybind11.setup_helpers import ParallelCompile, Pybind11Extension, build_ext
from setuptools import setup

ParallelCompile("NPY_NUM_BUILD_JOBS").install()

ext = Pybind11Extension(
    "rspgkit._core",
    sources=[
        "src/geometry.cpp",
        "src/oracles.cpp",
        "src/solvers.cpp",
        "src/problems.cpp",
        "src/bench.cpp",
        "src/conformance.cpp",
        "src/pybind/module.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
