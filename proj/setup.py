from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "oqscp._oqscp",
    sources=[
        "src/operator_core.cpp",
        "src/channels.cpp",
        "src/bath.cpp",
        "src/generators.cpp",
        "src/bipartite.cpp",
        "src/oracle.cpp",
        "src/bindings.cpp",
    ],
    include_dirs=["include", "vendor", "/usr/include/eigen3"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
