"""Builds the pybind11 extension through the project's CMake tree."""

import os
import subprocess
import sys
from pathlib import Path

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class CMakeExtension(Extension):
    def __init__(self, name):
        super().__init__(name, sources=[])


class CMakeBuild(build_ext):
    def build_extension(self, ext):
        source_dir = Path(__file__).resolve().parent
        build_dir = Path(self.build_temp) / "cmake"
        build_dir.mkdir(parents=True, exist_ok=True)
        out_dir = Path(self.get_ext_fullpath(ext.name)).resolve().parent

        cfg = [
            "cmake",
            "-S", str(source_dir),
            "-B", str(build_dir),
            "-DCMAKE_BUILD_TYPE=Release",
            "-DROLLFORGE_BUILD_TESTS=OFF",
            "-DROLLFORGE_BUILD_CLI=OFF",
            "-DROLLFORGE_BUILD_PYTHON=ON",
            f"-DPYTHON_EXECUTABLE={sys.executable}",
        ]
        if os.environ.get("CMAKE_GENERATOR") is None and _have("ninja"):
            cfg.append("-GNinja")
        subprocess.run(cfg, check=True)
        subprocess.run(["cmake", "--build", str(build_dir), "--target", "_core"], check=True)

        built = list((build_dir / "bindings").glob("_core*.so"))
        if not built:
            raise RuntimeError("cmake did not produce the _core extension")
        out_dir.mkdir(parents=True, exist_ok=True)
        self.copy_file(str(built[0]), str(out_dir / built[0].name))


def _have(tool):
    from shutil import which

    return which(tool) is not None


setup(
    ext_modules=[CMakeExtension("rollforge._core")],
    cmdclass={"build_ext": CMakeBuild},
)
