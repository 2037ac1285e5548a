from setuptools import find_packages, setup

__version__ = "0.1"


def parse_requirements(filename):
    with open(filename, "r") as f:
        return [line.strip() for line in f if line.strip() and not line.startswith("#")]


pkg_name = "finite_qrf"
requirements = parse_requirements("requirements.txt")
setup(
    name="finite-qrf",
    version=__version__,
    install_requires=requirements,
    packages=find_packages(exclude=["test", "test.*"]),
    package_data={pkg_name: ["corpus/*.json", "corpus/broken/*.json"]},
    entry_points={"console_scripts": ["finite-qrf=finite_qrf.cli:main"]},
)
