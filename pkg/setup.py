from setuptools import setup

setup(
    name="hyperkahler-lattice-certificates",
    version="0.3.0",
    py_modules=[
        "app_config",
        "certificate",
        "cli",
        "errors",
        "fixture_utils",
        "hodge",
        "isotropy",
        "lattice",
        "lattice_validation",
        "linalg_utils",
        "log",
        "monodromy",
        "report_utils",
        "rrh",
        "serialization",
        "settings_utils",
        "sympow",
    ],
    data_files=[("", ["lattice_fixtures.json"]), ("oracles", ["oracles/k3.json", "oracles/k3n2.json", "oracles/k3n3.json"])],
    install_requires=[
        line.strip()
        for line in open("requirements.txt").readlines()
        if line.strip() and not line.startswith("#")
    ],
    entry_points={"console_scripts": ["hk=cli:main"]},
    python_requires=">=3.9",
)
