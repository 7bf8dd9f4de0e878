from setuptools import setup, find_packages

setup(
    name="DiagCount",
    version="0.1.0",
    description="DiagCount - exact counts of diagonalizable matrices over Z_{p^k}",
    long_description=open("README.md").read(),
    long_description_content_type="text/markdown",
    include_package_data=True,
    packages=find_packages(include=["DiagCountSDK*"]),
    install_requires=[
        "orjson",
        "cachetools",
        "pyyaml",
        "numpy",
        "sympy",
    ],
    extras_require={
        "test": ["pytest", "hypothesis"],
    },
    python_requires=">=3.10",
    classifiers=[
        "Programming Language :: Python :: 3",
        "License :: OSI Approved :: MIT License",
        "Operating System :: OS Independent",
    ],
    entry_points={
        "console_scripts": [
            "diagcount-cli=DiagCountSDK.DiagCountCLI:main",
        ]
    },
)
