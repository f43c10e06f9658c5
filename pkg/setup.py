from setuptools import find_packages, setup

setup(
    name="cvreceivers",
    version="0.1.0",
    description="Error rates of continuously labelled receivers for binary coherent-state discrimination",
    packages=find_packages(exclude=("tests",)),
    python_requires=">=3.8",
    install_requires=[
        "python-dotenv~=0.21.0",
        "numpy>=1.22",
        "scipy>=1.9",
        "pytest>=7.4.0",
    ],
)
