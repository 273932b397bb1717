from setuptools import setup

# To build a wheel: python setup.py bdist_wheel

setup(
    name="qsmatch",
    version="1.0.0",
    description="Quantile stable mechanisms and obvious manipulations in matching with contracts",
    packages=["qsmatch", "qsmatch.scripts"],
    python_requires=">=3.10, <4",
    install_requires=[],
    entry_points={
        "console_scripts": ["qsm = qsmatch.scripts.cli:main"],
    },
    license="MIT",
    classifiers=[
        'License :: OSI Approved :: MIT License',
        'Programming Language :: Python',
        'Programming Language :: Python :: 3',
        'Programming Language :: Python :: 3.10',
        'Programming Language :: Python :: 3.11',
        'Programming Language :: Python :: Implementation :: CPython',
        'Operating System :: OS Independent',
    ],
)
