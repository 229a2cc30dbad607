from setuptools import setup

setup(
    name='symred',
    version='1.0.0',
    description='Lie-Baecklund symmetries, Frechet linearization and ansatz reduction of PDEs',
    long_description=open('README.md').read(),
    long_description_content_type='text/markdown',
    packages=[
        'src',
        'src.expr_core',
        'src.jet_calculus',
        'src.symmetry_engine',
        'src.reduction',
        'src.numeric_verify',
        'src.scenarios',
    ],
    package_data={'src.scenarios': ['bundled/*.sym']},
    python_requires='>=3.8',
    install_requires=[
        'sympy>=1.10',
        'lark>=1.1',
        'numpy>=1.21',
        'PyYAML>=6.0',
        'psutil>=5.9',
    ],
    extras_require={'test': ['pytest>=7.0']},
    entry_points={'console_scripts': ['symred=src.cli:main']},
)
