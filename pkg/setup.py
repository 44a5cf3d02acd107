from setuptools import setup, find_packages

setup(name='setval',
      version='0.1.0',
      description='Set-valued stochastic integrals, martingales and representation checks',
      keywords=['set-valued martingale', 'stochastic integral', 'interval arithmetic',
                'random sets', 'monte carlo'],
      classifiers=[
          'Programming Language :: Python',
          'Programming Language :: Python :: 3',
          'Development Status :: 2 - Pre-Alpha',
          'Intended Audience :: Science/Research',
          'Topic :: Scientific/Engineering :: Mathematics',
          'Topic :: Software Development :: Libraries :: Python Modules',
          ],
      license='GPLv3',
      packages=find_packages(exclude=['tests', 'examples', 'examples.*']),
      python_requires='>=3.7',
      install_requires=[
          'numpy',
          'scipy',
          'pandas',
          'tqdm'
      ],
      entry_points={
          'console_scripts': [
              'setval = setval.cli:main',
          ]
      },
      zip_safe=False,
      tests_require=['pytest', 'hypothesis']
)
