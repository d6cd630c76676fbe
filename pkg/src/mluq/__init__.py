"""Multilevel (quasi-)Monte Carlo uncertainty quantification for plane-stress beams.

The package is organized around six building blocks:

``distributions``
    Gamma / standard-normal machinery and the memoryless transform.
``random_field``
    Truncated Karhunen-Loeve representation of a Gaussian field with
    exponential covariance, evaluated through Nystrom collocation.
``fem``
    Lagrange quadrilateral plane-stress elements, mesh hierarchies,
    static and harmonic solves.
``plasticity``
    Von Mises plane-stress return mapping and the incremental-iterative
    load stepping solver.
``estimators``
    MC / MLMC / MLQMC engines over level-coupled samplers, rank-1
    lattice rules, sample allocation and rate estimation.
``experiments``
    Scenario configuration, orchestration, CSV/figure reports and the
    ``mluq`` command line interface.
"""

__version__ = "0.1.0"
