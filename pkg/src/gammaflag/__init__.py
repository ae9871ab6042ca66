"""Quantum cohomology of flag varieties, Gamma classes and Rietsch mirrors.

The package has two halves connected by numerical acceptance checks: the
A-side (root systems, Schubert calculus, quantum Chevalley operators, flat
sections of the quantum connection, the Gamma class) and the B-side (the
parabolic geometric crystal in its type A matrix realization, together with
superpotential critical points and oscillatory integrals).
"""

__version__ = "0.1.0"
