"""Kicked coupled tops: classical map, Floquet eigenstates and entanglement.

The quantum system is two spins ``I`` and ``J`` with Floquet operator
``U = exp(-i alpha F(F+1) / (2J)) exp(-i beta J_z)``, restricted to a block of
fixed total ``F_z``. Submodules:

``angular``       Clebsch-Gordan blocks and subspace bookkeeping
``classical``     the classical map, Poincare sections and Lyapunov exponents
``states``        projected coherent states and Husimi functions
``floquet``       Floquet matrix, eigensystem and evolution
``entanglement``  entanglement entropies, histories and phase-space maps
``ensembles``     random-state predictions and Monte-Carlo checks
``filtering``     regular / chaotic eigenstate labelling
``cli``           command-line front end
"""
__version__ = "0.1.0"
