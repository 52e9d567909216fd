"""Variational ground states of the soft-constraint O(N) sigma model.

The model is a free N-component scalar field whose squared length is pinned
to R^2 on average.  Trial configurations are parametrized directly by the
expectation-value kernels A(k,k') and B(k,k') of quadratic ladder-operator
combinations; the admissible kernel pairs satisfy the operator inequality
``1 + A >= sqrt(1 + B^2)``.  Resolving that inequality reduces the ground
state search to a one-profile constrained minimization whose stationary
profile is ``Q(k) = eps_k / sqrt(eps_k^2 - lam) - 1``, with the multiplier
``lam`` fixed by a gap equation.  Beyond a critical radius the zero mode
condenses and the transition is second order.

Subpackages:

- :mod:`sigmavar.lattice`  -- momentum grids and the dispersion relation
- :mod:`sigmavar.kernel`   -- hermitian kernel algebra (PSD checks, roots)
- :mod:`sigmavar.fock`     -- truncated Fock-space oracle and decompositions
- :mod:`sigmavar.solver`   -- constrained variational solver on a grid
- :mod:`sigmavar.gap`      -- gap equation, critical radius, phase sweeps
- :mod:`sigmavar.cli`      -- command-line driver (solve/sweep/verify/decompose)
"""

__version__ = "0.1.0"
