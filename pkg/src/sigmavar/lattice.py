"""Uniform momentum-space discretization and the free dispersion relation.

Grids are symmetric Cartesian lattices over the box ``|k_i| <= k_max`` with
midpoint quadrature weights, so that ``sum_k w_k f(k)`` approximates the
momentum integral of ``f`` with measure ``d^n k / (2 pi)^n``.  Every grid is
closed under ``k -> -k`` by construction; the reflection is stored as an
exact index permutation because pair-correlation kernels address mode ``-k``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

__all__ = ["MomentumGrid", "Dispersion", "build_grid", "dispersion"]

_TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MomentumGrid:
    """Symmetric Cartesian momentum grid with uniform quadrature weights.

    Immutable after construction (arrays are marked read-only), so instances
    can be shared freely across threads.
    """

    dim_spatial: int
    modes: np.ndarray          # (n_modes, dim_spatial) mode vectors
    weights: np.ndarray        # (n_modes,) quadrature weights, all (dk/2pi)^dim
    k_max: float
    includes_zero_mode: bool
    dk: float
    zero_index: int | None     # index of the |k| = 0 mode, if present
    reflection: np.ndarray     # permutation i -> index of -modes[i]

    @property
    def n_modes(self) -> int:
        return self.modes.shape[0]

    def mode_norms(self) -> np.ndarray:
        """|k| for every mode."""
        return np.linalg.norm(self.modes, axis=1)


@dataclass(frozen=True)
class Dispersion:
    """Relativistic single-mode energies eps_k = sqrt(k^2 + mu^2) on a grid."""

    mu: float
    epsilon: np.ndarray        # (n_modes,) per-mode energies

    def inverse(self) -> np.ndarray:
        return 1.0 / self.epsilon


def build_grid(dim_spatial: int, k_max: float, n_per_dim: int,
               include_zero: bool) -> MomentumGrid:
    """Build a uniform symmetric Cartesian grid of n_per_dim^dim modes.

    With ``include_zero`` the modes sit at integer multiples of
    ``dk = 2 k_max / n_per_dim`` (n_per_dim must be odd so the origin is a
    mode); otherwise they sit at half-integer multiples, which never contain
    the origin.  Either way the per-mode weight is ``(dk / 2 pi)^dim`` and
    the weights sum to ``(2 k_max / 2 pi)^dim`` exactly.
    """
    if dim_spatial not in (1, 2, 3):
        raise ValueError(f"dim_spatial must be 1, 2 or 3, got {dim_spatial}")
    if not np.isfinite(k_max) or k_max <= 0:
        raise ValueError(f"k_max must be positive and finite, got {k_max}")
    if n_per_dim < 1:
        raise ValueError(f"n_per_dim must be >= 1, got {n_per_dim}")
    if include_zero and n_per_dim % 2 == 0:
        raise ValueError(
            "include_zero requires odd n_per_dim: an even lattice has no "
            "exact zero mode")
    if not include_zero and n_per_dim % 2 == 1:
        raise ValueError(
            "a symmetric grid with odd n_per_dim necessarily contains k = 0; "
            "use even n_per_dim when include_zero is false")

    dk = 2.0 * k_max / n_per_dim
    # Integer coordinates in units of dk/2: even for mode-centered grids,
    # odd for midpoint grids.  Exact integers make the reflection exact.
    if include_zero:
        half = (n_per_dim - 1) // 2
        axis = [2 * m for m in range(-half, half + 1)]
    else:
        axis = [2 * m + 1 for m in range(-(n_per_dim // 2),
                                         n_per_dim - n_per_dim // 2)]
        axis = sorted(axis)
    coords = sorted(itertools.product(axis, repeat=dim_spatial))

    index_of = {c: i for i, c in enumerate(coords)}
    reflection = np.array([index_of[tuple(-x for x in c)] for c in coords],
                          dtype=np.intp)
    modes = np.asarray(coords, dtype=float) * (dk / 2.0)
    weights = np.full(len(coords), (dk / _TWO_PI) ** dim_spatial)

    zero_coord = (0,) * dim_spatial
    zero_index = index_of.get(zero_coord)

    modes.setflags(write=False)
    weights.setflags(write=False)
    reflection.setflags(write=False)
    return MomentumGrid(
        dim_spatial=dim_spatial,
        modes=modes,
        weights=weights,
        k_max=float(k_max),
        includes_zero_mode=zero_index is not None,
        dk=dk,
        zero_index=zero_index,
        reflection=reflection,
    )


def dispersion(grid: MomentumGrid, mu: float) -> Dispersion:
    """eps_k = sqrt(|k|^2 + mu^2) for every grid mode; requires mu >= 0."""
    if not np.isfinite(mu) or mu < 0:
        raise ValueError(f"mu must be nonnegative and finite, got {mu}")
    eps = np.hypot(grid.mode_norms(), mu)
    eps.setflags(write=False)
    return Dispersion(mu=float(mu), epsilon=eps)
