"""Constrained variational solver for the diagonal occupation profile.

The admissible kernel pairs reduce, at the minimum, to a diagonal pair
parametrized by one real number per mode, ``b_k = B(k,k)``, through

    Q(k) = sqrt(1 + b_k^2) - 1 + b_k        (a bijection R -> (-1, inf)).

The identity ``Q^2 / (2 (1 + Q)) = sqrt(1 + b^2) - 1`` makes the energy

    E(Q) = N sum_k w_k eps_k Q_k^2 / (2 (1 + Q_k))
         = N sum_k w_k eps_k (sqrt(1 + b_k^2) - 1)

smooth and convex in b, and the sphere constraint is

    C(Q) = N sum_k w_k Q_k / (2 eps_k) = R^2 .

``minimize_constrained`` enforces the constraint with an augmented-Lagrangian
outer loop around an L-BFGS inner minimizer over b.  The converged profile
satisfies the per-mode stationarity Q = eps/sqrt(eps^2 - lam) - 1 with a
single multiplier lam, which is recovered by least squares and reported.

Cutoff accounting: the grid covers the momentum box |k_i| <= k_max only.
With ``cutoff_tail_correction`` (the default) the solver books the exterior
of the box analytically, using the fitted profile shape for the small
(O(lam / k_max)) exterior share, so converged multipliers match the
continuum gap equation as the grid refines.  Disable it when the grid
itself defines the problem, e.g. when cross-checking against the truncated
Fock oracle on toy grids.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq, minimize, minimize_scalar

from .errors import DomainError
from .kernel import HermitianKernel, sqrt_psd
from .lattice import Dispersion, MomentumGrid, dispersion

__all__ = [
    "VariationalProblem",
    "SolverOptions",
    "VariationalSolution",
    "q_from_b",
    "b_from_q",
    "objective",
    "constraint_value",
    "objective_and_grad_b",
    "constraint_and_grad_b",
    "fit_lambda",
    "minimize_constrained",
    "check_diagonal_optimality",
    "check_offdiagonal_constraint",
    "offdiagonal_violation",
]


@dataclass(frozen=True)
class VariationalProblem:
    """Grid, mass, number of field components and squared sphere radius."""

    grid: MomentumGrid
    mu: float
    N: int
    R2: float

    def __post_init__(self):
        if not np.isfinite(self.mu) or self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.N < 1:
            raise ValueError(f"N must be >= 1, got {self.N}")
        if not np.isfinite(self.R2) or self.R2 < 0:
            raise ValueError(f"R2 must be nonnegative and finite, got {self.R2}")

    def dispersion(self) -> Dispersion:
        return dispersion(self.grid, self.mu)


@dataclass
class SolverOptions:
    max_outer_iters: int = 40
    max_inner_iters: int = 3000
    feasibility_tol: float = 1e-8     # relative to max(R2, tiny)
    grad_tol: float = 1e-10           # L-BFGS projected-gradient tolerance
    penalty_growth: float = 10.0
    multistart_count: int = 1
    seed: int = 0
    initial_penalty: float = 10.0
    cutoff_tail_correction: bool = True
    max_tail_iters: int = 8


@dataclass
class VariationalSolution:
    Q: np.ndarray
    B_diag: np.ndarray
    lam: float                 # multiplier fitted to Q = eps/sqrt(eps^2-lam)-1
    energy: float
    constraint_value: float    # grid share plus booked cutoff tail
    condensate_density: float
    converged: bool
    iterations: int
    multiplier_estimate: float = 0.0   # raw augmented-Lagrangian multiplier
    cutoff_tail: float = 0.0           # analytic exterior share of R^2
    fit_residual: float = 0.0          # max |Q - Q(lam)| of the profile fit
    feasibility: float = 0.0           # |constraint_value - R2|


def q_from_b(b):
    """Q = sqrt(1 + b^2) - 1 + b, computed without cancellation."""
    b = np.asarray(b, dtype=float)
    one_plus_q = np.where(b >= 0.0,
                          b + np.sqrt(1.0 + b * b),
                          1.0 / (np.sqrt(1.0 + b * b) - b))
    return one_plus_q - 1.0


def b_from_q(q):
    """Inverse map b = (Q^2 + 2Q) / (2 (1 + Q)) for Q > -1."""
    q = np.asarray(q, dtype=float)
    if np.any(q <= -1.0):
        raise DomainError("Q must exceed -1 for every mode")
    return (q * q + 2.0 * q) / (2.0 * (1.0 + q))


def _check_profile(q, n_modes: int) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    if q.shape != (n_modes,):
        raise ValueError(f"profile has shape {q.shape}, expected ({n_modes},)")
    bad = np.nonzero(q <= -1.0)[0]
    if bad.size:
        raise DomainError(
            f"Q must exceed -1: violated at mode index {int(bad[0])} "
            f"(Q = {q[bad[0]]})")
    return q


def objective(Q, problem: VariationalProblem) -> float:
    """Energy N sum_k w_k eps_k Q_k^2 / (2 (1 + Q_k)); nonnegative."""
    q = _check_profile(Q, problem.grid.n_modes)
    eps = problem.dispersion().epsilon
    return float(problem.N * np.sum(
        problem.grid.weights * eps * q * q / (2.0 * (1.0 + q))))


def constraint_value(Q, problem: VariationalProblem) -> float:
    """Sphere constraint N sum_k w_k Q_k / (2 eps_k) on the grid."""
    q = _check_profile(Q, problem.grid.n_modes)
    eps = problem.dispersion().epsilon
    return float(problem.N * np.sum(
        problem.grid.weights * q / (2.0 * eps)))


def objective_and_grad_b(b, problem: VariationalProblem):
    """Energy and its gradient with respect to the diagonal B variables."""
    b = np.asarray(b, dtype=float)
    eps = problem.dispersion().epsilon
    w = problem.grid.weights
    root = np.hypot(1.0, b)
    value = float(problem.N * np.sum(w * eps * (root - 1.0)))
    grad = problem.N * w * eps * b / root
    return value, grad


def constraint_and_grad_b(b, problem: VariationalProblem):
    """Sphere constraint and its gradient with respect to diagonal B."""
    b = np.asarray(b, dtype=float)
    eps = problem.dispersion().epsilon
    w = problem.grid.weights
    root = np.hypot(1.0, b)
    q = q_from_b(b)
    value = float(problem.N * np.sum(w * q / (2.0 * eps)))
    grad = problem.N * (w / (2.0 * eps)) * (1.0 + b / root)
    return value, grad


def fit_lambda(Q, epsilon) -> tuple[float, float]:
    """Least-squares fit of lam in Q = eps/sqrt(eps^2 - lam) - 1.

    Returns (lam, max absolute profile residual).  lam is searched on
    [0, min(eps)^2), where the profile stays finite on every mode.
    """
    q = np.asarray(Q, dtype=float)
    eps = np.asarray(epsilon, dtype=float)
    hi = (1.0 - 1e-13) * float(np.min(eps)) ** 2

    def sse(lam):
        s = np.sqrt(eps * eps - lam)
        model = lam / (s * (eps + s))
        d = q - model
        return float(d @ d)

    res = minimize_scalar(sse, bounds=(0.0, hi), method="bounded",
                          options={"xatol": 1e-16 * (1.0 + hi)})
    lam = float(res.x)
    if sse(0.0) <= res.fun:
        lam = 0.0
    s = np.sqrt(eps * eps - lam)
    resid = float(np.max(np.abs(q - lam / (s * (eps + s)))))
    return lam, resid


# -- cutoff bookkeeping ------------------------------------------------------

def _constraint_cell_radial(r_hi: float, mu: float, lam: float) -> float:
    """integral_0^R  r * (1/2)(1/s - 1/eps) dr, in closed form."""
    s0 = math.sqrt(mu * mu - lam)
    e = math.hypot(r_hi, mu)
    s = math.sqrt(r_hi * r_hi + mu * mu - lam)
    return 0.5 * (lam / (mu + s0) - lam / (e + s))


def _square_region_constraint(half_width: float, mu: float, lam: float,
                              N: int) -> float:
    """Constraint mass of the profile over the square |k_i| <= half_width (2D)."""
    if lam == 0.0:
        return 0.0
    val, _ = quad(lambda th: _constraint_cell_radial(
        half_width / math.cos(th), mu, lam), 0.0, math.pi / 4.0,
        epsrel=1e-12, epsabs=1e-300)
    return N * 8.0 * val / (4.0 * math.pi ** 2)


def _interval_region_constraint(half_width: float, mu: float, lam: float,
                                N: int) -> float:
    """Constraint mass over |k| <= half_width in one spatial dimension."""
    if lam == 0.0:
        return 0.0
    s0 = math.sqrt(mu * mu - lam)
    a = half_width
    return N * (math.asinh(a / s0) - math.asinh(a / mu)) / (2.0 * math.pi)


def box_exterior_constraint(lam: float, mu: float, N: int, grid: MomentumGrid
                            ) -> float:
    """Constraint mass of the fitted profile outside the grid's momentum box.

    Supported for 1 and 2 spatial dimensions (exact up to 1D quadrature);
    returns 0 for 3 spatial dimensions, where the correction is not offered.
    """
    if lam <= 0.0:
        return 0.0
    if grid.dim_spatial == 1:
        s0 = math.sqrt(mu * mu - lam)
        full = N * math.log(mu / s0) / (2.0 * math.pi)
        return full - _interval_region_constraint(grid.k_max, mu, lam, N)
    if grid.dim_spatial == 2:
        s0 = math.sqrt(mu * mu - lam)
        full = N * (mu - s0) / (4.0 * math.pi)
        return full - _square_region_constraint(grid.k_max, mu, lam, N)
    return 0.0


def zero_cell_regular_share(lam: float, mu: float, N: int, grid: MomentumGrid
                            ) -> float:
    """Constraint mass the fitted regular profile assigns to the zero-mode cell."""
    if lam <= 0.0:
        return 0.0
    half = grid.dk / 2.0
    if grid.dim_spatial == 1:
        return _interval_region_constraint(half, mu, lam, N)
    if grid.dim_spatial == 2:
        return _square_region_constraint(half, mu, lam, N)
    # equal-volume ball approximation of the cubic cell
    rho = half * (6.0 / math.pi) ** (1.0 / 3.0)
    val, _ = quad(lambda k: k * k * _radial_density(k, mu, lam), 0.0, rho,
                  epsrel=1e-12, epsabs=1e-300)
    return N * val / (2.0 * math.pi ** 2)


def _radial_density(k, mu, lam):
    e2 = k * k + mu * mu
    e = math.sqrt(e2)
    s = math.sqrt(e2 - lam)
    return lam / (2.0 * s * e * (s + e))


# -- the solver --------------------------------------------------------------

def _capacity(problem: VariationalProblem) -> float:
    """Continuum capacity of the k != 0 modes for this problem's dimension.

    Condensate extraction only applies beyond it; below it the zero mode
    carries a regular share and the reported condensate is zero.
    """
    from . import gap  # local import: gap does not depend on the solver

    d = problem.grid.dim_spatial + 1
    k_max = problem.grid.k_max if d == 4 else None
    return gap.capacity(problem.mu, problem.N, d, k_max)


def _initial_profile(problem: VariationalProblem, eps: np.ndarray,
                     target: float) -> np.ndarray:
    """b proportional to R^2 / eps, scaled to satisfy the constraint exactly."""
    shape = problem.R2 / eps

    def cval(alpha):
        v, _ = constraint_and_grad_b(alpha * shape, problem)
        return v - target

    hi = 1.0
    while cval(hi) < 0.0 and hi < 1e16:
        hi *= 4.0
    alpha = brentq(cval, 0.0, hi, xtol=1e-14, rtol=1e-14)
    return alpha * shape


def _augmented_lagrangian(problem: VariationalProblem, x0: np.ndarray,
                          target: float, opts: SolverOptions,
                          objective_scale: float):
    """Minimize the energy subject to constraint = target over diagonal B."""
    c_norm = max(problem.R2, 1e-8)
    feas_tol = opts.feasibility_tol * max(problem.R2, 1e-12)
    nu = 0.0
    rho = opts.initial_penalty
    x = x0.copy()
    r_prev = math.inf
    total_iters = 0
    ok = False

    def lagrangian(xv):
        f, gf = objective_and_grad_b(xv, problem)
        c, gc = constraint_and_grad_b(xv, problem)
        r = (c - target) / c_norm
        val = objective_scale * f + nu * r + 0.5 * rho * r * r
        grad = objective_scale * gf + (nu + rho * r) * gc / c_norm
        return val, grad

    for _ in range(opts.max_outer_iters):
        res = minimize(lagrangian, x, jac=True, method="L-BFGS-B",
                       options={"maxiter": opts.max_inner_iters,
                                "maxfun": 10 * opts.max_inner_iters,
                                "ftol": 1e-18, "gtol": opts.grad_tol})
        x = res.x
        total_iters += int(res.nit)
        c, _ = constraint_and_grad_b(x, problem)
        r = (c - target) / c_norm
        if abs(c - target) <= feas_tol:
            ok = True
            nu += rho * r
            break
        nu += rho * r
        if abs(r) > 0.25 * abs(r_prev):
            rho = min(rho * opts.penalty_growth, 1e16)
        r_prev = abs(r)
    return x, nu, total_iters, ok


def minimize_constrained(problem: VariationalProblem,
                         opts: SolverOptions | None = None,
                         objective_scale: float = 1.0) -> VariationalSolution:
    """Minimize the energy over diagonal profiles at fixed sphere radius.

    ``objective_scale`` multiplies the energy inside the optimizer only; the
    minimizer and the fitted multiplier are invariant under it, and reported
    energies are always at physical scale.
    """
    if opts is None:
        opts = SolverOptions()
    if objective_scale <= 0:
        raise ValueError("objective_scale must be positive")
    disp = problem.dispersion()
    eps = disp.epsilon
    n = problem.grid.n_modes

    if problem.R2 == 0.0:
        zeros = np.zeros(n)
        return VariationalSolution(
            Q=zeros, B_diag=zeros.copy(), lam=0.0, energy=0.0,
            constraint_value=0.0, condensate_density=0.0, converged=True,
            iterations=0)

    tail_on = opts.cutoff_tail_correction and problem.grid.dim_spatial <= 2
    rng = np.random.default_rng(opts.seed)

    candidates = []
    for restart in range(max(1, opts.multistart_count)):
        tail = 0.0
        lam_hat = 0.0
        target = problem.R2
        x = _initial_profile(problem, eps, target)
        if restart > 0:
            x = x * (1.0 + 0.5 * rng.standard_normal(n))
        iters = 0
        ok = False
        nu = 0.0
        for _ in range(opts.max_tail_iters if tail_on else 1):
            x, nu, it, ok = _augmented_lagrangian(
                problem, x, target, opts, objective_scale)
            iters += it
            if not tail_on:
                break
            lam_hat, _ = fit_lambda(q_from_b(x), eps)
            new_tail = box_exterior_constraint(lam_hat, problem.mu,
                                               problem.N, problem.grid)
            shift = abs(new_tail - tail)
            tail = new_tail
            target = max(problem.R2 - tail, 0.0)
            if shift <= 0.1 * opts.feasibility_tol * max(problem.R2, 1e-12):
                break
        energy, _ = objective_and_grad_b(x, problem)
        candidates.append((energy if ok else math.inf, restart,
                           x, nu, iters, ok, tail))

    _, _, x, nu, iters, ok, tail = min(candidates, key=lambda t: (t[0], t[1]))

    q = q_from_b(x)
    lam, fit_resid = fit_lambda(q, eps)
    energy, _ = objective_and_grad_b(x, problem)
    grid_constraint, _ = constraint_and_grad_b(x, problem)
    total_constraint = grid_constraint + tail

    condensate = 0.0
    if problem.grid.includes_zero_mode and problem.R2 > _capacity(problem):
        z = problem.grid.zero_index
        share = problem.N * problem.grid.weights[z] * q[z] / (2.0 * eps[z])
        regular = zero_cell_regular_share(lam, problem.mu, problem.N,
                                          problem.grid)
        condensate = max(share - regular, 0.0)

    return VariationalSolution(
        Q=q, B_diag=np.asarray(x), lam=lam, energy=float(energy),
        constraint_value=float(total_constraint),
        condensate_density=float(condensate), converged=bool(ok),
        iterations=int(iters),
        multiplier_estimate=float(-nu / max(problem.R2, 1e-8)
                                  / objective_scale),
        cutoff_tail=float(tail), fit_residual=float(fit_resid),
        feasibility=float(abs(total_constraint - problem.R2)))


# -- optimality verification -------------------------------------------------

def offdiagonal_violation(matrix: np.ndarray, grid: MomentumGrid,
                          epsilon: np.ndarray) -> float:
    """Max over K != 0 of |sum_k w_k M(k, k+K) / sqrt(eps_k eps_{k+K})|.

    The sum for each momentum transfer K runs over the mode pairs the grid
    can represent.  Quadratic in the mode count; intended for the small
    verification grids.
    """
    m = np.asarray(matrix)
    nm = grid.n_modes
    if m.shape != (nm, nm):
        raise ValueError(f"matrix shape {m.shape} does not match grid ({nm})")
    coords = np.rint(grid.modes / (grid.dk / 2.0)).astype(np.int64)
    diffs = (coords[None, :, :] - coords[:, None, :]).reshape(nm * nm, -1)
    vals = ((grid.weights[:, None] * m
             / np.sqrt(np.outer(epsilon, epsilon))).reshape(nm * nm))
    keys, inverse = np.unique(diffs, axis=0, return_inverse=True)
    sums = np.zeros(len(keys), dtype=complex)
    np.add.at(sums, inverse.ravel(), vals)
    nonzero = ~np.all(keys == 0, axis=1)
    if not np.any(nonzero):
        return 0.0
    return float(np.max(np.abs(sums[nonzero])))


def check_offdiagonal_constraint(solution: VariationalSolution,
                                 problem: VariationalProblem) -> float:
    """Translation-invariance violation of the solution; exactly 0 for a
    diagonal profile, where every K != 0 component is an empty sum of zeros."""
    m = np.diag(solution.Q.astype(complex))
    return offdiagonal_violation(m, problem.grid, problem.dispersion().epsilon)


def check_diagonal_optimality(solution: VariationalSolution,
                              problem: VariationalProblem,
                              mode_pair: tuple[int, int],
                              delta: float) -> float:
    """Energy change under a hermitian off-diagonal kernel perturbation.

    The perturbation at (k, k') is projected onto the subspace preserving
    the sphere constraint to first order (for a diagonal base profile that
    projection is the identity: the constraint gradient is diagonal).  A
    converged minimizer must return a nonnegative change up to roundoff;
    the first-order term vanishes at diagonal B and the second-order term
    is what this probes.
    """
    i, j = mode_pair
    if i == j:
        raise ValueError("mode_pair must name two distinct modes")
    if delta == 0.0:
        return 0.0
    eps = problem.dispersion().epsilon
    w = problem.grid.weights
    b = solution.B_diag

    n = problem.grid.n_modes
    base = np.diag(b.astype(complex))
    pert = np.zeros((n, n), dtype=complex)
    pert[i, j] += delta
    pert[j, i] += np.conj(delta)

    # first-order constraint gradient (diagonal at diagonal B)
    root = np.hypot(1.0, b)
    cgrad = np.diag((problem.N * w / (2.0 * eps)) * (1.0 + b / root)
                    ).astype(complex)
    overlap = np.real(np.vdot(cgrad, pert))
    norm2 = np.real(np.vdot(cgrad, cgrad))
    if norm2 > 0:
        pert = pert - (overlap / norm2) * cgrad

    eye = np.eye(n)
    perturbed = base + pert
    k1 = HermitianKernel.from_matrix(problem.grid,
                                     eye + perturbed @ perturbed)
    root1 = sqrt_psd(k1).entries
    e1 = problem.N * float(np.real(
        np.sum(w * eps * (np.diag(root1).real - 1.0))))
    e0 = problem.N * float(np.sum(w * eps * (np.hypot(1.0, b) - 1.0)))
    return e1 - e0
