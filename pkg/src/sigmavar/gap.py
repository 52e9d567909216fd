"""Gap equation, critical radius, ground-state energies and phase sweeps.

Conventions
-----------
``d`` is the spacetime dimension, so the momentum integrals run over
``d - 1`` spatial dimensions with measure ``d^{d-1}k / (2 pi)^{d-1}``.
At multiplier ``lam`` the stationary occupation profile is

    Q(k) = eps_k / sqrt(eps_k^2 - lam) - 1,     eps_k = sqrt(k^2 + mu^2),

the sphere-constraint density is ``Q / (2 eps)`` and the energy density is
``eps Q^2 / (2 (1 + Q))``.  The gap equation fixes lam as a function of the
squared sphere radius:

    N * integral  Q(k) / (2 eps_k)  =  R^2 .

In 2+1 dimensions (d = 3) the integral is elementary,

    (N mu / 4 pi) (1 - sqrt(1 - lam / mu^2)) = R^2,

so the spatial modes with k != 0 saturate at the critical radius
``R_c^2 = N mu / 4 pi``; any excess radius beyond that condenses into the
zero mode, and the condensed branch of the energy is linear in R^2 with
slope mu^2 (the k -> 0 limit of energy density over constraint density).

Radial quadrature is adaptive, with analytic tail corrections beyond the
cutoff for d = 3 (exact) and d = 2 (asymptotic); for d = 4 the integral is
log-divergent and an explicit cutoff must be supplied.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad

from .errors import ConfigurationError, DomainError

__all__ = [
    "Phase",
    "GapSolution",
    "SweepRow",
    "SweepResult",
    "SWEEP_CSV_HEADER",
    "analytic_Q",
    "gap_lhs_quadrature",
    "capacity",
    "capacity_quadrature",
    "critical_radius",
    "solve_gap",
    "closed_form_2p1",
    "ground_state_energy",
    "ground_state_energy_closed_form_2p1",
    "phase_sweep",
]

#: CSV schema for phase sweeps (stable, documented in the README)
SWEEP_CSV_HEADER = ("R2", "lambda", "phase", "condensate", "energy",
                    "dE_dR2", "residual")

_DEFAULT_KMAX_OVER_MU = 1e3
_GAP_RESIDUAL_TOL = 1e-10


class Phase(str, enum.Enum):
    NORMAL = "normal"
    CRITICAL = "critical"
    CONDENSED = "condensed"


@dataclass(frozen=True)
class GapSolution:
    """Multiplier lam(R^2) with phase label and gap-equation residual."""

    lam: float
    R2: float
    phase: Phase
    condensate_density: float
    residual: float
    method: str  # "closed_form_2p1" or "quadrature"


def _angular_factor(d: int) -> float:
    """Omega_{d-2} / (2 pi)^{d-1}: solid angle over the measure normalization."""
    ds = d - 1
    surface = 2.0 * math.pi ** (ds / 2.0) / math.gamma(ds / 2.0)
    return surface / (2.0 * math.pi) ** ds


def _validate_d(d: int) -> None:
    if d not in (2, 3, 4):
        raise ValueError(f"spacetime dimension d must be 2, 3 or 4, got {d}")


def _resolve_kmax(mu: float, d: int, k_max: float | None) -> float:
    if k_max is None:
        if d == 4:
            raise ConfigurationError(
                "the d = 4 gap integral is log-divergent; pass an explicit "
                "k_max to acknowledge the cutoff")
        return _DEFAULT_KMAX_OVER_MU * mu
    if not np.isfinite(k_max) or k_max <= 0:
        raise ValueError(f"k_max must be positive and finite, got {k_max}")
    return float(k_max)


def analytic_Q(lam: float, epsilon_k):
    """Stationary occupation Q = eps / sqrt(eps^2 - lam) - 1.

    Vectorized over ``epsilon_k``; requires lam < eps^2 for every entry.
    """
    eps = np.asarray(epsilon_k, dtype=float)
    if lam >= float(np.min(eps)) ** 2:
        raise DomainError(
            f"lam = {lam} is at or above the singularity eps^2 = "
            f"{float(np.min(eps))**2} of the smallest mode")
    s = np.sqrt(eps * eps - lam)
    q = lam / (s * (eps + s))  # eps/s - 1, cancellation-free
    return q if q.ndim else float(q)


# The integrands are parametrized by gap2 = mu^2 - lam rather than lam:
# near the capacity limit gap2 underflows in the difference mu^2 - lam, while
# callers (root finders, extrapolations) know it exactly.

def _constraint_radial(k, mu: float, gap2: float, lam: float):
    """Radial constraint density (1/2)(1/s - 1/eps) = lam / (2 s eps (s + eps))."""
    e = np.sqrt(k * k + mu * mu)
    s = np.sqrt(k * k + gap2)
    return lam / (2.0 * s * e * (s + e))


def _energy_radial(k, mu: float, gap2: float, lam: float):
    """Radial energy density eps Q^2 / (2(1+Q)) = lam^2 / (2 s (eps + s)^2)."""
    e = np.sqrt(k * k + mu * mu)
    s = np.sqrt(k * k + gap2)
    return lam * lam / (2.0 * s * (e + s) ** 2)


def _quad_radial(f, mu: float, gap2: float, d: int, k_max: float,
                 n_points: int) -> float:
    power = d - 2
    lam = mu * mu - gap2
    peak = math.sqrt(gap2)
    pts = sorted({p for p in (peak, 10.0 * peak, mu, 10.0 * mu)
                  if 0.0 < p < k_max}) or None
    with warnings.catch_warnings():
        # roundoff reports from the near-singular peak; accuracy is pinned
        # by the closed-form cross checks instead
        warnings.simplefilter("ignore")
        val, _ = quad(lambda k: k ** power * f(k, mu, gap2, lam), 0.0, k_max,
                      points=pts, limit=max(n_points, 50),
                      epsabs=1e-300, epsrel=1e-10)
    return val


def _constraint_tail(mu: float, gap2: float, d: int, k_max: float) -> float:
    """Integral of the radial constraint density from k_max to infinity.

    Exact for d = 3 (the antiderivative of k/(2s) - k/(2e) is (s - e)/2) and
    for d = 2 (log form); zero for d = 4 where the cutoff is physical.
    """
    lam = mu * mu - gap2
    e = math.hypot(k_max, mu)
    s = math.sqrt(k_max * k_max + gap2)
    if d == 3:
        return 0.5 * lam / (e + s)           # (e - s)/2, stable
    if d == 2:
        return 0.5 * math.log1p(lam / ((e + s) * (k_max + s)))
    return 0.0


def _energy_tail(mu: float, gap2: float, d: int, k_max: float) -> float:
    """Integral of the radial energy density from k_max to infinity."""
    lam = mu * mu - gap2
    e = math.hypot(k_max, mu)
    s = math.sqrt(k_max * k_max + gap2)
    if d == 3:
        # (1/2) * integral_s^inf (eps - s)^2 ds, evaluated in closed form
        return 0.5 * lam * lam * (2.0 * e + s) / (3.0 * (e + s) ** 2)
    if d == 2:
        # integrand ~ lam^2 / (8 k^3) beyond the cutoff
        return lam * lam / (16.0 * k_max * k_max)
    return 0.0


def _gap_lhs(mu: float, gap2: float, N: int, d: int, k_max: float,
             n_points: int) -> float:
    radial = _quad_radial(_constraint_radial, mu, gap2, d, k_max, n_points)
    return N * _angular_factor(d) * (radial
                                     + _constraint_tail(mu, gap2, d, k_max))


def gap_lhs_quadrature(lam: float, mu: float, N: int = 1, d: int = 3,
                       k_max: float | None = None,
                       n_points: int = 200) -> float:
    """Left-hand side of the gap equation by adaptive radial quadrature.

    ``N * integral d^{d-1}k/(2 pi)^{d-1}  (1/2 eps_k)[eps_k/sqrt(eps_k^2-lam) - 1]``
    with an analytic tail correction beyond ``k_max`` for d in {2, 3}.
    """
    _validate_d(d)
    if not np.isfinite(mu) or mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if lam < 0:
        raise DomainError(f"lam must be nonnegative, got {lam}")
    if lam >= mu * mu:
        raise DomainError(
            f"lam = {lam} is at or above mu^2 = {mu * mu}: the k = 0 mode "
            "of the profile is singular")
    kmax = _resolve_kmax(mu, d, k_max)
    if lam == 0.0:
        return 0.0
    return _gap_lhs(mu, mu * mu - lam, N, d, kmax, n_points)


def capacity(mu: float, N: int = 1, d: int = 3,
             k_max: float | None = None) -> float:
    """Largest R^2 the k != 0 modes can absorb (the lam -> mu^2 limit).

    Infinite for d = 2 (no condensation in 1+1 dimensions), exactly
    ``N mu / (4 pi)`` for d = 3, and cutoff-dependent for d = 4.
    """
    _validate_d(d)
    if not np.isfinite(mu) or mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if d == 2:
        return math.inf
    if d == 3:
        return N * mu / (4.0 * math.pi)
    return capacity_quadrature(mu, N, d, k_max)


def capacity_quadrature(mu: float, N: int = 1, d: int = 3,
                        k_max: float | None = None,
                        delta: float = 1e-6) -> float:
    """Capacity via quadrature at lam = mu^2 (1 - delta), extrapolated delta -> 0.

    The leading deficit is proportional to sqrt(delta), so evaluating at
    ``delta`` and ``delta / 4`` and extrapolating linearly in sqrt(delta)
    cancels it exactly.
    """
    _validate_d(d)
    if d == 2:
        return math.inf
    kmax = _resolve_kmax(mu, d, k_max)
    mu2 = mu * mu
    coarse = _gap_lhs(mu, mu2 * delta, N, d, kmax, 400)
    fine = _gap_lhs(mu, mu2 * delta / 4.0, N, d, kmax, 400)
    return 2.0 * fine - coarse


def critical_radius(mu: float, N: int = 1, d: int = 3,
                    k_max: float | None = None) -> float:
    """Critical squared radius beyond which the zero mode condenses.

    d = 3: exactly N mu / (4 pi).  d = 2: infinite (the constraint integrand
    grows like 1/(2k) near k = 0 when lam -> mu^2, so the capacity diverges
    and there is no condensation).  d = 4: cutoff-dependent, computed by
    extrapolated quadrature with a warning.
    """
    _validate_d(d)
    if not np.isfinite(mu) or mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if d == 3:
        return N * mu / (4.0 * math.pi)
    if d == 2:
        return math.inf
    warnings.warn("d = 4 capacity is log-divergent in the cutoff; the "
                  "returned critical radius depends on k_max", stacklevel=2)
    return capacity_quadrature(mu, N, d, k_max)


def solve_gap(mu: float, N: int, R2: float, d: int = 3,
              k_max: float | None = None) -> GapSolution:
    """Solve the gap equation for lam(R^2) by bracketing plus root polish.

    Below capacity the root is found for lam in [0, mu^2); at or beyond
    capacity lam saturates at mu^2 and the excess radius is reported as
    condensate density.
    """
    _validate_d(d)
    if not np.isfinite(mu) or mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not np.isfinite(R2) or R2 < 0:
        raise ValueError(f"R2 must be nonnegative and finite, got {R2}")
    kmax = _resolve_kmax(mu, d, k_max)
    mu2 = mu * mu

    if R2 == 0.0:
        return GapSolution(lam=0.0, R2=0.0, phase=Phase.NORMAL,
                           condensate_density=0.0, residual=0.0,
                           method="quadrature")

    cap = capacity(mu, N, d, kmax)
    scale = max(R2, cap if math.isfinite(cap) else R2)
    if math.isfinite(cap):
        band = 1e-9 * cap
        if abs(R2 - cap) <= band:
            return GapSolution(lam=mu2, R2=R2, phase=Phase.CRITICAL,
                               condensate_density=0.0, residual=abs(R2 - cap),
                               method="quadrature")
        if R2 > cap:
            return GapSolution(lam=mu2, R2=R2, phase=Phase.CONDENSED,
                               condensate_density=R2 - cap,
                               residual=0.0, method="quadrature")

    # Root-find in u = sqrt(1 - lam/mu^2); near the critical point the LHS
    # is linear in u (d = 3), so this parametrization stays well conditioned,
    # and gap2 = (mu u)^2 never suffers the mu^2 - lam cancellation.
    def defect(u: float) -> float:
        if u >= 1.0:
            return -R2
        return _gap_lhs(mu, (mu * u) ** 2, N, d, kmax, 400) - R2

    from scipy.optimize import brentq

    u_lo = 1e-12
    lo_val = defect(u_lo)
    shrink = 0
    while lo_val < 0.0 and shrink < 60:
        # only reachable for d = 2, where the capacity diverges slowly
        u_lo *= 1e-3
        lo_val = defect(u_lo)
        shrink += 1
    if lo_val < 0.0:
        raise RuntimeError(
            f"gap root not bracketed: LHS({u_lo=}) - R2 = {lo_val:.3e}; "
            f"bracketing history exhausted after {shrink} shrink steps")
    u_root = brentq(defect, u_lo, 1.0, xtol=5e-17, rtol=8.9e-16, maxiter=200)
    lam = mu2 * (1.0 - u_root * u_root)
    residual = abs(defect(u_root))
    if residual > _GAP_RESIDUAL_TOL * scale:
        raise RuntimeError(
            f"gap root finder stalled: residual {residual:.3e} exceeds "
            f"{_GAP_RESIDUAL_TOL * scale:.3e} (lam = {lam}, u = {u_root})")
    return GapSolution(lam=lam, R2=R2, phase=Phase.NORMAL,
                       condensate_density=0.0, residual=residual,
                       method="quadrature")


def closed_form_2p1(mu: float, N: int, R2: float) -> GapSolution:
    """Exact 2+1-dimensional solution of the gap equation.

    Normal phase (R^2 <= R_c^2 = N mu / 4 pi):
    ``lam = mu^2 (1 - (1 - 4 pi R^2 / (N mu))^2)``; beyond that lam = mu^2
    and the excess radius sits in the condensate.
    """
    if not np.isfinite(mu) or mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if N < 1:
        raise ValueError(f"N must be >= 1, got {N}")
    if not np.isfinite(R2) or R2 < 0:
        raise ValueError(f"R2 must be nonnegative and finite, got {R2}")
    mu2 = mu * mu
    rc2 = N * mu / (4.0 * math.pi)
    band = 1e-12 * rc2
    if abs(R2 - rc2) <= band:
        return GapSolution(lam=mu2, R2=R2, phase=Phase.CRITICAL,
                           condensate_density=0.0, residual=0.0,
                           method="closed_form_2p1")
    if R2 > rc2:
        return GapSolution(lam=mu2, R2=R2, phase=Phase.CONDENSED,
                           condensate_density=R2 - rc2, residual=0.0,
                           method="closed_form_2p1")
    u = 1.0 - R2 / rc2
    lam = mu2 * (1.0 - u * u)
    return GapSolution(lam=lam, R2=R2, phase=Phase.NORMAL,
                       condensate_density=0.0, residual=0.0,
                       method="closed_form_2p1")


def ground_state_energy(lam: float, mu: float, N: int = 1, d: int = 3,
                        k_max: float | None = None,
                        condensate: float = 0.0) -> float:
    """Ground-state energy density: quadrature of eps Q^2/(2(1+Q)) plus the
    condensate cost mu^2 * condensate.

    Along the normal branch dE/dR^2 equals lam; the condensate term carries
    the k -> 0 limiting slope mu^2, which makes E and its slope continuous
    across the transition.
    """
    _validate_d(d)
    if not np.isfinite(mu) or mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if lam < 0 or lam > mu * mu:
        raise DomainError(f"lam must lie in [0, mu^2], got {lam}")
    if condensate < 0:
        raise ValueError(f"condensate must be nonnegative, got {condensate}")
    if condensate > 0 and lam < mu * mu * (1.0 - 1e-9):
        raise ValueError(
            "a nonzero condensate requires lam = mu^2 (condensation only "
            "occurs once the regular modes saturate)")
    kmax = _resolve_kmax(mu, d, k_max)
    if lam == 0.0:
        return mu * mu * condensate
    gap2 = mu * mu - lam
    radial = _quad_radial(_energy_radial, mu, gap2, d, kmax, 400)
    regular = N * _angular_factor(d) * (radial
                                        + _energy_tail(mu, gap2, d, kmax))
    return regular + mu * mu * condensate


def ground_state_energy_closed_form_2p1(lam: float, mu: float, N: int = 1,
                                        condensate: float = 0.0) -> float:
    """Elementary 2+1-dimensional form of the regular-branch energy.

    integral k dk (eps - s)^2 / (2 s) / (2 pi)  =
    [mu^3 - s0^3]/3 - lam s0 / 2  over 2 pi, with s0 = sqrt(mu^2 - lam).
    """
    if lam < 0 or lam > mu * mu:
        raise DomainError(f"lam must lie in [0, mu^2], got {lam}")
    s0 = math.sqrt(mu * mu - lam)
    cubes = lam * (mu * mu + mu * s0 + s0 * s0) / (mu + s0)  # mu^3 - s0^3
    regular = N * (cubes / 3.0 - 0.5 * lam * s0) / (2.0 * math.pi)
    return regular + mu * mu * condensate


@dataclass(frozen=True)
class SweepRow:
    R2: float
    lam: float
    phase: Phase
    condensate: float
    energy: float
    dE_dR2: float
    residual: float


@dataclass(frozen=True)
class SweepResult:
    rows: tuple
    diagnostics: dict = field(default_factory=dict)


def phase_sweep(mu: float, N: int, d: int, R2_values,
                k_max: float | None = None,
                method: str = "quadrature") -> SweepResult:
    """Solve the gap equation on an ascending R^2 ladder and tabulate
    (lam, phase, condensate, energy, central-difference slope, residual).

    The transition diagnostics report the continuity of E and dE/dR^2 at the
    critical radius and the collapse of the second difference to zero on the
    condensed side (the second-order signature).
    """
    r2s = [float(r) for r in R2_values]
    if not r2s:
        raise ValueError("R2_values must be non-empty")
    if any(b < a for a, b in zip(r2s, r2s[1:])):
        raise ValueError("R2_values must be sorted ascending")
    if method not in ("quadrature", "closed_form_2p1"):
        raise ValueError(f"unknown sweep method {method!r}")
    if method == "closed_form_2p1" and d != 3:
        raise ValueError("closed_form_2p1 sweeps require d = 3")

    sols = []
    for r2 in r2s:
        if method == "closed_form_2p1":
            sols.append(closed_form_2p1(mu, N, r2))
        else:
            sols.append(solve_gap(mu, N, r2, d, k_max))
    energies = np.array([
        ground_state_energy(s.lam, mu, N, d, k_max,
                            condensate=s.condensate_density)
        for s in sols])
    r2arr = np.array(r2s)
    slopes = (np.gradient(energies, r2arr) if len(r2s) > 1
              else np.full(1, np.nan))

    rows = tuple(
        SweepRow(R2=r2, lam=s.lam, phase=s.phase,
                 condensate=s.condensate_density, energy=float(e),
                 dE_dR2=float(sl), residual=s.residual)
        for r2, s, e, sl in zip(r2s, sols, energies, slopes))

    diagnostics: dict = {"transition_index": None}
    first_cond = next((i for i, s in enumerate(sols)
                       if s.phase is not Phase.NORMAL), None)
    if first_cond is not None and 1 < first_cond < len(r2s) - 1:
        i = first_cond
        h = r2arr[i] - r2arr[i - 1]
        slope_left = float((energies[i] - energies[i - 1]) / h)
        slope_right = float((energies[i + 1] - energies[i])
                            / (r2arr[i + 1] - r2arr[i]))
        second = np.diff(energies, 2) / h ** 2 if len(r2s) > 2 else np.array([])
        cond_second = second[i:] if second.size else np.array([])
        norm_second = second[:max(i - 1, 0)] if second.size else np.array([])
        diagnostics = {
            "transition_index": i,
            "R2_critical": float(r2arr[i]),
            "slope_left": slope_left,
            "slope_right": slope_right,
            "slope_jump": abs(slope_left - slope_right),
            "max_second_difference_condensed": float(
                np.max(np.abs(cond_second))) if cond_second.size else 0.0,
            "max_second_difference_normal": float(
                np.max(np.abs(norm_second))) if norm_second.size else 0.0,
        }
    return SweepResult(rows=rows, diagnostics=diagnostics)
