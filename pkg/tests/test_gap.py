import math

import numpy as np
import pytest
from scipy.integrate import quad

from sigmavar import gap
from sigmavar.errors import ConfigurationError, DomainError


def closed_lhs(lam, mu, n_comp):
    return (n_comp * mu / (4 * math.pi)) * (1 - math.sqrt(1 - lam / mu ** 2))


def test_analytic_Q_values():
    assert gap.analytic_Q(0.0, 2.7) == 0.0
    assert gap.analytic_Q(0.75, 1.0) == pytest.approx(1.0)
    assert gap.analytic_Q(1.0, math.sqrt(2.0)) == pytest.approx(
        math.sqrt(2.0) - 1.0)
    np.testing.assert_allclose(gap.analytic_Q(0.75, np.array([1.0, 2.0])),
                               [1.0, 2 / math.sqrt(3.25) - 1], rtol=1e-14)


def test_analytic_Q_domain():
    with pytest.raises(DomainError):
        gap.analytic_Q(1.0, 1.0)
    with pytest.raises(DomainError):
        gap.analytic_Q(2.0, 1.0)


def test_gap_lhs_zero_multiplier():
    assert gap.gap_lhs_quadrature(0.0, 1.0, 1, 3) == 0.0
    assert gap.gap_lhs_quadrature(0.0, 2.0, 4, 2) == 0.0


def test_gap_lhs_exact_2p1_value():
    val = gap.gap_lhs_quadrature(0.75, 1.0, 1, 3, k_max=1e3)
    assert val == pytest.approx(1 / (8 * math.pi), rel=1e-9)


def test_gap_lhs_capacity_limit():
    val = gap.gap_lhs_quadrature(1.0 - 1e-12, 1.0, 1, 3)
    assert val == pytest.approx(1 / (4 * math.pi), rel=1e-5)


def test_gap_lhs_matches_closed_form_randomly():
    rng = np.random.default_rng(11)
    for _ in range(50):
        mu = rng.uniform(0.1, 10.0)
        n_comp = int(rng.integers(1, 11))
        lam = rng.uniform(0.0, 0.999) * mu ** 2
        got = gap.gap_lhs_quadrature(lam, mu, n_comp, 3, k_max=1e3 * mu)
        want = closed_lhs(lam, mu, n_comp)
        assert got == pytest.approx(want, rel=1e-6, abs=1e-15)


def test_gap_lhs_monotone_in_lambda():
    vals = [gap.gap_lhs_quadrature(lam, 1.0, 1, 3)
            for lam in (0.1, 0.3, 0.6, 0.9, 0.99)]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_gap_lhs_domain_and_cutoff_errors():
    with pytest.raises(DomainError):
        gap.gap_lhs_quadrature(1.0, 1.0, 1, 3)
    with pytest.raises(DomainError):
        gap.gap_lhs_quadrature(-0.1, 1.0, 1, 3)
    with pytest.raises(ConfigurationError):
        gap.gap_lhs_quadrature(0.5, 1.0, 1, 4)       # d=4 needs explicit cutoff
    assert gap.gap_lhs_quadrature(0.5, 1.0, 1, 4, k_max=50.0) > 0


def test_solve_gap_trivial():
    sol = gap.solve_gap(1.0, 1, 0.0)
    assert sol.lam == 0.0
    assert sol.phase is gap.Phase.NORMAL


def test_solve_gap_inverts_closed_form():
    sol = gap.solve_gap(1.0, 1, 1 / (8 * math.pi), 3)
    assert sol.lam == pytest.approx(0.75, abs=1e-10)
    assert sol.phase is gap.Phase.NORMAL
    assert sol.residual <= 1e-10 * max(sol.R2, 1 / (4 * math.pi))


def test_solve_gap_round_trip():
    for r2 in (1e-4, 0.01, 0.07):
        sol = gap.solve_gap(1.3, 2, r2, 3)
        back = gap.gap_lhs_quadrature(sol.lam, 1.3, 2, 3)
        assert back == pytest.approx(r2, rel=1e-9)


def test_solve_gap_condensed():
    sol = gap.solve_gap(1.0, 1, 1 / (2 * math.pi), 3)
    assert sol.phase is gap.Phase.CONDENSED
    assert sol.lam == pytest.approx(1.0)
    assert sol.condensate_density == pytest.approx(1 / (4 * math.pi))


def test_solve_gap_d2_never_condenses():
    sol = gap.solve_gap(1.0, 1, 5.0, 2)
    assert sol.phase is gap.Phase.NORMAL
    assert sol.lam < 1.0


def test_closed_form_values():
    assert gap.closed_form_2p1(1.0, 1, 0.0).lam == 0.0
    sol = gap.closed_form_2p1(1.0, 1, 1 / (8 * math.pi))
    assert sol.lam == pytest.approx(0.75, rel=1e-14)
    crit = gap.closed_form_2p1(2.0, 3, 6 / (4 * math.pi))
    assert crit.phase is gap.Phase.CRITICAL
    assert crit.lam == pytest.approx(4.0)
    cond = gap.closed_form_2p1(1.0, 1, 0.3)
    assert cond.phase is gap.Phase.CONDENSED
    assert cond.condensate_density == pytest.approx(0.3 - 1 / (4 * math.pi))


def test_critical_radius():
    assert gap.critical_radius(1.0, 1, 3) == pytest.approx(
        1 / (4 * math.pi), rel=1e-15)
    assert gap.critical_radius(2.0, 5, 3) == pytest.approx(
        10 / (4 * math.pi), rel=1e-15)
    assert gap.critical_radius(1.0, 1, 2) == math.inf
    with pytest.warns(UserWarning, match="cutoff"):
        val = gap.critical_radius(1.0, 1, 4, k_max=100.0)
    assert val > 0


def test_capacity_quadrature_extrapolates():
    for mu, n_comp in ((1.0, 1), (2.5, 3)):
        got = gap.capacity_quadrature(mu, n_comp, 3, k_max=1e3 * mu)
        want = n_comp * mu / (4 * math.pi)
        assert got == pytest.approx(want, rel=1e-7)


def test_energy_zero():
    assert gap.ground_state_energy(0.0, 1.0, 1, 3) == 0.0


def test_energy_quadrature_matches_bare_integral():
    # independent oracle: direct numerical integral of the energy density
    mu, lam = 1.2, 0.9
    def density(k):
        e = math.hypot(k, mu)
        s = math.sqrt(k * k + mu * mu - lam)
        q = e / s - 1.0
        return k * e * q * q / (2 * (1 + q)) / (2 * math.pi)
    bare = (quad(density, 0.0, 4e3, limit=400)[0]
            + quad(density, 4e3, np.inf, limit=400)[0])
    got = gap.ground_state_energy(lam, mu, 1, 3, k_max=4e3)
    assert got == pytest.approx(bare, rel=1e-7)


def test_energy_closed_form_2p1_matches_quadrature():
    for lam, mu, n_comp in ((0.3, 1.0, 1), (0.999, 1.0, 2), (3.0, 2.0, 1)):
        got = gap.ground_state_energy(lam, mu, n_comp, 3)
        want = gap.ground_state_energy_closed_form_2p1(lam, mu, n_comp)
        assert got == pytest.approx(want, rel=1e-9)


def test_energy_slope_equals_multiplier():
    # dE/dR^2 = lam along the normal branch (finite differences on a ladder)
    mu, n_comp = 1.0, 1
    r2 = 0.03
    h = 1e-5
    sols = [gap.solve_gap(mu, n_comp, r, 3) for r in (r2 - h, r2, r2 + h)]
    energies = [gap.ground_state_energy(s.lam, mu, n_comp, 3) for s in sols]
    slope = (energies[2] - energies[0]) / (2 * h)
    assert slope == pytest.approx(sols[1].lam, abs=1e-5)


def test_energy_continuous_at_transition():
    rc2 = 1 / (4 * math.pi)
    normal = gap.ground_state_energy(1.0, 1.0, 1, 3, condensate=0.0)
    condensed = gap.ground_state_energy(1.0, 1.0, 1, 3, condensate=0.0)
    assert normal == condensed


def test_energy_rejects_condensate_off_saturation():
    with pytest.raises(ValueError, match="condensate"):
        gap.ground_state_energy(0.5, 1.0, 1, 3, condensate=0.1)
    with pytest.raises(ValueError):
        gap.ground_state_energy(0.5, 1.0, 1, 3, condensate=-0.1)
    with pytest.raises(DomainError):
        gap.ground_state_energy(1.5, 1.0, 1, 3)


def test_phase_sweep_normal_branch():
    rc2 = 1 / (4 * math.pi)
    r2s = np.linspace(0.0, 0.8 * rc2, 9)
    result = gap.phase_sweep(1.0, 1, 3, r2s)
    lams = [r.lam for r in result.rows]
    assert all(r.phase is gap.Phase.NORMAL for r in result.rows)
    assert all(b > a for a, b in zip(lams, lams[1:]))
    assert result.diagnostics["transition_index"] is None


def test_phase_sweep_condensed_branch():
    rc2 = 1 / (4 * math.pi)
    r2s = np.linspace(1.2 * rc2, 2.0 * rc2, 9)
    result = gap.phase_sweep(1.0, 1, 3, r2s)
    assert all(r.phase is gap.Phase.CONDENSED for r in result.rows)
    assert all(r.lam == pytest.approx(1.0) for r in result.rows)
    inner = [r.dE_dR2 for r in result.rows[1:-1]]
    np.testing.assert_allclose(inner, 1.0, rtol=1e-9)


def test_phase_sweep_straddles_transition():
    rc2 = 1 / (4 * math.pi)
    r2s = np.linspace(0.0, 2 * rc2, 41)
    result = gap.phase_sweep(1.0, 1, 3, r2s)
    diag = result.diagnostics
    assert diag["transition_index"] is not None
    assert diag["R2_critical"] == pytest.approx(rc2, rel=1e-12)
    h = r2s[1] - r2s[0]
    assert diag["slope_jump"] <= (h / rc2) ** 2 + 1e-9
    assert diag["slope_left"] == pytest.approx(1.0, abs=5e-3)
    assert diag["slope_right"] == pytest.approx(1.0, abs=1e-9)
    assert diag["max_second_difference_condensed"] <= 1e-7
    assert diag["max_second_difference_normal"] > 1.0  # curvature before


def test_phase_sweep_closed_form_method_matches():
    rc2 = 1 / (4 * math.pi)
    r2s = np.linspace(0.0, 1.5 * rc2, 7)
    quadr = gap.phase_sweep(1.0, 1, 3, r2s, method="quadrature")
    closed = gap.phase_sweep(1.0, 1, 3, r2s, method="closed_form_2p1")
    for a, b in zip(quadr.rows, closed.rows):
        assert a.lam == pytest.approx(b.lam, abs=1e-9)
        assert a.energy == pytest.approx(b.energy, rel=1e-8)


def test_phase_sweep_input_validation():
    with pytest.raises(ValueError, match="non-empty"):
        gap.phase_sweep(1.0, 1, 3, [])
    with pytest.raises(ValueError, match="ascending"):
        gap.phase_sweep(1.0, 1, 3, [0.2, 0.1])
    with pytest.raises(ValueError, match="closed_form_2p1"):
        gap.phase_sweep(1.0, 1, 2, [0.1], method="closed_form_2p1")
