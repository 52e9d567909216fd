"""Scratch: grid-root study for the solver convergence criteria (not shipped)."""
import math
import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq

from sigmavar.lattice import build_grid, dispersion

MU, N = 1.0, 1
R2 = 1 / (8 * math.pi)


def grid_sum(lam, grid, eps):
    s = np.sqrt(eps**2 - lam)
    q = lam / (s * (eps + s))
    return N * np.sum(grid.weights * q / (2 * eps))


def box_exterior_tail(lam, kmax):
    """Exact exterior integral of Q/(2 eps) over R^2 minus the box [-K,K]^2."""
    s0 = math.sqrt(MU * MU - lam)
    full = N * (MU - s0) / (4 * math.pi)

    def inner(R):
        e = math.hypot(R, MU)
        s = math.sqrt(R * R + MU * MU - lam)
        return 0.5 * (lam / (MU + s0) - lam / (e + s))

    box, _ = quad(lambda th: inner(kmax / math.cos(th)), 0, math.pi / 4,
                  epsrel=1e-12)
    box = 8 * box / (4 * math.pi**2)
    return full - box


for n in (33, 65, 129, 257):
    grid = build_grid(2, 20.0, n, True)
    eps = dispersion(grid, MU).epsilon

    lam_plain = brentq(lambda l: grid_sum(l, grid, eps) - R2, 0, 0.9999999,
                       xtol=1e-15)
    lam_tail = brentq(
        lambda l: grid_sum(l, grid, eps) + box_exterior_tail(l, 20.0) - R2,
        0, 0.9999999, xtol=1e-15)
    print(f"n={n:4d} dk={grid.dk:.4f}  lam_plain={lam_plain:.10f} "
          f"err={abs(lam_plain-0.75):.3e}   lam_tail={lam_tail:.12f} "
          f"err={abs(lam_tail-0.75):.3e}")

# condensed-phase study: R2 = 2 Rc^2, zero-mode share and condensate estimate
print("\ncondensed study, R2 = 2 Rc^2:")
RC2 = N * MU / (4 * math.pi)
R2c = 2 * RC2
for n, kmax in ((65, 20.0), (129, 20.0), (257, 20.0)):
    grid = build_grid(2, kmax, n, True)
    eps = dispersion(grid, MU).epsilon
    w0 = grid.weights[grid.zero_index]

    def total(lam):
        return (grid_sum(lam, grid, eps) + box_exterior_tail(lam, kmax)) - R2c

    lam = brentq(total, 0.9, 1 - 1e-16, xtol=1e-18)
    s = np.sqrt(eps**2 - lam)
    q = lam / (s * (eps + s))
    zero_share = N * w0 * q[grid.zero_index] / (2 * eps[grid.zero_index])

    # regular share of the zero cell: exact square-cell radial integral
    a = grid.dk / 2
    s0 = math.sqrt(MU * MU - lam)

    def inner(R):
        e = math.hypot(R, MU)
        ss = math.sqrt(R * R + MU * MU - lam)
        return 0.5 * (lam / (MU + s0) - lam / (e + ss))

    cell, _ = quad(lambda th: inner(a / math.cos(th)), 0, math.pi / 4,
                   epsrel=1e-12)
    r0 = N * 8 * cell / (4 * math.pi**2)
    cond = zero_share - r0
    print(f"n={n:4d} kmax={kmax}  lam={lam:.8f} (mu2-lam={1-lam:.3e})  "
          f"cond={cond:.6f}  target={RC2:.6f}  rel_err={(cond-RC2)/RC2:+.4%}")
