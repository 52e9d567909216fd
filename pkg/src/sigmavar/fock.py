"""Truncated Fock-space oracle.

Everything here is brute force on purpose: occupation-number bases with a
total-occupation cap, sparse ladder matrices, and exact expectation values.
The module serves three roles:

* measure the expectation-value kernels A and B on arbitrary truncated
  states (ladder-operator matrix elements with their sqrt(n) factors);
* realize the constructive decomposition of a PSD kernel g into a Fock
  state whose measured ``<a_k^+ a_k'>`` reproduces g, via per-sector
  product states built from the eigenfunctions of g and a nonnegative
  least-squares solve for the sector weights;
* independently minimize the constrained Hamiltonian on tiny grids
  (penalty method, multistart) to validate the variational solver.

Truncated states are genuine Fock states, so measured kernels are exact for
the state at hand; truncation only limits which target kernels are
reachable.  When a two-species state populates its top occupation sector
above 1e-6 a :class:`TruncationLeakWarning` reports the leaked norm, since
pair kernels mix particle-number sectors and silent bias must be visible.
"""

from __future__ import annotations

import itertools
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize, nnls
from scipy.sparse import csr_matrix

from .errors import BasisSizeError, ConstraintViolationError, TruncationLeakWarning
from .kernel import HermitianKernel
from .lattice import MomentumGrid, build_grid, dispersion

__all__ = [
    "FockBasis",
    "FockState",
    "BruteForceResult",
    "enumerate_basis",
    "single_species_dimension",
    "expectation_kernels",
    "sample_random_states",
    "decompose_kernel_to_state",
    "brute_force_ground_state",
]

DEFAULT_BASIS_CAP = 2_000_000
_LEAK_REPORT_THRESHOLD = 1e-6


def single_species_dimension(n_modes: int, n_max: int) -> int:
    """Number of occupation tuples over n_modes with total occupation <= n_max."""
    return sum(math.comb(n + n_modes - 1, n_modes - 1)
               for n in range(n_max + 1))


def _single_species_states(n_modes: int, n_max: int) -> list[tuple[int, ...]]:
    states = [occ for occ in itertools.product(range(n_max + 1),
                                               repeat=n_modes)
              if sum(occ) <= n_max]
    states.sort()
    return states


@dataclass
class FockBasis:
    """Occupation-number basis; one or two boson species on the same modes.

    States are tuples of length ``n_modes * species`` (species-a occupations
    first), unique and lexicographically ordered, with the total occupation
    of each species capped at ``n_max``.
    """

    n_modes: int
    n_max: int
    species: int
    states: tuple
    grid: MomentumGrid
    _index: dict = field(repr=False, default_factory=dict)
    _ops: dict = field(repr=False, default_factory=dict)

    @property
    def dimension(self) -> int:
        return len(self.states)

    def index(self, occ: tuple) -> int:
        return self._index[occ]

    def occupations(self) -> np.ndarray:
        """(dimension, n_modes * species) integer occupation matrix."""
        return np.asarray(self.states, dtype=np.int64)

    def total_occupation(self, species_index: int = 0) -> np.ndarray:
        occ = self.occupations()
        lo = species_index * self.n_modes
        return occ[:, lo:lo + self.n_modes].sum(axis=1)

    def top_sector_mask(self) -> np.ndarray:
        """States in which some species sits at its occupation cap."""
        mask = self.total_occupation(0) == self.n_max
        if self.species == 2:
            mask = mask | (self.total_occupation(1) == self.n_max)
        return mask

    def annihilation(self, species_index: int, mode: int) -> csr_matrix:
        """Sparse annihilation operator for one species/mode, projected onto
        the truncated basis (exact for expectation values on basis states)."""
        key = (species_index, mode)
        if key not in self._ops:
            col_offset = species_index * self.n_modes + mode
            rows, cols, data = [], [], []
            for idx, occ in enumerate(self.states):
                n = occ[col_offset]
                if n:
                    lowered = list(occ)
                    lowered[col_offset] = n - 1
                    rows.append(self._index[tuple(lowered)])
                    cols.append(idx)
                    data.append(math.sqrt(n))
            self._ops[key] = csr_matrix(
                (data, (rows, cols)),
                shape=(self.dimension, self.dimension), dtype=float)
        return self._ops[key]


@dataclass
class FockState:
    """Complex amplitude vector over a truncated occupation basis."""

    basis: FockBasis
    amplitudes: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.basis.dimension,):
            raise ValueError(
                f"amplitudes have shape {amp.shape}, expected "
                f"({self.basis.dimension},)")
        if self.normalized:
            norm = np.linalg.norm(amp)
            if abs(norm - 1.0) > 1e-12:
                raise ValueError(
                    f"state marked normalized but |amplitudes| = {norm!r}")
        self.amplitudes = amp

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def top_sector_population(self) -> float:
        mask = self.basis.top_sector_mask()
        return float(np.sum(np.abs(self.amplitudes[mask]) ** 2))

    def sector_weights(self) -> np.ndarray:
        """|amplitude|^2 summed per total species-a occupation sector."""
        totals = self.basis.total_occupation(0)
        weights = np.zeros(self.basis.n_max + 1)
        np.add.at(weights, totals, np.abs(self.amplitudes) ** 2)
        return weights

    def to_json_dict(self, threshold: float = 1e-15) -> dict:
        """Occupation tuple -> [re, im] mapping of non-negligible amplitudes.

        Keys are comma-joined occupations, species separated by '|', e.g.
        "0,1,0|1,0,0" for a two-species three-mode basis.
        """
        k = self.basis.n_modes
        out = {}
        for occ, amp in zip(self.basis.states, self.amplitudes):
            if abs(amp) <= threshold:
                continue
            parts = [",".join(str(x) for x in occ[i * k:(i + 1) * k])
                     for i in range(self.basis.species)]
            out["|".join(parts)] = [float(amp.real), float(amp.imag)]
        return {
            "n_modes": self.basis.n_modes,
            "n_max": self.basis.n_max,
            "species": self.basis.species,
            "amplitudes": out,
        }


def _default_grid(n_modes: int) -> MomentumGrid:
    """Canonical symmetric 1D grid used when a basis is built standalone."""
    return build_grid(1, math.pi, n_modes, include_zero=n_modes % 2 == 1)


def enumerate_basis(n_modes: int, n_max: int, species: int,
                    grid: MomentumGrid | None = None,
                    size_cap: int = DEFAULT_BASIS_CAP) -> FockBasis:
    """Complete truncated basis; refuses to build beyond ``size_cap`` states."""
    if n_modes < 1:
        raise ValueError(f"n_modes must be >= 1, got {n_modes}")
    if n_max < 0:
        raise ValueError(f"n_max must be >= 0, got {n_max}")
    if species not in (1, 2):
        raise ValueError(f"species must be 1 or 2, got {species}")
    single = single_species_dimension(n_modes, n_max)
    estimated = single ** species
    if estimated > size_cap:
        raise BasisSizeError(
            f"basis would hold {estimated} states "
            f"({single} per species), above the cap of {size_cap}",
            estimated_size=estimated)
    if grid is None:
        grid = _default_grid(n_modes)
    elif grid.n_modes != n_modes:
        raise ValueError(
            f"grid has {grid.n_modes} modes but basis was asked for {n_modes}")

    one = _single_species_states(n_modes, n_max)
    if species == 1:
        states = tuple(one)
    else:
        states = tuple(sorted(a + b for a in one for b in one))
    basis = FockBasis(n_modes=n_modes, n_max=n_max, species=species,
                      states=states, grid=grid)
    basis._index = {occ: i for i, occ in enumerate(states)}
    return basis


def expectation_kernels(state: FockState) -> tuple[HermitianKernel,
                                                   HermitianKernel]:
    """Measured kernels A(k,k') and B(k,k') of a normalized state.

    Single species: ``A(k,k') = <a_k^+ a_k'>`` (a Gram matrix of annihilated
    vectors, PSD by construction) and B = 0.  Two species:
    ``A(k,k') = <a_k^+ a_k' + b_{-k'}^+ b_{-k}>`` and
    ``B(k,k') = <a_k^+ b_{-k'}^+ + a_k' b_{-k}>``, with -k resolved through
    the grid's exact reflection permutation.
    """
    basis = state.basis
    psi = state.amplitudes
    norm = np.linalg.norm(psi)
    if abs(norm - 1.0) > 1e-8:
        raise ValueError(f"state must be normalized, |psi| = {norm!r}")
    psi = psi / norm
    k = basis.n_modes

    a_vecs = np.stack([basis.annihilation(0, j) @ psi for j in range(k)])
    gram_a = a_vecs.conj() @ a_vecs.T

    if basis.species == 1:
        a_kernel = HermitianKernel.from_matrix(basis.grid, gram_a)
        b_kernel = HermitianKernel.from_matrix(
            basis.grid, np.zeros((k, k), dtype=complex))
        return a_kernel, b_kernel

    refl = basis.grid.reflection
    b_vecs = np.stack([basis.annihilation(1, j) @ psi for j in range(k)])
    bdag_vecs = np.stack([basis.annihilation(1, j).T @ psi for j in range(k)])
    gram_b = b_vecs.conj() @ b_vecs.T
    cross = a_vecs.conj() @ bdag_vecs.T   # <a_i psi | b_j^+ psi>

    a_mat = gram_a + gram_b[np.ix_(refl, refl)].T
    b_mat = cross[:, refl] + cross[:, refl].conj().T

    leak = state.top_sector_population()
    if leak > _LEAK_REPORT_THRESHOLD:
        warnings.warn(TruncationLeakWarning(
            f"top occupation sector holds {leak:.3e} of the state's norm; "
            "pair-kernel targets beyond the truncation are biased"),
            stacklevel=2)

    return (HermitianKernel.from_matrix(basis.grid, a_mat),
            HermitianKernel.from_matrix(basis.grid, b_mat))


def sample_random_states(basis: FockBasis, count: int,
                         seed: int) -> list[FockState]:
    """Deterministic normalized complex Gaussian amplitude vectors."""
    if count < 1:
        raise ValueError(f"count must be >= 1, got {count}")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((count, basis.dimension, 2))
    states = []
    for row in raw:
        amp = row[:, 0] + 1j * row[:, 1]
        amp /= np.linalg.norm(amp)
        states.append(FockState(basis=basis, amplitudes=amp))
    return states


# -- constructive kernel decomposition ---------------------------------------

def _sector_states(basis: FockBasis, evals: np.ndarray,
                   evecs: np.ndarray) -> list[np.ndarray | None]:
    """Normalized n-particle product states built from the eigenfunctions.

    Sector n holds sum_m sqrt(lam_m) (C_m^+)^n |0> / sqrt(n!), where
    C_m^+ creates a particle in eigenfunction m of the target kernel.
    """
    dim = basis.dimension
    vacuum = np.zeros(dim, dtype=complex)
    vacuum[basis.index((0,) * basis.n_modes)] = 1.0
    sectors: list[np.ndarray | None] = [vacuum]
    acc = [np.zeros(dim, dtype=complex) for _ in range(basis.n_max)]
    for m in range(len(evals)):
        lam = evals[m]
        if lam <= 0.0:
            continue
        create = sum(np.conj(evecs[k, m]) * basis.annihilation(0, k).T
                     for k in range(basis.n_modes))
        cur = vacuum
        for n in range(1, basis.n_max + 1):
            cur = create @ cur
            acc[n - 1] = acc[n - 1] + math.sqrt(lam) * cur / math.sqrt(
                math.factorial(n))
    for vec in acc:
        nrm = np.linalg.norm(vec)
        sectors.append(vec / nrm if nrm > 1e-14 else None)
    return sectors


def decompose_kernel_to_state(g, n_max: int,
                              tol: float = 1e-8,
                              size_cap: int = DEFAULT_BASIS_CAP
                              ) -> tuple[FockState, float]:
    """Build a Fock state whose measured <a^+ a> kernel reproduces g.

    The eigenfunctions of g fix per-sector product states; nonnegative
    least squares then assigns sector probabilities so the sectors' measured
    kernels combine to g (number conservation makes the combination exact).
    Sectors are admitted lowest-first, so targets reachable with few
    particles use them.  The measured kernel is always recomputed through
    :func:`expectation_kernels`; the returned residual is the Frobenius
    mismatch against the target.  If no admissible weight assignment exists
    at this ``n_max`` the best state is returned with its residual standing.
    """
    if isinstance(g, HermitianKernel):
        mat = np.asarray(g.entries, dtype=complex)
        grid = g.grid
    else:
        mat = np.asarray(g, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"kernel must be square, got shape {mat.shape}")
        mat = 0.5 * (mat + mat.conj().T)
        grid = _default_grid(mat.shape[0])
    n_modes = mat.shape[0]

    evals, evecs = np.linalg.eigh(mat)
    lam_max = max(float(evals[-1]), 0.0)
    if float(evals[0]) < -1e-10 * max(1.0, lam_max):
        raise ConstraintViolationError(
            f"kernel is not PSD: min eigenvalue {float(evals[0]):.6e}",
            min_eigenvalue=float(evals[0]))
    evals = np.clip(evals, 0.0, None)

    basis = enumerate_basis(n_modes, n_max, species=1, grid=grid,
                            size_cap=size_cap)
    sectors = _sector_states(basis, evals, evecs)

    usable = [n for n in range(1, n_max + 1) if sectors[n] is not None]
    measured = {}
    for n in usable:
        a_kern, _ = expectation_kernels(FockState(basis, sectors[n]))
        measured[n] = a_kern.entries

    target = np.concatenate([mat.real.ravel(), mat.imag.ravel()])
    scale = max(1.0, float(np.linalg.norm(mat)))

    best: tuple[float, np.ndarray, list[int]] | None = None
    for last in range(len(usable)):
        active = usable[:last + 1]
        design = np.column_stack([
            np.concatenate([measured[n].real.ravel(),
                            measured[n].imag.ravel()])
            for n in active])
        weights, _ = nnls(design, target)
        resid = float(np.linalg.norm(design @ weights - target))
        total = float(np.sum(weights))
        admissible = total <= 1.0 + 1e-12
        if best is None or (admissible and resid < best[0]):
            if admissible:
                best = (resid, weights, active)
        if admissible and resid <= tol * scale:
            break
    if best is None:
        # every NNLS fit overshot total probability 1; fall back to the
        # full-sector fit, renormalized, and let the residual tell the story
        active = usable
        design = np.column_stack([
            np.concatenate([measured[n].real.ravel(),
                            measured[n].imag.ravel()])
            for n in active])
        weights, _ = nnls(design, target)
        weights = weights / max(float(np.sum(weights)), 1.0)
        best = (math.inf, weights, active)

    _, weights, active = best
    p0 = max(1.0 - float(np.sum(weights)), 0.0)
    amp = math.sqrt(p0) * sectors[0]
    for wgt, n in zip(weights, active):
        if wgt > 0.0:
            amp = amp + math.sqrt(wgt) * sectors[n]
    amp = amp / np.linalg.norm(amp)
    state = FockState(basis, amp)

    a_meas, _ = expectation_kernels(state)
    residual = float(np.linalg.norm(a_meas.entries - mat))
    return state, residual


# -- brute-force constrained ground state -------------------------------------

@dataclass
class BruteForceResult:
    energy: float
    state: FockState
    constraint_residual: float
    offdiagonal_residual: float = 0.0
    truncation_leak: float = 0.0
    converged: bool = True

    def __iter__(self):
        # unpacks as the (energy, state, constraint_residual) triple
        return iter((self.energy, self.state, self.constraint_residual))


def _pair_operators(basis: FockBasis, weights, eps):
    """Energy diagonal, sphere operator and K != 0 component operators."""
    k = basis.n_modes
    refl = basis.grid.reflection
    occ = basis.occupations()
    w_eps = weights * eps
    h_diag = occ[:, :k] @ w_eps + occ[:, k:] @ w_eps

    half_w_over_eps = weights / (2.0 * eps)
    s_diag = occ[:, :k] @ half_w_over_eps + occ[:, k:] @ half_w_over_eps
    pair = sum(half_w_over_eps[j]
               * (basis.annihilation(0, j).T @ basis.annihilation(1, refl[j]).T)
               for j in range(k))
    sphere = pair + pair.T.conj()

    coords = np.rint(basis.grid.modes / (basis.grid.dk / 2.0)).astype(np.int64)
    offdiag = {}
    for i in range(k):
        for j in range(k):
            if i == j:
                continue
            key = tuple(coords[j] - coords[i])
            factor = weights[i] / math.sqrt(eps[i] * eps[j])
            op = (basis.annihilation(0, i).T @ basis.annihilation(0, j)
                  + basis.annihilation(1, refl[j]).T
                  @ basis.annihilation(1, refl[i])
                  + basis.annihilation(0, i).T
                  @ basis.annihilation(1, refl[j]).T
                  + basis.annihilation(0, j) @ basis.annihilation(1, refl[i]))
            offdiag[key] = offdiag.get(key, 0) + factor * op
    return h_diag, sphere, s_diag, list(offdiag.values())


def brute_force_ground_state(grid: MomentumGrid, mu: float, N: int,
                             R2: float, n_max: int,
                             penalty_weight: float = 1e6,
                             restarts: int = 8, seed: int = 0,
                             max_iter: int = 4000,
                             size_cap: int = DEFAULT_BASIS_CAP
                             ) -> BruteForceResult:
    """Penalized minimization of the constrained energy over a truncated
    two-species Fock space.

    Minimizes ``energy + penalty * (sphere - R2)^2 + penalty * sum |K-component|^2``
    over normalized amplitude vectors, with a geometric penalty ladder up to
    ``penalty_weight`` and ``restarts`` seeded random starts.  The reduction
    over restarts picks the smallest energy with the restart index as the
    deterministic tie-break.  For N > 1 the components decouple and the
    energy is convex in each component's share, so the symmetric split is
    exact: the N = 1 problem is solved at R2 / N and scaled.
    """
    if not np.isfinite(mu) or mu <= 0:
        raise ValueError(f"mu must be positive, got {mu}")
    if R2 < 0:
        raise ValueError(f"R2 must be nonnegative, got {R2}")
    if N > 1:
        sub = brute_force_ground_state(grid, mu, 1, R2 / N, n_max,
                                       penalty_weight, restarts, seed,
                                       max_iter, size_cap)
        return BruteForceResult(
            energy=N * sub.energy, state=sub.state,
            constraint_residual=N * sub.constraint_residual,
            offdiagonal_residual=N * sub.offdiagonal_residual,
            truncation_leak=sub.truncation_leak, converged=sub.converged)

    basis = enumerate_basis(grid.n_modes, n_max, species=2, grid=grid,
                            size_cap=size_cap)
    eps = dispersion(grid, mu).epsilon
    h_diag, sphere, s_diag, offdiag_ops = _pair_operators(
        basis, grid.weights, eps)
    sphere = csr_matrix(sphere)
    offdiag_ops = [csr_matrix(op) for op in offdiag_ops]
    dim = basis.dimension

    stages = sorted({min(penalty_weight, p)
                     for p in (penalty_weight * 1e-4,
                               penalty_weight * 1e-2, penalty_weight)
                     if p > 0})

    def split(x):
        return x[:dim] + 1j * x[dim:]

    def penalized(x, pw):
        psi = split(x)
        nrm = float(np.real(np.vdot(psi, psi)))
        if nrm < 1e-20:
            return 1e6, np.zeros_like(x)
        h_psi = h_diag * psi
        s_psi = sphere @ psi
        energy = float(np.real(np.vdot(psi, h_psi))) / nrm
        sval = float(np.real(np.vdot(psi, s_psi))) / nrm + float(
            np.real(np.vdot(psi, s_diag * psi))) / nrm
        s_psi = s_psi + s_diag * psi
        value = energy + pw * (sval - R2) ** 2
        grad_c = (h_psi - energy * psi) / nrm
        grad_c = grad_c + 2.0 * pw * (sval - R2) * (s_psi - sval * psi) / nrm
        for op in offdiag_ops:
            o_psi = op @ psi
            v = complex(np.vdot(psi, o_psi)) / nrm
            value += pw * abs(v) ** 2
            grad_c = grad_c + pw * (np.conj(v) * o_psi
                                    + v * (op.conj().T @ psi)
                                    - 2.0 * abs(v) ** 2 * psi) / nrm
        grad = np.concatenate([2.0 * grad_c.real, 2.0 * grad_c.imag])
        return value, grad

    sequences = np.random.SeedSequence(seed).spawn(max(restarts, 1))
    best = None
    for r, seq in enumerate(sequences):
        rng = np.random.default_rng(seq)
        x = rng.standard_normal(2 * dim)
        x /= np.linalg.norm(x)
        success = True
        for pw in stages:
            res = minimize(penalized, x, args=(pw,), jac=True,
                           method="L-BFGS-B",
                           options={"maxiter": max_iter,
                                    "maxfun": 4 * max_iter,
                                    "ftol": 1e-18, "gtol": 1e-12})
            x = res.x
            success = success and (res.status in (0, 2))
        value, _ = penalized(x, stages[-1])
        if best is None or (value, r) < (best[0], best[1]):
            best = (value, r, x, success)

    _, _, x, success = best
    psi = split(x)
    psi = psi / np.linalg.norm(psi)
    state = FockState(basis, psi)
    energy = float(np.real(np.vdot(psi, h_diag * psi)))
    sval = float(np.real(np.vdot(psi, sphere @ psi))
                 + np.real(np.vdot(psi, s_diag * psi)))
    off_res = max((abs(complex(np.vdot(psi, op @ psi)))
                   for op in offdiag_ops), default=0.0)
    return BruteForceResult(
        energy=energy, state=state,
        constraint_residual=abs(sval - R2),
        offdiagonal_residual=float(off_res),
        truncation_leak=state.top_sector_population(),
        converged=bool(success))
