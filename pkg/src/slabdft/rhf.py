"""Reduced Hartree-Fock model of a charged slab.

The state is a positive trace-class operator G on the line with Tr(G) = Z,
stored as a low-rank set of weighted orthonormal orbitals.  Energy per unit
surface:

    E_rHF(G) = (1/2) Tr(-Lap G) + pi Tr(G^2) + (1/2) D1(rho_G - mu).

There is no Pauli constraint on G; the trace-square penalty takes its place,
and the weights may exceed 1.  The minimizer is the spectral fixed point

    G = (1/(2 pi)) (lambda - H)_+ ,   H = -(1/2) Lap + phi,

so each SCF step diagonalizes the tridiagonal H below an adaptive cutoff,
fills weights (lambda - eps_j)/(2 pi) with lambda solved exactly on the
discrete spectrum, and mixes with the previous state.  The energy along the
mixing segment is an exact quadratic in the mixing parameter, so the optimal
step is explicit and the energy history is non-increasing.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi, sqrt

import numpy as np
from scipy.linalg import eigh_tridiagonal, eigvalsh_tridiagonal
from sklearn.base import BaseEstimator

from .analysis import lieb_thirring_check
from .grid import Grid, GridFunction, integrate
from .hartree import MeanFieldPotential, neutral_residual, hartree_energy, \
    hartree_pairing, potential
from .tf import EnergyBreakdown, SolverError, initial_density

__all__ = [
    "ReducedState",
    "Hamiltonian",
    "InsufficientSpectrumError",
    "assemble_hamiltonian",
    "lowest_eigenpairs",
    "rhf_fermi_level",
    "reduced_state",
    "rhf_energy",
    "mix",
    "optimal_mixing_t",
    "RhfIteration",
    "ReducedHartreeFock",
]

# Weights at or below this are dropped when states are rebuilt; meaningful
# converged weights reach down to ~1e-11, well above the floor.
WEIGHT_PRUNE_TOL = 1e-14


class InsufficientSpectrumError(RuntimeError):
    """Not enough eigenvalues supplied to place the Fermi level."""


def _column_kinetics(orbitals: np.ndarray, h: float) -> np.ndarray:
    # (1/2) <phi, -Lap phi> per column, with jumps to the zero ghost nodes
    jumps = (np.diff(orbitals, axis=0) ** 2).sum(axis=0)
    return 0.5 / h * (orbitals[0] ** 2 + jumps + orbitals[-1] ** 2)


@dataclass(frozen=True, eq=False)
class ReducedState:
    """Low-rank positive operator G = sum_j g_j |phi_j><phi_j|.

    weights are strictly positive and descending; orbital columns are
    orthonormal under the uniform-weight inner product h * sum(f g).
    """

    grid: Grid
    weights: np.ndarray
    orbitals: np.ndarray

    def __post_init__(self):
        weights = np.asarray(self.weights, dtype=float)
        orbitals = np.asarray(self.orbitals, dtype=float)
        if orbitals.shape != (self.grid.n, weights.size):
            raise ValueError(
                f"orbitals shape {orbitals.shape} does not match "
                f"{weights.size} weights on a {self.grid.n}-node grid"
            )
        if np.any(weights <= 0):
            raise ValueError("weights must be strictly positive")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "orbitals", orbitals)

    @classmethod
    def empty(cls, grid: Grid) -> "ReducedState":
        return cls(grid, np.empty(0), np.empty((grid.n, 0)))

    @property
    def rank(self) -> int:
        return self.weights.size

    def trace(self) -> float:
        return float(self.weights.sum())

    def trace_square(self) -> float:
        # valid because the stored orbitals are orthonormal
        return float((self.weights ** 2).sum())

    def kinetic(self) -> float:
        """(1/2) Tr(-Lap G)."""
        if self.rank == 0:
            return 0.0
        return float(self.weights @ _column_kinetics(self.orbitals, self.grid.spacing))

    def density(self) -> GridFunction:
        """rho_G = sum_j g_j |phi_j|^2; integrates to the trace."""
        if self.rank == 0:
            return self.grid.zeros()
        return GridFunction(self.grid, (self.orbitals ** 2) @ self.weights)

    def max_weight(self) -> float:
        return float(self.weights[0]) if self.rank else 0.0

    def orthonormality_defect(self) -> float:
        """max |<phi_i, phi_j> - delta_ij| under the h-weighted inner product."""
        if self.rank == 0:
            return 0.0
        gram = self.grid.spacing * (self.orbitals.T @ self.orbitals)
        return float(np.max(np.abs(gram - np.eye(self.rank))))


@dataclass(frozen=True, eq=False)
class Hamiltonian:
    """Symmetric tridiagonal -(1/2) Lap + diag(phi) on the grid."""

    grid: Grid
    diagonal: np.ndarray
    off_diagonal: np.ndarray

    def matvec(self, columns: np.ndarray) -> np.ndarray:
        out = self.diagonal[:, None] * columns if columns.ndim == 2 else self.diagonal * columns
        if columns.ndim == 1:
            out = out.copy()
            out[:-1] += self.off_diagonal * columns[1:]
            out[1:] += self.off_diagonal * columns[:-1]
        else:
            out[:-1] += self.off_diagonal[:, None] * columns[1:]
            out[1:] += self.off_diagonal[:, None] * columns[:-1]
        return out


def assemble_hamiltonian(phi: MeanFieldPotential) -> Hamiltonian:
    """Tridiagonal H with diagonal 1/h^2 + phi(x_i) and off-diagonal -1/(2 h^2)."""
    grid = phi.grid
    h = grid.spacing
    diag = 1.0 / h ** 2 + phi.values
    off = np.full(grid.n - 1, -0.5 / h ** 2)
    return Hamiltonian(grid, diag, off)


def lowest_eigenpairs(hamiltonian: Hamiltonian, cutoff: float):
    """All eigenpairs with eps < cutoff, by Sturm-sequence bisection plus
    inverse iteration.  Returns (eps ascending, orbital columns) with the
    orbitals orthonormal under the h-weighted inner product; both arrays are
    empty when no eigenvalue lies below the cutoff.
    """
    grid = hamiltonian.grid
    lower = float(hamiltonian.diagonal.min()) - 2.0 * float(
        np.abs(hamiltonian.off_diagonal).max()
    ) - 1.0
    if not np.isfinite(cutoff):
        raise ValueError("cutoff must be finite")
    if cutoff <= lower:
        return np.empty(0), np.empty((grid.n, 0))
    eps, vecs = eigh_tridiagonal(
        hamiltonian.diagonal,
        hamiltonian.off_diagonal,
        select="v",
        select_range=(lower, cutoff),
    )
    keep = eps < cutoff
    return eps[keep], vecs[:, keep] / sqrt(grid.spacing)


def rhf_fermi_level(spectrum, z: float) -> float:
    """Exact Fermi level on a discrete spectrum: the unique lambda with

        N(lambda) = sum_j (lambda - eps_j)_+ / (2 pi) = z.

    N is piecewise linear and strictly increasing above the lowest
    eigenvalue, so with eps sorted and k occupied states,
    lambda = (2 pi z + sum_{j<=k} eps_j) / k for the consistent k.
    Raises InsufficientSpectrumError when the supplied spectrum cannot
    absorb the charge (callers should raise their eigenpair cutoff).
    """
    if not z > 0:
        raise ValueError(f"total charge must be positive, got {z}")
    eps = np.sort(np.asarray(spectrum, dtype=float))
    if eps.size == 0:
        raise InsufficientSpectrumError("empty spectrum")
    prefix = np.cumsum(eps)
    for k in range(1, eps.size + 1):
        lam = (2.0 * pi * z + prefix[k - 1]) / k
        if lam >= eps[k - 1] and (k == eps.size or lam <= eps[k]):
            return float(lam)
    raise InsufficientSpectrumError(
        "no consistent occupation; spectrum is not sorted or too short"
    )


def reduced_state(
    hamiltonian: Hamiltonian,
    fermi_level: float,
    prune_tol: float = WEIGHT_PRUNE_TOL,
) -> ReducedState:
    """Spectral construction G = (1/(2 pi)) (fermi_level - H)_+."""
    eps, vecs = lowest_eigenpairs(hamiltonian, fermi_level)
    weights = (fermi_level - eps) / (2.0 * pi)
    keep = weights > prune_tol
    # eps ascending makes the kept weights descending already
    return ReducedState(hamiltonian.grid, weights[keep], vecs[:, keep])


def rhf_energy(
    state: ReducedState,
    mu: GridFunction,
    neutrality_tol: float | None = None,
) -> EnergyBreakdown:
    """E_rHF split into kinetic = (1/2) Tr(-Lap G), tsallis = pi Tr(G^2),
    hartree = (1/2) D1(rho_G - mu)."""
    res = neutral_residual(state.density() - mu, mu, neutrality_tol)
    return EnergyBreakdown(
        kinetic=state.kinetic(),
        tsallis=pi * state.trace_square(),
        hartree=0.5 * hartree_energy(res),
    )


def mix(
    a: ReducedState,
    b: ReducedState,
    t: float,
    prune_tol: float = WEIGHT_PRUNE_TOL,
) -> ReducedState:
    """Convex combination (1 - t) G_a + t G_b as a fresh low-rank state.

    The weighted orbital factors of both states are stacked and the combined
    operator is re-diagonalized on their span via an SVD of the factor
    matrix, which keeps the new orbitals orthonormal to machine precision
    even for the smallest retained weights.  Weights <= prune_tol are
    dropped.
    """
    if a.grid != b.grid:
        raise ValueError("states live on different grids")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"mixing parameter must lie in [0, 1], got {t}")
    grid = a.grid
    blocks = []
    for state, coeff in ((a, 1.0 - t), (b, t)):
        if coeff > 0.0 and state.rank:
            blocks.append(state.orbitals * np.sqrt(coeff * state.weights))
    if not blocks:
        return ReducedState.empty(grid)
    factors = np.hstack(blocks) * sqrt(grid.spacing)
    basis, singular, _ = np.linalg.svd(factors, full_matrices=False)
    weights = singular ** 2
    keep = weights > prune_tol
    return ReducedState(
        grid, weights[keep], basis[:, keep] / sqrt(grid.spacing)
    )


def _cross_trace(a: ReducedState, b: ReducedState) -> float:
    """Tr(G_a G_b) = sum_ij g_i h_j <phi_i, psi_j>^2."""
    if a.rank == 0 or b.rank == 0:
        return 0.0
    overlaps = a.grid.spacing * (a.orbitals.T @ b.orbitals)
    return float(a.weights @ (overlaps ** 2) @ b.weights)


def _mixing_quadratic(
    current: ReducedState,
    candidate: ReducedState,
    mu: GridFunction,
    neutrality_tol: float | None = None,
) -> tuple[float, float]:
    """Slope and curvature of the exact quadratic
    t -> E_rHF((1-t) current + t candidate) - E_rHF(current).

    The kinetic and trace-square parts are evaluated on the joint orbital
    subspace as traces against the small difference matrix B - A, never as
    differences of large traces; near the fixed point those would cancel to
    round-off and stall the iteration long before the Euler-Lagrange residual
    target is reached.
    """
    if current.grid != candidate.grid:
        raise ValueError("states live on different grids")
    grid = current.grid
    h = grid.spacing
    sqh = sqrt(h)
    blocks = []
    for state in (current, candidate):
        if state.rank:
            blocks.append(sqh * state.orbitals * np.sqrt(state.weights))
    if not blocks:
        return 0.0, 0.0
    stacked = np.hstack(blocks)
    basis, _ = np.linalg.qr(stacked)
    r_a = current.rank
    coeff_a = basis.T @ stacked[:, :r_a]
    coeff_b = basis.T @ stacked[:, r_a:]
    diff = coeff_b @ coeff_b.T - coeff_a @ coeff_a.T  # B - A on the joint span
    a_small = coeff_a @ coeff_a.T

    # kinetic couplings of the joint basis, jumps to the zero ghost nodes included
    vals = basis / sqh
    jumps = np.vstack([vals[:1], np.diff(vals, axis=0), vals[-1:]])
    kin_small = (0.5 / h) * (jumps.T @ jumps)

    rho_a, rho_b = current.density(), candidate.density()
    f_a = neutral_residual(rho_a - mu, mu, neutrality_tol)
    d = neutral_residual(rho_b - rho_a, mu, neutrality_tol)
    beta = (
        float(np.sum(kin_small * diff))
        + 2.0 * pi * float(np.sum(a_small * diff))
        + hartree_pairing(f_a, d)
    )
    q = pi * float(np.sum(diff * diff)) + 0.5 * hartree_energy(d)
    return beta, q


def _best_step(beta: float, q: float) -> float:
    if q <= 0.0:
        return 1.0 if beta < 0.0 else 0.0
    return float(np.clip(-beta / (2.0 * q), 0.0, 1.0))


def optimal_mixing_t(
    current: ReducedState,
    candidate: ReducedState,
    mu: GridFunction,
    neutrality_tol: float | None = None,
) -> float:
    """Exact minimizer in [0, 1] of t -> E_rHF((1-t) current + t candidate).

    The map is the quadratic E(0) + beta t + q t^2 with curvature
    q = pi Tr((candidate - current)^2) + (1/2) D1(rho_cand - rho_cur) >= 0,
    so the best step is -beta/(2q) clamped to [0, 1]; a flat segment (q = 0)
    returns 1 when the slope is negative and 0 otherwise.
    """
    beta, q = _mixing_quadratic(current, candidate, mu, neutrality_tol)
    return _best_step(beta, q)


@dataclass(frozen=True)
class RhfIteration:
    energy: float
    fermi_level: float | None
    l1_change: float | None
    max_weight: float
    rank: int
    lt_lhs: float
    lt_rhs: float
    lt_holds: bool


class ReducedHartreeFock(BaseEstimator):
    """Self-consistent reduced Hartree-Fock solver.

    Parameters mirror :class:`slabdft.tf.ThomasFermi` where they apply;
    `dichotomy_tol` is absent because the Fermi level is solved exactly on
    the discrete spectrum.  `prune_tol` is the weight floor used when states
    are rebuilt.

    Attributes (after fit)
    ----------------------
    state_, density_, potential_, fermi_level_, weights_, orbital_energies_,
    energy_, history_, el_residual_, rank_, spectral_gap_, converged_,
    n_iter_
    """

    def __init__(
        self,
        max_iter: int = 500,
        energy_tol: float = 1e-10,
        density_tol: float = 1e-8,
        neutrality_tol: float = 1e-8,
        prune_tol: float = WEIGHT_PRUNE_TOL,
        residual_tol: float = 1e-6,
    ):
        self.max_iter = max_iter
        self.energy_tol = energy_tol
        self.density_tol = density_tol
        self.neutrality_tol = neutrality_tol
        self.prune_tol = prune_tol
        self.residual_tol = residual_tol

    def _spectrum_and_fermi(self, hamiltonian, z, fermi_prev, max_weight_prev):
        if fermi_prev is None:
            eps0 = float(
                eigvalsh_tridiagonal(
                    hamiltonian.diagonal,
                    hamiltonian.off_diagonal,
                    select="i",
                    select_range=(0, 0),
                )[0]
            )
            cutoff = eps0 + 2.0 * pi * z + 1.0
        else:
            cutoff = fermi_prev + 4.0 * pi * max_weight_prev + 0.5
        for _ in range(60):
            eps, vecs = lowest_eigenpairs(hamiltonian, cutoff)
            if eps.size:
                lam = rhf_fermi_level(eps, z)
                # a truncated spectrum can only overestimate lambda, so
                # lam <= cutoff certifies that no state below lam is missing
                if lam <= cutoff:
                    return eps, vecs, lam
                cutoff = lam + 4.0 * pi * max(max_weight_prev, 1e-2) + 0.5
            else:
                cutoff += max(1.0, 2.0 * pi * z)
        raise SolverError("eigenpair cutoff did not stabilize after 60 raises")

    def _rayleigh(self, hamiltonian, state):
        hv = hamiltonian.matvec(state.orbitals)
        return state.grid.spacing * np.einsum("ij,ij->j", state.orbitals, hv)

    def _consistent_report(self, state, mu, z, ntol):
        res = neutral_residual(state.density() - mu, mu, ntol)
        phi = potential(res)
        hamiltonian = assemble_hamiltonian(phi)
        eps_hat = self._rayleigh(hamiltonian, state)
        lam = rhf_fermi_level(eps_hat, z)
        el = float(np.max(np.abs(2.0 * pi * state.weights - (lam - eps_hat))))
        return phi, eps_hat, lam, el

    def fit(self, mu: GridFunction, y=None) -> "ReducedHartreeFock":
        """Run the SCF iteration for the charge profile `mu` (a GridFunction)."""
        z = integrate(mu)
        if not z > 0:
            raise ValueError(f"total charge must be positive, got {z}")
        grid = mu.grid
        # near-Fermi orbitals carry O(h phi(a)^2) trapezoidal mass at the box
        # ends, so the solver grants ten times the base charge-defect budget
        ntol = 10.0 * self.neutrality_tol * z + 1e-14

        # rank-1 seed carrying the same smoothed density as the TF solver
        rho0 = initial_density(mu)
        seed = np.sqrt(rho0.values / z)
        seed /= sqrt(integrate(GridFunction(grid, seed ** 2)))
        state = ReducedState(grid, np.array([z]), seed[:, None])

        energy = rhf_energy(state, mu, ntol).total
        lt0 = lieb_thirring_check(state)
        history = [
            RhfIteration(
                energy, None, None, state.max_weight(), state.rank,
                lt0.lhs, lt0.rhs, lt0.holds,
            )
        ]
        converged = False
        n_iter = 0
        fermi = None

        for n_iter in range(1, self.max_iter + 1):
            rho = state.density()
            phi = potential(neutral_residual(rho - mu, mu, ntol))
            hamiltonian = assemble_hamiltonian(phi)
            eps, vecs, lam = self._spectrum_and_fermi(
                hamiltonian, z, fermi, state.max_weight()
            )
            weights = (lam - eps) / (2.0 * pi)
            keep = weights > self.prune_tol
            candidate = ReducedState(grid, weights[keep], vecs[:, keep])
            fermi = lam

            beta, q = _mixing_quadratic(state, candidate, mu, ntol)
            t = _best_step(beta, q)
            de = beta * t + q * t * t  # <= 0 for the chosen step
            if t == 0.0:
                # slope is nonnegative at this precision: no descent left
                _, _, lam_f, el = self._consistent_report(state, mu, z, ntol)
                converged = el <= self.residual_tol * (1.0 + abs(lam_f))
                break

            new_state = mix(state, candidate, t, self.prune_tol)
            l1 = integrate(abs(new_state.density() - rho))
            state = new_state
            energy += de

            lt = lieb_thirring_check(state)
            history.append(
                RhfIteration(
                    energy, lam, l1, state.max_weight(), state.rank,
                    lt.lhs, lt.rhs, lt.holds,
                )
            )

            if abs(de) < self.energy_tol * (1.0 + abs(energy)) and (
                l1 < self.density_tol * z
            ):
                _, _, lam_f, el = self._consistent_report(state, mu, z, ntol)
                if el <= 0.5 * self.residual_tol * (1.0 + abs(lam_f)):
                    converged = True
                    break

        phi_f, eps_hat, lam_f, el = self._consistent_report(state, mu, z, ntol)
        self.state_ = state
        self.density_ = state.density()
        self.potential_ = phi_f
        self.fermi_level_ = lam_f
        self.weights_ = state.weights
        self.orbital_energies_ = eps_hat
        self.energy_ = rhf_energy(state, mu, ntol)
        self.history_ = history
        self.el_residual_ = el
        self.rank_ = state.rank
        self.spectral_gap_ = float(lam_f - eps_hat.max()) if state.rank else float("nan")
        self.converged_ = converged
        self.n_iter_ = n_iter
        return self
