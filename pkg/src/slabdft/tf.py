"""Thomas-Fermi model of a charged slab, reduced to the line.

Energy per unit surface:

    E_TF(rho) = c_tf int rho^{5/3} + (1/2) D1(rho - mu)

minimized over rho >= 0 with int rho = int mu = Z.  The minimizer solves the
Euler-Lagrange fixed point

    (5/3) c_tf rho^{2/3} = (lambda - phi)_+ ,   -phi'' = 4 pi (rho - mu),

with the Fermi level lambda fixed by the charge constraint.  The solver
iterates the fixed-point map with a golden-section line search on the mixing
parameter.  The line objective is the energy *change* along the segment,
assembled in difference form (exact quadratic for the Hartree part, expm1 +
log1p per node for the kinetic part); this keeps the search meaningful long
after plain energy differences have dropped below round-off, and makes the
recorded energy history non-increasing by construction.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve
from sklearn.base import BaseEstimator

from .analysis import C_TF_SPINLESS, sommerfeld_constants
from .grid import Grid, GridFunction, integrate
from .hartree import (
    MeanFieldPotential,
    hartree_energy,
    hartree_pairing,
    neutral_residual,
    potential,
)

__all__ = [
    "EnergyBreakdown",
    "TfIteration",
    "SolverError",
    "tf_density_from_potential",
    "tf_fermi_level",
    "tf_energy",
    "dirac_closed_form",
    "initial_density",
    "ThomasFermi",
]


class SolverError(RuntimeError):
    pass


@dataclass(frozen=True)
class EnergyBreakdown:
    """kinetic + tsallis + hartree = total; every component is nonnegative.

    For Thomas-Fermi, kinetic is c_tf int rho^{5/3} and tsallis is 0; for
    reduced Hartree-Fock, kinetic is (1/2) Tr(-Lap G) and tsallis is
    pi Tr(G^2).  hartree is (1/2) D1(rho - mu) in both models.
    """

    kinetic: float
    tsallis: float
    hartree: float

    @property
    def total(self) -> float:
        return self.kinetic + self.tsallis + self.hartree


@dataclass(frozen=True)
class TfIteration:
    energy: float
    fermi_level: float | None
    l1_change: float | None


def tf_density_from_potential(
    phi: MeanFieldPotential, fermi_level: float, c_tf: float
) -> GridFunction:
    """Euler-Lagrange density rho = ((3/(5 c_tf)) (lambda - phi)_+)^{3/2}."""
    pos = np.maximum(fermi_level - phi.values, 0.0)
    return GridFunction(phi.grid, (3.0 / (5.0 * c_tf) * pos) ** 1.5)


def tf_fermi_level(
    phi: MeanFieldPotential, z: float, c_tf: float, tol: float
) -> float:
    """Fermi level solving int rho(phi, lambda) = z by bracketed bisection.

    The charge map lambda -> int ((3/(5c))(lambda - phi)_+)^{3/2} is
    continuous, nondecreasing, and strictly increasing once positive, so the
    level is well defined.  `tol` is the absolute tolerance on the charge.
    """
    if not z > 0:
        raise ValueError(f"total charge must be positive, got {z}")
    if not tol > 0:
        raise ValueError(f"tolerance must be positive, got {tol}")
    v = phi.values
    h = phi.grid.spacing
    scale = 3.0 / (5.0 * c_tf)

    def charge(lam: float) -> float:
        rho = (scale * np.maximum(lam - v, 0.0)) ** 1.5
        return h * (rho.sum() - 0.5 * (rho[0] + rho[-1]))

    lo = float(v.min())  # charge(lo) == 0 < z
    width = 1.0
    for _ in range(200):
        hi = lo + width
        if charge(hi) >= z:
            break
        width *= 2.0
    else:
        raise SolverError("could not bracket the Fermi level after 200 doublings")
    for _ in range(500):
        mid = 0.5 * (lo + hi)
        c = charge(mid)
        if abs(c - z) <= tol:
            return mid
        if c < z:
            lo = mid
        else:
            hi = mid
    raise SolverError(f"Fermi-level bisection stalled; |charge - z| > {tol:.3e}")


def tf_energy(
    rho: GridFunction,
    mu: GridFunction,
    c_tf: float,
    neutrality_tol: float | None = None,
) -> EnergyBreakdown:
    """E_TF(rho) split into kinetic = c_tf int rho^{5/3} and
    hartree = (1/2) D1(rho - mu)."""
    kin = c_tf * integrate(GridFunction(rho.grid, rho.values ** (5.0 / 3.0)))
    res = neutral_residual(rho - mu, mu, neutrality_tol)
    return EnergyBreakdown(kinetic=kin, tsallis=0.0, hartree=0.5 * hartree_energy(res))


def dirac_closed_form(z: float, grid: Grid, c_tf: float = C_TF_SPINLESS) -> GridFunction:
    """Exact minimizer for the perfect charged plane mu = z * delta_0:

        rho(x) = c2 (|x| + alpha)^{-6},  alpha = (2 c2 / (5 z))^{1/5},

    with c2 the universal Sommerfeld tail constant for this c_tf.
    """
    if not z > 0:
        raise ValueError(f"charge must be positive, got {z}")
    _, c2 = sommerfeld_constants(c_tf)
    alpha = (2.0 * c2 / (5.0 * z)) ** 0.2
    return GridFunction(grid, c2 / (np.abs(grid.nodes) + alpha) ** 6)


def initial_density(mu: GridFunction) -> GridFunction:
    """Smoothed admissible seed: mu convolved with (1/2) e^{-|x|}, rescaled to
    the exact sampled charge."""
    grid = mu.grid
    h = grid.spacing
    m = grid.n - 1
    kernel = 0.5 * np.exp(-np.abs(np.arange(-m, m + 1) * h))
    vals = fftconvolve(mu.values, kernel, mode="same") * h
    np.clip(vals, 0.0, None, out=vals)
    rho = GridFunction(grid, vals)
    mass = integrate(rho)
    if not mass > 0:
        raise ValueError("charge profile vanishes on the grid")
    return rho * (integrate(mu) / mass)


def _golden_section(fun, evals: int) -> tuple[float, float]:
    """Minimize fun over [0, 1] with a fixed evaluation budget.

    Both endpoints are evaluated up front and the best sampled point wins, so
    the returned value never exceeds fun(0).
    """
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    cache: dict[float, float] = {}

    def f(t: float) -> float:
        if t not in cache:
            cache[t] = fun(t)
        return cache[t]

    f(0.0)
    f(1.0)
    lo, hi = 0.0, 1.0
    t1 = hi - invphi * (hi - lo)
    t2 = lo + invphi * (hi - lo)
    f1, f2 = f(t1), f(t2)
    while len(cache) < max(evals, 4):
        if f1 <= f2:
            hi, t2, f2 = t2, t1, f1
            t1 = hi - invphi * (hi - lo)
            f1 = f(t1)
        else:
            lo, t1, f1 = t1, t2, f2
            t2 = lo + invphi * (hi - lo)
            f2 = f(t2)
    t_best = min(cache, key=cache.get)
    return t_best, cache[t_best]


def _kinetic_difference(rho: np.ndarray, d: np.ndarray, t: float) -> np.ndarray:
    """Nodal values of (rho + t d)^{5/3} - rho^{5/3}, without cancellation."""
    out = np.empty_like(rho)
    pos = rho > 0.0
    u = t * d[pos] / rho[pos]
    # u >= -1 since rho + t d >= 0 along the segment
    with np.errstate(divide="ignore"):
        out[pos] = rho[pos] ** (5.0 / 3.0) * np.expm1(
            (5.0 / 3.0) * np.log1p(np.maximum(u, -1.0))
        )
    out[~pos] = np.maximum(t * d[~pos], 0.0) ** (5.0 / 3.0)
    return out


class ThomasFermi(BaseEstimator):
    """Self-consistent Thomas-Fermi solver with Fermi-level bisection and an
    energy line search on the density mixing parameter.

    Parameters
    ----------
    c_tf : Thomas-Fermi constant; default is the spinless 3-d value, which
        makes the model comparable with the spinless reduced Hartree-Fock one.
    max_iter : iteration cap; exceeding it leaves ``converged_`` False.
    energy_tol : relative energy-change tolerance; a step counts as converged
        when |E_{n+1} - E_n| < energy_tol * (1 + |E_{n+1}|).
    density_tol : L1 density-change tolerance, relative to the total charge.
    dichotomy_tol : charge tolerance of the Fermi-level bisection, relative
        to the total charge.
    neutrality_tol : charge-defect budget of the Hartree machinery, relative
        to the total charge.
    linesearch_evals : energy evaluations per golden-section line search.
    residual_tol : sup-norm Euler-Lagrange residual (relative to 1 + |lambda|)
        that a converged solution must also satisfy.

    Attributes (after fit)
    ----------------------
    density_, potential_, fermi_level_, energy_, history_, el_residual_,
    converged_, n_iter_
    """

    def __init__(
        self,
        c_tf: float = C_TF_SPINLESS,
        max_iter: int = 500,
        energy_tol: float = 1e-10,
        density_tol: float = 1e-8,
        dichotomy_tol: float = 1e-10,
        neutrality_tol: float = 1e-8,
        linesearch_evals: int = 20,
        residual_tol: float = 1e-6,
    ):
        self.c_tf = c_tf
        self.max_iter = max_iter
        self.energy_tol = energy_tol
        self.density_tol = density_tol
        self.dichotomy_tol = dichotomy_tol
        self.neutrality_tol = neutrality_tol
        self.linesearch_evals = linesearch_evals
        self.residual_tol = residual_tol

    def _el_residual(self, rho, phi, fermi_level):
        lhs = (5.0 / 3.0) * self.c_tf * rho.values ** (2.0 / 3.0)
        rhs = np.maximum(fermi_level - phi.values, 0.0)
        return float(np.max(np.abs(lhs - rhs)))

    def _consistent_triple(self, rho, mu, z, ntol):
        phi = potential(neutral_residual(rho - mu, mu, ntol))
        lam = tf_fermi_level(phi, z, self.c_tf, self.dichotomy_tol * z)
        return phi, lam, self._el_residual(rho, phi, lam)

    def fit(self, mu: GridFunction, y=None) -> "ThomasFermi":
        """Run the SCF iteration for the charge profile `mu` (a GridFunction)."""
        z = integrate(mu)
        if not z > 0:
            raise ValueError(f"total charge must be positive, got {z}")
        grid = mu.grid
        h = grid.spacing
        ntol = self.neutrality_tol * z + 1e-14

        rho = initial_density(mu)
        energy = tf_energy(rho, mu, self.c_tf, ntol).total
        history = [TfIteration(energy, None, None)]
        converged = False
        n_iter = 0

        for n_iter in range(1, self.max_iter + 1):
            res = neutral_residual(rho - mu, mu, ntol)
            phi = potential(res)
            lam = tf_fermi_level(phi, z, self.c_tf, self.dichotomy_tol * z)
            candidate = tf_density_from_potential(phi, lam, self.c_tf)
            # normalize away the dichotomy charge defect so the step direction
            # is exactly neutral and the line objective stays consistent
            candidate = candidate * (z / integrate(candidate))
            d = candidate.values - rho.values
            d_res = neutral_residual(GridFunction(grid, d), mu, ntol)
            slope_hartree = hartree_pairing(res, d_res)
            curv_hartree = hartree_energy(d_res)
            rho_vals = rho.values

            def energy_change(t: float) -> float:
                diff = _kinetic_difference(rho_vals, d, t)
                kin = self.c_tf * h * (diff.sum() - 0.5 * (diff[0] + diff[-1]))
                return kin + t * slope_hartree + 0.5 * t * t * curv_hartree

            t, de = _golden_section(energy_change, self.linesearch_evals)
            if de >= 0.0:
                # descent direction exhausted at this precision
                _, lam_f, resid = self._consistent_triple(rho, mu, z, ntol)
                converged = resid <= self.residual_tol * (1.0 + abs(lam_f))
                break

            rho = GridFunction(grid, rho_vals + t * d)
            energy += de
            l1 = t * integrate(abs(GridFunction(grid, d)))
            history.append(TfIteration(energy, lam, l1))

            if abs(de) < self.energy_tol * (1.0 + abs(energy)) and (
                l1 < self.density_tol * z
            ):
                _, lam_f, resid = self._consistent_triple(rho, mu, z, ntol)
                if resid <= 0.5 * self.residual_tol * (1.0 + abs(lam_f)):
                    converged = True
                    break

        phi_f, lam_f, resid = self._consistent_triple(rho, mu, z, ntol)
        self.density_ = rho
        self.potential_ = phi_f
        self.fermi_level_ = lam_f
        self.energy_ = tf_energy(rho, mu, self.c_tf, ntol)
        self.history_ = history
        self.el_residual_ = resid
        self.converged_ = converged
        self.n_iter_ = n_iter
        return self
