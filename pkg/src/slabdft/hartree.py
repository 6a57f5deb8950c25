"""One-dimensional regularized Hartree machinery.

For a neutral residual f = rho - mu the cumulative charge is
W_f(x) = int_{-inf}^x f, the interaction energy is D1(f) = 4 pi int W_f^2,
and the mean-field potential is Phi_f(x) = -4 pi int_0^x W_f, which solves
-Phi'' = 4 pi f with Phi' -> 0 at +-inf and the gauge Phi(0) = 0.

D1 is only defined on neutral functions.  Inputs are allowed a small charge
defect (bisection on the Fermi level never hits the constraint exactly); the
defect is absorbed by subtracting a matching multiple of a nonnegative
reference profile, which keeps W exactly zero at the right box end.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import pi

import numpy as np

from .grid import Grid, GridFunction, integrate

__all__ = [
    "NeutralityError",
    "NeutralResidual",
    "MeanFieldPotential",
    "neutral_residual",
    "cumulative",
    "potential",
    "hartree_energy",
    "hartree_pairing",
    "dipole_moment",
]

# Default relative neutrality budget, in units of the reference charge.
NEUTRALITY_RTOL = 1e-8


class NeutralityError(ValueError):
    """Residual carries more charge than the neutrality tolerance allows."""


@dataclass(frozen=True, eq=False)
class NeutralResidual:
    """A residual f (typically rho - mu) together with its charge defect and
    the reference profile used to project the defect away."""

    f: GridFunction
    reference: GridFunction
    charge_defect: float
    tol: float

    def projected_values(self) -> np.ndarray:
        """Nodal values of f with the charge defect subtracted along the
        normalized reference; raises if the defect exceeds the tolerance."""
        if abs(self.charge_defect) > self.tol:
            raise NeutralityError(
                f"charge defect {self.charge_defect:.3e} exceeds neutrality "
                f"tolerance {self.tol:.3e}"
            )
        ref_mass = integrate(self.reference)
        if self.charge_defect != 0.0 and ref_mass > 0.0:
            return self.f.values - (self.charge_defect / ref_mass) * self.reference.values
        return self.f.values


def neutral_residual(
    f: GridFunction, reference: GridFunction, tol: float | None = None
) -> NeutralResidual:
    """Package a residual for the Hartree operations.

    `reference` is a nonnegative profile (normally mu) whose shape carries the
    projection of any tiny charge defect.  The default tolerance is
    1e-8 * int(reference) plus a round-off floor.
    """
    f._check_same_grid(reference)
    if tol is None:
        tol = NEUTRALITY_RTOL * abs(integrate(reference)) + 1e-14
    return NeutralResidual(f, reference, integrate(f), tol)


@dataclass(frozen=True, eq=False)
class MeanFieldPotential:
    """Potential of a neutral residual, gauged so that phi(0) = 0.

    `left_limit` / `right_limit` are the values at the box ends, standing in
    for the limits at -inf / +inf; residual tails decay fast enough that the
    truncation error is O(a^-4).
    """

    phi: GridFunction
    left_limit: float
    right_limit: float
    fermi_gauge: str = "phi(0)=0"

    @property
    def grid(self) -> Grid:
        return self.phi.grid

    @property
    def values(self) -> np.ndarray:
        return self.phi.values


def _cumulative_trapezoid(values: np.ndarray, h: float) -> np.ndarray:
    out = np.empty_like(values)
    out[0] = 0.0
    np.cumsum((values[1:] + values[:-1]) * (h / 2), out=out[1:])
    return out


def cumulative(f: GridFunction) -> GridFunction:
    """Cumulative charge W(x_i) = int_{-a}^{x_i} f by running trapezoid; W(-a) = 0."""
    return GridFunction(f.grid, _cumulative_trapezoid(f.values, f.grid.spacing))


def potential(residual: NeutralResidual) -> MeanFieldPotential:
    """Mean-field potential Phi(x) = -4 pi int_0^x W(y) dy.

    The inner cumulative runs from the left end, the outer one is re-based at
    the center node so that Phi(0) = 0 exactly.  The discrete second
    difference of Phi reproduces -4 pi f at interior nodes to O(h^2).
    """
    grid = residual.f.grid
    h = grid.spacing
    w = _cumulative_trapezoid(residual.projected_values(), h)
    c = _cumulative_trapezoid(w, h)
    phi = -4.0 * pi * (c - c[grid.center_index])
    return MeanFieldPotential(GridFunction(grid, phi), float(phi[0]), float(phi[-1]))


def hartree_energy(residual: NeutralResidual) -> float:
    """D1(f) = 4 pi int W_f^2 >= 0."""
    grid = residual.f.grid
    w = _cumulative_trapezoid(residual.projected_values(), grid.spacing)
    return 4.0 * pi * integrate(GridFunction(grid, w * w))


def hartree_pairing(a: NeutralResidual, b: NeutralResidual) -> float:
    """Polarization of the D1 quadratic form: 4 pi int W_a W_b."""
    a.f._check_same_grid(b.f)
    h = a.f.grid.spacing
    wa = _cumulative_trapezoid(a.projected_values(), h)
    wb = _cumulative_trapezoid(b.projected_values(), h)
    return 4.0 * pi * integrate(GridFunction(a.f.grid, wa * wb))


def dipole_moment(f: GridFunction) -> float:
    """4 pi int x f(x) dx.

    For a neutral residual this equals the difference of the potential limits
    at +inf and -inf.
    """
    x = GridFunction(f.grid, f.grid.nodes)
    return 4.0 * pi * integrate(x * f)
