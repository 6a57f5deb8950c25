"""Post-processing: Thomas-Fermi constants, Sommerfeld tail fits, screening
diagnostics, the semiclassical kinetic inequality, and density comparisons."""
from __future__ import annotations

from dataclasses import dataclass
from math import gamma, pi

import numpy as np

from .grid import GridFunction, integrate

__all__ = [
    "tf_constant",
    "sommerfeld_constants",
    "C_TF_SPINLESS",
    "C_TF_SPINFUL",
    "SommerfeldFit",
    "fit_tail",
    "screening_defect",
    "potential_limits",
    "LiebThirringCheck",
    "lieb_thirring_check",
    "ComparisonReport",
    "compare",
]


def _sphere_area(s: int) -> float:
    # |S^{s-1}|: 2, 2 pi, 4 pi, 2 pi^2, ...
    return 2.0 * pi ** (s / 2) / gamma(s / 2)


def tf_constant(s: int) -> float:
    """Spinless Thomas-Fermi constant in s dimensions:
    s/(s+2) * (s/|S^{s-1}|)^(2/s) * 2 pi^2.

    tf_constant(2) == pi, which is the coefficient of the trace-square
    penalty in the reduced Hartree-Fock energy; tf_constant(3) is the
    coefficient of int rho^{5/3}.
    """
    s = int(s)
    if s < 1:
        raise ValueError(f"dimension must be a positive integer, got {s}")
    return s / (s + 2) * (s / _sphere_area(s)) ** (2.0 / s) * 2.0 * pi ** 2


C_TF_SPINLESS = tf_constant(3)  # 3^{5/3} pi^{4/3} / (2^{1/3} 5)
C_TF_SPINFUL = 0.3 * (3.0 * pi ** 2) ** (2.0 / 3.0)


def sommerfeld_constants(c_tf: float) -> tuple[float, float]:
    """Universal tail constants (c1, c2) for a compactly supported source:
    far from the slab, lambda - phi = c1/(x - x0)^4 and rho = c2/(x - x0)^6.

    c1 = 5^5 c_tf^3 / (27 pi^2) and c2 = 5 c1 / pi; both follow from the
    free-space Thomas-Fermi ODE u'' = 4 pi (3/(5 c_tf))^{3/2} u^{3/2} and are
    independent of the total charge.
    """
    if not c_tf > 0:
        raise ValueError(f"c_tf must be positive, got {c_tf}")
    c1 = 5 ** 5 * c_tf ** 3 / (27.0 * pi ** 2)
    return c1, 5.0 * c1 / pi


@dataclass(frozen=True)
class SommerfeldFit:
    """Least-squares recovery of rho ~ c/(x - x0)^6 over a window.

    The fit is linear in the variable y = rho^{-1/6}; `rms_residual` is the
    root-mean-square *relative* misfit of that linearized model,
    sqrt(mean(((y - fit)/fit)^2)), which makes it invariant under rescaling
    of the density.
    """

    side: str
    window: tuple[float, float]
    c_est: float
    x0_est: float
    rms_residual: float


def fit_tail(rho: GridFunction, window: tuple[float, float], side: str) -> SommerfeldFit:
    """Fit the sextic-decay tail model on `window`; rho must be positive there."""
    if side not in ("left", "right"):
        raise ValueError(f"side must be 'left' or 'right', got {side!r}")
    x1, x2 = window
    if not x1 < x2:
        raise ValueError(f"window needs x1 < x2, got {window}")
    x = rho.grid.nodes
    mask = (x >= x1) & (x <= x2)
    if mask.sum() < 3:
        raise ValueError(f"window {window} covers fewer than 3 nodes")
    vals = rho.values[mask]
    if np.any(vals <= 0):
        raise ValueError("density must be positive on the fit window")
    y = vals ** (-1.0 / 6.0)
    slope, intercept = np.polyfit(x[mask], y, 1)
    if side == "right":
        # y = c^{-1/6} (x - x0), slope > 0
        p = slope
        x0 = -intercept / slope
    else:
        # y = c^{-1/6} (x0 - x), slope < 0
        p = -slope
        x0 = intercept / (-slope)
    if p <= 0:
        raise ValueError(f"tail on window {window} does not decay on side {side!r}")
    fitted = slope * x[mask] + intercept
    rms = float(np.sqrt(np.mean(((y - fitted) / fitted) ** 2)))
    return SommerfeldFit(side, (float(x1), float(x2)), float(p ** -6.0), float(x0), rms)


def screening_defect(rho: GridFunction, mu: GridFunction) -> float:
    """Total dipolar moment int x (rho - mu) dx.

    Vanishes for the exact Thomas-Fermi solution on the line; on a finite box
    it is a truncation artifact, and for reduced Hartree-Fock it is measured
    rather than asserted.
    """
    rho._check_same_grid(mu)
    x = GridFunction(rho.grid, rho.grid.nodes)
    return integrate(x * (rho - mu))


def potential_limits(rho: GridFunction, mu: GridFunction) -> tuple[float, float]:
    """Half-line moments (+-) 4 pi int_{R^-+} x (rho - mu): the limits of the
    mean-field potential at -inf and +inf."""
    rho._check_same_grid(mu)
    grid = rho.grid
    h = grid.spacing
    mid = grid.center_index
    g = grid.nodes * (rho.values - mu.values)
    left = g[: mid + 1]
    right = g[mid:]
    left_int = h * (left.sum() - 0.5 * (left[0] + left[-1]))
    right_int = h * (right.sum() - 0.5 * (right[0] + right[-1]))
    return -4.0 * pi * left_int, 4.0 * pi * right_int


@dataclass(frozen=True)
class LiebThirringCheck:
    lhs: float
    rhs: float
    holds: bool
    ratio: float


def lieb_thirring_check(state) -> LiebThirringCheck:
    """Semiclassical kinetic inequality for a reduced low-rank state:

        (1/2) Tr(-Lap G) + pi Tr(G^2)  >=  c_TF(3) int rho_G^{5/3}.

    `state` is any object with kinetic(), trace_square() and density()
    (see :class:`slabdft.rhf.ReducedState`).
    """
    lhs = state.kinetic() + pi * state.trace_square()
    rho = state.density()
    rhs = C_TF_SPINLESS * integrate(
        GridFunction(rho.grid, rho.values ** (5.0 / 3.0))
    )
    holds = lhs >= rhs - 1e-10 * abs(lhs)
    ratio = rhs / lhs if lhs > 0 else 0.0
    return LiebThirringCheck(float(lhs), float(rhs), bool(holds), float(ratio))


@dataclass(frozen=True)
class ComparisonReport:
    """Distance between two density/potential pairs on the same grid.

    l1_rel        : ||rho_a - rho_b||_L1 / Z, with Z the charge of rho_b
    linf_rel      : max |rho_a - rho_b| / max rho_b
    potential_gap : max |phi_a - phi_b - offset| after removing the median
                    offset (both potentials share the gauge phi(0) = 0 but may
                    differ by a small constant)
    """

    l1_rel: float
    linf_rel: float
    potential_gap: float


def compare(
    rho_a: GridFunction,
    rho_b: GridFunction,
    phi_a: GridFunction,
    phi_b: GridFunction,
) -> ComparisonReport:
    """Compare densities and potentials, with rho_b as the reference."""
    rho_a._check_same_grid(rho_b)
    phi_a._check_same_grid(phi_b)
    z = integrate(rho_b)
    diff = rho_a - rho_b
    l1_rel = integrate(abs(diff)) / z
    linf_rel = float(np.max(np.abs(diff.values)) / np.max(rho_b.values))
    dphi = phi_a.values - phi_b.values
    gap = float(np.max(np.abs(dphi - np.median(dphi))))
    return ComparisonReport(float(l1_rel), linf_rel, gap)
