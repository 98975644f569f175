"""Discretized mass shells and restricted inverse Fourier transforms.

A shell is a cubic momentum lattice carrying quadrature weights for the
invariant measure of its kind (paraboloid, hyperboloid or cone); shell
functions are transformed to fixed-time slices with the plane-wave kernel
exp(i(p.x - e_p t)).  Isometry-defect probes, two-particle invariant-mass
statistics and spherical-channel decompositions operate on top.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "MassShell",
    "ShellFunction",
    "SliceGrid",
    "SpectrumStats",
    "AngularReport",
    "MassZeroForMassiveKindError",
    "EmptyLatticeError",
    "IncompatibleLatticesError",
    "InsufficientSphereSamplingError",
    "make_shell",
    "reciprocal_slice",
    "restricted_inverse_fourier",
    "shell_norm_sq",
    "slice_norm_sq",
    "isometry_defect",
    "gaussian_family",
    "two_particle_mass_spectrum",
    "lorentz_boost",
    "pair_invariant_mass",
    "angular_decomposition",
    "channel_rank",
    "spherical_harmonic",
]

SHELL_KINDS = ("galilean", "relativistic", "massless")


class MassZeroForMassiveKindError(ValueError):
    pass


class EmptyLatticeError(ValueError):
    pass


class IncompatibleLatticesError(ValueError):
    pass


class InsufficientSphereSamplingError(ValueError):
    pass


# ---------------------------------------------------------------------------
# shells


def _cubic_axis(n: int, spacing: float) -> np.ndarray:
    return (np.arange(n) - n // 2) * spacing


@dataclass(frozen=True)
class MassShell:
    kind: str
    mass: float
    points: np.ndarray            # (N, 3)
    weights: np.ndarray           # (N,)
    energies: np.ndarray          # (N,)
    points_per_axis: int
    spacing: float
    cubic_complete: bool          # full n^3 lattice in row-major axis order
    notes: Tuple[str, ...] = field(default=())


def _energies(kind: str, mass: float, points: np.ndarray) -> np.ndarray:
    p_sq = np.sum(points ** 2, axis=1)
    if kind == "galilean":
        return p_sq / (2.0 * mass)
    if kind == "relativistic":
        return np.sqrt(p_sq + mass ** 2)
    return np.sqrt(p_sq)


def make_shell(kind: str, mass: float, points_per_axis: int,
               spacing: float) -> MassShell:
    """Cubic momentum lattice with the quadrature weights of its measure.

    Weights are dp^3 for the paraboloid and dp^3/(2 e_p) for the mass
    hyperboloid and the light cone; the cone drops the singular origin.
    """
    if kind not in SHELL_KINDS:
        raise ValueError(f"unknown shell kind {kind!r}")
    if points_per_axis < 1:
        raise EmptyLatticeError("need at least one lattice point per axis")
    if spacing <= 0:
        raise ValueError("lattice spacing must be positive")
    if kind != "massless" and mass <= 0:
        raise MassZeroForMassiveKindError(
            f"kind {kind!r} requires a positive mass, got {mass}")
    axis = _cubic_axis(points_per_axis, spacing)
    grids = np.meshgrid(axis, axis, axis, indexing="ij")
    points = np.stack([g.ravel() for g in grids], axis=1)
    notes: Tuple[str, ...] = ()
    complete = True
    if kind == "massless":
        keep = np.linalg.norm(points, axis=1) > 0
        if not np.all(keep):
            notes = ("dropped p = 0 (singular measure point)",)
            warnings.warn("massless shell: dropping the p = 0 lattice point")
            points = points[keep]
            complete = False
    energies = _energies(kind, mass, points)
    cell = spacing ** 3
    if kind == "galilean":
        weights = np.full(len(points), cell)
    else:
        weights = cell / (2.0 * energies)
    weights.setflags(write=False)
    points.setflags(write=False)
    energies.setflags(write=False)
    return MassShell(kind=kind, mass=float(mass), points=points,
                     weights=weights, energies=energies,
                     points_per_axis=points_per_axis, spacing=float(spacing),
                     cubic_complete=complete, notes=notes)


@dataclass(frozen=True)
class ShellFunction:
    shell: MassShell
    values: np.ndarray

    def __post_init__(self):
        if self.values.shape != (len(self.shell.points),):
            raise ValueError("one value per shell point required")


def shell_norm_sq(f: ShellFunction) -> float:
    return float(np.sum(f.shell.weights * np.abs(f.values) ** 2))


# ---------------------------------------------------------------------------
# slices and the restricted transform


@dataclass(frozen=True)
class SliceGrid:
    t: float
    points_per_axis: int
    spacing: float

    def axis(self) -> np.ndarray:
        return _cubic_axis(self.points_per_axis, self.spacing)

    def points(self) -> np.ndarray:
        a = self.axis()
        grids = np.meshgrid(a, a, a, indexing="ij")
        return np.stack([g.ravel() for g in grids], axis=1)


def reciprocal_slice(shell: MassShell, t: float) -> SliceGrid:
    """Slice lattice exactly reciprocal to the shell lattice."""
    n = shell.points_per_axis
    return SliceGrid(t=float(t), points_per_axis=n,
                     spacing=2.0 * np.pi / (n * shell.spacing))


def _check_reciprocal(shell: MassShell, grid: SliceGrid, tol: float = 1e-9):
    n = shell.points_per_axis
    if grid.points_per_axis != n or \
            abs(grid.spacing * shell.spacing * n - 2.0 * np.pi) > tol:
        raise IncompatibleLatticesError(
            "slice lattice is not reciprocal to the shell lattice")


def restricted_inverse_fourier(f: ShellFunction, grid: SliceGrid) -> np.ndarray:
    """Quadrature sum (2 pi)^{-3/2} sum_i w_i psi(p_i) exp(i(p_i.x - e_i t)).

    Returns slice values in row-major axis order.  Complete cubic shells go
    through a separable per-axis evaluation; shells with dropped points fall
    back to blocked direct summation.
    """
    shell = f.shell
    g = shell.weights * f.values * np.exp(-1j * shell.energies * grid.t)
    norm = (2.0 * np.pi) ** -1.5
    x_axis = grid.axis()
    if shell.cubic_complete:
        n = shell.points_per_axis
        p_axis = _cubic_axis(n, shell.spacing)
        cube = g.reshape(n, n, n)
        phase = np.exp(1j * np.outer(x_axis, p_axis))  # (n_x, n_p) per axis
        out = np.einsum("ap,pqr->aqr", phase, cube)
        out = np.einsum("bq,aqr->abr", phase, out)
        out = np.einsum("cr,abr->abc", phase, out)
        return norm * out.ravel()
    xs = grid.points()
    out = np.empty(len(xs), dtype=complex)
    block = 2048
    for start in range(0, len(xs), block):
        xb = xs[start:start + block]
        phases = np.exp(1j * (xb @ shell.points.T))
        out[start:start + block] = phases @ g
    return norm * out


def slice_norm_sq(values: np.ndarray, grid: SliceGrid) -> float:
    return float(np.sum(np.abs(values) ** 2) * grid.spacing ** 3)


def gaussian_family(shell: MassShell, width: float, radius: float
                    ) -> List[ShellFunction]:
    """Gaussians centered on the +/- coordinate axes at the given radius."""
    centers = [np.zeros(3)] if radius == 0 else [
        sign * radius * e for e in np.eye(3) for sign in (+1.0, -1.0)]
    family = []
    for c in centers:
        d_sq = np.sum((shell.points - c) ** 2, axis=1)
        family.append(ShellFunction(shell=shell,
                                    values=np.exp(-d_sq / (2.0 * width ** 2))))
    return family


def isometry_defect(shell: MassShell, grid: SliceGrid,
                    reweight: str = "none",
                    family: Optional[Sequence[ShellFunction]] = None) -> float:
    """Worst relative norm mismatch of the transform over a test family.

    reweight "newton_wigner" rescales shell functions by (2 e_p)^{1/2}
    before transforming, which restores an exact lattice isometry for the
    hyperboloid measure.
    """
    if reweight not in ("none", "newton_wigner"):
        raise ValueError(f"unknown reweight mode {reweight!r}")
    _check_reciprocal(shell, grid)
    if family is None:
        radius = shell.mass if shell.kind == "relativistic" else 0.0
        family = gaussian_family(shell, width=0.5, radius=radius)
    worst = 0.0
    for f in family:
        ref = shell_norm_sq(f)
        if ref == 0.0:
            continue
        if reweight == "newton_wigner":
            f = ShellFunction(shell=shell,
                              values=f.values * np.sqrt(2.0 * shell.energies))
        psi = restricted_inverse_fourier(f, grid)
        worst = max(worst, abs(slice_norm_sq(psi, grid) / ref - 1.0))
    return worst


# ---------------------------------------------------------------------------
# two-particle spectrum


def pair_invariant_mass(eps1, p1, eps2, p2) -> np.ndarray:
    total_e = eps1 + eps2
    total_p = p1 + p2
    m_sq = total_e ** 2 - np.sum(total_p ** 2, axis=-1)
    return np.sqrt(np.maximum(m_sq, 0.0))


def lorentz_boost(eps, p, beta: np.ndarray):
    """Boost energy-momentum pairs by velocity beta (|beta| < 1)."""
    beta = np.asarray(beta, dtype=float)
    b_sq = float(beta @ beta)
    if b_sq >= 1.0:
        raise ValueError("boost velocity must have |beta| < 1")
    gamma = 1.0 / np.sqrt(1.0 - b_sq)
    p = np.atleast_2d(p)
    eps = np.atleast_1d(eps)
    p_par = (p @ beta) / b_sq if b_sq > 0 else np.zeros(len(p))
    eps_out = gamma * (eps + p @ beta)
    if b_sq > 0:
        shift = ((gamma - 1.0) * p_par + gamma * eps)[:, None] * beta[None, :]
        p_out = p + shift
    else:
        p_out = p.copy()
    return eps_out, p_out


@dataclass(frozen=True)
class SpectrumStats:
    kind: str
    mass: float
    values: np.ndarray
    threshold: float

    @property
    def min(self) -> float:
        return float(np.min(self.values))

    @property
    def max(self) -> float:
        return float(np.max(self.values))


def two_particle_mass_spectrum(shell: MassShell, samples: int,
                               rng: Optional[np.random.Generator] = None
                               ) -> SpectrumStats:
    """Invariant masses of sampled point pairs.

    Relativistic pairs spread over [2m, inf); the pair at the origin attains
    the threshold.  The Galilean value is the represented central generator
    of the product representation, m + m exactly for every pair.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if rng is None:
        rng = np.random.default_rng(0)
    if shell.kind == "galilean":
        values = np.full(samples, 2.0 * shell.mass)
        return SpectrumStats(kind=shell.kind, mass=shell.mass, values=values,
                             threshold=2.0 * shell.mass)
    idx1 = rng.integers(0, len(shell.points), size=samples)
    idx2 = rng.integers(0, len(shell.points), size=samples)
    values = pair_invariant_mass(shell.energies[idx1], shell.points[idx1],
                                 shell.energies[idx2], shell.points[idx2])
    origin = np.zeros((1, 3))
    e0 = _energies(shell.kind, shell.mass, origin)
    threshold = float(pair_invariant_mass(e0, origin, e0, origin)[0])
    return SpectrumStats(kind=shell.kind, mass=shell.mass, values=values,
                         threshold=threshold)


# ---------------------------------------------------------------------------
# spherical channel analysis


def _legendre_assoc(l_max: int, m: int, x: np.ndarray) -> Dict[int, np.ndarray]:
    """Associated Legendre P_l^m for l = m..l_max by upward recurrence."""
    out: Dict[int, np.ndarray] = {}
    pmm = np.ones_like(x)
    if m > 0:
        somx2 = np.sqrt(np.maximum(1.0 - x * x, 0.0))
        fact = 1.0
        for _ in range(m):
            pmm = -pmm * fact * somx2
            fact += 2.0
    out[m] = pmm
    if l_max == m:
        return out
    pmmp1 = x * (2 * m + 1) * pmm
    out[m + 1] = pmmp1
    for l in range(m + 2, l_max + 1):
        pll = (x * (2 * l - 1) * pmmp1 - (l + m - 1) * pmm) / (l - m)
        pmm, pmmp1 = pmmp1, pll
        out[l] = pll
    return out


def spherical_harmonic(l: int, m: int, theta, phi) -> np.ndarray:
    """Orthonormal Y_lm with the Condon-Shortley phase."""
    theta = np.asarray(theta, dtype=float)
    phi = np.asarray(phi, dtype=float)
    am = abs(m)
    if am > l:
        raise ValueError("|m| must not exceed l")
    from math import lgamma
    plm = _legendre_assoc(l, am, np.cos(theta))[l]
    log_norm = 0.5 * (np.log((2 * l + 1) / (4 * np.pi))
                      + lgamma(l - am + 1) - lgamma(l + am + 1))
    y = np.exp(log_norm) * plm * np.exp(1j * am * phi)
    if m < 0:
        y = (-1.0) ** am * np.conj(y)
    return y


def _sphere_quadrature(n_theta: int, n_phi: int):
    x, w = np.polynomial.legendre.leggauss(n_theta)
    theta = np.arccos(x)
    phi = 2.0 * np.pi * np.arange(n_phi) / n_phi
    th_grid, ph_grid = np.meshgrid(theta, phi, indexing="ij")
    w_grid = np.broadcast_to((w * (2.0 * np.pi / n_phi))[:, None],
                             th_grid.shape)
    return th_grid, ph_grid, w_grid


Amplitude = Callable[[np.ndarray, np.ndarray], np.ndarray]


@dataclass(frozen=True)
class AngularReport:
    l_max: int
    coefficients: Dict[Tuple[int, int], complex]
    channel_norms: Dict[int, float]


def angular_decomposition(amplitude: Amplitude, l_max: int,
                          n_theta: Optional[int] = None,
                          n_phi: Optional[int] = None) -> AngularReport:
    """Channel norms of a back-to-back pair amplitude on the sphere.

    The product quadrature (Gauss-Legendre in cos(theta), uniform in phi)
    integrates harmonic products exactly when n_theta >= l_max + 1 and
    n_phi >= 2 l_max + 1.
    """
    if l_max < 0:
        raise ValueError("l_max must be nonnegative")
    if n_theta is None:
        n_theta = l_max + 2
    if n_phi is None:
        n_phi = 2 * l_max + 2
    if n_theta < l_max + 1 or n_phi < 2 * l_max + 1:
        raise InsufficientSphereSamplingError(
            f"need n_theta >= {l_max + 1} and n_phi >= {2 * l_max + 1}")
    theta, phi, w = _sphere_quadrature(n_theta, n_phi)
    values = amplitude(theta, phi)
    coeffs: Dict[Tuple[int, int], complex] = {}
    norms: Dict[int, float] = {}
    for l in range(l_max + 1):
        total = 0.0
        for m in range(-l, l + 1):
            y = spherical_harmonic(l, m, theta, phi)
            c = complex(np.sum(w * np.conj(y) * values))
            coeffs[(l, m)] = c
            total += abs(c) ** 2
        norms[l] = total
    return AngularReport(l_max=l_max, coefficients=coeffs, channel_norms=norms)


def channel_rank(amplitudes: Sequence[Amplitude], l: int, m: int,
                 n_theta: Optional[int] = None, n_phi: Optional[int] = None,
                 tol: float = 1e-10) -> int:
    """Rank of the Gram matrix of fixed-channel projections.

    A rank of one over any sampled amplitude basis is the finite-sample
    multiplicity-one statement for the (mass, l) channel per azimuthal
    component.
    """
    if n_theta is None:
        n_theta = l + 2
    if n_phi is None:
        n_phi = 2 * l + 2
    theta, phi, w = _sphere_quadrature(n_theta, n_phi)
    y = spherical_harmonic(l, m, theta, phi)
    coeffs = np.array([complex(np.sum(w * np.conj(y) * f(theta, phi)))
                       for f in amplitudes])
    gram = np.outer(np.conj(coeffs), coeffs)
    svals = np.linalg.svd(gram, compute_uv=False)
    return int(np.sum(svals > tol * max(1.0, float(svals[0]))))
