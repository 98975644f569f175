"""Central extension of the inhomogeneous Galilei group and its generators.

Covers the group law with its phase exponent, a fixed-mass momentum-grid
representation of the generators with finite-difference commutator checks,
an explicit Euclidean Clifford set, and the first-order wave operator built
from it together with its plane-wave symbol and degenerate norm form.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

__all__ = [
    "GalileiElement",
    "BargmannElement",
    "CliffordSet",
    "LevyLeblondMatrices",
    "MomentumGrid",
    "CommutatorReport",
    "DegenerateFormReport",
    "NotARotationError",
    "GridTooCoarseError",
    "make_galilei",
    "galilei_identity",
    "galilei_compose",
    "bargmann_exponent",
    "bargmann_multiply",
    "momentum_grid",
    "grid_generators",
    "generator_commutators",
    "commutator_convergence",
    "clifford_generators",
    "levy_leblond_matrices",
    "levy_leblond_symbol",
    "degenerate_norm_structure",
    "COMMUTATOR_TABLE",
    "CONVERGENT_BRACKETS",
    "EXACT_BRACKETS",
]

ROTATION_TOL = 1e-10
MIN_POINTS_PER_AXIS = 32


class NotARotationError(ValueError):
    pass


class GridTooCoarseError(ValueError):
    pass


# ---------------------------------------------------------------------------
# group elements and the phase exponent


@dataclass(frozen=True)
class GalileiElement:
    """Transformation (x, t) -> (R x + t v + u, t + eta)."""

    R: np.ndarray
    v: np.ndarray
    u: np.ndarray
    eta: float


@dataclass(frozen=True)
class BargmannElement:
    theta: float
    g: GalileiElement


def make_galilei(R, v, u, eta) -> GalileiElement:
    R = np.asarray(R, dtype=float)
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    if R.shape != (3, 3) or v.shape != (3,) or u.shape != (3,):
        raise ValueError("expected a 3x3 rotation and two 3-vectors")
    if np.max(np.abs(R.T @ R - np.eye(3))) > ROTATION_TOL or \
            abs(np.linalg.det(R) - 1.0) > ROTATION_TOL:
        raise NotARotationError("R is not a proper rotation")
    return GalileiElement(R=R, v=v, u=u, eta=float(eta))


def galilei_identity() -> GalileiElement:
    return GalileiElement(R=np.eye(3), v=np.zeros(3), u=np.zeros(3), eta=0.0)


def galilei_compose(a: GalileiElement, b: GalileiElement) -> GalileiElement:
    """Composite transformation acting as a after b on spacetime points."""
    return GalileiElement(R=a.R @ b.R,
                          v=a.R @ b.v + a.v,
                          u=a.R @ b.u + b.eta * a.v + a.u,
                          eta=a.eta + b.eta)


def bargmann_exponent(r: GalileiElement, r2: GalileiElement) -> float:
    """Phase cocycle xi(r, r') = (u.Rv' - v.Ru' + eta' v.Rv') / 2."""
    Rv2 = r.R @ r2.v
    return 0.5 * (r.u @ Rv2 - r.v @ (r.R @ r2.u) + r2.eta * (r.v @ Rv2))


def bargmann_multiply(a: BargmannElement, b: BargmannElement) -> BargmannElement:
    return BargmannElement(theta=a.theta + b.theta + bargmann_exponent(a.g, b.g),
                           g=galilei_compose(a.g, b.g))


# ---------------------------------------------------------------------------
# momentum-grid representation of the generators


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform cubic momentum lattice with cell-centered points."""

    points_per_axis: int
    p_max: float

    @property
    def spacing(self) -> float:
        return 2.0 * self.p_max / self.points_per_axis

    def axis(self) -> np.ndarray:
        n, h = self.points_per_axis, self.spacing
        return -self.p_max + (np.arange(n) + 0.5) * h

    def coordinate(self, axis: int) -> np.ndarray:
        a = self.axis()
        shape = [1, 1, 1]
        shape[axis] = self.points_per_axis
        return a.reshape(shape)


def momentum_grid(points_per_axis: int, p_max: float) -> MomentumGrid:
    if points_per_axis < MIN_POINTS_PER_AXIS:
        raise GridTooCoarseError(
            f"need at least {MIN_POINTS_PER_AXIS} points per axis")
    return MomentumGrid(points_per_axis=points_per_axis, p_max=float(p_max))


def _derivative(psi: np.ndarray, axis: int, h: float) -> np.ndarray:
    """Second-order central difference, zero beyond the boundary."""
    out = np.zeros_like(psi)
    src: List[slice] = [slice(None)] * 3
    lo: List[slice] = [slice(None)] * 3
    hi: List[slice] = [slice(None)] * 3
    src[axis] = slice(1, -1)
    hi[axis] = slice(2, None)
    lo[axis] = slice(None, -2)
    out[tuple(src)] = (psi[tuple(hi)] - psi[tuple(lo)]) / (2.0 * h)
    # one-sided contributions at the faces (outside values are zero)
    first: List[slice] = [slice(None)] * 3
    last: List[slice] = [slice(None)] * 3
    first[axis] = slice(0, 1)
    last[axis] = slice(-1, None)
    nxt: List[slice] = [slice(None)] * 3
    prv: List[slice] = [slice(None)] * 3
    nxt[axis] = slice(1, 2)
    prv[axis] = slice(-2, -1)
    out[tuple(first)] = psi[tuple(nxt)] / (2.0 * h)
    out[tuple(last)] = -psi[tuple(prv)] / (2.0 * h)
    return out


Operator = Callable[[np.ndarray], np.ndarray]


def grid_generators(mass: float, grid: MomentumGrid) -> Dict[str, Operator]:
    """Momentum-space generators at fixed mass.

    P_i multiplies by p_i, P0 by p^2/(2m); K_i = i m d/dp_i, J_i the
    angular-momentum difference operators and M multiplication by m.
    """
    h = grid.spacing
    p = [grid.coordinate(i) for i in range(3)]
    p_sq = sum(pi ** 2 for pi in p)

    gens: Dict[str, Operator] = {}
    for i in range(3):
        gens[f"P{i + 1}"] = (lambda psi, pi=p[i]: pi * psi)
    gens["P0"] = lambda psi: (p_sq / (2.0 * mass)) * psi
    for i in range(3):
        gens[f"K{i + 1}"] = (lambda psi, ax=i: 1j * mass * _derivative(psi, ax, h))
    for i, (a, b) in enumerate(((1, 2), (2, 0), (0, 1))):
        gens[f"J{i + 1}"] = (
            lambda psi, pa=p[a], pb=p[b], a=a, b=b:
            -1j * (pa * _derivative(psi, b, h) - pb * _derivative(psi, a, h)))
    gens["M"] = lambda psi: mass * psi
    return gens


def _eps(i: int, j: int, k: int) -> float:
    return float((i - j) * (j - k) * (k - i)) / 2.0


def _commutator_table() -> List[Tuple[str, str, Dict[str, complex]]]:
    """Every bracket of the displayed relation set with its target."""
    table: List[Tuple[str, str, Dict[str, complex]]] = []
    for i in range(1, 4):
        for j in range(1, 4):
            tgt: Dict[str, complex] = {}
            for k in range(1, 4):
                e = _eps(i, j, k)
                if e:
                    tgt[f"J{k}"] = 1j * e
            table.append((f"J{i}", f"J{j}", tgt))
            tgt = {}
            for k in range(1, 4):
                e = _eps(i, j, k)
                if e:
                    tgt[f"K{k}"] = 1j * e
            table.append((f"J{i}", f"K{j}", tgt))
            tgt = {}
            for k in range(1, 4):
                e = _eps(i, j, k)
                if e:
                    tgt[f"P{k}"] = 1j * e
            table.append((f"J{i}", f"P{j}", tgt))
            table.append((f"K{i}", f"P{j}", {"M": 1j} if i == j else {}))
            table.append((f"K{i}", f"K{j}", {}))
            table.append((f"P{i}", f"P{j}", {}))
        table.append((f"K{i}", "P0", {f"P{i}": 1j}))
        table.append((f"J{i}", "P0", {}))
        table.append((f"P{i}", "P0", {}))
        for name in (f"J{i}", f"K{i}", f"P{i}"):
            table.append((name, "M", {}))
    table.append(("P0", "M", {}))
    return table


COMMUTATOR_TABLE = _commutator_table()


def _default_test_functions(grid: MomentumGrid, count: int = 2) -> List[np.ndarray]:
    """Gaussians whose tails fall below 1e-14 inside the grid.

    The first one is offset from the origin so that no bracket annihilates
    it by symmetry (a function radial about the origin is killed by every
    J_i).
    """
    sigma = grid.p_max / 8.0
    centers = [np.array([0.3, -0.2, 0.1]) * sigma, np.zeros(3)][:count]
    p = [grid.coordinate(i) for i in range(3)]
    funcs = []
    for center in centers:
        r_sq = sum((p[i] - center[i]) ** 2 for i in range(3))
        psi = np.exp(-r_sq / (2.0 * sigma ** 2)).astype(complex)
        psi[np.abs(psi) < 1e-14] = 0.0
        funcs.append(psi)
    return funcs


@dataclass
class CommutatorReport:
    mass: float
    points_per_axis: int
    spacing: float
    deviations: Dict[Tuple[str, str], float]

    def max_deviation(self, pairs: Optional[Sequence[Tuple[str, str]]] = None) -> float:
        keys = pairs if pairs is not None else self.deviations.keys()
        return max(self.deviations[k] for k in keys)


def generator_commutators(mass: float, grid: MomentumGrid,
                          test_functions: Optional[List[np.ndarray]] = None
                          ) -> CommutatorReport:
    """Worst deviation of every bracket from its target on smooth functions.

    Deviations are relative grid-L2 norms, which refine smoothly under
    lattice halving (the sup over shifted cell-centered lattices does not).
    """
    if grid.points_per_axis < MIN_POINTS_PER_AXIS:
        raise GridTooCoarseError(
            f"need at least {MIN_POINTS_PER_AXIS} points per axis")
    gens = grid_generators(mass, grid)
    if test_functions is None:
        test_functions = _default_test_functions(grid)
    table = COMMUTATOR_TABLE
    deviations: Dict[Tuple[str, str], float] = {k: 0.0 for k in
                                                ((l, r) for l, r, _ in table)}
    for psi in test_functions:
        applied = {name: gen(psi) for name, gen in gens.items()}
        ref = float(np.sqrt(np.sum(np.abs(psi) ** 2)))
        for left, right, target in table:
            got = gens[left](applied[right]) - gens[right](applied[left])
            for name, coeff in target.items():
                got = got - coeff * applied[name]
            key = (left, right)
            deviations[key] = max(deviations[key],
                                  float(np.sqrt(np.sum(np.abs(got) ** 2))) / ref)
    return CommutatorReport(mass=mass, points_per_axis=grid.points_per_axis,
                            spacing=grid.spacing, deviations=deviations)


def _convergent_pairs() -> Tuple[Tuple[str, str], ...]:
    """Brackets whose finite-difference error is genuinely O(h^2).

    The remaining table entries hold exactly on the lattice up to roundoff
    (multiplications commute entrywise; stencils along distinct axes
    commute as linear maps).
    """
    pairs = []
    for i in range(1, 4):
        pairs.append((f"K{i}", f"P{i}"))
        pairs.append((f"K{i}", "P0"))
        pairs.append((f"J{i}", "P0"))
        for j in range(1, 4):
            if i != j:
                pairs.append((f"J{i}", f"P{j}"))
                pairs.append((f"J{i}", f"J{j}"))
                pairs.append((f"J{i}", f"K{j}"))
    return tuple(pairs)


CONVERGENT_BRACKETS = _convergent_pairs()
EXACT_BRACKETS = tuple(
    (left, right) for left, right, _ in COMMUTATOR_TABLE
    if (left, right) not in CONVERGENT_BRACKETS)


def commutator_convergence(mass: float, sizes: Sequence[int], p_max: float
                           ) -> Dict[Tuple[str, str], List[float]]:
    """Measured convergence orders of each refining bracket between sizes."""
    reports = []
    for n in sizes:
        grid = momentum_grid(n, p_max)
        reports.append(generator_commutators(
            mass, grid, _default_test_functions(grid, count=1)))
    orders: Dict[Tuple[str, str], List[float]] = {}
    for pair in CONVERGENT_BRACKETS:
        errs = [rep.deviations[pair] for rep in reports]
        hs = [rep.spacing for rep in reports]
        orders[pair] = [float(np.log(errs[i] / errs[i + 1])
                              / np.log(hs[i] / hs[i + 1]))
                        for i in range(len(errs) - 1)]
    return orders


# ---------------------------------------------------------------------------
# Clifford algebra and the first-order wave operator


@dataclass(frozen=True)
class CliffordSet:
    gammas: Tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]


def clifford_generators() -> CliffordSet:
    """Hermitian 4x4 generators with gamma^a gamma^r + gamma^r gamma^a = 2 delta."""
    s1 = np.array([[0, 1], [1, 0]], dtype=complex)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
    s3 = np.array([[1, 0], [0, -1]], dtype=complex)
    eye = np.eye(2, dtype=complex)
    gammas = tuple(np.kron(s1, s) for s in (s1, s2, s3)) + (np.kron(s2, eye),)
    for g in gammas:
        g.setflags(write=False)
    return CliffordSet(gammas=gammas)  # type: ignore[arg-type]


@dataclass(frozen=True)
class LevyLeblondMatrices:
    A: np.ndarray
    B: Tuple[np.ndarray, np.ndarray, np.ndarray]
    C: np.ndarray
    mass: float
    beta: np.ndarray


def levy_leblond_matrices(mass: float, beta=None,
                          cliffords: Optional[CliffordSet] = None
                          ) -> LevyLeblondMatrices:
    """A = -i/2 (beta + beta g4), C = i m (beta - beta g4), B^i = beta g^i."""
    if mass <= 0:
        raise ValueError("mass must be positive")
    cl = cliffords if cliffords is not None else clifford_generators()
    g1, g2, g3, g4 = cl.gammas
    beta = np.asarray(beta, dtype=complex) if beta is not None else g4
    if beta.shape != (4, 4) or np.linalg.matrix_rank(beta) < 4:
        raise ValueError("beta must be an invertible 4x4 matrix")
    A = -0.5j * (beta + beta @ g4)
    C = 1j * mass * (beta - beta @ g4)
    B = (beta @ g1, beta @ g2, beta @ g3)
    return LevyLeblondMatrices(A=A, B=B, C=C, mass=mass, beta=beta)


def levy_leblond_symbol(L: LevyLeblondMatrices, eps: float, p) -> np.ndarray:
    """Plane-wave symbol S(eps, p) = eps A + p_i B^i + C.

    The wave ansatz is proportional to exp(i(eps t - p.x)); with this
    convention det S vanishes exactly on the shell eps = p^2 / (2 m).
    """
    p = np.asarray(p, dtype=float)
    return eps * L.A + sum(p[i] * L.B[i] for i in range(3)) + L.C


@dataclass(frozen=True)
class DegenerateFormReport:
    form: np.ndarray
    hermitian: bool
    rank: int
    kernel_dim: int
    positive_rank: int
    negative_rank: int


def degenerate_norm_structure(L: LevyLeblondMatrices,
                              tol: float = 1e-12) -> DegenerateFormReport:
    """Rank and kernel of the conserved sesquilinear density i A.

    For beta = g4 the form is the projector (1 + g4)/2: positive
    semi-definite of rank two with a two-dimensional kernel that cannot be
    removed without losing the wave-operator structure.
    """
    form = 1j * L.A
    herm = bool(np.max(np.abs(form - form.conj().T)) <= tol)
    svals = np.linalg.svd(form, compute_uv=False)
    rank = int(np.sum(svals > tol))
    if herm:
        eigs = np.linalg.eigvalsh((form + form.conj().T) / 2)
        pos = int(np.sum(eigs > tol))
        neg = int(np.sum(eigs < -tol))
    else:
        pos = neg = -1
    return DegenerateFormReport(form=form, hermitian=herm, rank=rank,
                                kernel_dim=4 - rank, positive_rank=pos,
                                negative_rank=neg)
