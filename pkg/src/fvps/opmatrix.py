"""Doubled-space matrix mechanics: the ground-truth oracle for operator structure.

States of a charged scalar live in a doubled space (charge block x mode
basis) with the indefinite metric eta = diag(+1...+1, -1...-1).  The
first-order Hamiltonian in this space is eta-pseudo-Hermitian rather than
Hermitian; its spectrum comes in +/-E pairs.  The sign operator
Lambda = H (H^2)^(-1/2) splits every operator O into

    even part  (1/2)(O + Lambda O Lambda)   -- commutes with Lambda,
    odd part   (1/2)(O - Lambda O Lambda)   -- anticommutes with Lambda,

and only even parts are observables under the charge superselection rule.
Everything here is computed by dense eigendecomposition, which makes this
module the numerical referee for the closed forms used elsewhere
(`spectrum.eps_factor` / `chi_factor`, the ladder deformation, the
Newton-Wigner position).

Basis layout: index = branch * M + mode, mode bases are either momentum
nodes or oscillator levels (optionally tensored with a longitudinal
momentum grid, mode = level * n_pz + pz_index).  Total dimension is
capped at 2M = 2048; beyond that dense eigendecomposition stops being a
sensible oracle.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import ConditioningError, GridError, ResolutionError
from .grids import NATURAL, MomentumGrid, PhaseSpaceGrid, UnitSystem, fourier_pair
from .spectrum import EnergyModel, chi_from_energies, eps_from_energies

MAX_DOUBLED_DIM = 2048

TAU1 = np.array([[0.0, 1.0], [1.0, 0.0]])
TAU3 = np.array([[1.0, 0.0], [0.0, -1.0]])
ITAU2 = np.array([[0.0, 1.0], [-1.0, 0.0]])


@dataclass(frozen=True)
class OperatorMatrix:
    """Dense complex matrix over the doubled (charge x mode) basis."""

    mat: np.ndarray
    basis: str

    def __post_init__(self):
        m = np.asarray(self.mat)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise GridError(f"operator matrix must be square, got {m.shape}")
        if m.shape[0] % 2 != 0:
            raise GridError("doubled-space dimension must be even")
        if m.shape[0] > MAX_DOUBLED_DIM:
            raise GridError(
                f"doubled dimension {m.shape[0]} exceeds cap {MAX_DOUBLED_DIM}"
            )

    @property
    def n_modes(self) -> int:
        return self.mat.shape[0] // 2

    def require_same_basis(self, other: "OperatorMatrix"):
        if self.basis != other.basis or self.mat.shape != other.mat.shape:
            raise GridError(
                f"basis mismatch: {self.basis!r} (dim {self.mat.shape[0]}) vs "
                f"{other.basis!r} (dim {other.mat.shape[0]})"
            )


def charge_metric(n_modes: int) -> np.ndarray:
    """eta = diag(+1 ... +1, -1 ... -1) over the two charge blocks."""
    return np.concatenate([np.ones(n_modes), -np.ones(n_modes)])


def charge_invariant(kernel: np.ndarray, basis: str) -> OperatorMatrix:
    """Lift a mode-space kernel to the doubled space: same action on both blocks."""
    kernel = np.asarray(kernel, dtype=complex)
    if kernel.ndim != 2 or kernel.shape[0] != kernel.shape[1]:
        raise GridError(f"kernel must be square, got {kernel.shape}")
    return OperatorMatrix(np.kron(np.eye(2), kernel), basis)


def pseudo_hermiticity_defect(op: OperatorMatrix) -> float:
    """max |H^dag eta - eta H|; zero for a legitimate doubled-space observable."""
    eta = charge_metric(op.n_modes)
    return float(np.abs(op.mat.conj().T * eta[None, :] - eta[:, None] * op.mat).max())


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------


def _fv_from_kinetic(kinetic_diag: np.ndarray, units: UnitSystem) -> np.ndarray:
    """Doubled-space first-order Hamiltonian for a diagonal squared kinetic term.

    H = tau3 (mc^2 + K) + i tau2 K with K = Pi^2 / (2m); squares to the
    diagonal m^2 c^4 + c^2 Pi^2.
    """
    K = np.asarray(kinetic_diag, dtype=float) / (2.0 * units.m)
    rest = units.mc2
    return np.kron(TAU3, np.diag(rest + K)) + np.kron(ITAU2, np.diag(K))


def momentum_basis_tag(grid: MomentumGrid) -> str:
    return f"momentum:n={grid.n_points}:pmax={grid.p_max:g}"


def oscillator_basis_tag(n_levels: int, pz_grid: MomentumGrid | None = None) -> str:
    if pz_grid is None:
        return f"oscillator:n={n_levels}"
    return f"oscillator:n={n_levels}:pz={pz_grid.n_points}:pzmax={pz_grid.p_max:g}"


def build_hamiltonian(
    model: EnergyModel,
    grid: MomentumGrid | None = None,
    n_levels: int | None = None,
    pz_grid: MomentumGrid | None = None,
) -> OperatorMatrix:
    """First-order doubled-space Hamiltonian for a free or magnetic particle.

    Free particles take a momentum `grid`; the magnetic problem takes
    `n_levels` transverse oscillator modes, optionally tensored with a
    longitudinal `pz_grid`.  M >= 16 modes recommended for any use that
    resolves states rather than single matrix elements.
    """
    if model.kind == "free":
        if grid is None:
            raise ValueError("free model requires a momentum grid")
        mat = _fv_from_kinetic(grid.nodes**2, model.units)
        return OperatorMatrix(mat.astype(complex), momentum_basis_tag(grid))

    if n_levels is None:
        raise ValueError("landau model requires n_levels")
    if n_levels < 2:
        raise ResolutionError(
            f"need n_levels >= 2 to resolve any magnetic state, got {n_levels}"
        )
    u = model.units
    # Pi^2 eigenvalues: (2n+1) hbar m omega + p_z^2
    levels = (2.0 * np.arange(n_levels) + 1.0) * u.hbar * u.m * model.omega
    if pz_grid is None:
        pi2 = levels
    else:
        pi2 = (levels[:, None] + pz_grid.nodes[None, :] ** 2).ravel()
    size = 2 * pi2.size
    if size > MAX_DOUBLED_DIM:
        raise ResolutionError(
            f"requested doubled dimension {size} exceeds cap {MAX_DOUBLED_DIM}; "
            f"reduce n_levels or the pz grid"
        )
    mat = _fv_from_kinetic(pi2, u)
    return OperatorMatrix(mat.astype(complex), oscillator_basis_tag(n_levels, pz_grid))


# ---------------------------------------------------------------------------
# Sign operator and even/odd decomposition
# ---------------------------------------------------------------------------


def sign_operator(h: OperatorMatrix) -> OperatorMatrix:
    """Lambda = H (H^2)^(-1/2) by dense eigendecomposition.

    Lambda^2 = 1 and [Lambda, H] = 0 to roundoff.  Raises
    ConditioningError when an eigenvalue sits within 1e-12 of zero
    relative to the spectral radius.
    """
    w, v = sla.eig(h.mat)
    scale = np.abs(w).max()
    if np.abs(w.real).min() < 1e-12 * scale:
        raise ConditioningError(
            "Hamiltonian has a near-zero eigenvalue; sign operator undefined"
        )
    lam = (v * np.sign(w.real)[None, :]) @ np.linalg.inv(v)
    return OperatorMatrix(lam, h.basis)


def even_part(op: OperatorMatrix, sign: OperatorMatrix) -> OperatorMatrix:
    """(1/2)(O + Lambda O Lambda); commutes with the sign operator."""
    op.require_same_basis(sign)
    return OperatorMatrix(
        0.5 * (op.mat + sign.mat @ op.mat @ sign.mat), op.basis
    )


def odd_part(op: OperatorMatrix, sign: OperatorMatrix) -> OperatorMatrix:
    """(1/2)(O - Lambda O Lambda); anticommutes with the sign operator."""
    op.require_same_basis(sign)
    return OperatorMatrix(
        0.5 * (op.mat - sign.mat @ op.mat @ sign.mat), op.basis
    )


def commutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    a.require_same_basis(b)
    return OperatorMatrix(a.mat @ b.mat - b.mat @ a.mat, a.basis)


def anticommutator(a: OperatorMatrix, b: OperatorMatrix) -> OperatorMatrix:
    a.require_same_basis(b)
    return OperatorMatrix(a.mat @ b.mat + b.mat @ a.mat, a.basis)


# ---------------------------------------------------------------------------
# Charge-branch eigenvectors and kernel reduction
# ---------------------------------------------------------------------------


def branch_vectors(h: OperatorMatrix):
    """Per-mode eta-normalized +/- charge branch eigenvectors.

    Requires a Hamiltonian with no inter-mode coupling (true for every
    Hamiltonian this module builds): each mode carries an isolated 2x2
    charge block.  Returns (u_plus, u_minus, energies) where the columns
    of u_plus (2M, M) satisfy H u = +E u, u^dag eta u = +1, first charge
    component real positive, and u_minus mirrors it on the negative
    branch (eta-norm -1, second component real positive).
    """
    m = h.n_modes
    mat = h.mat
    cross = mat.copy()
    idx = np.arange(m)
    for blk in ((idx, idx), (idx, idx + m), (idx + m, idx), (idx + m, idx + m)):
        cross[blk] = 0.0
    if np.abs(cross).max() > 1e-12 * max(np.abs(mat).max(), 1.0):
        raise GridError("branch_vectors requires a mode-diagonal Hamiltonian")

    u_plus = np.zeros((2 * m, m), dtype=complex)
    u_minus = np.zeros((2 * m, m), dtype=complex)
    energies = np.zeros(m)
    for j in range(m):
        block = np.array(
            [[mat[j, j], mat[j, m + j]], [mat[m + j, j], mat[m + j, m + j]]]
        )
        w, v = np.linalg.eig(block)
        order = np.argsort(w.real)
        for sgn, col in ((1.0, order[1]), (-1.0, order[0])):
            vec = v[:, col]
            norm2 = abs(vec[0]) ** 2 - abs(vec[1]) ** 2
            if sgn * norm2 <= 0:
                raise ConditioningError(
                    f"mode {j}: charge norm of branch eigenvector has wrong sign"
                )
            vec = vec / np.sqrt(abs(norm2))
            anchor = vec[0] if sgn > 0 else vec[1]
            vec = vec * (abs(anchor) / anchor)
            if sgn > 0:
                u_plus[j, j] = vec[0]
                u_plus[m + j, j] = vec[1]
                energies[j] = w[col].real
            else:
                u_minus[j, j] = vec[0]
                u_minus[m + j, j] = vec[1]
    return u_plus, u_minus, energies


def branch_reduce(op: OperatorMatrix, u_left: np.ndarray, u_right: np.ndarray) -> np.ndarray:
    """Mode-space kernel <left_j| O |right_k> in the eta inner product."""
    eta = charge_metric(op.n_modes)
    return u_left.conj().T @ (eta[:, None] * op.mat) @ u_right


@dataclass(frozen=True)
class KernelRelationReport:
    even_deviation: float
    odd_deviation: float
    tolerance: float

    @property
    def passed(self) -> bool:
        return max(self.even_deviation, self.odd_deviation) <= self.tolerance


def kernel_relation_check(
    kernel: np.ndarray, h: OperatorMatrix, tolerance: float = 1e-8
) -> KernelRelationReport:
    """Verify even/odd parts of a charge-invariant operator against eps/chi scaling.

    The even part reduced to the positive branch must be
    eps(E_j, E_k) * kernel; the odd part taken between positive and
    negative branches must be chi(E_j, E_k) * kernel.  Hence
    odd = (chi/eps) * even entrywise: even and odd parts are not
    independent objects.
    """
    kernel = np.asarray(kernel, dtype=complex)
    m = h.n_modes
    if kernel.shape == h.mat.shape:
        upper = kernel[:m, :m]
        lower = kernel[m:, m:]
        off = max(np.abs(kernel[:m, m:]).max(), np.abs(kernel[m:, :m]).max())
        if off > 1e-12 or np.abs(upper - lower).max() > 1e-12:
            raise ValueError(
                "kernel is not charge-invariant (unequal or coupled charge blocks)"
            )
        kernel = upper
    elif kernel.shape != (m, m):
        raise GridError(f"kernel shape {kernel.shape} incompatible with {m} modes")

    op = charge_invariant(kernel, h.basis)
    lam = sign_operator(h)
    u_plus, u_minus, energies = branch_vectors(h)
    eps = eps_from_energies(energies[:, None], energies[None, :])
    chi = chi_from_energies(energies[:, None], energies[None, :])

    even_red = branch_reduce(even_part(op, lam), u_plus, u_plus)
    odd_red = branch_reduce(odd_part(op, lam), u_plus, u_minus)
    even_dev = float(np.abs(even_red - eps * kernel).max())
    odd_dev = float(np.abs(odd_red - chi * kernel).max())
    return KernelRelationReport(even_dev, odd_dev, tolerance)


# ---------------------------------------------------------------------------
# Concrete operators on the momentum basis
# ---------------------------------------------------------------------------


def position_kernel(psgrid: PhaseSpaceGrid) -> np.ndarray:
    """Mode-space position matrix F^-1 diag(q) F; Hermitian, spectrum = q nodes."""
    psgrid.require_conjugate()
    n = psgrid.momentum.n_points
    fwd = np.zeros((psgrid.n_q, n), dtype=complex)
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        fwd[:, k] = fourier_pair(e, psgrid, "forward")
    inv = np.zeros((n, psgrid.n_q), dtype=complex)
    for mcol in range(psgrid.n_q):
        e = np.zeros(psgrid.n_q)
        e[mcol] = 1.0
        inv[:, mcol] = fourier_pair(e, psgrid, "inverse")
    return inv @ (psgrid.q_nodes[:, None] * fwd)


def momentum_kernel(grid: MomentumGrid) -> np.ndarray:
    return np.diag(grid.nodes).astype(complex)


def newton_wigner_matrix(
    psgrid: PhaseSpaceGrid, units: UnitSystem = NATURAL
) -> OperatorMatrix:
    """Observable position of the free particle, built in closed form.

    The mode-diagonal piece is the plain position matrix; the charge
    structure adds the curvature term (i hbar c^2 p / 2 E^2) tau1, which
    vanishes on the positive-energy subspace in the eta inner product, so
    there the operator acts as i hbar d/dp: the canonical conjugate of
    momentum.  `even_part` of the naive position must reproduce this
    matrix; that is the free-particle position oracle.
    """
    from .spectrum import energy

    q = position_kernel(psgrid)
    p = psgrid.momentum.nodes
    curv = units.hbar * units.c**2 * p / (2.0 * energy(p, units) ** 2)
    mat = np.kron(np.eye(2), q) + 1j * np.kron(TAU1, np.diag(curv))
    return OperatorMatrix(mat, momentum_basis_tag(psgrid.momentum))


# ---------------------------------------------------------------------------
# Debug dumps
# ---------------------------------------------------------------------------


def dump_matrix(op: OperatorMatrix, path):
    """Raw binary dump: row-major little-endian (re, im) float64 pairs."""
    with open(path, "wb") as fh:
        fh.write(np.ascontiguousarray(op.mat, dtype="<c16").tobytes())


def load_matrix(path, size: int, basis: str = "loaded") -> OperatorMatrix:
    data = np.fromfile(path, dtype="<c16")
    if data.size != size * size:
        raise GridError(f"file holds {data.size} entries, expected {size * size}")
    return OperatorMatrix(data.reshape(size, size), basis)
