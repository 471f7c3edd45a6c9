"""Magnetic-field problem: deformed ladder algebra and orbit-radius dynamics.

The observable parts of the rotational ladder operators are deformed: the
even annihilation operator A carries matrix elements sqrt(n+1) f(n+1)
with f the spectrum-derived deformation factor, so [A, A^dag] is no
longer the identity and the pair generates a deformed algebra.  The
anharmonic level spacing then dephases coherent superpositions, and the
orbit radius r(t) -- operationalized as the guiding-center distance
sqrt(2) l |<A(t)>|, which is exactly constant for an equally spaced
spectrum -- develops a slow envelope: a low-frequency modulation far
below the cyclotron frequency, read off the spectrum of r(t).  The
"additional damping" visible over a finite window is the first collapse
of that envelope, not true dissipation.

The longitudinal degree of freedom does not decouple: the even
rotational ladder fails to commute with the even longitudinal position,
so no state is sharp in both; `translational_coupling` measures that
commutator on the joint basis.
"""

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .errors import GridError, ResolutionError, ResolutionWarning
from .grids import NATURAL, MomentumGrid, PhaseSpaceGrid, UnitSystem
from .opmatrix import (
    branch_reduce,
    branch_vectors,
    build_hamiltonian,
    charge_invariant,
    commutator,
    even_part,
    position_kernel,
    sign_operator,
)
from .spectrum import EnergyModel, landau_energy
from .states import FockExpansion


@dataclass(frozen=True)
class RotatorModel:
    """Field strength, level truncation, and optional longitudinal grid."""

    b: float
    n_max: int = 64
    units: UnitSystem = NATURAL
    pz_grid: MomentumGrid | None = None

    def __post_init__(self):
        if self.b <= 0:
            raise ValueError(f"field strength b must be positive, got {self.b}")
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")

    @property
    def energy_model(self) -> EnergyModel:
        return EnergyModel.landau(self.b, self.units)

    @property
    def omega(self) -> float:
        return self.energy_model.omega

    @property
    def ladder_length(self) -> float:
        """Transverse length scale sqrt(hbar / (m omega))."""
        u = self.units
        return float(np.sqrt(u.hbar / (u.m * self.omega)))


def _bare_ladder(n_levels: int) -> np.ndarray:
    """Undeformed annihilation matrix, <n-1| a |n> = sqrt(n)."""
    a = np.zeros((n_levels, n_levels), dtype=complex)
    n = np.arange(1, n_levels)
    a[n - 1, n] = np.sqrt(n)
    return a


def even_ladder(model: RotatorModel):
    """Observable ladder pair (A, A^dag) reduced to the positive charge branch.

    Built through the doubled-space oracle: even part of the bare ladder,
    contracted with the eta-normalized branch eigenvectors.  The first
    superdiagonal of A is sqrt(n+1) f(n+1) (up to oracle roundoff), tying
    the spectrum-derived deformation factor to the matrix mechanics; as
    b -> 0 the pair reverts to the undeformed ladder.
    """
    h = build_hamiltonian(model.energy_model, n_levels=model.n_max)
    lam = sign_operator(h)
    u_plus, _, _ = branch_vectors(h)
    bare = _bare_ladder(model.n_max)
    a_even = even_part(charge_invariant(bare, h.basis), lam)
    adag_even = even_part(charge_invariant(bare.conj().T, h.basis), lam)
    a_red = branch_reduce(a_even, u_plus, u_plus)
    adag_red = branch_reduce(adag_even, u_plus, u_plus)
    return a_red, adag_red


def deformed_commutator(model: RotatorModel) -> np.ndarray:
    """Diagonal of [A, A^dag] on the positive branch.

    The identity for an undeformed pair; for b > 0 the entries start at
    f(1)^2 and decay toward 1 with n.  The last level is dropped: its
    entry is a truncation artifact (the matrix cannot see A_{n_max,
    n_max+1}).  Off-diagonal entries are checked to vanish.
    """
    a, adag = even_ladder(model)
    comm = a @ adag - adag @ a
    off = comm - np.diag(np.diag(comm))
    if np.abs(off).max() > 1e-10:
        raise ArithmeticError(
            f"[A, A+] developed off-diagonal entries ({np.abs(off).max():.2e}); "
            "oracle inconsistency"
        )
    return np.diag(comm).real[:-1]


@dataclass(frozen=True)
class OrbitSeries:
    """Orbit radius r(t) and transverse centroid track in natural length units."""

    times: np.ndarray
    radius: np.ndarray
    x: np.ndarray
    y: np.ndarray
    omega: float

    def to_rows(self):
        return zip(self.times, self.radius, self.x, self.y)


def orbit_series(
    state: FockExpansion,
    model: RotatorModel,
    t_max: float,
    dt: float,
    force_linear_spectrum: bool = False,
) -> OrbitSeries:
    """Track r(t) = sqrt(2) l |<A(t)>| under level-phase evolution.

    With force_linear_spectrum the levels are replaced by the equally
    spaced reference hbar omega (n + 1/2): every term of <A(t)> then
    rotates at the same frequency and r(t) is exactly constant, isolating
    the relativistic anharmonicity as the only source of modulation.
    dt must resolve the fundamental spacing (>= 8 samples per cyclotron
    period).
    """
    if dt <= 0 or t_max <= dt:
        raise ValueError("need 0 < dt < t_max")
    u = model.units
    period = 2.0 * np.pi / model.omega
    if dt > period / 8.0:
        raise ResolutionError(
            f"dt={dt:.4g} undersamples the cyclotron period {period:.4g}; "
            f"need dt <= {period / 8:.4g}"
        )
    c = state.coeffs
    n_levels = len(c)
    n = np.arange(n_levels)
    if force_linear_spectrum:
        energies = u.hbar * model.omega * (n + 0.5)
    else:
        energies = landau_energy(n, 0.0, model.energy_model)
    a, _ = even_ladder(RotatorModel(model.b, n_levels, u, None))
    super_diag = np.diag(a, k=1)

    times = np.arange(0.0, t_max, dt)
    gaps = (energies[1:] - energies[:-1]) / u.hbar
    weights = np.conj(c[:-1]) * c[1:] * super_diag
    phases = np.exp(-1j * np.outer(times, gaps))
    amp = phases @ weights
    scale = np.sqrt(2.0) * model.ladder_length
    return OrbitSeries(
        times=times,
        radius=scale * np.abs(amp),
        x=scale * amp.real,
        y=scale * amp.imag,
        omega=model.omega,
    )


def orbit_series_matrix_oracle(
    state: FockExpansion, model: RotatorModel, times: np.ndarray
) -> np.ndarray:
    """r(t) from dense matrix-exponential evolution on the positive subspace.

    Independent pipeline for cross-checking `orbit_series`: evolves the
    coefficient vector with expm of the diagonalized positive-branch
    Hamiltonian and re-measures |<A>| with the oracle ladder matrix.
    """
    n_levels = len(state.coeffs)
    sub_model = RotatorModel(model.b, n_levels, model.units, None)
    h = build_hamiltonian(sub_model.energy_model, n_levels=n_levels)
    u_plus, _, energies = branch_vectors(h)
    a, _ = even_ladder(sub_model)
    h_pos = np.diag(energies)
    scale = np.sqrt(2.0) * model.ladder_length
    out = np.empty(len(times))
    for i, t in enumerate(times):
        propagator = sla.expm(-1j * h_pos * t / model.units.hbar)
        ct = propagator @ state.coeffs
        out[i] = scale * abs(np.conj(ct) @ (a @ ct))
    return out


@dataclass(frozen=True)
class SpectralPeak:
    frequency: float
    amplitude: float


def modulation_spectrum(series: OrbitSeries, rel_threshold: float = 1e-8):
    """Detrended magnitude spectrum of r(t), peaks sorted by amplitude.

    A peak is a local maximum of |FFT| above rel_threshold of the signal
    scale; a constant series returns no peaks.  Emits a
    ResolutionWarning when the window holds fewer than four periods of
    the lowest detected peak (that peak's frequency is then window
    limited).
    """
    r = series.radius
    dt = series.times[1] - series.times[0]
    detrended = r - r.mean()
    scale = np.abs(r).max()
    if scale == 0 or np.abs(detrended).max() < rel_threshold * scale:
        return []
    spec = np.abs(np.fft.rfft(detrended))
    freqs = 2.0 * np.pi * np.fft.rfftfreq(len(r), dt)
    floor = rel_threshold * scale * len(r)
    peaks = []
    for i in range(1, len(spec) - 1):
        if spec[i] > spec[i - 1] and spec[i] >= spec[i + 1] and spec[i] > floor:
            peaks.append(SpectralPeak(frequency=float(freqs[i]), amplitude=float(spec[i])))
    peaks.sort(key=lambda pk: -pk.amplitude)
    if peaks:
        lowest = min(pk.frequency for pk in peaks)
        if lowest > 0 and series.times[-1] < 4.0 * 2.0 * np.pi / lowest:
            warnings.warn(
                f"series window {series.times[-1]:.4g} holds fewer than four "
                f"periods of the lowest peak ({2 * np.pi / lowest:.4g})",
                ResolutionWarning,
            )
    return peaks


def modulation_depth(series: OrbitSeries) -> float:
    """(max - min) / mean of the radius track."""
    mean = series.radius.mean()
    if mean == 0:
        return 0.0
    return float((series.radius.max() - series.radius.min()) / mean)


def collapse_decay_rate(series: OrbitSeries) -> float:
    """Gaussian decay rate of the first collapse of the radius envelope.

    Fits r(t) - r_plateau ~ A exp(-(rate t)^2) over the initial descent,
    with the plateau estimated from the series minimum region.  This is
    APPARENT damping only: the dephasing that shrinks the coherent orbit
    amplitude is reversible and the radius revives at later times.
    """
    r = series.radius
    t = series.times
    i_min = int(np.argmin(r))
    if i_min < 4:
        return 0.0
    plateau = r[i_min]
    drop = r[0] - plateau
    if drop <= 1e-10 * max(abs(r[0]), 1e-300):
        return 0.0
    # fit down to 10% of the initial excess, well inside the first collapse
    seg = np.arange(1, i_min + 1)
    excess = (r[seg] - plateau) / drop
    seg = seg[excess > 0.1]
    if len(seg) < 3:
        return 0.0
    y = -np.log((r[seg] - plateau) / drop)
    rate2 = np.polyfit(t[seg] ** 2, y, 1)[0]
    return float(np.sqrt(max(rate2, 0.0)))


def translational_coupling(model: RotatorModel) -> float:
    """Max-entry norm of [A_even, Z_even] on the joint (level x p_z) basis.

    Z is the charge-invariant longitudinal position.  The norm is
    strictly positive for b > 0 -- rotational and longitudinal observable
    positions cannot be diagonalized together -- and vanishes in the
    b -> 0 limit where the branch structure loses its n-dependence.
    """
    if model.pz_grid is None:
        raise GridError("translational_coupling needs a RotatorModel with a pz_grid")
    h = build_hamiltonian(model.energy_model, n_levels=model.n_max, pz_grid=model.pz_grid)
    lam = sign_operator(h)
    n_pz = model.pz_grid.n_points
    psg = PhaseSpaceGrid.conjugate(model.pz_grid, model.units.hbar)
    z_mode = np.kron(np.eye(model.n_max), position_kernel(psg))
    a_mode = np.kron(_bare_ladder(model.n_max), np.eye(n_pz))
    a_even = even_part(charge_invariant(a_mode, h.basis), lam)
    z_even = even_part(charge_invariant(z_mode, h.basis), lam)
    return float(np.abs(commutator(a_even, z_even).mat).max())
