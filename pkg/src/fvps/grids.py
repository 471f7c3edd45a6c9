"""Units, sampling grids, quadrature, and transform conventions.

Everything downstream integrates over momentum with a periodic Riemann sum
(the trapezoid rule for our symmetric grids), which is spectrally accurate
for smooth decaying integrands.  The momentum->position transform uses the
kernel exp(-i p q / hbar) so that phase-space correlation integrals built
later reproduce their continuum definitions without stray signs.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ConjugacyError, GridError


@dataclass(frozen=True)
class UnitSystem:
    """Mass, speed of light, and reduced Planck constant.

    Defaults to natural units m = c = hbar = 1, in which the Compton
    length hbar/(m c) is also 1.  Positions are then measured in Compton
    lengths and momenta in units of m c.
    """

    m: float = 1.0
    c: float = 1.0
    hbar: float = 1.0

    def __post_init__(self):
        if self.m <= 0 or self.c <= 0 or self.hbar <= 0:
            raise ValueError("mass, c, and hbar must all be strictly positive")

    @property
    def mc(self) -> float:
        return self.m * self.c

    @property
    def mc2(self) -> float:
        return self.m * self.c**2

    @property
    def compton_length(self) -> float:
        return self.hbar / (self.m * self.c)


NATURAL = UnitSystem()


def _is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


@dataclass(frozen=True)
class MomentumGrid:
    """Uniform symmetric momentum lattice p_k = -p_max + k dp.

    n_points must be a power of two (>= 8) so spectral transforms stay
    cheap; the lattice is symmetric about zero up to the single-node
    offset of an even grid.
    """

    n_points: int
    p_max: float

    def __post_init__(self):
        if self.n_points < 8 or not _is_power_of_two(self.n_points):
            raise GridError(
                f"n_points must be a power of two >= 8, got {self.n_points}"
            )
        if self.p_max <= 0:
            raise GridError(f"p_max must be positive, got {self.p_max}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.p_max / self.n_points

    @property
    def nodes(self) -> np.ndarray:
        return -self.p_max + self.spacing * np.arange(self.n_points)

    def __len__(self) -> int:
        return self.n_points


def default_p_max(units: UnitSystem, sigma: float) -> float:
    """Momentum window capturing relativistic tails of a width-sigma packet."""
    return max(20.0 * units.mc, 10.0 * units.hbar / sigma)


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Momentum axis paired with a uniform position axis.

    Spectral (Fourier-pair) operations additionally require conjugacy,
    dq * dp * n_q = 2 pi hbar, which `conjugate` builds by construction.
    """

    momentum: MomentumGrid
    n_q: int
    q_max: float
    hbar: float = 1.0

    def __post_init__(self):
        if self.n_q < 8 or not _is_power_of_two(self.n_q):
            raise GridError(f"n_q must be a power of two >= 8, got {self.n_q}")
        if self.q_max <= 0:
            raise GridError(f"q_max must be positive, got {self.q_max}")

    @classmethod
    def conjugate(cls, momentum: MomentumGrid, hbar: float = 1.0) -> "PhaseSpaceGrid":
        """Position axis that is the exact discrete Fourier dual of `momentum`."""
        n_q = momentum.n_points
        dq = 2.0 * np.pi * hbar / (momentum.spacing * n_q)
        return cls(momentum=momentum, n_q=n_q, q_max=0.5 * n_q * dq, hbar=hbar)

    @property
    def dq(self) -> float:
        return 2.0 * self.q_max / self.n_q

    @property
    def q_nodes(self) -> np.ndarray:
        return -self.q_max + self.dq * np.arange(self.n_q)

    @property
    def p_nodes(self) -> np.ndarray:
        return self.momentum.nodes

    @property
    def dp(self) -> float:
        return self.momentum.spacing

    @property
    def is_conjugate(self) -> bool:
        target = 2.0 * np.pi * self.hbar
        return abs(self.dq * self.dp * self.n_q - target) <= 1e-9 * target

    def require_conjugate(self):
        if not self.is_conjugate:
            raise ConjugacyError(
                "spectral transform requires dq*dp*n_q = 2*pi*hbar; "
                f"got {self.dq * self.dp * self.n_q:.6g} vs {2 * np.pi * self.hbar:.6g}"
            )


def quadrature(values: np.ndarray, grid: MomentumGrid) -> complex:
    """Integrate sampled values over the momentum grid.

    Periodic Riemann sum = trapezoid rule here; linear in `values`.
    """
    values = np.asarray(values)
    if values.shape[-1] != grid.n_points:
        raise GridError(
            f"values length {values.shape[-1]} != grid length {grid.n_points}"
        )
    return values.sum(axis=-1) * grid.spacing


def phase_space_quadrature(field: np.ndarray, psgrid: PhaseSpaceGrid) -> complex:
    """Integrate a (n_p, n_q) field over dp dq."""
    field = np.asarray(field)
    if field.shape != (psgrid.momentum.n_points, psgrid.n_q):
        raise GridError(
            f"field shape {field.shape} != grid shape "
            f"({psgrid.momentum.n_points}, {psgrid.n_q})"
        )
    return field.sum() * psgrid.dp * psgrid.dq


def fourier_pair(values: np.ndarray, psgrid: PhaseSpaceGrid, direction: str = "forward") -> np.ndarray:
    """Unitary transform between the momentum and position axes.

    forward:  psi(q_m) = (dp / sqrt(2 pi hbar)) sum_k phi(p_k) exp(+i p_k q_m / hbar)
    inverse:  phi(p_k) = (dq / sqrt(2 pi hbar)) sum_m psi(q_m) exp(-i p_k q_m / hbar)

    The forward sign makes the position operator +i hbar d/dp in the
    momentum representation, which is the orientation the phase-space
    correlation kernel exp(-i P q / hbar) assumes (its p-marginal is then
    |psi(q)|^2).  Requires conjugate axes; forward o inverse is the
    identity to machine precision and Parseval holds under the grid
    quadrature weights.
    """
    psgrid.require_conjugate()
    values = np.asarray(values, dtype=complex)
    n = psgrid.momentum.n_points
    hbar = psgrid.hbar
    p0 = psgrid.momentum.nodes[0]
    q0 = psgrid.q_nodes[0]
    dp = psgrid.dp
    dq = psgrid.dq

    if direction == "forward":
        if values.shape[-1] != n:
            raise GridError(f"expected momentum samples of length {n}")
        pre = np.exp(1j * dp * q0 * np.arange(n) / hbar)
        post = np.exp(1j * p0 * psgrid.q_nodes / hbar)
        return (dp / np.sqrt(2 * np.pi * hbar)) * post * n * np.fft.ifft(values * pre)
    if direction == "inverse":
        if values.shape[-1] != psgrid.n_q:
            raise GridError(f"expected position samples of length {psgrid.n_q}")
        pre = np.exp(-1j * p0 * dq * np.arange(psgrid.n_q) / hbar)
        post = np.exp(-1j * psgrid.momentum.nodes * q0 / hbar)
        return (dq / np.sqrt(2 * np.pi * hbar)) * post * np.fft.fft(values * pre)
    raise ValueError(f"direction must be 'forward' or 'inverse', got {direction!r}")
