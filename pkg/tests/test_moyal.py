import numpy as np
import pytest

from fvps import (
    ChargeBranchState,
    GridError,
    MomentumGrid,
    PhaseSpaceGrid,
    PolySymbol,
    StepSizeError,
    anti_moyal_bracket,
    bracket_with_energy,
    classical_limit_gap,
    energy,
    evolve_even,
    evolve_odd,
    evolve_timestep_reference,
    gaussian_state,
    moments,
    moyal_bracket,
    phase_space_quadrature,
    poisson_bracket,
    star_product,
    wigner_even,
    wigner_odd,
)
from fvps.moyal import propagator_phases


def band1d(seed, n, kmax=3):
    rng = np.random.default_rng(seed)
    c = np.zeros(n, dtype=complex)
    for a in range(-kmax, kmax + 1):
        c[a % n] = rng.normal() + 1j * rng.normal()
    return np.fft.ifft(c).real


def band2d(seed, n, kmax=3):
    rng = np.random.default_rng(seed)
    c = np.zeros((n, n), dtype=complex)
    for a in range(-kmax, kmax + 1):
        for b in range(-kmax, kmax + 1):
            c[a % n, b % n] = rng.normal() + 1j * rng.normal()
    return np.fft.ifft2(c).real.astype(complex)


@pytest.fixture(scope="module")
def smallgrid():
    grid = MomentumGrid(32, np.pi)
    return PhaseSpaceGrid.conjugate(grid)


class TestPolyStar:
    def test_canonical_first_order(self):
        qp = star_product(PolySymbol.q(), PolySymbol.p())
        assert qp.coeffs[1, 1] == pytest.approx(1.0)
        assert qp.coeffs[0, 0] == pytest.approx(0.5j, abs=1e-10)

    def test_canonical_bracket_exact(self):
        mb = moyal_bracket(PolySymbol.q(), PolySymbol.p())
        assert mb.coeffs.shape == (1, 1) or np.count_nonzero(mb.coeffs) == 1
        assert mb.coeffs[0, 0] == pytest.approx(1.0)

    def test_quadratic_bracket_is_classical(self):
        p2 = star_product(PolySymbol.p(), PolySymbol.p())
        mb = moyal_bracket(p2, PolySymbol.q())
        # expect -2p
        expect = PolySymbol(np.array([[0.0, -2.0]]))
        diff = (mb - expect).coeffs
        assert np.abs(diff).max() < 1e-10

    def test_anti_bracket_of_canonical_pair(self):
        ab = anti_moyal_bracket(PolySymbol.q(), PolySymbol.p())
        # (q*p + p*q)/2 = qp, the i hbar/2 terms cancel
        assert ab.coeffs[1, 1] == pytest.approx(1.0)
        assert abs(ab.coeffs[0, 0]) < 1e-12

    def test_constant_is_identity(self, smallgrid):
        p3 = star_product(PolySymbol.constant(1.0), PolySymbol.p() * 3.0)
        assert np.abs((p3 - PolySymbol.p() * 3.0).coeffs).max() < 1e-14

    def test_evaluate_on_grid(self, smallgrid):
        s = PolySymbol.q() * PolySymbol.q() + PolySymbol.p() * 2.0
        field = s.sample(smallgrid)
        direct = smallgrid.q_nodes[None, :] ** 2 + 2.0 * smallgrid.p_nodes[:, None]
        assert np.abs(field - direct).max() < 1e-12


class TestFieldStar:
    def test_identity_symbol(self, smallgrid):
        b = band2d(2, 32)
        one = np.ones((32, 32), dtype=complex)
        assert np.abs(star_product(one, b, smallgrid) - b).max() < 1e-14

    def test_associativity_band_limited(self, smallgrid):
        a, b, c = band2d(1, 32), band2d(2, 32), band2d(3, 32)
        lhs = star_product(star_product(a, b, smallgrid), c, smallgrid)
        rhs = star_product(a, star_product(b, c, smallgrid), smallgrid)
        assert np.abs(lhs - rhs).max() < 1e-8

    def test_small_hbar_pointwise_product(self, smallgrid):
        a, b = band2d(4, 32), band2d(5, 32)
        prod = star_product(a, b, smallgrid, hbar=1e-7)
        assert np.abs(prod - a * b).max() < 1e-10

    def test_scalar_poisson_limit_order_two(self, smallgrid):
        a, b = band2d(1, 32), band2d(2, 32)
        pb = poisson_bracket(a, b, smallgrid)
        hbars = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]
        gaps = [
            np.abs(moyal_bracket(a, b, smallgrid, hbar=hb) - pb).max() for hb in hbars
        ]
        slope = np.polyfit(np.log(hbars), np.log(gaps), 1)[0]
        assert slope == pytest.approx(2.0, abs=0.1)

    def test_requires_grid(self):
        with pytest.raises(GridError):
            star_product(np.ones((8, 8)), np.ones((8, 8)))

    def test_grid_mismatch(self, smallgrid):
        with pytest.raises(GridError):
            star_product(np.ones((16, 16), dtype=complex), np.ones((16, 16), dtype=complex), smallgrid)


class TestClassicalLimitGap:
    hbars = [1e-1, 3e-2, 1e-2, 3e-3, 1e-3]

    def test_commuting_matrices_reach_poisson(self, smallgrid):
        fq = band1d(7, 32)[None, :] * np.ones((32, 1))
        gp = band1d(8, 32)[:, None] * np.ones((1, 32))
        a = np.einsum("ij,pq->ijpq", np.diag([1.0, 2.0]), fq).astype(complex)
        b = np.einsum("ij,pq->ijpq", np.eye(2), gp).astype(complex)
        rep = classical_limit_gap(a, b, smallgrid, self.hbars)
        assert rep.exponent == pytest.approx(2.0, abs=0.2)
        assert rep.classical_limit_attained

    def test_noncommuting_matrices_diverge(self, smallgrid):
        sx = np.array([[0.0, 1.0], [1.0, 0.0]])
        sy = np.array([[0.0, -1j], [1j, 0.0]])
        fq = band1d(7, 32)[None, :] * np.ones((32, 1))
        gp = band1d(8, 32)[:, None] * np.ones((1, 32))
        a = np.einsum("ij,pq->ijpq", sx, fq).astype(complex)
        b = np.einsum("ij,pq->ijpq", sy, gp).astype(complex)
        rep = classical_limit_gap(a, b, smallgrid, self.hbars)
        assert rep.exponent == pytest.approx(-1.0, abs=0.2)
        assert not rep.classical_limit_attained

    def test_equal_symbols_zero_bracket(self, smallgrid):
        sx = np.array([[0.0, 1.0], [1.0, 0.0]])
        fq = band1d(7, 32)[None, :] * np.ones((32, 1))
        a = np.einsum("ij,pq->ijpq", sx, fq).astype(complex)
        rep = classical_limit_gap(a, a, smallgrid, self.hbars)
        assert rep.exponent is None
        assert max(rep.gaps) < 1e-14


@pytest.fixture(scope="module")
def packet():
    grid = MomentumGrid(256, 20.0)
    ps = PhaseSpaceGrid.conjugate(grid)
    st = gaussian_state(grid, lam=2.0)
    w0 = wigner_even(st, +1, ps)
    return grid, ps, st, w0


class TestEvolveEven:
    def test_time_zero_identity(self, packet):
        _, ps, _, w0 = packet
        assert np.abs(evolve_even(w0, energy, 0.0, ps) - w0).max() < 1e-14

    def test_matches_amplitude_pipeline(self, packet):
        grid, ps, st, w0 = packet
        w_prop = evolve_even(w0, energy, 5.0, ps)
        phi_t = st.phi_plus * np.exp(-1j * energy(grid.nodes) * 5.0)
        w_wave = wigner_even(ChargeBranchState(grid, phi_plus=phi_t), +1, ps)
        assert np.abs(w_prop - w_wave).max() < 1e-8

    def test_composition(self, packet):
        _, ps, _, w0 = packet
        w_ab = evolve_even(evolve_even(w0, energy, 2.0, ps), energy, 3.0, ps)
        w_c = evolve_even(w0, energy, 5.0, ps)
        assert np.abs(w_ab - w_c).max() < 1e-12

    def test_mass_conserved(self, packet):
        _, ps, _, w0 = packet
        w_t = evolve_even(w0, energy, 7.3, ps)
        assert phase_space_quadrature(w_t, ps).real == pytest.approx(
            phase_space_quadrature(w0, ps).real, abs=1e-12
        )

    def test_nonrelativistic_drift(self):
        grid = MomentumGrid(512, 0.5)
        ps = PhaseSpaceGrid.conjugate(grid)
        st = gaussian_state(grid, lam=0.01, p_bar=0.3)
        w0 = wigner_even(st, +1, ps)
        w1 = evolve_even(w0, lambda p: p**2 / 2, 1.0, ps)
        drift = moments(w1, ps).mean_q - moments(w0, ps).mean_q
        assert drift == pytest.approx(0.3, abs=1e-4)

    def test_propagator_blind_to_initial_theory(self, packet):
        # identical phases whatever field they are applied to: the
        # difference between theories lives only in the initial data
        _, ps, _, _ = packet
        ph1 = propagator_phases(energy, 3.0, ps, "even")
        ph2 = propagator_phases(energy, 3.0, ps, "even")
        assert np.array_equal(ph1, ph2)

    def test_unity_kernel_initial_data_evolves_identically(self, packet):
        grid, ps, st, _ = packet
        from fvps import EPS_UNITY

        w_unit = wigner_even(st, +1, ps, eps_mode=EPS_UNITY)
        w_t = evolve_even(w_unit, energy, 5.0, ps)
        phi_t = st.phi_plus * np.exp(-1j * energy(grid.nodes) * 5.0)
        w_wave = wigner_even(
            ChargeBranchState(grid, phi_plus=phi_t), +1, ps, eps_mode=EPS_UNITY
        )
        assert np.abs(w_t - w_wave).max() < 1e-8


class TestEvolveOdd:
    def test_matches_amplitude_pipeline(self, packet):
        grid, ps, st, _ = packet
        mixed = ChargeBranchState(
            grid,
            phi_plus=st.phi_plus / np.sqrt(2),
            phi_minus=np.roll(st.phi_plus, 3) / np.sqrt(2),
        )
        w0 = wigner_odd(mixed, -1, ps)
        w_prop = evolve_odd(w0, energy, 5.0, ps)
        evolved = ChargeBranchState(
            grid,
            phi_plus=mixed.phi_plus * np.exp(-1j * energy(grid.nodes) * 5.0),
            phi_minus=mixed.phi_minus * np.exp(+1j * energy(grid.nodes) * 5.0),
        )
        w_wave = wigner_odd(evolved, -1, ps)
        assert np.abs(w_prop - w_wave).max() < 1e-8

    def test_other_ordering_via_conjugation(self, packet):
        grid, ps, st, _ = packet
        mixed = ChargeBranchState(
            grid,
            phi_plus=st.phi_plus / np.sqrt(2),
            phi_minus=np.roll(st.phi_plus, 3) / np.sqrt(2),
        )
        w_plus = wigner_odd(mixed, +1, ps)
        w_minus = wigner_odd(mixed, -1, ps)
        # evolve the -1 ordering, map back through W_- = -conj(W_+)
        w_minus_t = evolve_odd(w_minus, energy, 4.0, ps)
        w_plus_t = -np.conj(w_minus_t)
        evolved = ChargeBranchState(
            grid,
            phi_plus=mixed.phi_plus * np.exp(-1j * energy(grid.nodes) * 4.0),
            phi_minus=mixed.phi_minus * np.exp(+1j * energy(grid.nodes) * 4.0),
        )
        assert np.abs(w_plus_t - wigner_odd(evolved, +1, ps)).max() < 1e-8


class TestBracketWithEnergy:
    def test_even_generator_matches_propagator_derivative(self, packet):
        _, ps, _, w0 = packet
        dt = 1e-6
        ddt = (evolve_even(w0, energy, dt, ps) - evolve_even(w0, energy, -dt, ps)) / (2 * dt)
        br = bracket_with_energy(energy, w0, ps, kind="moyal")
        assert np.abs(ddt - br.real).max() < 1e-6

    def test_odd_generator_with_anti_bracket(self, packet):
        grid, ps, st, _ = packet
        mixed = ChargeBranchState(
            grid,
            phi_plus=st.phi_plus / np.sqrt(2),
            phi_minus=np.roll(st.phi_plus, 3) / np.sqrt(2),
        )
        w0 = wigner_odd(mixed, -1, ps)
        dt = 1e-6
        ddt = (evolve_odd(w0, energy, dt, ps) - evolve_odd(w0, energy, -dt, ps)) / (2 * dt)
        anti = bracket_with_energy(energy, w0, ps, kind="anti")
        assert np.abs(ddt - (-2j) * anti).max() < 1e-6

    def test_consistent_with_field_star_product(self):
        # the exact mode-shift path agrees with the generic spectral star
        # for a band-limited energy-like symbol of p alone
        grid = MomentumGrid(32, np.pi)
        ps = PhaseSpaceGrid.conjugate(grid)
        e_field = (np.cos(grid.nodes) + 2.0)[:, None] * np.ones((1, 32)) + 0j
        w = band2d(11, 32)
        brack_fast = bracket_with_energy(
            lambda p: np.cos(p) + 2.0, w, ps, kind="moyal"
        )
        brack_star = moyal_bracket(e_field, w, ps, hbar=1.0)
        assert np.abs(brack_fast - brack_star).max() < 1e-10


class TestTimestepReference:
    def setup_method(self):
        self.grid = MomentumGrid(128, 5.0)
        self.ps = PhaseSpaceGrid.conjugate(self.grid)
        st = gaussian_state(self.grid, sigma=2.0, p_bar=0.5)
        self.w0 = wigner_even(st, +1, self.ps)
        self.efn = lambda p: p**2 / 2

    def test_time_zero_identity(self):
        out = evolve_timestep_reference(self.w0, self.efn, 0.0, 1, self.ps)
        assert np.abs(out - self.w0).max() < 1e-14

    def test_converges_to_exact(self):
        exact = evolve_even(self.w0, self.efn, 2.0, self.ps)
        approx = evolve_timestep_reference(self.w0, self.efn, 2.0, 1000, self.ps)
        assert np.abs(approx - exact).max() < 1e-6

    def test_second_order(self):
        exact = evolve_even(self.w0, self.efn, 2.0, self.ps)
        e1 = np.abs(evolve_timestep_reference(self.w0, self.efn, 2.0, 400, self.ps) - exact).max()
        e2 = np.abs(evolve_timestep_reference(self.w0, self.efn, 2.0, 800, self.ps) - exact).max()
        assert e1 / e2 == pytest.approx(4.0, rel=0.2)

    def test_stability_guard(self):
        with pytest.raises(StepSizeError):
            evolve_timestep_reference(self.w0, self.efn, 100.0, 2, self.ps)
