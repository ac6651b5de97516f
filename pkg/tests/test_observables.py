"""Figure observables: momentum/charge/fidelity/orthogonality series, the
position pipeline, densities and particle content."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp
from scipy.optimize import curve_fit

from majorana_eqs.core import (MajoranaState, apply_symmetry, embed, recover)
from majorana_eqs.dynamics import evolve, evolve_dirac
from majorana_eqs.grids import MomentumGrid
from majorana_eqs.observables import (DiracEigenbasis, ObservableSeries,
                                      charge, cross_term_residual,
                                      density_distributions, dirac_spinors,
                                      expect_diagonal, fidelity_global_phase,
                                      mean_momentum, mean_momentum_series,
                                      mean_position, mean_position_swept,
                                      one_sided_derivatives, orthogonality,
                                      particle_antiparticle_populations)


def fit_cosine(times, values):
    """Least-squares A cos(w t + phi) + B fit with an FFT frequency seed."""
    detrended = values - values.mean()
    freqs = np.fft.rfftfreq(times.size, d=times[1] - times[0])
    w0 = 2 * np.pi * freqs[np.argmax(np.abs(np.fft.rfft(detrended)))]
    amp0 = (values.max() - values.min()) / 2

    def model(t, a, w, phi, b):
        return a * np.cos(w * t + phi) + b

    popt, _ = curve_fit(model, times, values,
                        p0=[amp0, w0, 0.0, values.mean()])
    return abs(popt[0]), abs(popt[1])


def plane_wave_ode_oracle(p, m, spinor, mode_sign, t_eval):
    """Independent integration of the two-mode Majorana system.

    The +p and -p spinor amplitudes (u, v) obey
    i du/dt = p sx u - i m sy conj(v),  i dv/dt = -p sx v - i m sy conj(u);
    integrated here with an adaptive RK at tight tolerance.
    """
    sx = np.array([[0, 1], [1, 0]], complex)
    sy = np.array([[0, -1j], [1j, 0]], complex)

    def rhs(_, y):
        u, v = y[:2], y[2:]
        du = -1j * (p * sx @ u - 1j * m * sy @ np.conj(v))
        dv = -1j * (-p * sx @ v - 1j * m * sy @ np.conj(u))
        return np.concatenate([du, dv])

    y0 = np.zeros(4, complex)
    if mode_sign >= 0:
        y0[:2] = spinor
    else:
        y0[2:] = spinor
    sol = solve_ivp(rhs, (0.0, float(t_eval[-1])), y0, t_eval=t_eval,
                    rtol=1e-11, atol=1e-12)
    return sol.y


@pytest.fixture(scope="module")
def packet():
    grid = MomentumGrid.uniform(4.0, 65)
    return MajoranaState.gaussian_packet(grid, 1.0, [1, 1])


@pytest.fixture(scope="module")
def packet_state(packet):
    return embed(packet)


class TestExpectDiagonal:
    def test_zero_mode_has_zero_momentum(self):
        Psi = embed(MajoranaState.plane_wave([1, 0], 0.0))
        for t in (0.0, 1.0, 3.0):
            assert abs(mean_momentum(evolve(Psi, 1.0, t))) < 1e-14

    def test_identity_returns_norm(self, packet_state):
        value = expect_diagonal(packet_state, np.eye(2), np.ones_like)
        assert abs(value - 1.0) < 1e-10

    def test_packet_initial_momentum(self, packet_state):
        assert abs(expect_diagonal(packet_state, np.eye(2), lambda p: p)
                   - 1.0) < 1e-6

    def test_non_hermitian_rejected(self, packet_state):
        with pytest.raises(ValueError):
            expect_diagonal(packet_state, np.array([[0, 1], [0, 0]]),
                            np.ones_like)


class TestMeanMomentum:
    def test_rest_frame_series_vanishes(self):
        Psi = embed(MajoranaState.plane_wave([1, 0], 0.0))
        series = mean_momentum_series(Psi, 1.0, np.arange(0, 8.05, 0.05))
        assert np.max(np.abs(series.values)) < 1e-14

    def test_oscillation_period_matches_dispersion(self):
        Psi = embed(MajoranaState.plane_wave([1, 0], 1.0))
        times = np.arange(0, 8.05, 0.05)
        series = mean_momentum_series(Psi, 1.0, times)
        _, w = fit_cosine(times, series.values)
        period = 2 * np.pi / w
        assert abs(period - np.pi / np.sqrt(2)) < 1e-6
        assert period == pytest.approx(2.2214, abs=2e-4)

    def test_amplitude_follows_closed_form(self):
        # exact law A(p) = p m^2 / (p^2 + m^2): the fractional modulation
        # m^2/E^2 falls off with momentum, and the absolute amplitude is
        # inversely proportional to p once p exceeds m
        times = np.arange(0, 8.05, 0.05)
        amps = {}
        for p in (0.5, 1.0, 2.0):
            Psi = embed(MajoranaState.plane_wave([1, 0], p))
            amps[p], _ = fit_cosine(times,
                                    mean_momentum_series(Psi, 1.0, times).values)
            assert amps[p] == pytest.approx(p / (p ** 2 + 1.0), abs=1e-3)
        assert amps[0.5] / 0.5 > amps[1.0] / 1.0 > amps[2.0] / 2.0
        assert amps[1.0] > amps[2.0]

    def test_matches_ode_oracle(self):
        p, m = 0.7, 1.0
        times = np.linspace(0.0, 5.0, 11)
        y = plane_wave_ode_oracle(p, m, [1, 0], +1, times)
        oracle = p * (np.sum(np.abs(y[:2]) ** 2, axis=0)
                      - np.sum(np.abs(y[2:]) ** 2, axis=0))
        Psi = embed(MajoranaState.plane_wave([1, 0], p))
        values = [mean_momentum(evolve(Psi, m, t)) for t in times]
        assert np.max(np.abs(np.array(values) - oracle)) < 1e-8

    def test_momentum_conserved_only_without_mass(self):
        times = np.arange(0, 4.05, 0.05)
        Psi = embed(MajoranaState.plane_wave([1, 0], 1.0))
        massless = mean_momentum_series(Psi, 0.0, times).values
        massive = mean_momentum_series(Psi, 1.0, times).values
        assert np.max(np.abs(massless - massless[0])) < 1e-12
        assert np.max(np.abs(massive - massive[0])) > 0.1


class TestCharge:
    def test_rest_frame_closed_form(self):
        psi0 = MajoranaState.plane_wave([1, 0], 0.0)
        Psi = embed(psi0)
        for t in (0.0, 0.4, np.pi / 4, 2.0):
            c = charge(recover(evolve(Psi, 1.0, t)), 1.0)
            assert abs(c - np.cos(2 * t)) < 1e-12
        assert abs(charge(recover(evolve(Psi, 1.0, np.pi / 4)), 1.0)) < 1e-12

    def test_initial_charge_at_finite_momentum(self):
        psi = MajoranaState.plane_wave([1, 0], 1.0)
        assert abs(charge(psi, 1.0) - 1 / np.sqrt(2)) < 1e-12

    def test_reduces_to_sigma_z_at_rest(self):
        rng = np.random.default_rng(4)
        spinor = rng.normal(size=2) + 1j * rng.normal(size=2)
        spinor /= np.linalg.norm(spinor)
        psi = MajoranaState.plane_wave(spinor, 0.0)
        sigma_z = abs(spinor[0]) ** 2 - abs(spinor[1]) ** 2
        assert abs(charge(psi, 1.0) - sigma_z) < 1e-12

    def test_dirac_evolution_conserves_charge(self):
        rng = np.random.default_rng(8)
        spinor = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = MajoranaState.plane_wave(spinor, 0.6)
        c0 = charge(psi, 1.0)
        for t in (1.0, 3.0, 7.5):
            assert abs(charge(evolve_dirac(psi, 1.0, t), 1.0) - c0) < 1e-12


class TestDiracEigenbasis:
    @pytest.mark.parametrize("p,m", [(0.5, 1.0), (1.0, 1.0), (-2.0, 0.7)])
    def test_orthonormal_eigenvectors(self, p, m):
        u_plus, u_minus = dirac_spinors(p, m)
        assert abs(np.vdot(u_plus, u_plus) - 1) < 1e-14
        assert abs(np.vdot(u_minus, u_minus) - 1) < 1e-14
        assert abs(np.vdot(u_plus, u_minus)) < 1e-14
        h = np.array([[m, p], [p, -m]])
        e = np.hypot(p, m)
        assert np.max(np.abs(h @ u_plus - e * u_plus)) < 1e-12
        assert np.max(np.abs(h @ u_minus + e * u_minus)) < 1e-12

    def test_rest_frame_convention(self):
        u_plus, u_minus = dirac_spinors(0.0, 1.0)
        assert np.allclose(u_plus, [1, 0])
        assert abs(abs(u_minus[1]) - 1) < 1e-14

    def test_basis_object_checks_momentum(self):
        basis = DiracEigenbasis(p=1.0, m=1.0)
        assert basis.energy == pytest.approx(np.sqrt(2.0))
        basis.spinors(-1.0)
        with pytest.raises(ValueError):
            basis.spinors(0.5)


class TestFidelityGlobalPhase:
    def test_initial_time_unity(self):
        for theta in (0.2, 1.0, np.pi / 2):
            assert fidelity_global_phase(1.0, 1.0, theta, 0.0) == pytest.approx(1.0)

    def test_rest_frame_closed_form(self):
        for t in (0.3, np.pi / 4, 1.9):
            f = fidelity_global_phase(0.0, 1.0, np.pi / 2, t)
            assert abs(f - np.cos(2 * t) ** 2) < 1e-12
        assert fidelity_global_phase(0.0, 1.0, np.pi / 2, np.pi / 4) < 1e-12

    def test_zero_phase_is_trivial(self):
        for t in (0.5, 2.0, 6.0):
            assert abs(fidelity_global_phase(1.0, 1.0, 0.0, t) - 1.0) < 1e-12


class TestOrthogonality:
    def test_initial_time_zero(self):
        for variant in ("perp", "perp_prime"):
            assert orthogonality(1.0, 1.0, 0.0, variant) < 1e-14

    def test_rest_frame_closed_form(self):
        for t in (0.3, 0.9, 2.2):
            assert abs(orthogonality(0.0, 1.0, t, "perp")
                       - np.sin(2 * t) ** 2) < 1e-12

    @pytest.mark.parametrize("t", [1.0, 2.0, 4.0])
    def test_prime_variant_stays_zero(self, t):
        assert orthogonality(1.0, 1.0, t, "perp_prime") < 1e-10

    def test_unknown_variant_rejected(self):
        with pytest.raises(ValueError):
            orthogonality(1.0, 1.0, 1.0, "diagonal")

    def test_oscillation_amplitude_decreases_with_momentum(self):
        # the breaking is mass-driven: its amplitude m^2/(p^2 + m^2)
        # shrinks as the initial momentum grows
        times = np.arange(0.0, 8.01, 0.05)
        amps = [max(orthogonality(p, 1.0, t, "perp") for t in times)
                for p in (0.25, 0.5, 1.0)]
        assert amps[0] > amps[1] > amps[2]
        for p, amp in zip((0.25, 0.5, 1.0), amps):
            assert amp == pytest.approx(1.0 / (p ** 2 + 1.0), abs=1e-3)


class TestMeanPosition:
    def test_symmetric_packet_starts_at_origin(self, packet_state):
        assert abs(mean_position(packet_state)) < 1e-8

    def test_cross_term_vanishes(self, packet_state):
        assert cross_term_residual(packet_state) < 1e-10
        assert cross_term_residual(evolve(packet_state, 1.0, 3.0)) < 1e-10

    def test_swept_pipeline_matches_fast_route(self):
        grid = MomentumGrid.uniform(4.0, 33)
        psi = MajoranaState.gaussian_packet(grid, 1.0, [1, 1])
        Psi = embed(psi)
        for t in (0.5, 2.0):
            fast = mean_position(evolve(Psi, 1.0, t))
            swept = mean_position_swept(Psi, 1.0, t)
            assert abs(fast - swept) < 1e-12

    def test_massless_packet_moves_ballistically(self):
        grid = MomentumGrid.uniform(4.0, 65)
        psi = MajoranaState.gaussian_packet(grid, 1.0, [1, 1])
        Psi = embed(psi)
        for t in (1.0, 2.5):
            # (1,1)/sqrt(2) has unit velocity under the massless generator
            assert abs(mean_position(evolve(Psi, 0.0, t)) - t) < 1e-8

    def test_mode_grid_rejected(self):
        Psi = embed(MajoranaState.plane_wave([1, 0], 1.0))
        with pytest.raises(ValueError):
            mean_position(Psi)


class TestDensities:
    def test_initial_momentum_density_is_shifted_gaussian(self, packet_state):
        grid = packet_state.grid
        dens, _ = density_distributions(packet_state)
        w = grid.weights
        mean = np.sum(w * grid.points * dens)
        sigma = np.sqrt(np.sum(w * (grid.points - mean) ** 2 * dens))
        assert abs(mean - 1.0) < 1e-9
        assert abs(sigma - 1 / (2 * np.sqrt(2))) < 1e-9
        gauss = np.exp(-(grid.points - 1.0) ** 2 / (2 * sigma ** 2))
        gauss /= np.sum(w * gauss)
        assert np.max(np.abs(dens - gauss)) < 1e-9

    def test_densities_normalized(self, packet_state):
        state = evolve(packet_state, 1.0, 3.0)
        p_dens, x_dens = density_distributions(state)
        grid = state.grid
        assert abs(np.sum(grid.weights * p_dens) - 1.0) < 1e-8
        assert abs(np.sum(grid.spatial.weights * x_dens) - 1.0) < 1e-8

    def test_position_density_equals_component_sum(self, packet_state):
        state = evolve(packet_state, 1.0, 2.0)
        _, x_dens = density_distributions(state)
        pos = state.position_representation()
        component_sum = np.sum(np.abs(pos) ** 2, axis=1)
        assert np.max(np.abs(x_dens - component_sum)) < 1e-10


class TestPopulations:
    def test_stationary_particle_state(self):
        u_plus, _ = dirac_spinors(1.0, 1.0)
        psi = MajoranaState.plane_wave(u_plus, 1.0)
        for t in (0.0, 1.0, 4.0):
            pops = particle_antiparticle_populations(
                evolve_dirac(psi, 1.0, t), 1.0)
            assert pops[0] == pytest.approx(1.0, abs=1e-12)
            assert pops[1] == pytest.approx(0.0, abs=1e-12)

    def test_packet_populations_sum_to_one(self, packet_state):
        psi_t = recover(evolve(packet_state, 1.0, 2.0))
        pops = particle_antiparticle_populations(psi_t, 1.0)
        assert pops[0] + pops[1] == pytest.approx(1.0, abs=1e-10)

    def test_charge_conjugation_swaps_populations(self, packet_state):
        pre = evolve(packet_state, 1.0, 4.0)
        post = apply_symmetry(pre, "C")
        pops_pre = particle_antiparticle_populations(recover(pre), 1.0)
        pops_post = particle_antiparticle_populations(recover(post), 1.0)
        assert abs(pops_pre[0] - pops_post[1]) < 1e-10
        assert abs(pops_pre[1] - pops_post[0]) < 1e-10


class TestProtocols:
    def test_time_reversal_revival(self, packet_state):
        pre = evolve(packet_state, 1.0, 4.0)
        final = evolve(apply_symmetry(pre, "T"), 1.0, 4.0)
        assert abs(mean_position(final) - mean_position(packet_state)) < 1e-6
        assert abs(mean_momentum(final) + mean_momentum(packet_state)) < 1e-6

    def test_time_reversal_momentum_flip_and_density_continuity(self, packet_state):
        pre = evolve(packet_state, 1.0, 4.0)
        post = apply_symmetry(pre, "T")
        assert abs(mean_momentum(post) + mean_momentum(pre)) < 1e-10
        jump = np.abs(recover(post).position_density()
                      - recover(pre).position_density())
        assert np.max(jump) < 1e-10

    def test_charge_conjugation_keeps_trajectory(self, packet_state):
        pre = evolve(packet_state, 1.0, 4.0)
        post = apply_symmetry(pre, "C")
        assert abs(mean_momentum(post) + mean_momentum(pre)) < 1e-10
        assert abs(mean_position(post) - mean_position(pre)) < 1e-10
        # the conjugated branch continues the uninterrupted trajectory
        for s in (0.5, 2.0):
            assert abs(mean_position(evolve(post, 1.0, s))
                       - mean_position(evolve(packet_state, 1.0, 4.0 + s))) < 1e-8

    def test_majorana_and_dirac_position_densities_agree(self, packet):
        Psi = embed(packet)
        for t in (0.0, 1.0, 3.0, 6.0, 8.0):
            majorana = recover(evolve(Psi, 1.0, t)).position_density()
            dirac = evolve_dirac(packet, 1.0, t).position_density()
            assert np.max(np.abs(majorana - dirac)) < 1e-3


class TestObservableSeries:
    def test_length_mismatch_rejected(self):
        with pytest.raises(ValueError):
            ObservableSeries(times=np.array([0.0, 1.0]),
                             values=np.array([1.0]))

    def test_non_increasing_times_rejected(self):
        with pytest.raises(ValueError):
            ObservableSeries(times=np.array([0.0, 0.0]),
                             values=np.array([1.0, 2.0]))

    def test_one_sided_derivatives_on_smooth_series(self):
        times = np.arange(0.0, 2.05, 0.05)
        series = ObservableSeries(times=times, values=np.sin(times))
        left, right = one_sided_derivatives(series, 1.0)
        assert left == pytest.approx(np.cos(1.0), abs=1e-3)
        assert right == pytest.approx(np.cos(1.0), abs=1e-3)
