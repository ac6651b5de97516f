"""Propagators, block decomposition and the two oracle integrators."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.linalg import expm

from majorana_eqs.core import embed, recover, state_fidelity
from majorana_eqs.dynamics import (S_MATRIX, block_hamiltonians,
                                   enlarged_hamiltonian,
                                   evolve, evolve_dirac,
                                   evolve_majorana_direct, propagate_blocks,
                                   propagate_mode, propagate_pair, propagator)
from majorana_eqs.grids import MomentumGrid
from majorana_eqs.core import MajoranaState
from majorana_eqs.observables import charge

finite = st.floats(min_value=-3.0, max_value=3.0, allow_nan=False)
times = st.floats(min_value=0.0, max_value=8.0, allow_nan=False)


def random_chi(seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=4) + 1j * rng.normal(size=4)
    return v / np.linalg.norm(v)


class TestEnlargedHamiltonian:
    @pytest.mark.parametrize("p,m", [(0.0, 1.0), (1.0, 1.0), (2.5, 0.3)])
    def test_hermitian_with_doubly_degenerate_gap(self, p, m):
        h = enlarged_hamiltonian(p, m)
        assert np.max(np.abs(h - h.conj().T)) < 1e-14
        vals = np.sort(np.linalg.eigvalsh(h))
        e = np.hypot(p, m)
        assert np.allclose(vals, [-e, -e, e, e], atol=1e-12)

    def test_explicit_entries(self):
        h = enlarged_hamiltonian(0.7, 1.3)
        expected = np.array([
            [0, 0.7, 0, 1.3j],
            [0.7, 0, -1.3j, 0],
            [0, 1.3j, 0, 0.7],
            [-1.3j, 0, 0.7, 0]])
        assert np.max(np.abs(h - expected)) < 1e-15


class TestPropagateMode:
    def test_zero_time_is_identity(self):
        chi = random_chi(0)
        assert np.allclose(propagate_mode(chi, 1.2, 0.7, 0.0), chi)

    def test_rest_frame_closed_form(self):
        Psi = embed(MajoranaState.plane_wave([1, 0], 0.0))
        for t in (0.4, 1.0, np.pi / 2):
            psi_t = recover(evolve(Psi, 1.0, t))
            assert np.allclose(psi_t.amplitudes[0],
                               [np.cos(t), -1j * np.sin(t)], atol=1e-12)

    @given(p=finite, m=finite, t=times)
    @settings(max_examples=80, deadline=None)
    def test_unitarity(self, p, m, t):
        chi = random_chi(7)
        out = propagate_mode(chi, p, m, t)
        assert abs(np.linalg.norm(out) - 1.0) < 1e-12

    @given(p=finite, m=finite, t1=times, t2=times)
    @settings(max_examples=60, deadline=None)
    def test_composition(self, p, m, t1, t2):
        chi = random_chi(11)
        once = propagate_mode(chi, p, m, t1 + t2)
        twice = propagate_mode(propagate_mode(chi, p, m, t1), p, m, t2)
        assert np.max(np.abs(once - twice)) < 1e-10

    @pytest.mark.parametrize("p,m,t", [(0.5, 1.0, 1.3), (2.0, 0.4, 3.1)])
    def test_matches_dense_matrix_exponential(self, p, m, t):
        u = propagator(p, m, t)
        u_ref = expm(-1j * enlarged_hamiltonian(p, m) * t)
        assert np.max(np.abs(u - u_ref)) < 1e-12

    def test_time_reversal_identity(self):
        # evolving, reversing, evolving again undoes the evolution
        t_mat = np.real(1j * np.kron(np.diag([1, -1]),
                                     np.array([[0, -1j], [1j, 0]])))
        for p, m, t in [(0.5, 1.0, 2.0), (1.0, 1.0, 4.0)]:
            chi = random_chi(3)
            u = propagator(p, m, t)
            out = u @ (t_mat @ (u @ chi))
            assert np.max(np.abs(out - t_mat @ chi)) < 1e-10


class TestBlocks:
    def test_s_matrix_orthogonal(self):
        assert np.max(np.abs(S_MATRIX.T @ S_MATRIX - np.eye(4))) < 1e-14

    @pytest.mark.parametrize("p,m", [(1.0, 1.0), (0.3, 2.0)])
    def test_block_diagonalization(self, p, m):
        h = enlarged_hamiltonian(p, m)
        rotated = S_MATRIX.T @ h @ S_MATRIX
        h_plus, h_minus = block_hamiltonians(p, m)
        expected = np.zeros((4, 4), complex)
        expected[:2, :2] = h_plus
        expected[2:, 2:] = h_minus
        assert np.max(np.abs(rotated - expected)) < 1e-14

    def test_block_entries(self):
        h_plus, h_minus = block_hamiltonians(0.7, 1.1)
        assert h_plus[0, 1] == pytest.approx(0.7 + 1.1j)
        assert h_minus[0, 1] == pytest.approx(0.7 - 1.1j)

    @pytest.mark.parametrize("p,m", [(1.0, 1.0), (2.0, 0.5)])
    def test_block_eigenvalues_match_dispersion(self, p, m):
        for sign in (+1, -1):
            h = block_hamiltonians(p, m)[0 if sign > 0 else 1]
            vals = np.sort(np.linalg.eigvalsh(h))
            e = np.hypot(p, m)
            assert np.allclose(vals, [-e, e], atol=1e-12)

    def test_blocks_consistent_with_mode_propagation(self):
        p, m, t = 1.0, 1.0, 2.0
        chi = random_chi(5)
        blocks = S_MATRIX.T @ chi
        bp, bm = propagate_blocks(blocks[:2], blocks[2:], p, m, t)
        recombined = S_MATRIX @ np.concatenate([bp, bm])
        direct = propagate_mode(chi, p, m, t)
        assert np.max(np.abs(recombined - direct)) < 1e-12

    def test_zero_time_identity(self):
        bp, bm = propagate_blocks([1, 0], [0, 1], 0.7, 0.3, 0.0)
        assert np.allclose(bp, [1, 0]) and np.allclose(bm, [0, 1])


class TestPropagatePair:
    def test_degenerate_pair_matches_blocks(self):
        chi_a, chi_b = np.array([1.0, 0]), np.array([0, 1.0])
        for sign in (+1, -1):
            a, b = propagate_pair(chi_a, chi_b, 1.0, 1.0, 1.0, 2.0, sign)
            ra, _ = propagate_blocks(chi_a, chi_a, 1.0, 1.0, 2.0)
            if sign < 0:
                _, ra = propagate_blocks(chi_a, chi_a, 1.0, 1.0, 2.0)
            assert np.max(np.abs(a - ra)) < 1e-12

    def test_zero_time_identity(self):
        a, b = propagate_pair([1, 0], [0, 1], 0.5, 1.0, 1.0, 0.0, +1)
        assert np.allclose(a, [1, 0]) and np.allclose(b, [0, 1])

    def test_relative_eigenphase(self):
        # eigenvectors of each block pick up exp(-i E t); the pair keeps
        # their relative phase (E' - E) t
        p, pp, m, t = 0.5, 1.0, 1.0, 1.0
        h_p = block_hamiltonians(p, m)[0]
        h_pp = block_hamiltonians(pp, m)[0]
        ep, vp = np.linalg.eigh(h_p)
        epp, vpp = np.linalg.eigh(h_pp)
        a, b = propagate_pair(vp[:, 1], vpp[:, 1], p, pp, m, t, +1)
        phase_a = np.vdot(vp[:, 1], a)
        phase_b = np.vdot(vpp[:, 1], b)
        rel = np.angle(phase_b / phase_a)
        expected = -(epp[1] - ep[1]) * t
        assert abs(np.angle(np.exp(1j * (rel - expected)))) < 1e-10

    def test_bad_sign_rejected(self):
        with pytest.raises(ValueError):
            propagate_pair([1, 0], [1, 0], 0.5, 1.0, 1.0, 1.0, 2)

    def test_marginals_equal_separate_blocks(self):
        rng = np.random.default_rng(9)
        chi_a = rng.normal(size=2) + 1j * rng.normal(size=2)
        chi_b = rng.normal(size=2) + 1j * rng.normal(size=2)
        a, b = propagate_pair(chi_a, chi_b, 0.5, 1.5, 1.0, 2.3, -1)
        _, a_ref = propagate_blocks(chi_a, chi_a, 0.5, 1.0, 2.3)
        _, b_ref = propagate_blocks(chi_b, chi_b, 1.5, 1.0, 2.3)
        assert np.max(np.abs(a - a_ref)) < 1e-12
        assert np.max(np.abs(b - b_ref)) < 1e-12


@pytest.fixture(scope="module")
def packet():
    grid = MomentumGrid.uniform(4.0, 65)
    return MajoranaState.gaussian_packet(grid, 1.0, [1, 1])


class TestSplitStepOracle:
    def test_rest_frame_closed_form(self):
        grid = MomentumGrid.uniform(2.0, 17)
        amps = np.zeros((17, 2), complex)
        k0 = 8  # p = 0 mode
        amps[k0] = [1.0, 0.0]
        psi = MajoranaState(grid=grid, amplitudes=amps)
        t = np.pi / 2
        out = evolve_majorana_direct(psi, 1.0, t, dt=t / 1600)
        assert np.max(np.abs(out.amplitudes[k0] - [0.0, -1.0j])) < 1e-8

    def test_massless_momentum_density_invariant(self, packet):
        out = evolve_majorana_direct(packet, 0.0, 2.0, 1e-3)
        assert np.max(np.abs(out.momentum_density()
                             - packet.momentum_density())) < 1e-10

    def test_norm_conserved(self, packet):
        out = evolve_majorana_direct(packet, 1.0, 2.0, 1e-3)
        assert abs(out.norm() - 1.0) < 1e-8

    def test_agrees_with_spectral_route(self, packet):
        direct = evolve_majorana_direct(packet, 1.0, 4.0, 1e-3)
        spectral = recover(evolve(embed(packet), 1.0, 4.0))
        assert state_fidelity(direct, spectral) > 1.0 - 1e-8

    def test_large_dt_refused(self, packet):
        with pytest.raises(ValueError):
            evolve_majorana_direct(packet, 1.0, 1.0, 0.1)

    def test_non_multiple_time_refused(self, packet):
        with pytest.raises(ValueError):
            evolve_majorana_direct(packet, 1.0, 1.0005, 1e-3)

    def test_mode_grid_refused(self):
        psi = MajoranaState.plane_wave([1, 0], 1.0)
        with pytest.raises(ValueError):
            evolve_majorana_direct(psi, 1.0, 1.0, 1e-3)


class TestDiracOracle:
    def test_rest_frame_phase_evolution(self):
        psi = MajoranaState.plane_wave([1, 0], 0.0)
        out = evolve_dirac(psi, 1.0, 1.7)
        assert np.allclose(out.amplitudes[0],
                           [np.exp(-1j * 1.7), 0.0], atol=1e-12)

    def test_eigenstate_is_stationary(self):
        from majorana_eqs.observables import dirac_spinors
        p, m = 1.0, 1.0
        u_plus, _ = dirac_spinors(p, m)
        psi = MajoranaState.plane_wave(u_plus, p)
        out = evolve_dirac(psi, m, 3.0)
        ov = np.vdot(psi.amplitudes[1], out.amplitudes[1])
        assert abs(abs(ov) - 1.0) < 1e-12

    def test_charge_conserved_for_random_state(self):
        rng = np.random.default_rng(12)
        spinor = rng.normal(size=2) + 1j * rng.normal(size=2)
        psi = MajoranaState.plane_wave(spinor, 0.8)
        c0 = charge(psi, 1.0)
        for t in (0.5, 2.0, 7.0):
            ct = charge(evolve_dirac(psi, 1.0, t), 1.0)
            assert abs(ct - c0) < 1e-12


class TestRealityPreservation:
    def test_position_representation_stays_real(self, packet):
        Psi = embed(packet)
        for t in (1.0, 4.0, 8.0):
            pos = evolve(Psi, 1.0, t).position_representation()
            assert np.max(np.abs(pos.imag)) < 1e-10
