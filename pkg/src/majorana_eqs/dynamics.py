"""Time evolution engines.

Per momentum mode the enlarged-space generator is the 4x4 Hermitian matrix

    H_p = p c (I (x) sigma_x) - m c^2 (sigma_x (x) sigma_y),

whose square is (p^2 + m^2) I, so the exact propagator is the projector sum

    exp(-i H_p t) = cos(E t) I - i sin(E t) H_p / E,     E = sqrt(p^2 + m^2),

with no eigenvector ordering or tie-breaking involved.  Diagonalizing the
first qubit in the sigma_x basis splits H_p into two decoupled 2x2 blocks
with entries p c +/- i m c^2; a pair of momenta (p, p') evolves coherently
under the block-diagonal 4x4 built from two such blocks.

Two independent oracle integrators are provided: a Strang split-step solver
for the original-space Majorana equation

    i d/dt psi = c sigma_x p psi - i m c^2 sigma_y conj(psi),

whose non-Hermitian mass step is an exact real rotation of (u +/- v) with
u = Re psi, v = Im psi, and the exact per-mode Dirac evolution under
sigma_x p + m sigma_z (which conserves charge).
"""

from __future__ import annotations

from dataclasses import replace

import numpy as np

from .core import ID2, SIGMA_X, SIGMA_Y, EnlargedState, MajoranaState

__all__ = [
    "enlarged_hamiltonian", "block_hamiltonians", "S_MATRIX",
    "propagator", "propagate_mode", "mode_propagators", "evolve",
    "block_propagator", "propagate_blocks", "propagate_pair",
    "internal_blocks", "evolve_majorana_direct", "evolve_dirac",
]

# Change of basis diagonalizing the first qubit in the sigma_x basis;
# chi_blocks = S^T chi, columns of S are |+->(x)|0/1>, |-->(x)|0/1>.
S_MATRIX = np.array(
    [[1.0, 0.0, 1.0, 0.0],
     [0.0, 1.0, 0.0, 1.0],
     [1.0, 0.0, -1.0, 0.0],
     [0.0, 1.0, 0.0, -1.0]]) / np.sqrt(2.0)

_KINETIC = np.real(np.kron(ID2, SIGMA_X))
_MASS = np.imag(np.kron(SIGMA_X, SIGMA_Y))  # kron is purely imaginary


def enlarged_hamiltonian(p: float, m: float) -> np.ndarray:
    """The 4x4 per-mode generator of the enlarged space."""
    return p * _KINETIC.astype(complex) - 1j * m * _MASS


def block_hamiltonians(p: float, m: float):
    """The two decoupled 2x2 blocks of S^T H_p S, entries p c +/- i m c^2."""
    h_plus = np.array([[0.0, p + 1j * m], [p - 1j * m, 0.0]])
    h_minus = np.array([[0.0, p - 1j * m], [p + 1j * m, 0.0]])
    return h_plus, h_minus


def propagator(p: float, m: float, t: float) -> np.ndarray:
    """exp(-i H_p t) via the exact projector form."""
    energy = np.hypot(p, m)
    if energy == 0.0:
        return np.eye(4, dtype=complex)
    h = enlarged_hamiltonian(p, m)
    return (np.cos(energy * t) * np.eye(4)
            - 1j * np.sin(energy * t) / energy * h)


def propagate_mode(chi, p: float, m: float, t: float) -> np.ndarray:
    """Evolve a single four-vector chi under H_p for time t (exact)."""
    chi = np.asarray(chi, dtype=complex)
    if not np.isfinite(t):
        raise ValueError("time must be finite")
    return propagator(p, m, t) @ chi


def mode_propagators(ps: np.ndarray, m: float, t: float) -> np.ndarray:
    """Stack of exp(-i H_p t) for every p in ``ps``, shape (n, 4, 4)."""
    ps = np.asarray(ps, dtype=float)
    energy = np.hypot(ps, m)
    h = (ps[:, None, None] * _KINETIC.astype(complex)
         - 1j * m * _MASS[None, :, :])
    safe = np.where(energy > 0.0, energy, 1.0)
    sinc = np.where(energy > 0.0, np.sin(energy * t) / safe, t)
    return (np.cos(energy * t)[:, None, None] * np.eye(4)
            - 1j * sinc[:, None, None] * h)


def evolve(Psi: EnlargedState, m: float, t: float) -> EnlargedState:
    """Evolve every momentum mode of an enlarged state by time t."""
    u = mode_propagators(Psi.grid.points, m, t)
    chi = np.einsum("kab,kb->ka", u, Psi.internal)
    return replace(Psi, internal=chi)


def block_propagator(p: float, m: float, t: float, sign: int) -> np.ndarray:
    """exp(-i H_p^{+/-} t) for one 2x2 block; (H^{+/-})^2 = (p^2+m^2) I."""
    energy = np.hypot(p, m)
    h = block_hamiltonians(p, m)[0 if sign > 0 else 1]
    if energy == 0.0:
        return np.eye(2, dtype=complex)
    return np.cos(energy * t) * np.eye(2) - 1j * np.sin(energy * t) / energy * h


def propagate_blocks(chi_plus, chi_minus, p: float, m: float, t: float):
    """Evolve the two decoupled 2-vectors; recombining with S reproduces
    ``propagate_mode``."""
    cp = block_propagator(p, m, t, +1) @ np.asarray(chi_plus, dtype=complex)
    cm = block_propagator(p, m, t, -1) @ np.asarray(chi_minus, dtype=complex)
    return cp, cm


def propagate_pair(chi_p, chi_pprime, p: float, pprime: float, m: float,
                   t: float, sign: int):
    """Coherent four-level evolution of the (p, p') block pair.

    The joint generator is block-diagonal, so the marginals equal the
    separate block evolutions; running the pair jointly mirrors the
    coherent two-momentum measurement scheme.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    state = np.concatenate([np.asarray(chi_p, dtype=complex),
                            np.asarray(chi_pprime, dtype=complex)])
    # block-diagonal generator, each block exponentiated in closed form
    out = np.empty(4, dtype=complex)
    out[:2] = block_propagator(p, m, t, sign) @ state[:2]
    out[2:] = block_propagator(pprime, m, t, sign) @ state[2:]
    return out[:2], out[2:]


def internal_blocks(Psi: EnlargedState) -> tuple[np.ndarray, np.ndarray]:
    """sigma_x-basis block components of the physical amplitude, (n, 2) each."""
    amp = Psi.amplitude() @ S_MATRIX  # rows become (S^T chi)^T; S is real
    return amp[:, :2], amp[:, 2:]


def evolve_majorana_direct(psi: MajoranaState, m: float, t: float,
                           dt: float = 1e-3) -> MajoranaState:
    """Strang split-step integrator for the original-space Majorana equation.

    Kinetic half-steps are exact in momentum space; the mass step is the
    exact real rotation (u +/- v)(dt) = exp(-/+ m A dt)(u +/- v)(0) with
    A = [[0, -1], [1, 0]], applied pointwise in position space.  Global
    error is O(dt^2); the original-space norm is conserved identically.

    Parameters
    ----------
    psi : MajoranaState
        Initial state on a uniform momentum grid.
    m : float
        Majorana mass.
    t : float
        Total evolution time (a multiple of dt).
    dt : float
        Step size; refused if larger than 0.1 / sqrt(p_max^2 + m^2).
    """
    if not psi.grid.is_uniform:
        raise ValueError("split-step evolution needs a uniform grid")
    if dt <= 0:
        raise ValueError("dt must be positive")
    p_max = float(np.max(np.abs(psi.grid.points)))
    if dt > 0.1 / np.hypot(p_max, m):
        raise ValueError("dt too large for the accuracy contract")
    nsteps = int(round(t / dt))
    if abs(nsteps * dt - t) > 1e-9 * max(1.0, abs(t)):
        raise ValueError("t must be a multiple of dt")
    if nsteps == 0:
        return psi

    p = psi.grid.points
    cos_half = np.cos(p * dt / 2.0)[:, None]
    sin_half = np.sin(p * dt / 2.0)[:, None]
    cos_full = np.cos(p * dt)[:, None]
    sin_full = np.sin(p * dt)[:, None]
    cm, sm = np.cos(m * dt), np.sin(m * dt)
    rot_minus = np.array([[cm, sm], [-sm, cm]])   # exp(-m A dt)
    rot_plus = np.array([[cm, -sm], [sm, cm]])    # exp(+m A dt)

    def kinetic(phi, c, s):
        # exp(-i sigma_x p dt) = cos I - i sin sigma_x, per mode
        return c * phi - 1j * s * phi[:, ::-1]

    def mass(phi):
        psi_x = psi.grid.to_position(phi)
        u, v = np.real(psi_x), np.imag(psi_x)
        r = (u + v) @ rot_minus.T
        s = (u - v) @ rot_plus.T
        psi_x = ((r + s) + 1j * (r - s)) / 2.0
        return psi.grid.to_momentum(psi_x)

    phi = kinetic(psi.amplitudes, cos_half, sin_half)
    for step in range(nsteps):
        phi = mass(phi)
        if step < nsteps - 1:
            phi = kinetic(phi, cos_full, sin_full)
    phi = kinetic(phi, cos_half, sin_half)
    return MajoranaState(grid=psi.grid, amplitudes=phi)


def evolve_dirac(psi: MajoranaState, m: float, t: float) -> MajoranaState:
    """Exact per-mode evolution under the Dirac generator sigma_x p + m sigma_z."""
    p = psi.grid.points
    energy = np.hypot(p, m)
    cos = np.cos(energy * t)
    safe = np.where(energy > 0.0, energy, 1.0)
    sinc = np.where(energy > 0.0, np.sin(energy * t) / safe, t)
    phi = psi.amplitudes
    h_phi = (p[:, None] * phi[:, ::-1]
             + m * phi * np.array([1.0, -1.0])[None, :])
    return MajoranaState(grid=psi.grid,
                         amplitudes=cos[:, None] * phi - 1j * sinc[:, None] * h_phi)
