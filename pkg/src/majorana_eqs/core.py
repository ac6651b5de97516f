"""States of the original and enlarged Hilbert spaces and the maps between them.

The original space holds a complex two-component spinor psi; the enlarged
space holds a real four-component bispinor Psi whose position components are
(Re psi_1, Re psi_2, Im psi_1, Im psi_2).  In that ordering the first qubit
labels real/imaginary and the second the spinor index.  Complex conjugation,
time reversal and charge conjugation -- antiunitary in the original space --
become the real orthogonal two-qubit gates

    K = sigma_z (x) I,   T = i sigma_z (x) sigma_y,   C = -sigma_z (x) sigma_x,

and the original state is recovered with the 2x4 matrix M with rows
(1, 0, i, 0) and (0, 1, 0, i).

States are stored in momentum space.  A ``MajoranaState`` keeps the
two-component momentum amplitudes phi_j(p); an ``EnlargedState`` keeps an
envelope weight Psi(p) and an internal four-vector chi_p per grid point, the
physical amplitude being their product.  ``embed`` produces envelope = 1 and
chi_p equal to the raw mapped amplitude, which satisfies the reality
condition chi_{-p} = conj(chi_p) pointwise on the grid.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .grids import MomentumGrid, same_grid

__all__ = [
    "SIGMA_X", "SIGMA_Y", "SIGMA_Z", "ID2", "RECOVERY_MATRIX",
    "MajoranaState", "EnlargedState", "SymmetryOperator",
    "symmetry_operator", "embed", "recover", "apply_symmetry",
    "overlap", "state_fidelity", "RealityConditionError",
]

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
ID2 = np.eye(2, dtype=complex)

# Recovery map M: psi = M Psi, rows (1, 0, i, 0) / (0, 1, 0, i).
RECOVERY_MATRIX = np.array(
    [[1.0, 0.0, 1.0j, 0.0],
     [0.0, 1.0, 0.0, 1.0j]], dtype=complex)

_SYMMETRY_MATRICES = {
    "K": np.real(np.kron(SIGMA_Z, ID2)),
    "T": np.real(1j * np.kron(SIGMA_Z, SIGMA_Y)),
    "C": np.real(-np.kron(SIGMA_Z, SIGMA_X)),
}


class RealityConditionError(ValueError):
    """Enlarged state is not the image of an original-space state."""


@dataclass(frozen=True, eq=False)
class SymmetryOperator:
    """A real orthogonal 4x4 enlarged-space gate with its semantic label."""

    label: str
    matrix: np.ndarray

    def __post_init__(self):
        if self.label not in _SYMMETRY_MATRICES:
            raise ValueError(f"unknown symmetry label {self.label!r}")
        m = np.asarray(self.matrix)
        if m.shape != (4, 4) or np.max(np.abs(np.imag(m))) > 0:
            raise ValueError("symmetry operators must be real 4x4 matrices")
        if np.max(np.abs(m.T @ m - np.eye(4))) > 1e-14:
            raise ValueError("symmetry operators must be orthogonal")


def symmetry_operator(label: str) -> SymmetryOperator:
    """The complex-conjugation (K), time-reversal (T) or charge-conjugation
    (C) gate of the enlarged space."""
    if label not in _SYMMETRY_MATRICES:
        raise ValueError(f"unknown symmetry label {label!r}")
    return SymmetryOperator(label=label, matrix=_SYMMETRY_MATRICES[label].copy())


@dataclass(frozen=True, eq=False)
class MajoranaState:
    """Two-component spinor over a symmetric momentum grid.

    ``amplitudes[k, j]`` is the momentum amplitude phi_j(p_k), j = 1, 2.
    The squared norm is sum_k w_k |phi(p_k)|^2.
    """

    grid: MomentumGrid
    amplitudes: np.ndarray

    def __post_init__(self):
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (self.grid.n, 2):
            raise ValueError("amplitudes must have shape (grid.n, 2)")
        if not np.all(np.isfinite(amps)):
            raise ValueError("non-finite amplitudes")
        object.__setattr__(self, "amplitudes", amps)

    @classmethod
    def plane_wave(cls, spinor, p: float) -> "MajoranaState":
        """Internal state ``spinor`` times the plane wave of momentum p.

        The grid holds the modes {-p, +p} (the Majorana mass term populates
        the mirror mode during evolution).
        """
        spinor = np.asarray(spinor, dtype=complex)
        spinor = spinor / np.linalg.norm(spinor)
        grid = MomentumGrid.modes([-p, p])
        amps = np.zeros((grid.n, 2), dtype=complex)
        k = int(np.argmin(np.abs(grid.points - p)))
        amps[k] = spinor
        return cls(grid=grid, amplitudes=amps)

    @classmethod
    def gaussian_packet(cls, grid: MomentumGrid, p0: float, spinor,
                        sigma_x: float = np.sqrt(2.0),
                        x0: float = 0.0) -> "MajoranaState":
        """Moving Gaussian wave packet, normalized on the grid.

        ``sigma_x`` is the standard deviation of the position density; the
        momentum density is centered at +p0.  Raises if the grid does not
        cover the packet's bandwidth.
        """
        if not grid.is_uniform:
            raise ValueError("wave packets need a uniform momentum grid")
        spinor = np.asarray(spinor, dtype=complex)
        spinor = spinor / np.linalg.norm(spinor)
        x = grid.spatial.points
        envelope = np.exp(-((x - x0) ** 2) / (4.0 * sigma_x ** 2) + 1j * p0 * x)
        psi_x = envelope[:, None] * spinor[None, :]
        amps = grid.to_momentum(psi_x)
        edge = max(np.abs(amps[0]).max(), np.abs(amps[-1]).max())
        if edge > 1e-6 * np.abs(amps).max():
            raise ValueError("momentum grid too narrow for this packet")
        state = cls(grid=grid, amplitudes=amps)
        return state.normalized()

    def norm(self) -> float:
        dens = np.sum(np.abs(self.amplitudes) ** 2, axis=1)
        return float(np.sqrt(np.sum(self.grid.weights * dens)))

    def normalized(self) -> "MajoranaState":
        return replace(self, amplitudes=self.amplitudes / self.norm())

    def conj(self) -> "MajoranaState":
        """The state of conj(psi): momentum amplitudes conj(phi(-p))."""
        return replace(self, amplitudes=np.conj(self.amplitudes[self.grid.neg_index]))

    def position_amplitudes(self) -> np.ndarray:
        """psi_j(x) on the dual position grid (uniform grids only)."""
        return self.grid.to_position(self.amplitudes)

    def position_density(self) -> np.ndarray:
        psi_x = self.position_amplitudes()
        return np.sum(np.abs(psi_x) ** 2, axis=1)

    def momentum_density(self) -> np.ndarray:
        return np.sum(np.abs(self.amplitudes) ** 2, axis=1)


@dataclass(frozen=True, eq=False)
class EnlargedState:
    """Four-component enlarged-space state over a symmetric momentum grid.

    ``envelope[k]`` is the momentum weight Psi(p_k) (constant in time) and
    ``internal[k]`` the four-vector chi_{p_k}; the physical amplitude is
    their product.  For states produced by ``embed`` the reality condition
    amplitude(-p) = conj(amplitude(p)) holds, i.e. the position
    representation is real.
    """

    grid: MomentumGrid
    envelope: np.ndarray
    internal: np.ndarray

    def __post_init__(self):
        env = np.asarray(self.envelope, dtype=complex)
        chi = np.asarray(self.internal, dtype=complex)
        if env.shape != (self.grid.n,) or chi.shape != (self.grid.n, 4):
            raise ValueError("envelope/internal shapes must be (n,) and (n, 4)")
        if not (np.all(np.isfinite(env)) and np.all(np.isfinite(chi))):
            raise ValueError("non-finite amplitudes")
        object.__setattr__(self, "envelope", env)
        object.__setattr__(self, "internal", chi)

    def amplitude(self) -> np.ndarray:
        """Physical four-component amplitude Psi(p) chi_p, shape (n, 4)."""
        return self.envelope[:, None] * self.internal

    def norm(self) -> float:
        dens = np.sum(np.abs(self.amplitude()) ** 2, axis=1)
        return float(np.sqrt(np.sum(self.grid.weights * dens)))

    def normalized(self) -> "EnlargedState":
        return replace(self, envelope=self.envelope / self.norm())

    def reality_violation(self) -> float:
        """Max-norm violation of amplitude(-p) = conj(amplitude(p))."""
        amp = self.amplitude()
        return float(np.max(np.abs(amp[self.grid.neg_index] - np.conj(amp))))

    def position_representation(self) -> np.ndarray:
        """The four real position components, shape (n, 4), complex dtype.

        The imaginary part measures reality violation and stays below
        1e-10 for embedded states and their evolutions.
        """
        return self.grid.to_position(self.amplitude())

    def momentum_density(self) -> np.ndarray:
        """Enlarged-space momentum density |Psi(p)|^2 |chi_p|^2."""
        return np.sum(np.abs(self.amplitude()) ** 2, axis=1)


def embed(psi: MajoranaState) -> EnlargedState:
    """Map an original-space state to the enlarged space.

    In position space the image is (Re psi_1, Re psi_2, Im psi_1, Im psi_2);
    in momentum space a plane wave C (x) |p> maps to (C1, C2, -iC1, -iC2)/2
    at +p plus (C1*, C2*, iC1*, iC2*)/2 at -p.
    """
    phi = psi.amplitudes
    if not np.all(np.isfinite(phi)):
        raise ValueError("non-finite amplitudes")
    phi_flip = np.conj(phi[psi.grid.neg_index])
    upper = (phi + phi_flip) / 2.0
    lower = -1j * (phi - phi_flip) / 2.0
    chi = np.concatenate([upper, lower], axis=1)
    return EnlargedState(grid=psi.grid,
                         envelope=np.ones(psi.grid.n, dtype=complex),
                         internal=chi)


def recover(Psi: EnlargedState, tol: float = 1e-6) -> MajoranaState:
    """Recover the original-space state psi = M Psi.

    Rejects states whose reality violation exceeds ``tol``: such a state is
    not the image of any original-space state.
    """
    violation = Psi.reality_violation()
    if violation > tol:
        raise RealityConditionError(
            f"reality condition violated by {violation:.3e} (tol {tol:.1e})")
    phi = Psi.amplitude() @ RECOVERY_MATRIX.T
    return MajoranaState(grid=Psi.grid, amplitudes=phi)


def apply_symmetry(Psi: EnlargedState, op: SymmetryOperator | str) -> EnlargedState:
    """Apply a K/T/C gate to the internal state at every momentum."""
    if isinstance(op, str):
        op = symmetry_operator(op)
    return replace(Psi, internal=Psi.internal @ op.matrix.T)


def overlap(a: MajoranaState, b: MajoranaState) -> complex:
    """Original-space inner product <a|b> over the common grid."""
    if not same_grid(a.grid, b.grid):
        raise ValueError("states live on different grids")
    return complex(np.sum(a.grid.weights[:, None]
                          * np.conj(a.amplitudes) * b.amplitudes))


def state_fidelity(a: MajoranaState, b: MajoranaState) -> float:
    """|<a|b>|^2 for normalized states."""
    return float(np.abs(overlap(a, b)) ** 2)
