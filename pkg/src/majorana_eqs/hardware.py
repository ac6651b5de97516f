"""Six-tone microwave engineering of the four-level effective Hamiltonian.

The ground-state manifold of a trapped ion provides four levels |1>..|4>
with energies (hbar = 1, angular frequencies)

    E1 = 0,  E2 = w_hf - w_z,  E3 = w_hf + w_q,  E4 = w_hf + w_z.

Six microwave tones drive the |1> <-> |j> transitions: tones 1 and 2 are
(near-)resonant with 1<->2 and 1<->4, while tone pairs (3, 4) and (5, 6)
form stimulated Raman couplings 2<->3 and 3<->4 with opposite single-photon
detunings +/- Delta.  The tone frequencies are

    w1 = w_hf - w_z - d1          w2 = w_hf + w_z - d2
    w3 = w_hf - w_z - Delta       w4 = w_hf + w_q - Delta - d3
    w5 = w_hf + w_q + Delta       w6 = w_hf + w_z + Delta - d4

where the compensation shifts d1..d4 must match the differences of the AC
Stark shifts they themselves induce, a self-consistency solved by fixed
point iteration.  At the fixed point the rotating-frame Hamiltonian is the
static target

    H = (W12/2) e^{i phi1} |1><2| + (W14/2) e^{i phi2} |1><4|
      + (W23/2) e^{i phi43} |2><3| + (W34/2) e^{i phi65} |3><4| + h.c.

with Raman couplings W23 = O12_3 O13_4 (1/Delta + 1/(Delta + d3)) / 4 and
W34 = -O13_5 O14_6 (1/Delta + 1/(Delta - d4)) / 4, plus two residual cross
couplings oscillating near twice the quadratic shift w_q that are reported
separately.  A brute-force Runge-Kutta integration of all six cosine drives
in the interaction picture of the atomic Hamiltonian (counter-rotating
terms at ~2 w_hf dropped) validates the rotating-wave construction.

All frequencies, Rabi amplitudes and energies are angular (rad/s).
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from numba import njit

from .dynamics import enlarged_hamiltonian

__all__ = [
    "IonLevels", "DriveConfig", "ConvergenceError",
    "stark_shifts", "solve_detunings", "effective_hamiltonian",
    "calibrate", "drive_config_for_ratio", "simulate_full_drive",
    "effective_pi_half_time", "write_tone_table", "TONE_TRANSITIONS",
]

TWO_PI = 2.0 * np.pi

# Designated transition of each tone (j index of |1> <-> |j>).
TONE_TRANSITIONS = (2, 4, 2, 3, 3, 4)

# Rig constants for the reference 171Yb+ setup: quantization field and the
# local-oscillator frequency the AWG band (roughly 186-214 MHz) is mixed
# with to reach the hyperfine transitions.
B_FIELD_GAUSS = 9.694
AWG_MIXER_HZ = 12442.8213e6


class ConvergenceError(RuntimeError):
    """Fixed-point iteration failed; carries the residual history."""

    def __init__(self, message, history):
        super().__init__(message)
        self.history = history


@dataclass(frozen=True)
class IonLevels:
    """Hyperfine/Zeeman level structure of the four-level manifold."""

    omega_hf: float
    omega_z: float
    omega_q: float

    def __post_init__(self):
        if self.omega_q <= 0 or self.omega_z <= 10 * self.omega_q:
            raise ValueError("need omega_z >> omega_q > 0")

    @classmethod
    def default(cls) -> "IonLevels":
        """171Yb+ values: 12.642 GHz hyperfine and 13.5855 MHz Zeeman
        splittings, 31 kHz gap difference between the two Raman pairs."""
        return cls(omega_hf=TWO_PI * 12.642e9,
                   omega_z=TWO_PI * 13.5855e6,
                   omega_q=TWO_PI * 15.5e3)

    def energies(self) -> np.ndarray:
        return np.array([0.0,
                         self.omega_hf - self.omega_z,
                         self.omega_hf + self.omega_q,
                         self.omega_hf + self.omega_z])


@dataclass(frozen=True, eq=False)
class DriveConfig:
    """Six-tone microwave program.

    ``rabi[n, j]`` is the Rabi amplitude of tone n+1 on the 1 <-> (j+2)
    transition; ``phases`` are the tone phases and ``deltas`` the four
    compensation shifts d1..d4.
    """

    delta: float
    rabi: np.ndarray
    phases: np.ndarray
    deltas: np.ndarray

    def __post_init__(self):
        rabi = np.asarray(self.rabi, dtype=float)
        phases = np.asarray(self.phases, dtype=float)
        deltas = np.asarray(self.deltas, dtype=float)
        if rabi.shape != (6, 3) or phases.shape != (6,) or deltas.shape != (4,):
            raise ValueError("rabi must be (6, 3), phases (6,), deltas (4,)")
        if np.any(rabi < 0):
            raise ValueError("Rabi amplitudes must be non-negative")
        if self.delta <= 0:
            raise ValueError("Raman detuning must be positive")
        object.__setattr__(self, "rabi", rabi)
        object.__setattr__(self, "phases", phases)
        object.__setattr__(self, "deltas", deltas)

    @classmethod
    def silent(cls, delta: float) -> "DriveConfig":
        return cls(delta=delta, rabi=np.zeros((6, 3)), phases=np.zeros(6),
                   deltas=np.zeros(4))

    def with_deltas(self, deltas) -> "DriveConfig":
        return replace(self, deltas=np.asarray(deltas, dtype=float))

    def tone_frequencies(self, levels: IonLevels) -> np.ndarray:
        hf, z, q = levels.omega_hf, levels.omega_z, levels.omega_q
        d = self.deltas
        return np.array([
            hf - z - d[0],
            hf + z - d[1],
            hf - z - self.delta,
            hf + q - self.delta - d[2],
            hf + q + self.delta,
            hf + z + self.delta - d[3],
        ])

    def raman_couplings(self) -> tuple[float, float]:
        """Two-photon couplings (W23, W34); W34 carries a minus sign."""
        d3, d4 = self.deltas[2], self.deltas[3]
        w23 = (self.rabi[2, 0] * self.rabi[3, 1] / 4.0
               * (1.0 / self.delta + 1.0 / (self.delta + d3)))
        w34 = -(self.rabi[4, 1] * self.rabi[5, 2] / 4.0
                * (1.0 / self.delta + 1.0 / (self.delta - d4)))
        return w23, w34


def stark_shifts(cfg: DriveConfig, levels: IonLevels) -> np.ndarray:
    """Second-order AC Stark shifts (w_st_1, .., w_st_4) of the four levels.

    Each off-resonant tone/transition pair pushes its upper level and |1>
    apart by Omega^2 / (4 nu) with nu the co-rotating detuning; the sixteen
    non-resonant contributions are summed.  Configurations with a
    denominator closer to zero than 1e-3 * w_z are rejected.
    """
    z, q, dd = levels.omega_z, levels.omega_q, cfg.delta
    d1, d2, d3, d4 = cfg.deltas
    o = cfg.rabi
    terms = [
        (o[0, 1], z + q + d1, 3),
        (o[0, 2], 2 * z + d1, 4),
        (o[1, 0], -(2 * z - d2), 2),
        (o[1, 1], -(z - q - d2), 3),
        (o[2, 0], dd, 2),
        (o[2, 1], z + dd + q, 3),
        (o[2, 2], 2 * z + dd, 4),
        (o[3, 0], -(z - dd + q - d3), 2),
        (o[3, 1], dd + d3, 3),
        (o[3, 2], z + dd - q + d3, 4),
        (o[4, 0], -(z + dd + q), 2),
        (o[4, 1], -dd, 3),
        (o[4, 2], z - dd - q, 4),
        (o[5, 0], -(z + dd - d4), 2),
        (o[5, 1], -(z + dd - q - d4), 3),
        (o[5, 2], -(dd - d4), 4),
    ]
    shifts = np.zeros(4)
    for omega, denom, level in terms:
        if omega == 0.0:
            continue
        if abs(denom) < 1e-3 * z:
            raise ValueError("near-resonant denominator in Stark shift sum")
        value = omega ** 2 / (4.0 * denom)
        shifts[level - 1] += value
        shifts[0] -= value
    return shifts


def _detuning_targets(shifts: np.ndarray) -> np.ndarray:
    """The self-consistency conditions d_i = differences of Stark shifts."""
    return np.array([
        shifts[0] - shifts[1],
        shifts[0] - shifts[3],
        shifts[1] - shifts[2],
        shifts[2] - shifts[3],
    ])


def solve_detunings(cfg: DriveConfig, levels: IonLevels,
                    tol: float = 1e-9, max_iter: int = 100) -> DriveConfig:
    """Fixed-point solve of the compensation shifts, starting from zero.

    Iterates d <- Stark-shift differences(d) until the maximum relative
    change drops below ``tol``; raises ``ConvergenceError`` with the
    residual history if ``max_iter`` is exceeded.
    """
    current = cfg.with_deltas(np.zeros(4))
    history = []
    for _ in range(max_iter):
        target = _detuning_targets(stark_shifts(current, levels))
        change = np.max(np.abs(target - current.deltas))
        scale = max(np.max(np.abs(target)), np.finfo(float).tiny)
        history.append(change)
        current = current.with_deltas(target)
        if change <= tol * scale:
            return current
    raise ConvergenceError(
        f"detuning fixed point did not converge in {max_iter} iterations",
        history)


def detuning_residuals(cfg: DriveConfig, levels: IonLevels) -> np.ndarray:
    """|d_i - (Stark-shift difference)_i| at the current detunings."""
    return np.abs(cfg.deltas - _detuning_targets(stark_shifts(cfg, levels)))


def effective_hamiltonian(cfg: DriveConfig, levels: IonLevels):
    """Static rotating-frame Hamiltonian and the residual-coupling report.

    Returns a Hermitian 4x4 matrix (valid at the detuning fixed point) and
    a dict with the magnitudes and frequencies of the two cross couplings
    oscillating near 2 w_q that the static model drops.
    """
    w23, w34 = cfg.raman_couplings()
    phi = cfg.phases
    h = np.zeros((4, 4), dtype=complex)
    h[0, 1] = cfg.rabi[0, 0] / 2.0 * np.exp(1j * phi[0])
    h[0, 3] = cfg.rabi[1, 2] / 2.0 * np.exp(1j * phi[1])
    h[1, 2] = w23 / 2.0 * np.exp(1j * (phi[3] - phi[2]))
    h[2, 3] = w34 / 2.0 * np.exp(1j * (phi[5] - phi[4]))
    h = h + h.conj().T
    z, q, dd = levels.omega_z, levels.omega_q, cfg.delta
    gain = (z + dd) / (4.0 * ((z + dd) ** 2 - q ** 2))
    residuals = {
        "pair_34": abs(cfg.rabi[2, 1] * cfg.rabi[3, 2] * gain),
        "pair_23": abs(cfg.rabi[4, 0] * cfg.rabi[5, 1] * gain),
        "frequency_34": 2 * q - cfg.deltas[2],
        "frequency_23": 2 * q + cfg.deltas[3],
    }
    return h, residuals


def calibrate(p: float, m: float, delta: float, levels: IonLevels,
              energy_scale: float = TWO_PI * 2e3,
              cross_ratio: float = 1.0, rounds: int = 6) -> DriveConfig:
    """Drive program realizing the per-mode four-level generator.

    Targets H_p with couplings p and m in units of ``energy_scale``.  Rabi
    rates within each Raman pair are equal; phases are phi1 = 0, phi2 =
    pi/2, phi4 - phi3 = -pi/2 and phi6 - phi5 = pi (for p > 0; the pair-34
    coupling carries an intrinsic minus sign that the phase absorbs).  Every
    tone also drives its two unintended transitions at ``cross_ratio``
    times its primary amplitude, which keeps the full Stark-shift sum live.
    Amplitudes and compensation shifts are iterated together so the
    round-trip through ``effective_hamiltonian`` lands on the target.

    ``m`` must be non-negative; couplings above delta / 10 are rejected as
    outside the perturbative regime.
    """
    if m < 0:
        raise ValueError("mass must be non-negative")
    c12 = p * energy_scale
    c14 = m * energy_scale
    if max(abs(c12), abs(c14)) > delta / 10.0:
        raise ValueError("target couplings too strong for the detuning")

    phases = np.zeros(6)
    phases[0] = 0.0 if p >= 0 else np.pi
    phases[1] = np.pi / 2.0
    phases[3] = -np.pi / 2.0  # phi4 - phi3 with phi3 = 0
    phases[5] = np.pi if p >= 0 else 0.0  # phi6 - phi5 with phi5 = 0

    cfg = DriveConfig.silent(delta).with_deltas(np.zeros(4))
    cfg = replace(cfg, phases=phases)
    for _ in range(rounds):
        d3, d4 = cfg.deltas[2], cfg.deltas[3]
        pump_23 = np.sqrt(8.0 * abs(c14)
                          / (1.0 / delta + 1.0 / (delta + d3)))
        pump_34 = np.sqrt(8.0 * abs(c12)
                          / (1.0 / delta + 1.0 / (delta - d4)))
        rabi = np.zeros((6, 3))
        primary = [2.0 * abs(c12), 2.0 * abs(c14),
                   pump_23, pump_23, pump_34, pump_34]
        for tone, amp in enumerate(primary):
            rabi[tone, :] = cross_ratio * amp
            rabi[tone, TONE_TRANSITIONS[tone] - 2] = amp
        cfg = replace(cfg, rabi=rabi)
        cfg = solve_detunings(cfg, levels)
    return cfg


def drive_config_for_ratio(p: float, m: float, delta: float,
                           levels: IonLevels, ratio: float,
                           cross_ratio: float = 1.0) -> DriveConfig:
    """Calibrated config whose Raman pump amplitude is ``ratio * delta``.

    The energy scale follows from the pump choice: the dominant Raman
    coupling Omega^2 / (2 delta) equals twice the corresponding target
    entry, so the scale is ratio^2 * delta / (4 max(|p|, m)).
    """
    strength = max(abs(p), abs(m))
    if strength == 0:
        raise ValueError("need a nonzero target")
    scale = ratio ** 2 * delta / (4.0 * strength)
    return calibrate(p, m, delta, levels, energy_scale=scale,
                     cross_ratio=cross_ratio)


def target_matrix(p: float, m: float, energy_scale: float) -> np.ndarray:
    """The intended four-level generator in lab units (rad/s)."""
    return enlarged_hamiltonian(p, m) * energy_scale


def effective_pi_half_time(p: float, m: float, energy_scale: float) -> float:
    """Quarter period of the per-mode energy gap 2 sqrt(p^2 + m^2)."""
    return (np.pi / 2.0) / (np.hypot(p, m) * energy_scale)


def _drive_harmonics(cfg: DriveConfig, levels: IonLevels):
    """Co-rotating harmonics of the interaction-picture drive.

    Each tone/transition pair contributes a term
    (Omega/2) e^{i ((E_j - w_n) t - phi_n)} |j><1| + h.c.; the
    counter-rotating partners at ~2 w_hf are dropped.
    """
    energies = levels.energies()
    freqs = cfg.tone_frequencies(levels)
    nu, amp, row = [], [], []
    for tone in range(6):
        for j in range(3):
            omega = cfg.rabi[tone, j]
            if omega == 0.0:
                continue
            nu.append(energies[j + 1] - freqs[tone])
            amp.append(omega / 2.0 * np.exp(-1j * cfg.phases[tone]))
            row.append(j + 1)
    return (np.asarray(nu, dtype=float), np.asarray(amp, dtype=complex),
            np.asarray(row, dtype=np.int64))


@njit(cache=True)
def _rk4_drive(psi0, nu, amp, row, dt, nsteps):  # pragma: no cover
    psi = psi0.copy()
    k = np.empty((4, 4), dtype=np.complex128)
    buf = np.empty(4, dtype=np.complex128)
    nharm = nu.shape[0]
    for step in range(nsteps):
        t0 = step * dt
        for stage in range(4):
            if stage == 0:
                tt = t0
                for i in range(4):
                    buf[i] = psi[i]
            elif stage == 1:
                tt = t0 + 0.5 * dt
                for i in range(4):
                    buf[i] = psi[i] + 0.5 * dt * k[0, i]
            elif stage == 2:
                tt = t0 + 0.5 * dt
                for i in range(4):
                    buf[i] = psi[i] + 0.5 * dt * k[1, i]
            else:
                tt = t0 + dt
                for i in range(4):
                    buf[i] = psi[i] + dt * k[2, i]
            c1 = 0.0j
            c2 = 0.0j
            c3 = 0.0j
            for h in range(nharm):
                e = amp[h] * np.exp(1j * nu[h] * tt)
                if row[h] == 1:
                    c1 += e
                elif row[h] == 2:
                    c2 += e
                else:
                    c3 += e
            k[stage, 0] = -1j * (np.conj(c1) * buf[1]
                                 + np.conj(c2) * buf[2]
                                 + np.conj(c3) * buf[3])
            k[stage, 1] = -1j * c1 * buf[0]
            k[stage, 2] = -1j * c2 * buf[0]
            k[stage, 3] = -1j * c3 * buf[0]
        for i in range(4):
            psi[i] += dt / 6.0 * (k[0, i] + 2.0 * k[1, i]
                                  + 2.0 * k[2, i] + k[3, i])
    return psi


def simulate_full_drive(cfg: DriveConfig, levels: IonLevels, chi0,
                        t: float, dt: float | None = None,
                        target: np.ndarray | None = None):
    """Integrate the full time-dependent six-tone drive and compare.

    Classic fixed-step RK4 in the interaction picture of the atomic
    Hamiltonian.  The reference state is exp(-i H_st t) exp(-i H t) chi0
    with H the static effective Hamiltonian (or ``target`` when given) and
    H_st the Stark-shift phases that the second rotating frame removes.

    Returns (chi_final, chi_ideal, fidelity).
    """
    chi0 = np.asarray(chi0, dtype=complex)
    nu, amp, row = _drive_harmonics(cfg, levels)
    fastest = float(np.max(np.abs(nu))) if nu.size else 0.0
    max_dt = TWO_PI / (50.0 * levels.omega_z)
    if dt is None:
        dt = max_dt if fastest == 0.0 else min(
            max_dt, TWO_PI / (30.0 * fastest))
    if fastest > 0.0 and dt > TWO_PI / (25.0 * fastest):
        raise ValueError("dt too coarse for the fastest retained harmonic")
    nsteps = max(1, int(round(t / dt)))
    dt = t / nsteps
    if nu.size == 0:
        chi_final = chi0.copy()
    else:
        chi_final = _rk4_drive(chi0.astype(complex), nu, amp, row,
                               float(dt), nsteps)

    h_static, _ = effective_hamiltonian(cfg, levels)
    if target is not None:
        h_static = np.asarray(target, dtype=complex)
    shifts = stark_shifts(cfg, levels)
    vals, vecs = np.linalg.eigh(h_static)
    ideal = (vecs * np.exp(-1j * vals * t)) @ vecs.conj().T @ chi0
    ideal = np.exp(-1j * shifts * t) * ideal
    fidelity = float(np.abs(np.vdot(ideal, chi_final)) ** 2)
    return chi_final, ideal, fidelity


def write_tone_table(cfg: DriveConfig, levels: IonLevels, path) -> None:
    """Comma-separated tone table: frequency_hz, amplitude_rad_s, phase_rad.

    One row per tone in tone order 1..6; the amplitude column is the Rabi
    rate on the tone's designated transition.
    """
    freqs = cfg.tone_frequencies(levels) / TWO_PI
    lines = ["frequency_hz,amplitude_rad_s,phase_rad"]
    for tone in range(6):
        amp = cfg.rabi[tone, TONE_TRANSITIONS[tone] - 2]
        lines.append(f"{freqs[tone]:.17e},{amp:.17e},{cfg.phases[tone]:.17e}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")
