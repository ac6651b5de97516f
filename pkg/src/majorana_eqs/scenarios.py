"""Scenario configs and the runner that turns them into figure data files.

A scenario is a JSON document (dialect ``json/1``) validated against
``SCENARIO_SCHEMA``.  Dynamics scenarios evolve a plane-wave or Gaussian
initial state, optionally applying K/T/C gates mid-evolution, and write one
CSV per observable series (columns ``time,value`` or ``time,value,stderr``)
plus one CSV per density snapshot (columns ``coordinate,density``).
Hardware scenarios calibrate a six-tone drive and write its tone table.
Every run emits a JSON manifest echoing the config, versions, timings and
the result of the invariant suite (mode-norm conservation, total norm,
reality condition).  Data files are byte-identical across reruns with the
same config and seed; the manifest's timing block is exempt.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from . import __version__
from .core import (EnlargedState, MajoranaState, RECOVERY_MATRIX,
                   apply_symmetry, embed, recover)
from .dynamics import evolve
from .grids import MomentumGrid
from .hardware import (IonLevels, calibrate, detuning_residuals,
                       effective_hamiltonian, simulate_full_drive,
                       effective_pi_half_time, target_matrix,
                       write_tone_table)
from .observables import (ObservableSeries, charge,
                          fidelity_global_phase, mean_momentum,
                          mean_position, orthogonality,
                          particle_antiparticle_populations,
                          particle_momentum_densities)
from .tomography import error_bars, reconstruct, sample

__all__ = [
    "SCENARIO_SCHEMA", "BUILTIN_SCENARIOS", "ConfigError",
    "InvariantFailure", "load_scenario", "validate_scenario", "run_scenario",
]

CONFIG_DIALECT = "json/1"

_NUMBER = {"type": "number"}

SCENARIO_SCHEMA = {
    "type": "object",
    "required": ["name", "kind"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "kind": {"enum": ["dynamics", "hardware"]},
        "mass": _NUMBER,
        "times": {
            "type": "object",
            "required": ["stop", "step"],
            "additionalProperties": False,
            "properties": {"stop": _NUMBER, "step": _NUMBER},
        },
        "initial": {
            "type": "object",
            "required": ["type"],
            "additionalProperties": False,
            "properties": {
                "type": {"enum": ["plane_wave", "gaussian"]},
                "momenta": {"type": "array", "items": _NUMBER, "minItems": 1},
                "spinor": {
                    "type": "array", "minItems": 2, "maxItems": 2,
                    "items": {"type": "array", "minItems": 2, "maxItems": 2,
                              "items": _NUMBER},
                },
                "p0": _NUMBER,
                "x0": _NUMBER,
                "sigma_x": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "grid": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p_max": {"type": "number", "exclusiveMinimum": 0},
                "points": {"type": "integer", "minimum": 3},
            },
        },
        "operations": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["label", "time"],
                "additionalProperties": False,
                "properties": {"label": {"enum": ["K", "T", "C"]},
                               "time": _NUMBER},
            },
        },
        "observables": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name"],
                "additionalProperties": False,
                "properties": {
                    "name": {"enum": ["mean_momentum", "mean_position",
                                      "charge", "populations",
                                      "fidelity_global_phase",
                                      "orthogonality"]},
                    "theta": _NUMBER,
                    "variant": {"enum": ["perp", "perp_prime"]},
                },
            },
        },
        "snapshots": {
            "type": "object",
            "required": ["times", "kinds"],
            "additionalProperties": False,
            "properties": {
                "times": {"type": "array", "items": _NUMBER},
                "kinds": {"type": "array", "items": {
                    "enum": ["momentum_density", "position_density",
                             "particle_momentum_density"]}},
            },
        },
        "tomography": {
            "type": ["object", "null"],
            "required": ["shots", "runs"],
            "additionalProperties": False,
            "properties": {
                "shots": {"type": "integer", "minimum": 1},
                "runs": {"type": "integer", "minimum": 2},
                "base_seed": {"type": "integer"},
            },
        },
        "hardware": {
            "type": "object",
            "required": ["p", "m", "delta", "energy_scale"],
            "additionalProperties": False,
            "properties": {
                "p": _NUMBER,
                "m": {"type": "number", "minimum": 0},
                "delta": {"type": "number", "exclusiveMinimum": 0},
                "energy_scale": {"type": "number", "exclusiveMinimum": 0},
                "full_drive": {"type": "boolean"},
            },
        },
    },
}

_HALF_PI = float(np.pi / 2.0)

BUILTIN_SCENARIOS: dict[str, dict] = {
    "fig2a": {
        "name": "fig2a", "kind": "dynamics", "mass": 1.0,
        "times": {"stop": 8.0, "step": 0.05},
        "initial": {"type": "plane_wave", "momenta": [0.0, 0.5, 1.0],
                    "spinor": [[1.0, 0.0], [0.0, 0.0]]},
        "observables": [{"name": "mean_momentum"}],
        "tomography": None,
    },
    "fig2b": {
        "name": "fig2b", "kind": "dynamics", "mass": 1.0,
        "times": {"stop": 8.0, "step": 0.05},
        "initial": {"type": "plane_wave", "momenta": [0.0, 0.5, 1.0],
                    "spinor": [[1.0, 0.0], [0.0, 0.0]]},
        "observables": [{"name": "charge"}],
        "tomography": None,
    },
    "fig2c": {
        "name": "fig2c", "kind": "dynamics", "mass": 1.0,
        "times": {"stop": 8.0, "step": 0.05},
        "initial": {"type": "plane_wave", "momenta": [0.0, 0.5, 1.0],
                    "spinor": [[1.0, 0.0], [0.0, 0.0]]},
        "observables": [{"name": "fidelity_global_phase", "theta": _HALF_PI}],
        "tomography": None,
    },
    "fig2d": {
        "name": "fig2d", "kind": "dynamics", "mass": 1.0,
        "times": {"stop": 8.0, "step": 0.05},
        "initial": {"type": "plane_wave", "momenta": [0.0, 0.5, 1.0],
                    "spinor": [[1.0, 0.0], [0.0, 0.0]]},
        "observables": [{"name": "orthogonality", "variant": "perp"},
                        {"name": "orthogonality", "variant": "perp_prime"}],
        "tomography": None,
    },
    "fig3-timereversal": {
        "name": "fig3-timereversal", "kind": "dynamics", "mass": 1.0,
        "times": {"stop": 8.0, "step": 0.05},
        "initial": {"type": "gaussian", "p0": 1.0, "x0": 0.0,
                    "sigma_x": 1.4142135623730951,
                    "spinor": [[1.0, 0.0], [1.0, 0.0]]},
        "grid": {"p_max": 4.0, "points": 65},
        "operations": [{"label": "T", "time": 4.0}],
        "observables": [{"name": "mean_momentum"}, {"name": "mean_position"}],
        "snapshots": {"times": [0.0, 3.0, 5.0, 8.0],
                      "kinds": ["momentum_density", "position_density"]},
        "tomography": None,
    },
    "fig3-chargeconj": {
        "name": "fig3-chargeconj", "kind": "dynamics", "mass": 1.0,
        "times": {"stop": 8.0, "step": 0.05},
        "initial": {"type": "gaussian", "p0": 1.0, "x0": 0.0,
                    "sigma_x": 1.4142135623730951,
                    "spinor": [[1.0, 0.0], [1.0, 0.0]]},
        "grid": {"p_max": 4.0, "points": 65},
        "operations": [{"label": "C", "time": 4.0}],
        "observables": [{"name": "mean_momentum"}, {"name": "mean_position"}],
        "snapshots": {"times": [0.0, 3.0, 5.0, 8.0],
                      "kinds": ["momentum_density", "position_density"]},
        "tomography": None,
    },
    "figS1": {
        "name": "figS1", "kind": "dynamics", "mass": 1.0,
        "times": {"stop": 8.0, "step": 0.05},
        "initial": {"type": "gaussian", "p0": 1.0, "x0": 0.0,
                    "sigma_x": 1.4142135623730951,
                    "spinor": [[1.0, 0.0], [1.0, 0.0]]},
        "grid": {"p_max": 4.0, "points": 65},
        "operations": [{"label": "C", "time": 4.0}],
        "observables": [{"name": "charge"}, {"name": "populations"}],
        "snapshots": {"times": [0.0, 3.0, 5.0, 8.0],
                      "kinds": ["particle_momentum_density"]},
        "tomography": None,
    },
    "hardware-calibration": {
        "name": "hardware-calibration", "kind": "hardware",
        "hardware": {"p": 1.0, "m": 1.0, "delta": 1256637.0614359172,
                     "energy_scale": 12566.370614359172,
                     "full_drive": False},
    },
}


class ConfigError(ValueError):
    """Invalid scenario configuration, with the offending field path."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path or '<root>'}: {message}")
        self.path = path


class InvariantFailure(RuntimeError):
    """A run violated the core invariant suite."""


def load_scenario(source: str | Path) -> dict:
    """Resolve a built-in scenario name or a JSON config file."""
    name = str(source)
    if name in BUILTIN_SCENARIOS:
        return json.loads(json.dumps(BUILTIN_SCENARIOS[name]))
    path = Path(source)
    if not path.is_file():
        raise ConfigError("", f"unknown scenario name or missing file: {name}")
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"not valid JSON: {exc}") from exc


def validate_scenario(config: dict) -> dict:
    """Schema plus semantic validation; returns the config unchanged."""
    try:
        jsonschema.validate(config, SCENARIO_SCHEMA)
    except jsonschema.ValidationError as exc:
        path = ".".join(str(part) for part in exc.absolute_path)
        raise ConfigError(path, exc.message) from exc

    kind = config["kind"]
    if kind == "hardware":
        if "hardware" not in config:
            raise ConfigError("hardware", "hardware scenarios need this block")
        return config

    for key in ("mass", "times", "initial", "observables"):
        if key not in config:
            raise ConfigError(key, "dynamics scenarios need this field")
    times = config["times"]
    if times["step"] <= 0 or times["stop"] <= 0:
        raise ConfigError("times", "stop and step must be positive")
    initial = config["initial"]
    if initial["type"] == "plane_wave":
        if "momenta" not in initial or "spinor" not in initial:
            raise ConfigError("initial", "plane waves need momenta and spinor")
    else:
        for key in ("p0", "sigma_x", "spinor"):
            if key not in initial:
                raise ConfigError("initial", f"gaussian packets need {key}")
        grid = config.get("grid", {})
        if grid.get("points", 65) % 2 == 0:
            raise ConfigError("grid.points", "point count must be odd")
    for op in config.get("operations", []):
        if not 0.0 <= op["time"] <= times["stop"]:
            raise ConfigError("operations", "operation time outside time span")
    for obs in config["observables"]:
        if obs["name"] == "fidelity_global_phase" and "theta" not in obs:
            raise ConfigError("observables", "fidelity needs theta")
        if obs["name"] == "orthogonality" and "variant" not in obs:
            raise ConfigError("observables", "orthogonality needs variant")
        if (obs["name"] in ("fidelity_global_phase", "orthogonality")
                and initial["type"] != "plane_wave"):
            raise ConfigError("observables",
                              f"{obs['name']} needs plane-wave initial states")
        if obs["name"] == "mean_position" and initial["type"] == "plane_wave":
            raise ConfigError("observables",
                              "mean_position needs a gaussian initial state")
    for t in config.get("snapshots", {}).get("times", []):
        if not 0.0 <= t <= times["stop"]:
            raise ConfigError("snapshots.times", "snapshot outside time span")
    return config


def _spinor(raw) -> np.ndarray:
    return np.array([complex(c[0], c[1]) for c in raw])


@dataclass
class _RunData:
    series: list[ObservableSeries] = field(default_factory=list)
    snapshots: list[tuple[str, np.ndarray, np.ndarray]] = field(default_factory=list)
    invariants: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)


def _schedule_states(Psi0: EnlargedState, m: float, sample_times, operations):
    """Evolve through the operation schedule; states at an operation time
    are sampled just after the gate.  Returns the sampled states and the
    (time, pre, post) gate events."""
    ops = sorted((op["time"], op["label"]) for op in operations)
    pending = list(ops)
    events = []
    current, t_now = Psi0, 0.0
    states = []
    for t in sample_times:
        while pending and pending[0][0] <= t + 1e-12:
            op_time, label = pending.pop(0)
            pre = evolve(current, m, op_time - t_now)
            post = apply_symmetry(pre, label)
            events.append((op_time, pre, post))
            current, t_now = post, op_time
        states.append(evolve(current, m, t - t_now))
    return states, events


def _tomo_seed(base: int, run: int, time_index: int, mode: int = 0) -> int:
    # injective over runs (<1e6 draws per run), time samples (<1009) and
    # grid modes (<1009), so no two tomography draws share an RNG stream
    return base + 1_018_081 * run + 1009 * time_index + mode


def _measured_diagonal(Psi: EnlargedState, sigma: np.ndarray, f,
                       shots: int, seed: int) -> float:
    """Finite-shot estimate of a diagonal observable via per-mode tomography."""
    kernel = RECOVERY_MATRIX.conj().T @ sigma @ RECOVERY_MATRIX
    amp = Psi.amplitude()
    weights = np.sum(np.abs(amp) ** 2, axis=1)
    fp = np.asarray(f(Psi.grid.points), dtype=float)
    total = 0.0
    for k in range(Psi.grid.n):
        if weights[k] < 1e-14:
            continue
        chi = amp[k] / np.sqrt(weights[k])
        rho = reconstruct(sample(chi, shots=shots, seed=seed + k))
        total += (Psi.grid.weights[k] * fp[k] * weights[k]
                  * float(np.real(np.trace(rho @ kernel))))
    return total


def _dynamics_series(config, states, m, times, tomo) -> list[ObservableSeries]:
    recovered = [recover(s) for s in states]
    out = []
    for obs in config["observables"]:
        name = obs["name"]
        if name == "mean_momentum":
            exact = [mean_momentum(s) for s in states]
            if tomo:
                base = tomo.get("base_seed", 0)
                runs = [[_measured_diagonal(s, np.eye(2), lambda p: p,
                                            tomo["shots"],
                                            _tomo_seed(base, r, i))
                         for i, s in enumerate(states)]
                        for r in range(tomo["runs"])]
                out.append(error_bars(times, np.array(runs), "mean_momentum"))
            else:
                out.append(ObservableSeries(times, np.array(exact),
                                            label="mean_momentum"))
        elif name == "mean_position":
            vals = [mean_position(s) for s in states]
            out.append(ObservableSeries(times, np.array(vals),
                                        label="mean_position"))
        elif name == "charge":
            vals = [charge(psi, m) for psi in recovered]
            out.append(ObservableSeries(times, np.array(vals), label="charge"))
        elif name == "populations":
            pops = np.array([particle_antiparticle_populations(psi, m)
                             for psi in recovered])
            out.append(ObservableSeries(times, pops[:, 0],
                                        label="population_particle"))
            out.append(ObservableSeries(times, pops[:, 1],
                                        label="population_antiparticle"))
    return out


def _plane_wave_series(config, p, m, times) -> list[ObservableSeries]:
    out = []
    for obs in config["observables"]:
        name = obs["name"]
        tag = f"p{p:g}"
        if name == "fidelity_global_phase":
            vals = [fidelity_global_phase(p, m, obs["theta"], t) for t in times]
            out.append(ObservableSeries(times, np.array(vals),
                                        label=f"fidelity_{tag}"))
        elif name == "orthogonality":
            vals = [orthogonality(p, m, t, obs["variant"]) for t in times]
            out.append(ObservableSeries(times, np.array(vals),
                                        label=f"orthogonality_{obs['variant']}_{tag}"))
    return out


def _run_invariants(state_families: list[list[EnlargedState]]) -> dict:
    """Unitarity (per-mode norm), total norm and reality checks.

    Each family is the time series of one initial state; mode norms are
    compared within a family only.
    """
    mode_drift = 0.0
    norm_drift = 0.0
    reality = 0.0
    for states in state_families:
        mode0 = np.sum(np.abs(states[0].amplitude()) ** 2, axis=1)
        for s in states:
            mode = np.sum(np.abs(s.amplitude()) ** 2, axis=1)
            mode_drift = max(mode_drift, float(np.max(np.abs(mode - mode0))))
            norm_drift = max(norm_drift, abs(s.norm() - 1.0))
            reality = max(reality, s.reality_violation())
    passed = mode_drift < 1e-10 and norm_drift < 1e-8 and reality < 1e-10
    return {"mode_norm_drift": mode_drift, "norm_drift": norm_drift,
            "reality_violation": reality, "passed": bool(passed)}


def _run_dynamics(config: dict, out: _RunData) -> None:
    m = config["mass"]
    times_cfg = config["times"]
    nsteps = int(round(times_cfg["stop"] / times_cfg["step"]))
    times = np.arange(nsteps + 1) * times_cfg["step"]
    initial = config["initial"]
    operations = config.get("operations", [])
    tomo = config.get("tomography")

    if initial["type"] == "plane_wave":
        spinor = _spinor(initial["spinor"])
        families = []
        for p in initial["momenta"]:
            psi0 = MajoranaState.plane_wave(spinor, p)
            Psi0 = embed(psi0)
            states, _ = _schedule_states(Psi0, m, times, operations)
            families.append(states)
            recovered = [recover(s) for s in states]
            for obs in config["observables"]:
                tag = f"p{p:g}"
                if obs["name"] == "mean_momentum":
                    if tomo:
                        base = tomo.get("base_seed", 0)
                        runs = [[_measured_diagonal(
                                    s, np.eye(2), lambda q: q, tomo["shots"],
                                    _tomo_seed(base, r, i))
                                 for i, s in enumerate(states)]
                                for r in range(tomo["runs"])]
                        series = error_bars(times, np.array(runs),
                                            f"mean_momentum_{tag}")
                    else:
                        series = ObservableSeries(
                            times, np.array([mean_momentum(s) for s in states]),
                            label=f"mean_momentum_{tag}")
                    out.series.append(series)
                elif obs["name"] == "charge":
                    out.series.append(ObservableSeries(
                        times, np.array([charge(r_, m) for r_ in recovered]),
                        label=f"charge_{tag}"))
                elif obs["name"] == "populations":
                    pops = np.array([particle_antiparticle_populations(r_, m)
                                     for r_ in recovered])
                    out.series.append(ObservableSeries(
                        times, pops[:, 0], label=f"population_particle_{tag}"))
                    out.series.append(ObservableSeries(
                        times, pops[:, 1],
                        label=f"population_antiparticle_{tag}"))
            out.series.extend(_plane_wave_series(config, p, m, times))
        out.invariants.update(_run_invariants(families))
        return

    grid_cfg = config.get("grid", {})
    grid = MomentumGrid.uniform(grid_cfg.get("p_max", 4.0),
                                grid_cfg.get("points", 65))
    psi0 = MajoranaState.gaussian_packet(
        grid, p0=initial["p0"], spinor=_spinor(initial["spinor"]),
        sigma_x=initial["sigma_x"], x0=initial.get("x0", 0.0))
    Psi0 = embed(psi0)
    states, _ = _schedule_states(Psi0, m, times, operations)
    out.series.extend(_dynamics_series(config, states, m, times, tomo))
    out.invariants.update(_run_invariants([states]))

    snaps = config.get("snapshots")
    if snaps:
        snap_states, _ = _schedule_states(Psi0, m, snaps["times"], operations)
        for t, state in zip(snaps["times"], snap_states):
            psi_t = recover(state)
            for kind in snaps["kinds"]:
                if kind == "momentum_density":
                    out.snapshots.append(
                        (f"momentum_density_t{t:g}", grid.points,
                         psi_t.momentum_density()))
                elif kind == "position_density":
                    out.snapshots.append(
                        (f"position_density_t{t:g}", grid.spatial.points,
                         psi_t.position_density()))
                else:
                    dens_p, dens_a = particle_momentum_densities(psi_t, m)
                    out.snapshots.append(
                        (f"particle_momentum_density_t{t:g}", grid.points,
                         dens_p))
                    out.snapshots.append(
                        (f"antiparticle_momentum_density_t{t:g}", grid.points,
                         dens_a))


def _run_hardware(config: dict, out: _RunData, out_dir: Path,
                  prefix: str) -> None:
    hw = config["hardware"]
    levels = IonLevels.default()
    cfg = calibrate(hw["p"], hw["m"], hw["delta"], levels,
                    energy_scale=hw["energy_scale"])
    h_eff, residual = effective_hamiltonian(cfg, levels)
    target = target_matrix(hw["p"], hw["m"], hw["energy_scale"])
    rel_error = float(np.max(np.abs(h_eff - target)) / np.max(np.abs(target)))
    fixed_point = float(np.max(detuning_residuals(cfg, levels)))
    tone_path = out_dir / f"{prefix}__tone_table.csv"
    write_tone_table(cfg, levels, tone_path)
    out.extras["hardware"] = {
        "effective_matrix_rel_error": rel_error,
        "fixed_point_residual": fixed_point,
        "fixed_point_residual_limit": 1e-9 * levels.omega_z,
        "oscillating_residuals": {k: float(v) for k, v in residual.items()},
        "tone_table": tone_path.name,
    }
    out.invariants.update({
        "effective_matrix_rel_error": rel_error,
        "passed": bool(rel_error < 1e-3
                       and fixed_point < 1e-9 * levels.omega_z),
    })
    if hw.get("full_drive"):
        chi0 = np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
        t_gate = effective_pi_half_time(hw["p"], hw["m"], hw["energy_scale"])
        _, _, fidelity = simulate_full_drive(cfg, levels, chi0, t_gate,
                                             target=target)
        out.extras["hardware"]["full_drive_fidelity"] = fidelity


def _write_series(path: Path, series: ObservableSeries) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if series.stderr is None:
            fh.write("time,value\n")
            for t, v in zip(series.times, series.values):
                fh.write(f"{t:.17e},{v:.17e}\n")
        else:
            fh.write("time,value,stderr\n")
            for t, v, e in zip(series.times, series.values, series.stderr):
                fh.write(f"{t:.17e},{v:.17e},{e:.17e}\n")


def _write_snapshot(path: Path, coord: np.ndarray, density: np.ndarray) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("coordinate,density\n")
        for c, d in zip(coord, density):
            fh.write(f"{c:.17e},{d:.17e}\n")


def run_scenario(source: str | Path, out_dir: str | Path = ".",
                 seed: int | None = None, grid_points: int | None = None,
                 shots: int | None = None) -> dict:
    """Run a scenario and write its result files.

    Returns the manifest dict.  Raises ``ConfigError`` for invalid configs
    and ``InvariantFailure`` when the invariant suite fails.
    """
    config = validate_scenario(load_scenario(source))
    if grid_points is not None:
        if grid_points % 2 == 0:
            raise ConfigError("grid.points", "point count must be odd")
        config.setdefault("grid", {})["points"] = grid_points
    if shots is not None:
        tomo = config.get("tomography") or {"runs": 10, "base_seed": 0}
        tomo["shots"] = shots
        config["tomography"] = tomo
    if seed is not None and config.get("tomography"):
        config["tomography"]["base_seed"] = seed

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    prefix = config["name"]
    started = time.perf_counter()

    data = _RunData()
    if config["kind"] == "dynamics":
        _run_dynamics(config, data)
    else:
        _run_hardware(config, data, out_dir, prefix)

    outputs = []
    for series in data.series:
        path = out_dir / f"{prefix}__{series.label}.csv"
        _write_series(path, series)
        outputs.append(path.name)
    for label, coord, density in data.snapshots:
        path = out_dir / f"{prefix}__{label}.csv"
        _write_snapshot(path, coord, density)
        outputs.append(path.name)
    if "hardware" in data.extras:
        outputs.append(data.extras["hardware"]["tone_table"])

    manifest = {
        "config": config,
        "config_dialect": CONFIG_DIALECT,
        "package_version": __version__,
        "numpy_version": np.__version__,
        "invariants": data.invariants,
        "outputs": sorted(outputs),
        "extras": data.extras,
        "timings": {"total_s": time.perf_counter() - started},
    }
    with open(out_dir / f"{prefix}__manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")

    if not data.invariants.get("passed", False):
        raise InvariantFailure(
            f"invariant suite failed: {data.invariants}")
    return manifest
