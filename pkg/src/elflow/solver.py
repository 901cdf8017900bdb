"""Time marching of the Friedrichs-truncated reformulated Ericksen-Leslie system.

Velocity lives in spectral space and is kept divergence free and band
limited; the director lives in real space and every increment is truncated
to the same band. The sharp cutoff doubles as the dealiasing filter.
"""
from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field, replace
from typing import Callable

import numpy as np

from . import constitutive as cv
from . import diagnostics, fields
from .coefficients import DerivedCoefficients, LeslieCoefficients, derive
from .errors import ConfigError, NonFiniteField

log = logging.getLogger(__name__)

STABILITY_CONSTANT = 2.5
INITIAL_KINDS = ("taylor_green", "equatorial", "random_smooth", "from_file")


class StabilityWarning(RuntimeWarning):
    pass


@dataclass(frozen=True)
class InitialData:
    kind: str = "taylor_green"
    amplitude: float = 0.0
    wavevector: tuple[int, ...] = (1, 0, 0)
    seed: int = 0
    decay_rate: float = 1.0
    path: str | None = None

    def __post_init__(self):
        if self.kind not in INITIAL_KINDS:
            raise ConfigError(f"unknown initial data {self.kind!r}")
        if self.kind == "from_file" and not self.path:
            raise ConfigError("from_file initial data needs a path")


@dataclass(frozen=True)
class SimConfig:
    grid: fields.GridSpec
    dt: float
    t_end: float
    nu: float
    alpha: LeslieCoefficients
    cutoff_K: float | None = None
    output_every: int = 1
    mode: str = "full"
    initial: InitialData = field(default_factory=InitialData)
    renormalize_director: bool = False
    sobolev_s: int = 2
    es_variant: str = "sec5"

    def __post_init__(self):
        if self.cutoff_K is None:
            object.__setattr__(self, "cutoff_K", self.grid.default_cutoff)
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.t_end >= 0:
            raise ConfigError("t_end must be >= 0")
        if not self.nu > 0:
            raise ConfigError("nu must be positive")
        if not self.cutoff_K > 0:
            raise ConfigError("cutoff_K must be positive")
        if self.output_every < 1:
            raise ConfigError("output_every must be >= 1")
        if self.mode not in diagnostics.MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.sobolev_s < 1:
            raise ConfigError("sobolev_s must be >= 1")
        if self.es_variant not in ("sec4", "sec5"):
            raise ConfigError("es_variant must be sec4 or sec5")
        try:
            derive(self.alpha, self.nu)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.dt > self.max_stable_dt(0.0) * (1 + 1e-12):
            raise ConfigError(
                f"dt={self.dt} exceeds the diffusive stability limit {self.max_stable_dt(0.0):.4g}")

    @property
    def coeffs(self) -> DerivedCoefficients:
        return derive(self.alpha, self.nu)

    @property
    def k_max(self) -> float:
        km = self.grid.kmag
        return float(km[km <= self.cutoff_K].max())

    @property
    def diffusivity(self) -> float:
        mu1 = self.coeffs.mu1
        return {"full": self.nu + mu1, "navier_stokes_only": self.nu,
                "director_only": mu1}[self.mode]

    def max_stable_dt(self, vmax: float) -> float:
        """``2.5 / (diffusivity k_max^2 + |v|_inf k_max)``."""
        k = self.k_max
        return STABILITY_CONSTANT / (self.diffusivity * k * k + vmax * k)

    @property
    def n_steps(self) -> int:
        return int(math.ceil(self.t_end / self.dt - 1e-9)) if self.t_end > 0 else 0

    @property
    def step_size(self) -> float:
        """Step actually used: ``t_end / n_steps`` so the run lands on ``t_end``."""
        return self.t_end / self.n_steps if self.n_steps else self.dt


@dataclass(frozen=True)
class SimState:
    t: float
    v_hat: np.ndarray
    n: np.ndarray

    def velocity(self, grid: fields.GridSpec) -> np.ndarray:
        return fields.inverse_transform(grid, self.v_hat)

    def copy(self) -> "SimState":
        return SimState(self.t, self.v_hat.copy(), self.n.copy())


# initial data ------------------------------------------------------------

def _smooth_random(grid, rng, comps, decay):
    w = rng.standard_normal((comps,) + grid.shape)
    w_hat = fields.transform(grid, w) * np.exp(-decay * grid.kmag)
    w_hat[(slice(None),) + (0,) * grid.dim] = 0.0
    return w_hat


def _rms(f):
    return float(np.sqrt(np.mean(np.sum(f * f, axis=0))))


def make_initial_data(init: InitialData, grid: fields.GridSpec,
                      cutoff: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Initial ``(v, n)`` in real space, both truncated to ``|k| <= cutoff``."""
    cutoff = grid.default_cutoff if cutoff is None else cutoff
    d = grid.dim
    X = grid.coords()
    zeros = np.zeros(grid.shape)
    if init.kind == "taylor_green":
        cz = np.cos(X[2]) if d == 3 else 1.0
        comps = [np.sin(X[0]) * np.cos(X[1]) * cz, -np.cos(X[0]) * np.sin(X[1]) * cz]
        v = np.stack(comps + [zeros] * (d - 2))
        n = np.stack([zeros, zeros, zeros + 1.0])
    elif init.kind == "equatorial":
        kvec = tuple(init.wavevector) + (0,) * 3
        phase = sum(kvec[i] * X[i] for i in range(d))
        theta = init.amplitude * np.sin(phase)
        v = np.zeros((d,) + grid.shape)
        n = np.stack([np.cos(theta), np.sin(theta), zeros])
    elif init.kind == "random_smooth":
        rng = np.random.default_rng(init.seed)
        v_hat = fields.leray_project(grid, _smooth_random(grid, rng, d, init.decay_rate))
        v = fields.inverse_transform(grid, fields.friedrichs_project(grid, v_hat, cutoff))
        p = fields.inverse_transform(grid, fields.friedrichs_project(
            grid, _smooth_random(grid, rng, 3, init.decay_rate), cutoff))
        if init.amplitude:
            v *= init.amplitude / _rms(v)
            p *= init.amplitude / _rms(p)
        else:
            v[:] = 0.0
            p[:] = 0.0
        n = p + np.array([0.0, 0.0, 1.0]).reshape((3,) + (1,) * d)
        n /= np.sqrt(np.sum(n * n, axis=0))
    else:
        file_grid, _, values = fields.read_snapshot(init.path)
        if file_grid != grid:
            raise ConfigError(f"{init.path}: grid {file_grid} does not match {grid}")
        if values.shape[0] != d + 3:
            raise ConfigError(f"{init.path}: expected {d + 3} components (v then n)")
        v, n = values[:d], values[d:]
    v_hat = fields.friedrichs_project(grid, fields.leray_project(grid, fields.transform(grid, v)),
                                      cutoff)
    n_hat = fields.friedrichs_project(grid, fields.transform(grid, n), cutoff)
    return fields.inverse_transform(grid, v_hat), fields.inverse_transform(grid, n_hat)


def initial_state(config: SimConfig) -> SimState:
    grid = config.grid
    v, n = make_initial_data(config.initial, grid, config.cutoff_K)
    # re-mask so the stored spectrum is exactly zero outside the band
    v_hat = fields.friedrichs_project(grid, fields.transform(grid, v), config.cutoff_K)
    return SimState(0.0, v_hat, n)


# right-hand side -----------------------------------------------------------

def _irfft(grid, a_hat):
    return fields.inverse_transform(grid, a_hat)


def _rfft(grid, a):
    return fields.transform(grid, a)


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise NonFiniteField("non-finite values in the right-hand side")


def rhs(state: SimState, config: SimConfig) -> tuple[np.ndarray, np.ndarray]:
    """Time derivatives ``(dv_hat, dn)`` of the truncated system."""
    grid = config.grid
    d = grid.dim
    mask = grid.friedrichs_mask(config.cutoff_K)
    co = config.coeffs
    mode = config.mode
    v_hat = state.v_hat
    n = state.n

    v3 = np.zeros((3,) + grid.shape)
    v3[:d] = _irfft(grid, v_hat)
    gv = np.zeros((3, 3) + grid.shape)
    ik = grid.ik
    gv[:d, :d] = _irfft(grid, np.stack([np.stack([ik[i] * v_hat[j] for j in range(d)])
                                        for i in range(d)]))
    if mode == "director_only":
        # frozen flow: the momentum forcing would be discarded
        dv_hat = np.zeros_like(v_hat)
    else:
        dv_hat = None
        force_hat = -_rfft(grid, np.einsum("i...,ij...->j...", v3, gv)[:d])

    if mode != "navier_stokes_only":
        n_hat = _rfft(grid, n)
        grad_n = np.zeros((3, 3) + grid.shape)
        grad_n[:d] = _irfft(grid, np.stack([ik[i] * n_hat for i in range(d)]))
        h = _irfft(grid, fields.laplacian_hat(grid, n_hat))
        D, omega = fields.split_gradient(gv)
        dn_real = cv.director_rhs_pointwise(n, cv.advect(v3, grad_n), h, D, omega, co.mu1, co.mu2)
        dn = _irfft(grid, mask * _rfft(grid, dn_real))
        if mode == "full":
            sigma = (cv.sigma1_pointwise(n, D, co.beta) + cv.sigma2_pointwise(n, h, co.mu2)
                     + cv.ericksen_stress_from_gradient(grad_n))
            sig_hat = _rfft(grid, sigma[:d, :d])
            force_hat = force_hat + sum(ik[i] * sig_hat[i] for i in range(d))
    else:
        dn = np.zeros_like(n)

    if dv_hat is None:
        dv_hat = mask * fields.leray_project(grid, force_hat) + config.nu * fields.laplacian_hat(
            grid, v_hat)
    _check_finite(dv_hat, dn)
    return dv_hat, dn


def step_rk4(state: SimState, config: SimConfig, dt: float | None = None) -> SimState:
    """One classical four-stage Runge-Kutta step."""
    grid = config.grid
    dt = config.step_size if dt is None else dt
    v0, n0 = state.v_hat, state.n

    def at(a, dv, dn, t):
        return SimState(t, v0 + a * dv, n0 + a * dn)

    k1 = rhs(state, config)
    k2 = rhs(at(0.5 * dt, *k1, state.t + 0.5 * dt), config)
    k3 = rhs(at(0.5 * dt, *k2, state.t + 0.5 * dt), config)
    k4 = rhs(at(dt, *k3, state.t + dt), config)
    v_new = v0 + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    n_new = n0 + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    mask = grid.friedrichs_mask(config.cutoff_K)
    v_new = mask * fields.leray_project(grid, v_new)
    if config.renormalize_director:
        n_new = n_new / np.sqrt(np.sum(n_new * n_new, axis=0))
        n_new = _irfft(grid, mask * _rfft(grid, n_new))
    _check_finite(v_new, n_new)
    return SimState(state.t + dt, v_new, n_new)


# driver --------------------------------------------------------------------

@dataclass
class Trajectory:
    config: SimConfig
    snapshots: list[SimState]
    reports: list[diagnostics.EnergyReport]
    steps_taken: int
    termination: str = "completed"

    @property
    def completed(self) -> bool:
        return self.termination == "completed"


def simulate(config: SimConfig,
             on_output: Callable[[int, SimState, diagnostics.EnergyReport], None] | None = None,
             keep_snapshots: bool = True,
             state: SimState | None = None) -> Trajectory:
    """Run from the initial data to ``t_end``.

    Diagnostics are recorded at step 0, every ``output_every`` steps and at
    the final step. A non-finite field ends the run early with the reason
    stored in :attr:`Trajectory.termination`.
    """
    grid = config.grid
    state = initial_state(config) if state is None else state
    rec = diagnostics.Recorder(grid, config.coeffs, config.nu, config.mode, config.sobolev_s,
                               n0=state.n.copy(), es_variant=config.es_variant)
    traj = Trajectory(config, [], rec.reports, 0)

    def emit(step, st):
        report = rec.record(st)
        if keep_snapshots:
            traj.snapshots.append(st.copy())
        if on_output is not None:
            on_output(step, st, report)

    emit(0, state)
    n_steps = config.n_steps
    dt = config.step_size
    warned = False
    for step in range(1, n_steps + 1):
        frozen = config.mode == "director_only"
        vmax = 0.0 if frozen else float(np.max(np.abs(state.velocity(grid))))
        if not warned and dt > config.max_stable_dt(vmax):
            warnings.warn(f"step {step}: dt={dt:.4g} exceeds advective stability estimate "
                          f"{config.max_stable_dt(vmax):.4g}", StabilityWarning, stacklevel=2)
            warned = True
        try:
            # overflow shows up as NonFiniteField; numpy's own warnings would only add noise
            with np.errstate(over="ignore", invalid="ignore"):
                state = step_rk4(state, config, dt)
        except NonFiniteField as exc:
            traj.termination = f"instability: {exc} at step {step} (t={state.t + dt:.6g})"
            log.warning(traj.termination)
            return traj
        if step == n_steps:
            # pin the final time exactly to t_end
            state = replace(state, t=config.t_end)
        traj.steps_taken = step
        if step % config.output_every == 0 or step == n_steps:
            emit(step, state)
    return traj
