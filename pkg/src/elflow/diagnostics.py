"""Monitored quantities: energy law, Sobolev energies, blow-up integrand, norm drift.

Functions take a grid and a state-like object with ``t``, ``v_hat`` (spectral
velocity) and ``n`` (real-space director). Integrals over the box are exact
Parseval sums for band-limited quantities and grid sums otherwise.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy.interpolate import CubicSpline

from . import fields
from .coefficients import DerivedCoefficients

CSV_COLUMNS = ("t", "E", "Dissip", "residual", "Es", "Ds",
               "blowup_integrand", "blowup_integral", "norm_drift")

MODES = ("full", "navier_stokes_only", "director_only")


@dataclass(frozen=True)
class EnergyReport:
    t: float
    E: float
    Dissip: float
    residual: float
    Es: float
    Ds: float
    blowup_integrand: float
    blowup_integral: float
    norm_drift: float
    es_sec4: float = math.nan
    es_sec5: float = math.nan

    def row(self) -> list[str]:
        return [f"{getattr(self, c):.17g}" for c in CSV_COLUMNS]


def energy(grid, state) -> float:
    """``(||v||^2 + ||grad n||^2) / 2``."""
    n_hat = fields.transform(grid, state.n)
    kin = fields.spectral_norm_sq(grid, state.v_hat)
    ela = fields.spectral_norm_sq(grid, n_hat * np.sqrt(grid.k2 * grid.nyquist_free))
    return 0.5 * (kin + ela)


def _dissipation_density(n, h, D, coeffs: DerivedCoefficients) -> np.ndarray:
    b1, b2, b3 = coeffs.beta
    nn2 = np.einsum("i...,i...->...", n, n)
    Dn = np.einsum("ij...,j...->i...", D, n)
    nDn = np.einsum("i...,i...->...", n, Dn)
    DD = np.einsum("ij...,ij...->...", D, D)
    Dn2 = np.einsum("i...,i...->...", Dn, Dn)
    nxh = np.cross(n, h, axis=0)
    return (b1 * nDn * nDn + b2 * nn2 * nn2 * DD + b3 * nn2 * Dn2
            + coeffs.mu1 * np.einsum("i...,i...->...", nxh, nxh))


def dissipation(grid, state, coeffs: DerivedCoefficients, nu: float, mode: str = "full") -> float:
    """Right-hand side of the energy law with the ``|n|`` weights of the modified stress.

    ``navier_stokes_only`` keeps only the viscous term; ``director_only``
    keeps only ``mu1 |n x h|^2`` (exact when the frozen velocity is zero).
    """
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}")
    k2 = grid.k2 * grid.nyquist_free
    viscous = nu * fields.spectral_norm_sq(grid, state.v_hat * np.sqrt(k2))
    if mode == "navier_stokes_only":
        return viscous
    n = state.n
    n_hat = fields.transform(grid, n)
    h = fields.inverse_transform(grid, fields.laplacian_hat(grid, n_hat))
    if mode == "director_only":
        nxh = np.cross(n, h, axis=0)
        return coeffs.mu1 * grid.cell_volume * float(np.sum(nxh * nxh))
    D, _ = fields.split_gradient(
        fields.inverse_transform(grid, fields.velocity_gradient_hat(grid, state.v_hat)))
    return viscous + grid.cell_volume * float(np.sum(_dissipation_density(n, h, D, coeffs)))


def integrate_samples(t: Sequence[float], y: Sequence[float]) -> float:
    """Integral of sampled data: not-a-knot cubic spline for 3+ points, else trapezoid."""
    t = np.asarray(t, float)
    y = np.asarray(y, float)
    if t.size < 2:
        return 0.0
    if t.size == 2:
        return float(0.5 * (t[1] - t[0]) * (y[0] + y[1]))
    return float(CubicSpline(t, y, bc_type="not-a-knot").integrate(t[0], t[-1]))


def energy_law_residual_arrays(t, E, Dissip) -> float:
    t = np.asarray(t, float)
    E = np.asarray(E, float)
    if t.size < 2:
        raise ValueError("need at least two samples")
    resid = abs(E[-1] - E[0] + integrate_samples(t, Dissip))
    return float(resid / max(E[0], np.finfo(float).eps))


def energy_law_residual(reports: Sequence[EnergyReport]) -> float:
    """``|E(t2) - E(t1) + int Dissip dt| / E(t1)`` over a window of reports."""
    return energy_law_residual_arrays([r.t for r in reports], [r.E for r in reports],
                                      [r.Dissip for r in reports])


class SobolevEnergies(NamedTuple):
    es_sec4: float
    es_sec5: float
    ds: float


def sobolev_energies(grid, state, s: int, coeffs: DerivedCoefficients, nu: float,
                     n0: np.ndarray | None = None) -> SobolevEnergies:
    """Higher-order energies ``E_s`` (with and without ``||n - n0||^2``) and ``D_s``.

    ``es_sec5 = ||grad n||^2 + ||grad Lap^s n||^2 + ||v||^2 + ||Lap^s v||^2``;
    ``ds = mu1 (||Lap n||^2 + ||Lap^{s+1} n||^2) + nu (||grad v||^2 + ||Lap^s grad v||^2)``.
    """
    if s < 1:
        raise ValueError("s must be >= 1")
    k2 = grid.k2 * grid.nyquist_free
    n_hat = fields.transform(grid, state.n)

    def weighted(a_hat, order):
        # squared L2 norm of an order-`order` derivative
        return fields.spectral_norm_sq(grid, a_hat * k2 ** (0.5 * order))

    v_hat = state.v_hat
    es5 = (weighted(n_hat, 1) + weighted(n_hat, 2 * s + 1)
           + weighted(v_hat, 0) + weighted(v_hat, 2 * s))
    ds = (coeffs.mu1 * (weighted(n_hat, 2) + weighted(n_hat, 2 * s + 2))
          + nu * (weighted(v_hat, 1) + weighted(v_hat, 2 * s + 1)))
    es4 = es5
    if n0 is not None:
        es4 = es5 + fields.spectral_norm_sq(grid, n_hat - fields.transform(grid, n0))
    return SobolevEnergies(es4, es5, ds)


@dataclass(frozen=True)
class BlowupTally:
    t: float
    integrand: float
    integral: float


def blowup_integrand(grid, state) -> float:
    """``||curl v||_inf + ||grad n||_inf^2`` using grid maxima."""
    w = fields.inverse_transform(grid, fields.curl_hat(grid, state.v_hat))
    wmax = float(np.max(np.abs(w))) if grid.dim == 2 else float(np.max(np.sqrt(np.sum(w * w, 0))))
    gn = fields.inverse_transform(grid, fields.gradient_hat(grid, fields.transform(grid, state.n)))
    gmax_sq = float(np.max(np.einsum("ik...,ik...->...", gn, gn)))
    return wmax + gmax_sq


def blowup_monitor(grid, state, running: BlowupTally | None) -> BlowupTally:
    """Advance the running blow-up integral to ``state.t`` by the trapezoid rule."""
    g = blowup_integrand(grid, state)
    if running is None:
        return BlowupTally(state.t, g, 0.0)
    integral = running.integral + 0.5 * (state.t - running.t) * (g + running.integrand)
    return BlowupTally(state.t, g, integral)


def norm_drift(n: np.ndarray) -> float:
    return float(np.max(np.abs(np.einsum("i...,i...->...", n, n) - 1.0)))


class SmallDataVerdict(NamedTuple):
    monotone: bool
    max_uptick: float


def small_data_monitor(es_values: Sequence[float], rel_tol: float = 1e-6) -> SmallDataVerdict:
    """Check that ``E_s`` never rises by more than ``rel_tol`` relative between samples."""
    es = np.asarray([getattr(e, "Es", e) for e in es_values], float)
    if es.size < 2:
        raise ValueError("need at least two samples")
    prev = es[:-1]
    rel = np.where(prev > 0, (es[1:] - prev) / np.where(prev > 0, prev, 1.0), es[1:] - prev)
    uptick = float(max(0.0, rel.max()))
    return SmallDataVerdict(uptick <= rel_tol, uptick)


@dataclass
class Recorder:
    """Builds one :class:`EnergyReport` per recorded state and keeps the history."""

    grid: fields.GridSpec
    coeffs: DerivedCoefficients
    nu: float
    mode: str = "full"
    s: int = 2
    n0: np.ndarray | None = None
    es_variant: str = "sec5"
    reports: list[EnergyReport] = field(default_factory=list)
    _tally: BlowupTally | None = None

    def record(self, state) -> EnergyReport:
        g = self.grid
        E = energy(g, state)
        D = dissipation(g, state, self.coeffs, self.nu, self.mode)
        sob = sobolev_energies(g, state, self.s, self.coeffs, self.nu, self.n0)
        self._tally = blowup_monitor(g, state, self._tally)
        ts = [r.t for r in self.reports] + [state.t]
        Es_hist = [r.E for r in self.reports] + [E]
        Ds_hist = [r.Dissip for r in self.reports] + [D]
        resid = energy_law_residual_arrays(ts, Es_hist, Ds_hist) if len(ts) > 1 else 0.0
        report = EnergyReport(
            t=state.t, E=E, Dissip=D, residual=resid,
            Es=sob.es_sec4 if self.es_variant == "sec4" else sob.es_sec5, Ds=sob.ds,
            blowup_integrand=self._tally.integrand, blowup_integral=self._tally.integral,
            norm_drift=norm_drift(state.n), es_sec4=sob.es_sec4, es_sec5=sob.es_sec5)
        self.reports.append(report)
        return report


def write_csv(path, reports: Sequence[EnergyReport]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_COLUMNS)
        for r in reports:
            w.writerow(r.row())


def read_csv(path) -> list[EnergyReport]:
    """Parse a diagnostics CSV; raises ``ValueError`` on any malformed content."""
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CSV_COLUMNS:
        raise ValueError(f"{path}: missing or wrong header")
    out = []
    for lineno, row in enumerate(rows[1:], 2):
        if len(row) != len(CSV_COLUMNS):
            raise ValueError(f"{path}:{lineno}: expected {len(CSV_COLUMNS)} fields")
        try:
            vals = [float(x) for x in row]
        except ValueError:
            raise ValueError(f"{path}:{lineno}: non-numeric field") from None
        out.append(EnergyReport(*vals))
    if not out:
        raise ValueError(f"{path}: no data rows")
    return out
