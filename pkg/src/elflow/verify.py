"""Self-checks of the algebraic and spectral identities the solver relies on.

Each check returns a :class:`Check` with its worst residual and threshold, so
the CLI and the test suite share one implementation.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import constitutive as cv
from . import doi_onsager, fields
from .coefficients import derive


@dataclass(frozen=True)
class Check:
    name: str
    residual: float
    threshold: float

    @property
    def passed(self) -> bool:
        return bool(np.isfinite(self.residual) and self.residual <= self.threshold)

    def line(self) -> str:
        return (f"{'PASS' if self.passed else 'FAIL'}  {self.name:<28s} "
                f"residual={self.residual:.3e}  threshold={self.threshold:.1e}")


def random_pointwise(n_samples: int, rng: np.random.Generator):
    """Random ``(n, h, D, Omega)`` batches; ``n`` is not normalised."""
    n = rng.standard_normal((3, n_samples))
    h = rng.standard_normal((3, n_samples))
    A = rng.standard_normal((3, 3, n_samples))
    B = rng.standard_normal((3, 3, n_samples))
    D = 0.5 * (A + A.transpose(1, 0, 2))
    omega = 0.5 * (B - B.transpose(1, 0, 2))
    return n, h, D, omega


def cancellation_check(n_samples: int = 100_000, seed: int = 0, threshold: float = 1e-11) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    chunk = 20_000
    done = 0
    while done < n_samples:
        m = min(chunk, n_samples - done)
        worst = max(worst, *cv.cancellation_residuals(*random_pointwise(m, rng)))
        done += m
    return Check("cancellation identities", worst, threshold)


def analytic_directors(grid: fields.GridSpec) -> dict[str, np.ndarray]:
    """Unit directors whose Laplacian is resolved to roundoff on a 64-point grid."""
    X = grid.coords()
    zeros = np.zeros(grid.shape)
    theta = 0.3 * np.sin(X[0])
    return {
        "equatorial": np.stack([np.cos(theta), np.sin(theta), zeros]),
        "meridional": np.stack([np.sin(X[1]), zeros, np.cos(X[1])]),
    }


def harmonic_checks(n: int = 64, threshold: float = 1e-10) -> list[Check]:
    grid = fields.GridSpec(2, n)
    return [Check(f"harmonic identity ({name})", cv.harmonic_identity_residual(grid, d), threshold)
            for name, d in analytic_directors(grid).items()]


def smooth_unit_director(grid: fields.GridSpec, rng: np.random.Generator,
                         amplitude: float = 0.5, decay: float = 0.7) -> np.ndarray:
    w_hat = fields.transform(grid, rng.standard_normal((3,) + grid.shape))
    p = fields.inverse_transform(grid, w_hat * np.exp(-decay * grid.kmag) * grid.nyquist_free)
    p *= amplitude / np.sqrt(np.mean(np.sum(p * p, axis=0)))
    n = p + np.array([0.0, 0.0, 1.0]).reshape((3,) + (1,) * grid.dim)
    return n / np.sqrt(np.sum(n * n, axis=0))


def smooth_velocity(grid: fields.GridSpec, rng: np.random.Generator, decay: float = 0.7):
    w_hat = fields.transform(grid, rng.standard_normal((grid.dim,) + grid.shape))
    w_hat = fields.leray_project(grid, w_hat * np.exp(-decay * grid.kmag) * grid.nyquist_free)
    return fields.inverse_transform(grid, w_hat)


def stress_equivalence_residual(grid, alpha, v, n) -> float:
    """``|sigma^L(alpha, n, D, N) - sigma1 - sigma2|_inf / |sigma^L|_inf`` with slaved ``N``."""
    co = derive(alpha)
    D, _ = fields.strain_rotation(grid, v)
    h = cv.molecular_field(grid, n)
    N = cv.slaved_corotational(n, h, D, co.mu1, co.mu2)
    leslie = cv.leslie_stress_original(alpha, n, D, N)
    reform = cv.sigma1_pointwise(n, D, co.beta) + cv.sigma2_pointwise(n, h, co.mu2)
    scale = max(float(np.max(np.abs(leslie))), np.finfo(float).tiny)
    return float(np.max(np.abs(leslie - reform))) / scale


def stress_equivalence_check(n_fields: int = 3, seed: int = 0, n: int = 64,
                             threshold: float = 1e-9) -> Check:
    grid = fields.GridSpec(2, n)
    rng = np.random.default_rng(seed)
    alpha = doi_onsager.generate(doi_onsager.MaierSaupeParams())
    worst = max(stress_equivalence_residual(grid, alpha, smooth_velocity(grid, rng),
                                            smooth_unit_director(grid, rng))
                for _ in range(n_fields))
    return Check("stress equivalence", worst, threshold)


def projector_checks(seed: int = 0, threshold: float = 1e-12) -> list[Check]:
    grid = fields.GridSpec(2, 32)
    rng = np.random.default_rng(seed)
    v_hat = fields.transform(grid, rng.standard_normal((2,) + grid.shape))
    f_hat = fields.transform(grid, rng.standard_normal(grid.shape))
    K = grid.default_cutoff
    P = fields.leray_project(grid, v_hat)
    J = lambda a: fields.friedrichs_project(grid, a, K)  # noqa: E731
    div = fields.inverse_transform(grid, fields.divergence_hat(grid, P))
    scale = float(np.max(np.abs(v_hat)))

    def diff(a, b, scale=scale):
        return float(np.max(np.abs(a - b))) / scale

    lap = fields.laplacian_hat(grid, f_hat)
    return [
        Check("leray divergence", float(np.max(np.abs(div))), threshold),
        Check("leray idempotent", diff(fields.leray_project(grid, P), P), threshold),
        Check("friedrichs idempotent", diff(J(J(v_hat)), J(v_hat)), threshold),
        Check("friedrichs-leray commute", diff(J(P), fields.leray_project(grid, J(v_hat))),
              threshold),
        Check("friedrichs-laplacian commute",
              diff(J(lap), fields.laplacian_hat(grid, J(f_hat)), float(np.max(np.abs(lap)))),
              threshold),
    ]


def run_all(samples: int = 100_000, seed: int = 0) -> list[Check]:
    return [cancellation_check(samples, seed), *harmonic_checks(),
            stress_equivalence_check(seed=seed), *projector_checks(seed)]
