"""Leslie viscosity coefficients, derived constants and the dissipation test.

The six Leslie coefficients determine the rotational viscosity
``gamma1 = alpha3 - alpha2`` and ``gamma2 = alpha6 - alpha5``; the reformulated
director equation uses ``mu1 = 1/gamma1`` and ``mu2 = -gamma2/gamma1`` and the
viscous dissipation is governed by the three combinations::

    beta1 = alpha1 + gamma2**2 / gamma1
    beta2 = alpha4
    beta3 = alpha5 + alpha6 - gamma2**2 / gamma1

The quadratic form ``beta1 (n.D.n)**2 + beta2 D:D + beta3 |D.n|**2`` is
non-negative on every trace-free symmetric ``D`` and unit ``n`` exactly when
``is_admissible`` holds; ``min_dissipation_oracle`` checks that by sampling.
"""
from __future__ import annotations

import functools
from dataclasses import dataclass, fields
from typing import NamedTuple

import numpy as np

from .errors import CoefficientParseError, NonPositiveGamma1, NonSymmetric, NonTraceFree

_ALPHA_KEYS = tuple(f"alpha{i}" for i in range(1, 7))


@dataclass(frozen=True)
class LeslieCoefficients:
    alpha1: float
    alpha2: float
    alpha3: float
    alpha4: float
    alpha5: float
    alpha6: float

    @classmethod
    def from_sequence(cls, values) -> "LeslieCoefficients":
        values = [float(a) for a in values]
        if len(values) != 6:
            raise ValueError(f"expected 6 Leslie coefficients, got {len(values)}")
        return cls(*values)

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, f.name) for f in fields(self))

    @property
    def gamma1(self) -> float:
        return self.alpha3 - self.alpha2

    @property
    def gamma2(self) -> float:
        return self.alpha6 - self.alpha5


@dataclass(frozen=True)
class DerivedCoefficients:
    gamma1: float
    gamma2: float
    mu1: float
    mu2: float
    beta1: float
    beta2: float
    beta3: float
    nu: float | None = None

    @property
    def beta(self) -> tuple[float, float, float]:
        return (self.beta1, self.beta2, self.beta3)


class ParodiCheck(NamedTuple):
    holds: bool
    residual: float


def check_parodi(alpha: LeslieCoefficients, tol: float = 1e-12) -> ParodiCheck:
    """Parodi's relation ``alpha2 + alpha3 = alpha6 - alpha5``."""
    residual = abs((alpha.alpha2 + alpha.alpha3) - (alpha.alpha6 - alpha.alpha5))
    return ParodiCheck(residual <= tol, residual)


def derive(alpha: LeslieCoefficients, nu: float | None = None) -> DerivedCoefficients:
    """Compute gamma, mu and beta constants from the Leslie coefficients.

    ``nu`` is carried along untouched; it cannot be derived from the alphas.
    """
    gamma1 = alpha.gamma1
    gamma2 = alpha.gamma2
    if not gamma1 > 0:
        raise NonPositiveGamma1(f"gamma1 = alpha3 - alpha2 = {gamma1!r} must be > 0")
    if nu is not None and not nu > 0:
        raise ValueError(f"nu must be positive, got {nu!r}")
    g22 = gamma2 * gamma2 / gamma1
    return DerivedCoefficients(
        gamma1=gamma1,
        gamma2=gamma2,
        mu1=1.0 / gamma1,
        mu2=-gamma2 / gamma1,
        beta1=alpha.alpha1 + g22,
        beta2=alpha.alpha4,
        beta3=alpha.alpha5 + alpha.alpha6 - g22,
        nu=nu,
    )


def _check_strain(D: np.ndarray) -> None:
    scale = np.sqrt(np.sum(D * D, axis=(-2, -1)))
    asym = np.sqrt(np.sum((D - np.swapaxes(D, -1, -2)) ** 2, axis=(-2, -1)))
    if np.any(asym > 1e-12 * scale):
        raise NonSymmetric("strain tensor D must be symmetric")
    trace = np.abs(np.trace(D, axis1=-2, axis2=-1))
    if np.any(trace > 1e-12 * scale):
        raise NonTraceFree(f"strain tensor D must be trace free (|tr D| = {np.max(trace):.3e})")


def quadratic_features(D: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Return ``((n.D.n)**2, D:D, |D.n|**2)`` stacked on a trailing axis."""
    Dn = np.einsum("...ij,...j->...i", D, n)
    nDn = np.einsum("...i,...i->...", n, Dn)
    DD = np.einsum("...ij,...ij->...", D, D)
    return np.stack([nDn * nDn, DD, np.einsum("...i,...i->...", Dn, Dn)], axis=-1)


def dissipation_form(beta, D, n):
    """``beta1 (n.D.n)**2 + beta2 D:D + beta3 |D.n|**2``.

    ``D`` has shape ``(..., 3, 3)`` and ``n`` shape ``(..., 3)``; ``n`` need not
    be a unit vector. Returns a float for a single pair, else an array.
    """
    D = np.asarray(D, dtype=float)
    n = np.asarray(n, dtype=float)
    if D.shape[-2:] != (3, 3) or n.shape[-1] != 3:
        raise ValueError("D must be (...,3,3) and n (...,3)")
    _check_strain(D)
    q = quadratic_features(D, n) @ np.asarray(beta, dtype=float)
    return float(q) if q.ndim == 0 else q


def admissibility_margins(beta) -> tuple[float, float, float]:
    b1, b2, b3 = (float(b) for b in beta)
    return (b2, 2.0 * b2 + b3, 1.5 * b2 + b3 + b1)


def is_admissible(beta) -> bool:
    """Exact sign test on the three margins; no tolerance."""
    return all(m >= 0 for m in admissibility_margins(beta))


def trace_free_basis() -> np.ndarray:
    """Frobenius-orthonormal basis of symmetric trace-free 3x3 matrices, shape (5,3,3)."""
    raw = []
    for i in range(3):
        for j in range(i, 3):
            E = np.zeros((3, 3))
            E[i, j] = E[j, i] = 1.0
            raw.append(E - np.trace(E) / 3.0 * np.eye(3))
    basis: list[np.ndarray] = []
    for E in raw:
        for B in basis:
            E = E - np.sum(E * B) * B
        norm = np.sqrt(np.sum(E * E))
        if norm > 1e-10:
            basis.append(E / norm)
    assert len(basis) == 5
    return np.array(basis)


def _axis_sweep(n_angles: int = 721) -> np.ndarray:
    """Unit-norm strains from the rotation-reduced proof, paired with n = e3."""
    s = 1.0 / np.sqrt(2.0)
    mats = []
    for i, j in ((0, 1), (2, 0), (2, 1)):
        E = np.zeros((3, 3))
        E[i, j] = E[j, i] = s
        mats.append(E)
    phi = np.linspace(0.0, 2.0 * np.pi, n_angles)
    phi = np.concatenate([phi, [np.pi / 4, 5 * np.pi / 4]])
    for p in phi:
        d11, d22 = np.cos(p), np.sin(p)
        E = np.diag([d11, d22, -(d11 + d22)])
        mats.append(E / np.sqrt(np.sum(E * E)))
    return np.array(mats)


@functools.lru_cache(maxsize=8)
def _oracle_features(n_samples: int, seed: int) -> np.ndarray:
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((n_samples, 5))
    z /= np.linalg.norm(z, axis=1, keepdims=True)
    D = np.einsum("sa,aij->sij", z, trace_free_basis())
    n = rng.standard_normal((n_samples, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    sweep = _axis_sweep()
    e3 = np.broadcast_to(np.array([0.0, 0.0, 1.0]), (len(sweep), 3))
    feats = np.concatenate([quadratic_features(D, n), quadratic_features(sweep, e3)])
    feats.setflags(write=False)
    return feats


def min_dissipation_oracle(beta, n_samples: int = 10_000, seed: int = 0) -> float:
    """Brute-force minimum of the dissipation form over unit strains and directors.

    Samples ``n_samples`` random pairs (D uniform on the unit sphere of
    trace-free symmetric matrices, n uniform on S^2) and adds a deterministic
    sweep of axis-aligned strains with ``n = e3``.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be >= 1")
    return float(np.min(_oracle_features(int(n_samples), int(seed)) @ np.asarray(beta, float)))


def parse_coefficients(text: str) -> tuple[LeslieCoefficients, float | None]:
    """Parse a ``key = value`` block with keys alpha1..alpha6 and optional nu."""
    values: dict[str, float] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise CoefficientParseError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key = key.strip()
        if key not in _ALPHA_KEYS and key != "nu":
            raise CoefficientParseError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise CoefficientParseError(f"line {lineno}: duplicate key {key!r}")
        try:
            values[key] = float(value.strip())
        except ValueError:
            raise CoefficientParseError(f"line {lineno}: bad number {value.strip()!r}") from None
    missing = [k for k in _ALPHA_KEYS if k not in values]
    if missing:
        raise CoefficientParseError(f"missing keys: {', '.join(missing)}")
    alpha = LeslieCoefficients(*(values[k] for k in _ALPHA_KEYS))
    return alpha, values.get("nu")


def format_coefficients(alpha: LeslieCoefficients, nu: float | None = None) -> str:
    lines = [f"{k} = {v + 0.0!r}" for k, v in zip(_ALPHA_KEYS, alpha.as_tuple())]  # no "-0.0"
    if nu is not None:
        lines.append(f"nu = {nu!r}")
    return "\n".join(lines) + "\n"
