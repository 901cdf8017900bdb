"""Pointwise tensor constructions: molecular field, stresses, director rate.

Juxtaposed vectors denote outer products, ``(a b)_ij = a_i b_j``, and
``nn:D = n.D.n``. Vectors have shape ``(3, ...)`` and tensors ``(3, 3, ...)``;
the trailing axes may be a grid or just a batch of samples. Grid-aware
wrappers take a :class:`~elflow.fields.GridSpec` first; the ``*_pointwise``
kernels need no grid.
"""
from __future__ import annotations

import numpy as np

from . import fields
from .coefficients import DerivedCoefficients, LeslieCoefficients
from .errors import NotUnitLength


def _dot(a, b):
    return np.einsum("i...,i...->...", a, b)


def _matvec(A, x):
    return np.einsum("ij...,j...->i...", A, x)


def _outer(a, b):
    return np.einsum("i...,j...->ij...", a, b)


def _contract(A, B):
    return np.einsum("ij...,ij...->...", A, B)


def _cross(a, b):
    return np.cross(a, b, axis=0)


def _director_gradient(grid, n):
    """``grad_n[i, k] = d_i n_k`` as a 3x3 field."""
    return fields.inverse_transform(grid, fields.gradient_hat(grid, fields.transform(grid, n)))


def molecular_field(grid, n: np.ndarray) -> np.ndarray:
    """``h = Laplacian(n)`` for the one-constant Oseen-Frank energy."""
    return fields.laplacian(grid, n)


def ericksen_stress_from_gradient(grad_n: np.ndarray) -> np.ndarray:
    return -np.einsum("ik...,jk...->ij...", grad_n, grad_n)


def ericksen_stress(grid, n: np.ndarray) -> np.ndarray:
    """``sigma^E_ij = -d_i n_k d_j n_k``."""
    return ericksen_stress_from_gradient(_director_gradient(grid, n))


def advect(v3: np.ndarray, grad_n: np.ndarray) -> np.ndarray:
    """``(v.grad) n`` with ``grad_n[i, k] = d_i n_k``."""
    return np.einsum("i...,ik...->k...", v3, grad_n)


def corotational_derivative(grid, n, v, omega, dn_dt) -> np.ndarray:
    """``N = n_t + (v.grad) n + Omega.n``."""
    v3 = fields.embed3(grid, v)
    return dn_dt + advect(v3, _director_gradient(grid, n)) + _matvec(omega, n)


def sigma1_pointwise(n, D, beta) -> np.ndarray:
    b1, b2, b3 = beta
    nn2 = _dot(n, n)
    Dn = _matvec(D, n)
    nDn = _dot(n, Dn)
    return (b1 * nDn * _outer(n, n)
            + b2 * nn2 * nn2 * D
            + 0.5 * b3 * nn2 * (_outer(n, Dn) + _outer(Dn, n)))


def sigma1(grid, v, n, beta) -> np.ndarray:
    """Modified viscous stress ``b1 (nn:D) nn + b2 |n|^4 D + b3/2 |n|^2 (n D.n + D.n n)``."""
    D, _ = fields.strain_rotation(grid, v)
    return sigma1_pointwise(n, D, beta)


def sigma2_pointwise(n, h, mu2) -> np.ndarray:
    w = _cross(n, _cross(h, n))
    return 0.5 * (-1.0 - mu2) * _outer(n, w) + 0.5 * (1.0 - mu2) * _outer(w, n)


def sigma2(grid, n, mu2) -> np.ndarray:
    """``(-1-mu2)/2 n (n x (h x n)) + (1-mu2)/2 (n x (h x n)) n`` with ``h`` from ``n``."""
    return sigma2_pointwise(n, molecular_field(grid, n), mu2)


def leslie_stress_original(alpha: LeslieCoefficients, n, D, N) -> np.ndarray:
    """Original six-term Leslie stress."""
    a1, a2, a3, a4, a5, a6 = alpha.as_tuple()
    Dn = _matvec(D, n)
    return (a1 * _dot(n, Dn) * _outer(n, n)
            + a2 * _outer(n, N) + a3 * _outer(N, n)
            + a4 * D
            + a5 * _outer(n, Dn) + a6 * _outer(Dn, n))


def slaved_corotational(n, h, D, mu1, mu2) -> np.ndarray:
    """``(I - nn).(mu1 h + mu2 D.n)``, the value of N implied by the director equation."""
    x = mu1 * h + mu2 * _matvec(D, n)
    return x - _dot(n, x) * n


def director_rhs_pointwise(n, adv, h, D, omega, mu1, mu2) -> np.ndarray:
    """``-(v.grad)n - n x ((Omega.n - mu1 h - mu2 D.n) x n)`` given ``adv = (v.grad)n``."""
    x = _matvec(omega, n) - mu1 * h - mu2 * _matvec(D, n)
    return -adv - _cross(n, _cross(x, n))


def director_rhs(grid, v, n, coeffs: DerivedCoefficients) -> np.ndarray:
    v3 = fields.embed3(grid, v)
    gv = fields.velocity_gradient(grid, v)
    D, omega = fields.split_gradient(gv)
    n_hat = fields.transform(grid, n)
    grad_n = fields.inverse_transform(grid, fields.gradient_hat(grid, n_hat))
    h = fields.inverse_transform(grid, fields.laplacian_hat(grid, n_hat))
    return director_rhs_pointwise(n, advect(v3, grad_n), h, D, omega, coeffs.mu1, coeffs.mu2)


def cancellation_residuals(n, h, D, omega) -> tuple[float, float]:
    """Max-norm residuals of the two cancellation identities.

    ``r1`` checks ``(-n w/2 + w n/2):(D+Omega) = ((Omega.n) x n).(h x n)`` and
    ``r2`` checks ``(n w/2 + w n/2):(D+Omega) = (h x n).((D.n) x n)``, where
    ``w = n x (h x n)``. Both hold for any ``n``, unit or not.
    """
    w = _cross(n, _cross(h, n))
    grad = D + omega
    hxn = _cross(h, n)
    lhs1 = _contract(-0.5 * _outer(n, w) + 0.5 * _outer(w, n), grad)
    rhs1 = _dot(_cross(_matvec(omega, n), n), hxn)
    lhs2 = _contract(0.5 * _outer(n, w) + 0.5 * _outer(w, n), grad)
    rhs2 = _dot(hxn, _cross(_matvec(D, n), n))
    return float(np.max(np.abs(lhs1 - rhs1))), float(np.max(np.abs(lhs2 - rhs2)))


def harmonic_identity_residual(grid, n: np.ndarray, unit_tol: float = 1e-8) -> float:
    """Max-norm of ``n x (Lap n x n) - Lap n - |grad n|^2 n`` for a unit director."""
    drift = float(np.max(np.abs(_dot(n, n) - 1.0)))
    if drift > unit_tol:
        raise NotUnitLength(f"| |n|^2 - 1 | reaches {drift:.3e}")
    n_hat = fields.transform(grid, n)
    lap = fields.inverse_transform(grid, fields.laplacian_hat(grid, n_hat))
    grad_n = fields.inverse_transform(grid, fields.gradient_hat(grid, n_hat))
    gsq = np.einsum("ik...,ik...->...", grad_n, grad_n)
    res = _cross(n, _cross(lap, n)) - lap - gsq * n
    return float(np.max(np.abs(res)))
