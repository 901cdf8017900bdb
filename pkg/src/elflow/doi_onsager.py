"""Leslie coefficients from the Doi-Onsager closure with a Maier-Saupe equilibrium.

The equilibrium orientation density is proportional to ``exp(eta1 (m.n)**2)``
on the unit sphere. It depends on ``m`` only through ``u = m.n``, so the
order parameters ``S_k = <P_k(u)>`` reduce to ratios of integrals over
``u in [-1, 1]``, evaluated here by Gauss-Legendre quadrature.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import legendre

from .coefficients import LeslieCoefficients, derive, is_admissible, admissibility_margins
from .errors import NegativeEta, NonPositiveGamma1, NonPositiveLambda, QuadratureMismatch

DEFAULT_ETA1 = 5.0
DEFAULT_LAMBDA = 1.0
DEFAULT_NODES = 64


@dataclass(frozen=True)
class MaierSaupeParams:
    eta1: float = DEFAULT_ETA1
    lam: float = DEFAULT_LAMBDA

    def __post_init__(self):
        if not self.eta1 >= 0:
            raise NegativeEta(f"eta1 must be >= 0, got {self.eta1!r}")
        if not self.lam > 0:
            raise NonPositiveLambda(f"lambda must be > 0, got {self.lam!r}")


@dataclass(frozen=True)
class OrderParameters:
    S2: float
    S4: float


def _p2(u):
    return 0.5 * (3.0 * u * u - 1.0)


def _p4(u):
    u2 = u * u
    return (35.0 * u2 * u2 - 30.0 * u2 + 3.0) / 8.0


def _moments(eta1: float, nodes: int) -> tuple[float, float]:
    u, w = legendre.leggauss(nodes)
    # shift the exponent so the weight stays <= 1 for large eta1
    weight = w * np.exp(eta1 * (u * u - 1.0))
    z = weight.sum()
    return float(weight @ _p2(u) / z), float(weight @ _p4(u) / z)


def order_parameters(eta1: float, quad_nodes: int = DEFAULT_NODES,
                     self_check: bool = False) -> OrderParameters:
    """Maier-Saupe order parameters ``(S2, S4)`` at concentration ``eta1``.

    With ``self_check`` the moments are recomputed with twice as many nodes and
    ``QuadratureMismatch`` is raised if they differ by more than 1e-10.
    """
    if not eta1 >= 0:
        raise NegativeEta(f"eta1 must be >= 0, got {eta1!r}")
    if quad_nodes < 16:
        raise ValueError("quad_nodes must be >= 16")
    s2, s4 = _moments(float(eta1), int(quad_nodes))
    if self_check:
        c2, c4 = _moments(float(eta1), 2 * int(quad_nodes))
        err = max(abs(s2 - c2), abs(s4 - c4))
        if err > 1e-10:
            raise QuadratureMismatch(
                f"{quad_nodes} vs {2 * quad_nodes} nodes differ by {err:.3e} at eta1={eta1}")
    return OrderParameters(s2, s4)


def leslie_from_closure(op: OrderParameters, lam: float) -> LeslieCoefficients:
    if not lam > 0:
        raise NonPositiveLambda(f"lambda must be > 0, got {lam!r}")
    S2, S4 = op.S2, op.S4
    return LeslieCoefficients(
        alpha1=-S4 / 2.0,
        alpha2=-0.5 * (1.0 + 1.0 / lam) * S2,
        alpha3=-0.5 * (1.0 - 1.0 / lam) * S2,
        alpha4=4.0 / 15.0 - 5.0 / 21.0 * S2 - S4 / 35.0,
        alpha5=S4 / 7.0 + 6.0 / 7.0 * S2,
        alpha6=S4 / 7.0 - S2 / 7.0,
    )


def generate(params: MaierSaupeParams, quad_nodes: int = DEFAULT_NODES) -> LeslieCoefficients:
    return leslie_from_closure(order_parameters(params.eta1, quad_nodes), params.lam)


@dataclass(frozen=True)
class AdmissibilityRecord:
    eta1: float
    lam: float
    admissible: bool | None
    margins: tuple[float, float, float] | None
    note: str = ""


def admissibility_report(etas, lambdas,
                         quad_nodes: int = DEFAULT_NODES) -> list[AdmissibilityRecord]:
    """Run ``is_admissible`` on closure coefficients over a parameter grid.

    Inadmissible points are reported through ``warnings.warn``. At ``eta1 = 0``
    the rotational viscosity vanishes and no beta can be formed; such points
    are recorded with ``admissible=None``.
    """
    records = []
    for lam in lambdas:
        for eta in etas:
            alpha = generate(MaierSaupeParams(float(eta), float(lam)), quad_nodes)
            try:
                beta = derive(alpha).beta
            except NonPositiveGamma1:
                records.append(AdmissibilityRecord(eta, lam, None, None, "gamma1 <= 0"))
                continue
            ok = is_admissible(beta)
            if not ok:
                warnings.warn(f"closure coefficients inadmissible at eta1={eta}, lambda={lam}",
                              RuntimeWarning, stacklevel=2)
            records.append(AdmissibilityRecord(eta, lam, ok, admissibility_margins(beta)))
    return records
