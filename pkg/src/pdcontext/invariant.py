"""Conserved quantity of the three-strategy system.

With ``k = x2/x1`` and ``l = (1 - x1 - x2)/x1`` the rescaled-time dynamics
decouple into

    k' = k (a + b k) / (1 + k + l),    l' = l (c + f k) / (1 + k + l)

so ``dk/dl`` separates, and every solution curve keeps

    ln C = bc ln|k| + (af - bc) ln|a + bk| - ab ln|l|

constant.  The value is handled in log form because the exponents can be
large enough to overflow a direct power.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateExponent, OnSeparatrix, SingularTransform
from .game_model import GameParams, compile_payoff_matrix, strategy_set
from .replicator import AbcfCoefficients, IntegrationConfig, Trajectory, integrate

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class KlPoint:
    k: float
    l: float


@dataclass(frozen=True)
class InvariantConstant:
    log_value: float
    exponents: tuple[float, float, float]  # (bc, af - bc, ab)

    @property
    def value(self) -> float:
        return math.exp(self.log_value)


def to_kl(x) -> KlPoint:
    x1, x2 = (float(v) for v in x)
    if x1 <= SINGULAR_TOL:
        raise SingularTransform(f"x1 = {x1} is on the x1 = 0 face where k and l are undefined")
    return KlPoint(x2 / x1, (1.0 - x1 - x2) / x1)


def from_kl(q: KlPoint) -> np.ndarray:
    den = 1.0 + q.k + q.l
    return np.array([1.0 / den, q.k / den])


def kl_rhs(q: KlPoint, coeffs: AbcfCoefficients) -> tuple[float, float]:
    """Velocity of (k, l) in rescaled time."""
    a, b, c, f = coeffs.astuple()
    den = 1.0 + q.k + q.l
    return q.k * (a + b * q.k) / den, q.l * (c + f * q.k) / den


def exponents(coeffs: AbcfCoefficients) -> tuple[float, float, float]:
    a, b, c, f = coeffs.astuple()
    if abs(a) < SINGULAR_TOL or abs(b) < SINGULAR_TOL:
        raise DegenerateExponent(f"the invariant needs a != 0 and b != 0, got a={a}, b={b}")
    return b * c, a * f - b * c, a * b


def _log_from_kl(k: float, l: float, coeffs: AbcfCoefficients, exps) -> float:
    a, b = coeffs.a, coeffs.b
    lin = a + b * k
    if abs(lin) < SINGULAR_TOL:
        raise OnSeparatrix(f"a + b k = {lin}: the point lies on the invariant line k = -a/b")
    if abs(l) < SINGULAR_TOL:
        raise OnSeparatrix(f"l = {l}: the point lies on the x1 + x2 = 1 edge")
    if k <= 0.0:
        raise SingularTransform(f"k = {k}: the point lies on the x2 = 0 face")
    e_k, e_lin, e_l = exps
    return e_k * math.log(k) + e_lin * math.log(abs(lin)) - e_l * math.log(abs(l))


def log_invariant(x, p: GameParams, residual: float | None = None) -> float:
    """``ln C`` at an interior point.

    ``residual`` is the loner share ``1 - x1 - x2``; pass it when it is known
    more accurately than the difference (for example from a full-form state).
    """
    x1, x2 = (float(v) for v in x)
    if x1 <= SINGULAR_TOL:
        raise SingularTransform(f"x1 = {x1} is on the x1 = 0 face where k and l are undefined")
    coeffs = AbcfCoefficients.from_params(p)
    exps = exponents(coeffs)
    x3 = 1.0 - x1 - x2 if residual is None else float(residual)
    return _log_from_kl(x2 / x1, x3 / x1, coeffs, exps)


def invariant_value(x, p: GameParams) -> float:
    return math.exp(log_invariant(x, p))


def invariant_constant(x, p: GameParams) -> InvariantConstant:
    return InvariantConstant(log_invariant(x, p), exponents(AbcfCoefficients.from_params(p)))


def log_invariant_rate(q: KlPoint, coeffs: AbcfCoefficients) -> float:
    """d(ln C)/dt along ``kl_rhs``; zero up to round-off."""
    a, b = coeffs.a, coeffs.b
    e_k, e_lin, e_l = exponents(coeffs)
    kd, ld = kl_rhs(q, coeffs)
    return e_k * kd / q.k + e_lin * b * kd / (a + b * q.k) - e_l * ld / q.l


@dataclass
class InvariantAudit:
    trajectory: Trajectory
    log_c: np.ndarray

    @property
    def drift(self) -> float:
        return float(np.max(np.abs(self.log_c - self.log_c[0])))

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,x1,x2,logC\n")
        pts = self.trajectory.points
        for t, row, v in zip(self.trajectory.times, pts, self.log_c):
            buf.write(f"{t:.17g},{row[0]:.17g},{row[1]:.17g},{v:.17g}\n")
        return buf.getvalue()


def audit(x0, p: GameParams, cfg: IntegrationConfig | None = None, full_form: bool = True) -> InvariantAudit:
    """Integrate from ``x0`` and evaluate ``ln C`` at every accepted state.

    With ``full_form`` the loner share is integrated as its own coordinate,
    so ``l`` keeps full relative precision even as it decays towards zero.
    """
    cfg = cfg or IntegrationConfig(step=1e-3, max_time=50.0)
    x0 = np.asarray(x0, dtype=float)
    if full_form:
        matrix = compile_payoff_matrix(strategy_set(3), p)
        tr = integrate(np.append(x0, 1.0 - x0.sum()), "general", cfg, p, matrix=matrix)
        x1, x2, x3 = tr.points[:, 0], tr.points[:, 1], tr.points[:, 2]
        tr = Trajectory(tr.times, tr.points[:, :2].copy(), tr.terminal, "reduced3", tr.rescaled)
    else:
        tr = integrate(x0, "reduced3", cfg, p)
        x1, x2 = tr.points[:, 0], tr.points[:, 1]
        x3 = 1.0 - x1 - x2
    log_invariant(x0, p)  # validates the defining point
    return InvariantAudit(tr, log_invariant_series(x1, x2, x3, p))


def log_invariant_series(x1, x2, x3, p: GameParams) -> np.ndarray:
    """Vectorised ``ln C`` along a trajectory given all three shares.

    Only the defining point is held to the separatrix tolerance; later states
    may approach a face as closely as the integration allows.
    """
    coeffs = AbcfCoefficients.from_params(p)
    e_k, e_lin, e_l = exponents(coeffs)
    x1, x2, x3 = (np.asarray(v, dtype=float) for v in (x1, x2, x3))
    if np.any(x1 <= 0.0) or np.any(x2 <= 0.0) or np.any(x3 <= 0.0):
        raise OnSeparatrix("the trajectory reached a face where the invariant is undefined")
    k, l = x2 / x1, x3 / x1
    lin = np.abs(coeffs.a + coeffs.b * k)
    if np.any(lin == 0.0):
        raise OnSeparatrix("the trajectory reached the invariant line k = -a/b")
    return e_k * np.log(k) + e_lin * np.log(lin) - e_l * np.log(l)
