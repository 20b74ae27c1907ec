"""Replicator vector fields on the simplex and their fixed-step RK4 integration.

Reduced coordinates drop the loner share ``1 - sum(x)``, which stays implicit.
The general field works in full form, where the shares sum to one.

Time rescaling: every payoff in the model carries a factor ``1/(1-beta)``.
Multiplying the field by ``gamma = 1 - beta`` only changes the speed along
orbits, so integration runs on the rescaled field by default.  That keeps
the step size meaningful as ``beta`` approaches 1.
"""

from __future__ import annotations

import io
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .errors import DimensionMismatch, StepExplosion, ValidationError
from .game_model import GameParams, PayoffMatrix, compile_payoff_matrix, strategy_set

FIELDS = ("general", "reduced3", "reduced4")
_TERMINAL = {
    kernels.MAX_STEPS_DONE: "max-time",
    kernels.CONVERGED: "converged",
    kernels.ABSORBED: "boundary-absorbed",
}


@dataclass(frozen=True)
class AbcfCoefficients:
    a: float
    b: float
    c: float
    f: float

    @classmethod
    def from_params(cls, p: GameParams) -> AbcfCoefficients:
        t, r, pp, s = p.pd.t, p.pd.r, p.pd.p, p.pd.s
        g, z = p.gamma, p.z
        return cls(a=(z - r) - g * (z - t), b=g * (z - s) - (z - pp), c=z - r, f=g * (z - s))

    def astuple(self) -> tuple[float, float, float, float]:
        return (self.a, self.b, self.c, self.f)


def as_simplex_point(x, reduced: bool = True, tol: float = 1e-12) -> np.ndarray:
    """Validate a population state and return it as a float array."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise DimensionMismatch(f"population state must be a flat vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0:
        raise ValidationError(f"shares must be finite and non-negative, got {arr.tolist()}")
    total = arr.sum()
    if reduced and total > 1.0 + tol:
        raise ValidationError(f"reduced shares sum to {total} > 1")
    if not reduced and abs(total - 1.0) > tol:
        raise ValidationError(f"full-form shares sum to {total}, not 1")
    return arr


def _matrix_array(m) -> np.ndarray:
    return np.asarray(m.entries if isinstance(m, PayoffMatrix) else m, dtype=float)


def rhs_general(x, m) -> np.ndarray:
    """Standard replicator field ``x_i ((Mx)_i - x.Mx)`` in full form."""
    mat = _matrix_array(m)
    x = np.asarray(x, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1] or mat.shape[0] != x.size:
        raise DimensionMismatch(f"state of size {x.size} does not fit a {mat.shape} matrix")
    fitness = mat @ x
    return x * (fitness - x @ fitness)


def rhs_reduced3(x, p: GameParams) -> np.ndarray:
    """Three-strategy field in (x1, x2) = (conditional cooperators, defectors).

    Built from the (a, b, c, f) polynomial, which is the field in rescaled
    time; dividing by gamma gives the field in original time.  For the
    default dilemma payoffs this is identical to the specialised system
    with the explicit ``1/(1-beta)`` prefactor.
    """
    x1, x2 = _pair(x, 2)
    a, b, c, f = AbcfCoefficients.from_params(p).astuple()
    common = c * x1 * x1 + (f + c - a) * x1 * x2 + (f - b) * x2 * x2
    return np.array([x1 * (common - c * x1 - f * x2), x2 * (common + (a - c) * x1 + (b - f) * x2)]) / p.gamma


def rhs_reduced4(x, p: GameParams) -> np.ndarray:
    """Four-strategy field in (x1, x2, x3) = (C, D, S) shares; needs the default dilemma payoffs."""
    _require_default_payoffs(p, "the four-strategy reduced system")
    x1, x2, x3 = _pair(x, 3)
    z, g = p.z, p.gamma
    u = x1 + x3
    w = g * x1 + x3
    g1 = u * (1 - u) * (3 - z) + (2 * z - 5) * w * x2 + ((z - 1) * x2 - g * z) * x2
    g2 = u * u * (z - 3) + ((5 - z) + (2 * z - 5) * x2) * w + (1 - z) * (1 - x2) * x2
    g3 = u * (1 - u) * (3 - z) + (2 * z - 5) * w * x2 + ((z - 1) * x2 - z) * x2
    return np.array([x1 * g1, x2 * g2, x3 * g3]) / g


def _pair(x, n):
    vals = tuple(float(v) for v in np.ravel(x))
    if len(vals) != n:
        raise DimensionMismatch(f"expected {n} reduced coordinates, got {len(vals)}")
    return vals


def _require_default_payoffs(p: GameParams, what: str) -> None:
    if not p.pd.is_default:
        raise ValidationError(f"{what} is only defined for (t, r, p, s) = (5, 3, 1, 0)")


def time_rescale(p: GameParams) -> float:
    """Factor gamma = 1 - beta that turns the field into its rescaled-time version.

    Orbits and fixed points are unchanged; eigenvalues are multiplied by gamma,
    so their signs (and the stability labels) are preserved.
    """
    return p.gamma


def embed(x, reduced: bool = True) -> np.ndarray:
    """Append the implicit loner share to reduced coordinates."""
    x = np.asarray(x, dtype=float)
    return np.append(x, 1.0 - x.sum()) if reduced else x


@dataclass(frozen=True)
class IntegrationConfig:
    step: float = 1e-2
    max_time: float = 1000.0
    conv_tol: float = 1e-10
    clip_tol: float = 1e-12
    rescale: bool = True

    def __post_init__(self):
        if not self.step > 0:
            raise ValidationError(f"step must be positive, got {self.step}")
        if not self.max_time > 0:
            raise ValidationError(f"max_time must be positive, got {self.max_time}")
        if not (self.conv_tol > 0 and self.clip_tol > 0):
            raise ValidationError("tolerances must be positive")

    @property
    def max_steps(self) -> int:
        return int(math.ceil(self.max_time / self.step - 1e-9))


@dataclass(frozen=True)
class Trajectory:
    times: np.ndarray
    points: np.ndarray
    terminal: str
    field: str
    rescaled: bool = True

    @property
    def end(self) -> np.ndarray:
        return self.points[-1]

    def header(self) -> list[str]:
        return ["t"] + [f"x{i + 1}" for i in range(self.points.shape[1])]

    def to_csv(self, extra: dict[str, np.ndarray] | None = None) -> str:
        cols = [self.times] + [self.points[:, i] for i in range(self.points.shape[1])]
        names = self.header()
        for name, values in (extra or {}).items():
            names.append(name)
            cols.append(np.asarray(values))
        buf = io.StringIO()
        buf.write(",".join(names) + "\n")
        for row in zip(*cols):
            buf.write(",".join(format(float(v), ".17g") for v in row) + "\n")
        return buf.getvalue()

    def to_dict(self) -> dict:
        out = {"t": self.times.tolist(), "terminal": self.terminal, "field": self.field, "rescaled": self.rescaled}
        for i in range(self.points.shape[1]):
            out[f"x{i + 1}"] = self.points[:, i].tolist()
        return out


def _kernel_setup(field: str, p: GameParams | None, matrix, dim: int, rescale: bool):
    if field == "reduced3":
        if p is None:
            raise ValidationError("reduced3 field needs game parameters")
        return kernels.REDUCED3, np.array(AbcfCoefficients.from_params(p).astuple()), (1.0 if rescale else 1.0 / p.gamma)
    if field == "reduced4":
        if p is None:
            raise ValidationError("reduced4 field needs game parameters")
        _require_default_payoffs(p, "the four-strategy reduced system")
        return kernels.REDUCED4, np.array([p.beta, p.z]), (1.0 if rescale else 1.0 / p.gamma)
    if field == "general":
        if matrix is None:
            if p is None:
                raise ValidationError("general field needs a payoff matrix or game parameters")
            matrix = compile_payoff_matrix(strategy_set(dim), p)
        mat = _matrix_array(matrix)
        if mat.shape != (dim, dim):
            raise DimensionMismatch(f"state of size {dim} does not fit a {mat.shape} matrix")
        scale = p.gamma if (rescale and p is not None) else 1.0
        return kernels.GENERAL, mat.ravel(), scale
    raise ValidationError(f"unknown field {field!r}; choose from {FIELDS}")


def integrate(
    x0,
    field: str,
    cfg: IntegrationConfig | None = None,
    params: GameParams | None = None,
    matrix=None,
    backend: str | None = None,
) -> Trajectory:
    """Integrate from ``x0`` with classical RK4 at a fixed step.

    After each step, components in ``(-clip_tol, 0)`` are set to zero and the
    state is renormalised.  Integration stops early once the field's max-norm
    drops below ``conv_tol`` (``converged``) or an initially positive share is
    driven to zero (``boundary-absorbed``).
    """
    cfg = cfg or IntegrationConfig()
    reduced = field != "general"
    x = as_simplex_point(x0, reduced=reduced, tol=max(cfg.clip_tol, 1e-12))
    if field == "reduced3" and x.size != 2 or field == "reduced4" and x.size != 3:
        raise DimensionMismatch(f"{field} needs {2 if field == 'reduced3' else 3} coordinates, got {x.size}")
    code, prm, scale = _kernel_setup(field, params, matrix, x.size, cfg.rescale)
    run = kernels.BACKENDS[backend] if backend else kernels.rk4_integrate
    pts, status = run(code, x, prm, scale, cfg.step, cfg.max_steps, cfg.conv_tol, cfg.clip_tol, not reduced)
    if status == kernels.NONFINITE:
        raise StepExplosion(f"non-finite state after {len(pts) - 1} steps of size {cfg.step}; reduce the step")
    if status == kernels.LEFT_SIMPLEX:
        raise StepExplosion(f"state left the simplex by more than {cfg.clip_tol} after {len(pts) - 1} steps")
    times = cfg.step * np.arange(len(pts))
    return Trajectory(times, pts, _TERMINAL[status], field, cfg.rescale)


def integrate_many(
    seeds: Sequence,
    field: str,
    cfg: IntegrationConfig | None = None,
    params: GameParams | None = None,
    matrix=None,
    workers: int = 1,
) -> list[Trajectory]:
    """Integrate several seeds; the compiled kernel releases the GIL, so threads scale."""

    def one(seed):
        return integrate(seed, field, cfg, params, matrix)

    if workers <= 1:
        return [one(s) for s in seeds]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(one, seeds))

