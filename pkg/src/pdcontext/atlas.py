"""Regions of the (beta, z) plane with qualitatively different dynamics.

A region is identified by the stability signature of the three-strategy
fixed points: the labels of all-C and all-D, and whether the C/D mixture
lies in the simplex and how stable it is.  All-B is non-hyperbolic
everywhere, so it carries no information.  The signature changes only where
one of five polynomials in (beta, z) changes sign:

    B1 = z - 1                 B2 = z - 3               B3 = beta z - 1
    B4 = beta (5 - z) - 2      B5 = beta z (5 - z)(2 - beta) - (z + 3)

``CALIBRATION`` fixes the signature -> label table (I..X) for the default
dilemma payoffs (t, r, p, s) = (5, 3, 1, 0).
"""

from __future__ import annotations

import io
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .equilibrium import (
    FixedLineReport,
    FixedPointReport,
    Stability,
    classify_stability,
    fixed_points_3,
    fixed_points_4,
    closed_form_eigenpairs_3,
)
from .errors import UnknownSignature, ValidationError
from .game_model import GameParams
from .replicator import IntegrationConfig, Trajectory, integrate_many

BOUNDARY_TOL = 1e-9
CURVES = ("B1", "B2", "B3", "B4", "B5")
CURVE_FORMULAS = {
    "B1": "z = 1",
    "B2": "z = 3",
    "B3": "beta z = 1",
    "B4": "beta (5 - z) = 2",
    "B5": "beta z (5 - z)(2 - beta) = z + 3",
}

S, U, X = Stability.STABLE, Stability.UNSTABLE, Stability.SADDLE


@dataclass(frozen=True)
class BoundaryValues:
    b1: float
    b2: float
    b3: float
    b4: float
    b5: float

    def astuple(self) -> tuple[float, ...]:
        return (self.b1, self.b2, self.b3, self.b4, self.b5)

    def signs(self) -> tuple[int, ...]:
        return tuple(int(np.sign(v)) for v in self.astuple())

    def near(self, tol: float = BOUNDARY_TOL) -> tuple[str, ...]:
        return tuple(name for name, v in zip(CURVES, self.astuple()) if abs(v) < tol)


def boundary_values(beta: float, z: float) -> BoundaryValues:
    return BoundaryValues(
        b1=z - 1.0,
        b2=z - 3.0,
        b3=beta * z - 1.0,
        b4=beta * (5.0 - z) - 2.0,
        b5=beta * z * (5.0 - z) * (2.0 - beta) - (z + 3.0),
    )


@dataclass(frozen=True)
class StabilitySignature:
    """Stability of all-B, all-C, all-D and (if inside the simplex) the C/D mixture."""

    all_b: Stability
    all_c: Stability
    all_d: Stability
    mixture_exists: bool
    mixture: Stability | None

    def key(self) -> tuple:
        return (self.all_c, self.all_d, self.mixture_exists, self.mixture)


@dataclass(frozen=True)
class RegionLabel:
    name: str
    curves: tuple[str, ...] = ()

    @property
    def is_boundary(self) -> bool:
        return bool(self.curves)

    def __str__(self):
        return f"Boundary({','.join(self.curves)})" if self.curves else self.name


REGIONS = ("I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X")

# (all-C, all-D, mixture in simplex, mixture stability) -> region
CALIBRATION = {
    (U, X, False, None): "I",
    (X, X, False, None): "II",
    (X, S, False, None): "III",
    (U, U, True, X): "IV",
    (X, U, True, X): "V",
    (X, U, True, S): "VI",
    (S, U, False, None): "VII",
    (S, X, True, X): "VIII",
    (S, X, True, U): "IX",
    (S, S, True, X): "X",
}

# One interior point per region, read off the region layout; VI and VII are
# the parameter values used for the four-strategy portraits.
REGION_SAMPLES = {
    "I": (0.12, 3.5),
    "II": (0.12, 2.6),
    "III": (0.12, 0.5),
    "IV": (0.6, 3.5),
    "V": (0.6, 2.6),
    "VI": (0.75, 2.5),
    "VII": (0.9, 2.5),
    "VIII": (0.62, 1.25),
    "IX": (0.76, 1.26),
    "X": (0.76, 0.5),
}

# Where interior trajectories end up: the asymptotically stable points, plus
# the non-hyperbolic all-B vertex in the regions where it collects orbits.
ATTRACTORS = {
    "I": ("{0,0}",),
    "II": ("{0,0}",),
    "III": ("{0,1}",),
    "IV": ("{0,0}",),
    "V": ("{0,0}",),
    "VI": ("polymorphic",),
    "VII": ("{1,0}",),
    "VIII": ("{1,0}", "{0,0}"),
    "IX": ("{1,0}", "{0,0}"),
    "X": ("{1,0}", "{0,1}"),
}


def stability_signature(beta: float, z: float) -> StabilitySignature:
    """Signature from the closed-form eigenvalues (default dilemma payoffs)."""
    p = GameParams(z=z, beta=beta)
    rows = closed_form_eigenpairs_3(p)
    labels = {name: classify_stability([lam for lam, _ in row]) for name, row in rows.items()}
    exists = False
    mixture = None
    if "polymorphic" in rows:
        d = 1.0 + 2.0 * beta * z - 5.0 * beta
        x1, x2 = (beta * z - 1.0) / d, (beta * z + 2.0 - 5.0 * beta) / d
        exists = x1 >= 0.0 and x2 >= 0.0
        mixture = labels["polymorphic"] if exists else None
    return StabilitySignature(labels["{0,0}"], labels["{1,0}"], labels["{0,1}"], exists, mixture)


def classify_region(beta: float, z: float) -> RegionLabel:
    """Region I..X containing (beta, z), or a boundary label within 1e-9 of a curve."""
    if not 0.0 < beta < 1.0:
        raise ValidationError(f"classification needs 0 < beta < 1, got {beta}")
    near = boundary_values(beta, z).near()
    if near:
        return RegionLabel("Boundary", near)
    sig = stability_signature(beta, z)
    try:
        return RegionLabel(CALIBRATION[sig.key()])
    except KeyError:
        raise UnknownSignature(f"beta={beta}, z={z}: signature {sig} is not in the calibration table") from None


@dataclass
class AtlasGrid:
    betas: np.ndarray
    zs: np.ndarray
    labels: list[list[RegionLabel]]  # labels[i][j] at (betas[j], zs[i])

    def distinct(self, include_boundary: bool = False) -> set[str]:
        return {
            str(lab) for row in self.labels for lab in row if include_boundary or not lab.is_boundary
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("beta,z,region\n")
        for i, z in enumerate(self.zs):
            for j, b in enumerate(self.betas):
                buf.write(f"{b:.17g},{z:.17g},{self.labels[i][j]}\n")
        return buf.getvalue()


def _row(args):
    betas, z = args
    return [classify_region(b, z) for b in betas]


def atlas_sweep(
    beta_range: tuple[float, float] = (0.0, 1.0),
    z_range: tuple[float, float] = (0.0, 4.0),
    resolution: int = 200,
    workers: int = 1,
) -> AtlasGrid:
    """Classify the cell centres of a ``resolution x resolution`` grid, row-major in z."""
    if resolution < 1:
        raise ValidationError("resolution must be positive")
    (b0, b1), (z0, z1) = beta_range, z_range
    if not (0.0 <= b0 < b1 <= 1.0):
        raise ValidationError(f"beta range must lie in [0, 1], got {beta_range}")
    betas = b0 + (np.arange(resolution) + 0.5) * (b1 - b0) / resolution
    zs = z0 + (np.arange(resolution) + 0.5) * (z1 - z0) / resolution
    tasks = [(betas, z) for z in zs]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            labels = list(pool.map(_row, tasks, chunksize=8))
    else:
        labels = [_row(t) for t in tasks]
    return AtlasGrid(betas, zs, labels)


def simplex_seeds(n_shares: int, density: int, margin: float = 0.02) -> list[np.ndarray]:
    """Barycentric lattice kept ``margin`` away from every face, in reduced coordinates."""
    if density < 2:
        raise ValidationError("grid density must be at least 2")
    out = []

    def compositions(k, total):
        if k == 1:
            yield (total,)
            return
        for i in range(total + 1):
            for rest in compositions(k - 1, total - i):
                yield (i,) + rest

    span = 1.0 - n_shares * margin
    for comp in compositions(n_shares, density):
        full = margin + span * np.array(comp, dtype=float) / density
        out.append(full[:-1])
    return out


@dataclass
class Portrait:
    params: GameParams
    n_strategies: int
    region: RegionLabel | None
    fixed_points: list[FixedPointReport | FixedLineReport]
    seeds: list[np.ndarray]
    trajectories: list[Trajectory] = field(default_factory=list)

    def endpoints(self) -> np.ndarray:
        return np.array([t.end for t in self.trajectories])

    def to_dict(self, max_points: int = 400) -> dict:
        trajs = []
        for seed, tr in zip(self.seeds, self.trajectories):
            stride = max(1, (len(tr.times) - 1) // max_points)
            idx = list(range(0, len(tr.times), stride))
            if idx[-1] != len(tr.times) - 1:
                idx.append(len(tr.times) - 1)
            trajs.append(
                {
                    "seed": seed.tolist(),
                    "terminal": tr.terminal,
                    "end": tr.end.tolist(),
                    "t": tr.times[idx].tolist(),
                    "points": tr.points[idx].tolist(),
                }
            )
        return {
            "params": {
                "t": self.params.pd.t,
                "r": self.params.pd.r,
                "p": self.params.pd.p,
                "s": self.params.pd.s,
                "z": self.params.z,
                "beta": self.params.beta,
            },
            "strategies": self.n_strategies,
            "region": None if self.region is None else str(self.region),
            "fixed_points": [fp.to_dict() for fp in self.fixed_points],
            "trajectories": trajs,
        }


def params_for(region_or_params) -> GameParams:
    if isinstance(region_or_params, GameParams):
        return region_or_params
    if isinstance(region_or_params, RegionLabel):
        region_or_params = region_or_params.name
    if region_or_params not in REGION_SAMPLES:
        raise ValidationError(f"unknown region {region_or_params!r}")
    beta, z = REGION_SAMPLES[region_or_params]
    return GameParams(z=z, beta=beta)


def portrait(
    region_or_params,
    grid_density: int = 4,
    cfg: IntegrationConfig | None = None,
    n_strategies: int = 3,
    seeds: Sequence | None = None,
    workers: int = 1,
) -> Portrait:
    """Fixed points plus trajectories integrated from a lattice of interior seeds."""
    p = params_for(region_or_params)
    cfg = cfg or IntegrationConfig(max_time=5000.0)
    if n_strategies == 3:
        fps = fixed_points_3(p)
        field_name = "reduced3"
    elif n_strategies == 4:
        fps = fixed_points_4(p)
        field_name = "reduced4"
    else:
        raise ValidationError(f"portraits exist for 3 or 4 strategies, got {n_strategies}")
    if seeds is None:
        seeds = simplex_seeds(n_strategies, grid_density)
    seeds = [np.asarray(s, dtype=float) for s in seeds]
    try:
        region = classify_region(p.beta, p.z) if p.pd.is_default and 0 < p.beta < 1 else None
    except UnknownSignature:
        region = None
    out = Portrait(p, n_strategies, region, fps, seeds)
    out.trajectories = integrate_many(seeds, field_name, cfg, p, workers=workers)
    return out


def adjacent_sign_change(a: tuple[float, float], b: tuple[float, float]) -> tuple[str, ...]:
    """Curves whose sign differs between two (beta, z) points."""
    sa, sb = boundary_values(*a).signs(), boundary_values(*b).signs()
    return tuple(name for name, u, v in zip(CURVES, sa, sb) if u != v)
