"""Fixed points of the three- and four-strategy systems, with linear stability.

Locations are known in closed form.  Each fixed point gets an analytic
Jacobian, an eigen-decomposition from the characteristic polynomial, and a
stability label.  For the default dilemma payoffs the closed-form eigenvalues
and eigenvectors are attached so that every report carries its own
cross-check.

Eigenvalues here belong to the field in *original* time (with the
``1/(1-beta)`` prefactor).  The rescaled field used for integration has the
same eigenvectors and eigenvalues multiplied by ``gamma``.
"""

from __future__ import annotations

import cmath
import enum
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DegenerateDenominator, DimensionMismatch, NotInRegionVI, ValidationError
from .game_model import GameParams, compile_payoff_matrix, strategy_set
from .replicator import AbcfCoefficients, embed, rhs_general, rhs_reduced3, rhs_reduced4

HYPERBOLIC_TOL = 1e-10
RESIDUAL_TOL = 1e-10
DENOMINATOR_TOL = 1e-12
ALPHA_SAMPLES = (0.0, 0.25, 0.5, 0.75, 1.0)


class Stability(str, enum.Enum):
    STABLE = "asymptotically-stable"
    UNSTABLE = "unstable"
    SADDLE = "saddle"
    NON_HYPERBOLIC = "non-hyperbolic"

    def __str__(self):
        return self.value


def classify_stability(eigenvalues: Sequence[complex], tol: float = HYPERBOLIC_TOL) -> Stability:
    re = [complex(v).real for v in eigenvalues]
    if any(abs(v) <= tol for v in re):
        return Stability.NON_HYPERBOLIC
    if all(v < 0 for v in re):
        return Stability.STABLE
    if all(v > 0 for v in re):
        return Stability.UNSTABLE
    return Stability.SADDLE


# ---------------------------------------------------------------------------
# small eigenproblems


@dataclass(frozen=True)
class EigenPair:
    value: complex
    vector: np.ndarray
    defective: bool = False

    def residual(self, m: np.ndarray) -> float:
        """Relative residual of ``m v = value v``."""
        m = np.asarray(m)
        scale = max(1.0, np.linalg.norm(m, 2)) * np.linalg.norm(self.vector)
        return float(np.linalg.norm(m @ self.vector - self.value * self.vector) / scale)


def _sort_key(v: complex):
    return (-v.real, -v.imag)


def _poly(coeffs, lam):
    out = 0j
    for c in coeffs:
        out = out * lam + c
    return out


def _polish(coeffs, lam, iters=3):
    """Newton steps on the characteristic polynomial; keeps a step only if it helps."""
    deriv = [c * (len(coeffs) - 1 - i) for i, c in enumerate(coeffs[:-1])]
    best, best_res = lam, abs(_poly(coeffs, lam))
    for _ in range(iters):
        d = _poly(deriv, best)
        if d == 0:
            break
        cand = best - _poly(coeffs, best) / d
        res = abs(_poly(coeffs, cand))
        if res >= best_res:
            break
        best, best_res = cand, res
    return best


def _eig2(a: float, b: float, c: float, d: float) -> list[complex]:
    """Eigenvalues of [[a, b], [c, d]] in half-difference form.

    ``((a-d)/2)**2 + b*c`` stays accurate for nearly equal, non-defective
    eigenvalues, where ``tr**2 - 4 det`` cancels catastrophically.
    """
    mid = 0.5 * (a + d)
    half = 0.5 * (a - d)
    disc = half * half + b * c
    if isinstance(disc, complex) or disc < 0:
        sq = cmath.sqrt(disc)
        return [mid + sq, mid - sq]
    sq = math.sqrt(disc)
    return [complex(mid + sq), complex(mid - sq)]


def _cubic_roots(a2: float, a1: float, a0: float) -> list[complex]:
    """Roots of x^3 + a2 x^2 + a1 x + a0 (real coefficients)."""
    shift = a2 / 3.0
    p = a1 - a2 * a2 / 3.0
    q = 2.0 * a2**3 / 27.0 - a2 * a1 / 3.0 + a0
    scale = max(1.0, abs(a2), abs(a1) ** 0.5, abs(a0) ** (1.0 / 3.0))
    if abs(p) <= 1e-15 * scale**2 and abs(q) <= 1e-15 * scale**3:
        roots = [complex(-shift)] * 3
    else:
        disc = (q / 2.0) ** 2 + (p / 3.0) ** 3
        if disc <= 0 and p < 0:
            # three real roots: trigonometric form
            m = 2.0 * math.sqrt(-p / 3.0)
            arg = 3.0 * q / (p * m)
            theta = math.acos(max(-1.0, min(1.0, arg))) / 3.0
            roots = [complex(m * math.cos(theta - 2.0 * math.pi * k / 3.0) - shift) for k in range(3)]
        else:
            sq = cmath.sqrt(disc)
            w = -q / 2.0 + sq if abs(-q / 2.0 + sq) >= abs(-q / 2.0 - sq) else -q / 2.0 - sq
            u = w ** (1.0 / 3.0)
            v = -p / (3.0 * u) if u != 0 else 0j
            omega = complex(-0.5, math.sqrt(3.0) / 2.0)
            roots = [omega**k * u + omega ** (-k) * v - shift for k in range(3)]
            # one real root and a conjugate pair
            roots.sort(key=lambda r: abs(r.imag))
            roots[0] = complex(roots[0].real)
            roots[2] = roots[1].conjugate()
    coeffs = [1.0, a2, a1, a0]
    polished = [_polish(coeffs, r) for r in roots]
    if all(r.imag == 0 for r in roots):
        polished = [complex(r.real) for r in polished]
    return polished


def _null_vectors(a: np.ndarray, count: int, tol: float) -> tuple[list[np.ndarray], bool]:
    """Up to ``count`` null directions of ``a``; the flag is True when fewer exist."""
    _, s, vh = np.linalg.svd(a)
    basis = [vh[-1 - i].conj() for i in range(count) if i == 0 or s[-1 - i] <= tol]
    return basis, len(basis) < count


def _normalise(v: np.ndarray) -> np.ndarray:
    v = v / np.linalg.norm(v)
    k = int(np.argmax(np.abs(v)))
    v = v * (abs(v[k]) / v[k])
    if np.allclose(v.imag, 0.0, atol=1e-14):
        v = v.real.copy()
    return v


def _refine_pair(m: np.ndarray, roots: list[complex], norm: float) -> list[complex]:
    """Recompute a near-double pair of cubic roots from the matrix itself.

    The isolated root's left eigenvector w gives the invariant plane
    {x : w.x = 0}; the pair are the eigenvalues of the 2x2 restriction.
    """
    tol = 1e-6 * norm
    (gap, i, j) = min((abs(roots[i] - roots[j]), i, j) for i, j in ((0, 1), (0, 2), (1, 2)))
    k = 3 - i - j
    lone = roots[k]
    if gap > tol or min(abs(lone - roots[i]), abs(lone - roots[j])) <= tol or lone.imag != 0:
        return roots
    _, _, vh = np.linalg.svd(m.T - lone.real * np.eye(3))
    w = vh[-1]
    _, _, vq = np.linalg.svd(w[None, :])
    q = vq[1:].T
    b = q.T @ m @ q
    pair = _eig2(b[0, 0], b[0, 1], b[1, 0], b[1, 1])
    out = list(roots)
    out[i], out[j] = pair
    return out


def eigen_small(m) -> list[EigenPair]:
    """Eigenpairs of a real 2x2 or 3x3 matrix from its characteristic polynomial.

    Results are sorted by real part, then imaginary part, both descending.
    Repeated eigenvalues share one null-space basis; when it is too small
    the pairs are flagged ``defective`` and repeat the available direction.
    """
    m = np.asarray(m, dtype=float)
    n = m.shape[0]
    if m.shape not in ((2, 2), (3, 3)):
        raise DimensionMismatch(f"eigen_small handles 2x2 and 3x3 matrices, got {m.shape}")
    tr = float(np.trace(m))
    if n == 2:
        roots = _eig2(m[0, 0], m[0, 1], m[1, 0], m[1, 1])
    else:
        minors = (
            m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]
            + m[0, 0] * m[2, 2] - m[0, 2] * m[2, 0]
            + m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1]
        )
        det = (
            m[0, 0] * (m[1, 1] * m[2, 2] - m[1, 2] * m[2, 1])
            - m[0, 1] * (m[1, 0] * m[2, 2] - m[1, 2] * m[2, 0])
            + m[0, 2] * (m[1, 0] * m[2, 1] - m[1, 1] * m[2, 0])
        )
        roots = _cubic_roots(-tr, float(minors), -float(det))
    norm = max(1.0, float(np.linalg.norm(m, 2)))
    if n == 3:
        roots = _refine_pair(m, roots, norm)
    roots.sort(key=_sort_key)

    groups: list[list[complex]] = []
    for r in roots:
        if groups and abs(r - groups[-1][0]) <= 1e-7 * norm:
            groups[-1].append(r)
        else:
            groups.append([r])
    pairs = []
    for grp in groups:
        lam = sum(grp) / len(grp)
        if abs(lam.imag) <= 1e-14 * norm:
            lam = complex(lam.real)
        vecs, defective = _null_vectors(m - lam * np.eye(n), len(grp), 1e-7 * norm)
        for i, r in enumerate(grp):
            pairs.append(EigenPair(r, _normalise(vecs[min(i, len(vecs) - 1)]), defective))
    return pairs


# ---------------------------------------------------------------------------
# Jacobians


def _jac_reduced3(x, p: GameParams) -> np.ndarray:
    x1, x2 = (float(v) for v in x)
    a, b, c, f = AbcfCoefficients.from_params(p).astuple()
    e, g = f + c - a, f - b
    quad = c * x1 * x1 + e * x1 * x2 + g * x2 * x2
    dq1 = 2 * c * x1 + e * x2
    dq2 = e * x1 + 2 * g * x2
    h1 = quad - c * x1 - f * x2
    h2 = quad + (a - c) * x1 + (b - f) * x2
    jac = np.array(
        [
            [h1 + x1 * (dq1 - c), x1 * (dq2 - f)],
            [x2 * (dq1 + a - c), h2 + x2 * (dq2 + b - f)],
        ]
    )
    return jac / p.gamma


def _jac_reduced4(x, p: GameParams) -> np.ndarray:
    if not p.pd.is_default:
        raise ValidationError("the four-strategy reduced system needs (t, r, p, s) = (5, 3, 1, 0)")
    x1, x2, x3 = (float(v) for v in x)
    z, gam, beta = p.z, p.gamma, p.beta
    u = x1 + x3
    w = gam * x1 + x3
    g1 = u * (1 - u) * (3 - z) + (2 * z - 5) * w * x2 + ((z - 1) * x2 - gam * z) * x2
    g2 = u * u * (z - 3) + ((5 - z) + (2 * z - 5) * x2) * w + (1 - z) * (1 - x2) * x2
    g3 = g1 - beta * z * x2
    d1_x1 = (1 - 2 * u) * (3 - z) + (2 * z - 5) * gam * x2
    d1_x2 = (2 * z - 5) * w + 2 * (z - 1) * x2 - gam * z
    d1_x3 = (1 - 2 * u) * (3 - z) + (2 * z - 5) * x2
    lin = (5 - z) + (2 * z - 5) * x2
    d2_x1 = 2 * u * (z - 3) + lin * gam
    d2_x2 = (2 * z - 5) * w + (1 - z) * (1 - 2 * x2)
    d2_x3 = 2 * u * (z - 3) + lin
    d3_x2 = d1_x2 - beta * z
    jac = np.array(
        [
            [g1 + x1 * d1_x1, x1 * d1_x2, x1 * d1_x3],
            [x2 * d2_x1, g2 + x2 * d2_x2, x2 * d2_x3],
            [x3 * d1_x1, x3 * d3_x2, g3 + x3 * d1_x3],
        ]
    )
    return jac / gam


def jacobian_general(x, m) -> np.ndarray:
    """Jacobian of the full-form replicator field, restricted to reduced coordinates."""
    m = np.asarray(getattr(m, "entries", m), dtype=float)
    y = embed(x)
    if m.shape != (y.size, y.size):
        raise DimensionMismatch(f"{y.size} shares do not fit a {m.shape} matrix")
    fit = m @ y
    avg = y @ fit
    grad_avg = fit + m.T @ y
    full = np.diag(fit - avg) + y[:, None] * (m - grad_avg[None, :])
    n = y.size - 1
    return full[:n, :n] - full[:n, n:]


def _field_fn(field_name: str, p: GameParams) -> Callable[[np.ndarray], np.ndarray]:
    if field_name == "reduced3":
        return lambda x: rhs_reduced3(x, p)
    if field_name == "reduced4":
        return lambda x: rhs_reduced4(x, p)
    raise ValidationError(f"unknown field {field_name!r}")


def jacobian(field_name: str, x, p: GameParams) -> np.ndarray:
    """Analytic Jacobian of ``reduced3``, ``reduced4`` or ``general`` (reduced coordinates)."""
    x = np.asarray(x, dtype=float)
    if field_name == "reduced3":
        return _jac_reduced3(x, p)
    if field_name == "reduced4":
        return _jac_reduced4(x, p)
    if field_name == "general":
        return jacobian_general(x, compile_payoff_matrix(strategy_set(x.size + 1), p))
    raise ValidationError(f"unknown field {field_name!r}")


def jacobian_fd(field_name: str, x, p: GameParams, h: float = 1e-6) -> np.ndarray:
    """Central finite-difference Jacobian, used to cross-check :func:`jacobian`."""
    if field_name == "general":
        mat = compile_payoff_matrix(strategy_set(len(x) + 1), p)
        fn = lambda v: rhs_general(embed(v), mat)[:-1]  # noqa: E731
    else:
        fn = _field_fn(field_name, p)
    x = np.asarray(x, dtype=float)
    cols = []
    for j in range(x.size):
        dx = np.zeros_like(x)
        dx[j] = h
        cols.append((fn(x + dx) - fn(x - dx)) / (2 * h))
    return np.column_stack(cols)


# ---------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class FixedPoint:
    name: str
    location: tuple[float, ...]
    kind: str  # vertex | edge | interior
    exists_in_simplex: bool
    alpha: float | None = None


@dataclass
class FixedPointReport:
    point: FixedPoint
    jacobian: np.ndarray
    eigenpairs: list[EigenPair]
    stability: Stability
    residual: float
    closed_form: list[tuple[complex, np.ndarray | None]] | None = None

    @property
    def eigenvalues(self) -> list[complex]:
        return [e.value for e in self.eigenpairs]

    def eigenvalue_deltas(self) -> list[float] | None:
        """Relative gaps to the closed-form eigenvalues, matched greedily by distance."""
        if self.closed_form is None:
            return None
        free = list(self.eigenvalues)
        out = []
        for lam, _ in sorted(self.closed_form, key=lambda pair: _sort_key(complex(pair[0]))):
            k = min(range(len(free)), key=lambda i: abs(free[i] - lam))
            out.append(abs(free.pop(k) - lam) / max(1.0, abs(lam)))
        return out

    def eigenvector_alignment(self) -> list[float] | None:
        """``1 - |cos|`` between each closed-form eigenvector and the computed one.

        For closed-form eigenvalues that are repeated (within 1e-6), the check is
        instead the relative residual of ``J e = lambda e``.
        """
        if self.closed_form is None:
            return None
        scale = max(1.0, float(np.linalg.norm(self.jacobian, 2)))
        lams = [complex(l) for l, _ in self.closed_form]
        out = []
        for lam, vec in self.closed_form:
            if vec is None:
                continue
            vec = np.asarray(vec, dtype=float)
            repeated = sum(abs(lam - other) <= 1e-6 * scale for other in lams) > 1
            if repeated:
                res = np.linalg.norm(self.jacobian @ vec - lam * vec) / (scale * np.linalg.norm(vec))
                out.append(float(res))
                continue
            pair = min(self.eigenpairs, key=lambda e: abs(e.value - lam))
            cos = abs(np.vdot(pair.vector, vec)) / (np.linalg.norm(pair.vector) * np.linalg.norm(vec))
            out.append(float(1.0 - cos))
        return out

    def to_dict(self) -> dict:
        d = {
            "name": self.point.name,
            "location": list(self.point.location),
            "kind": self.point.kind,
            "exists_in_simplex": self.point.exists_in_simplex,
            "jacobian": self.jacobian.tolist(),
            "eigenvalues": [[v.real, v.imag] for v in self.eigenvalues],
            "eigenvectors": [[[complex(c).real, complex(c).imag] for c in e.vector] for e in self.eigenpairs],
            "stability": self.stability.value,
            "residual": self.residual,
        }
        if self.point.alpha is not None:
            d["alpha"] = self.point.alpha
        if self.closed_form is not None:
            d["closed_form_eigenvalues"] = [[complex(l).real, complex(l).imag] for l, _ in self.closed_form]
            d["eigenvalue_deltas"] = self.eigenvalue_deltas()
            d["eigenvector_deltas"] = self.eigenvector_alignment()
        return d


@dataclass
class FixedLineReport:
    """The segment {alpha, 0, 1 - alpha} of C/S mixtures, sampled at a few alphas."""

    name: str
    samples: list[FixedPointReport] = field(default_factory=list)
    kind: str = "fixed-line"
    formula: str = "{alpha, 0, 1-alpha}"

    @property
    def alphas(self) -> list[float]:
        return [s.point.alpha for s in self.samples]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "formula": self.formula,
            "exists_in_simplex": True,
            "samples": [s.to_dict() for s in self.samples],
        }


def _report(point: FixedPoint, field_name: str, p: GameParams, closed_form=None) -> FixedPointReport:
    x = np.array(point.location, dtype=float)
    jac = jacobian(field_name, x, p)
    pairs = eigen_small(jac)
    residual = float(np.max(np.abs(_field_fn(field_name, p)(x))))
    return FixedPointReport(point, jac, pairs, classify_stability([e.value for e in pairs]), residual, closed_form)


def _in_simplex(loc, tol=1e-12) -> bool:
    return all(v >= -tol for v in loc) and sum(loc) <= 1.0 + tol


def polymorphic_point(p: GameParams) -> tuple[float, float]:
    """Interior C/D mixture where a + b*k vanishes (k = x2/x1) and there are no loners.

    With the default payoffs this is ((beta z - 1)/d, (beta z + 2 - 5 beta)/d),
    d = 1 + 2 beta z - 5 beta.  Raises :class:`DegenerateDenominator` when d = 0.
    """
    co = AbcfCoefficients.from_params(p)
    if p.pd.is_default:
        d = 1.0 + 2.0 * p.beta * p.z - 5.0 * p.beta
        if abs(d) < DENOMINATOR_TOL:
            raise DegenerateDenominator(f"1 + 2*beta*z - 5*beta = {d:.3g}; the polymorphic point is at infinity")
        return ((p.beta * p.z - 1.0) / d, (p.beta * p.z + 2.0 - 5.0 * p.beta) / d)
    d = co.a - co.b
    if abs(d) < DENOMINATOR_TOL:
        raise DegenerateDenominator(f"a - b = {d:.3g}; the polymorphic point is at infinity")
    return (-co.b / d, co.a / d)


def closed_form_eigenpairs_3(p: GameParams) -> dict[str, list[tuple[float, tuple]]]:
    """Closed-form eigenvalues/eigenvectors of the three-strategy fixed points (default payoffs)."""
    b, z, g = p.beta, p.z, p.gamma
    d = 2 * b * z - 5 * b + 1
    rows = {
        "{0,0}": [(0.0, (1, 0)), (0.0, (0, 1))],
        "{1,0}": [((z - 3) / g, (1, 0)), ((2 - 5 * b + b * z) / g, (-1, 1))],
        "{0,1}": [((b * z - 1) / g, (1, -1)), ((z - 1) / g, (0, 1))],
    }
    if abs(d) >= DENOMINATOR_TOL:
        rows["polymorphic"] = [
            ((1 - b * z) * (b * z - 5 * b + 2) / (g * d), (-1, 1)),
            ((z * b * (2 - b) * (z - 5) + 3 + z) / (g * d), (b * z - 1, b * z - 5 * b + 2)),
        ]
    return rows


def closed_form_eigenpairs_4(p: GameParams, alpha: float | None = None) -> dict[str, list[tuple[float, tuple]]]:
    """Closed-form eigenpairs of the four-strategy fixed points (default payoffs).

    Eigenvectors with a vanishing denominator are scaled through, so the
    direction is unchanged wherever the closed-form vector is defined.
    """
    b, z, g = p.beta, p.z, p.gamma
    d = 2 * b * z - 5 * b + 1
    rows = {
        "{0,0,0}": [(0.0, (1, 0, 0)), (0.0, (0, 1, 0)), (0.0, (0, 0, 1))],
        "{0,1,0}": [((b * z - 1) / g, (-1, 1, 0)), ((z - 1) / g, (0, 1, 0)), (-1 / g, (0, 1, -1))],
        "{1,0,0}": [(0.0, (1, 0, -1)), ((2 - 5 * b + b * z) / g, (-1, 1, 0)), ((z - 3) / g, (1, 0, 0))],
        "{0,0,1}": [(0.0, (1, 0, -1)), (2 / g, (0, 1, -1)), ((z - 3) / g, (0, 0, 1))],
    }
    if alpha is not None:
        a = alpha
        lam2 = 2 - 5 * a * b + a * b * z
        e2 = (a * (b * z - 2 * a * b * z + 5 * a * b - 2), lam2, (a - 1) * (2 * a * b * z - 5 * a * b + 2))
        rows["line"] = [(0.0, (1, 0, -1)), (lam2 / g, e2 if lam2 != 0 else None), ((z - 3) / g, (a, 0, 1 - a))]
    if abs(d) >= DENOMINATOR_TOL:
        rows["C/D"] = [
            ((1 - b * z) * (b * z - 5 * b + 2) / (g * d), (-1, 1, 0)),
            ((z * b * (2 - b) * (z - 5) + 3 + z) / (g * d), (b * z - 1, 2 - 5 * b + b * z, 0)),
            (-b * z * (2 - 5 * b + b * z) / (g * d), (b * z - 1, b * (5 - 3 * z), d)),
        ]
    return rows


def _closed(rows, key):
    if rows is None or key not in rows:
        return None
    return [(lam, None if vec is None else np.array(vec, dtype=float)) for lam, vec in rows[key]]


def fixed_points_3(p: GameParams, strict: bool = False) -> list[FixedPointReport]:
    """The four fixed points of the C/D/B system: all-B, all-C, all-D and the C/D mixture.

    When the mixture escapes to infinity the three vertices are returned and a
    :class:`DegenerateDenominator` warning is issued (raised if ``strict``).
    """
    rows = closed_form_eigenpairs_3(p) if p.pd.is_default else None
    reports = [
        _report(FixedPoint("{0,0}", (0.0, 0.0), "vertex", True), "reduced3", p, _closed(rows, "{0,0}")),
        _report(FixedPoint("{1,0}", (1.0, 0.0), "vertex", True), "reduced3", p, _closed(rows, "{1,0}")),
        _report(FixedPoint("{0,1}", (0.0, 1.0), "vertex", True), "reduced3", p, _closed(rows, "{0,1}")),
    ]
    try:
        loc = polymorphic_point(p)
    except DegenerateDenominator as exc:
        if strict:
            raise
        warnings.warn(str(exc), DegenerateDenominator, stacklevel=2)
        return reports
    inside = _in_simplex(loc)
    kind = "edge" if inside else "exterior"
    if inside and (loc[0] in (0.0, 1.0)):
        kind = "vertex"
    pt = FixedPoint("polymorphic", loc, kind, inside)
    reports.append(_report(pt, "reduced3", p, _closed(rows, "polymorphic")))
    return reports


def fixed_points_4(
    p: GameParams, strict: bool = False, alphas: Sequence[float] = ALPHA_SAMPLES
) -> list[FixedPointReport | FixedLineReport]:
    """Fixed points of the C/D/S/B system (default dilemma payoffs).

    Returns all-B, all-D, all-C, all-S, the C/S fixed line sampled at
    ``alphas``, and the C/D mixture on the S-free face.
    """
    if not p.pd.is_default:
        raise ValidationError("the four-strategy analysis needs (t, r, p, s) = (5, 3, 1, 0)")
    rows = closed_form_eigenpairs_4(p)
    out: list[FixedPointReport | FixedLineReport] = [
        _report(FixedPoint("{0,0,0}", (0.0, 0.0, 0.0), "vertex", True), "reduced4", p, _closed(rows, "{0,0,0}")),
        _report(FixedPoint("{0,1,0}", (0.0, 1.0, 0.0), "vertex", True), "reduced4", p, _closed(rows, "{0,1,0}")),
        _report(FixedPoint("{1,0,0}", (1.0, 0.0, 0.0), "vertex", True), "reduced4", p, _closed(rows, "{1,0,0}")),
        _report(FixedPoint("{0,0,1}", (0.0, 0.0, 1.0), "vertex", True), "reduced4", p, _closed(rows, "{0,0,1}")),
    ]
    line = FixedLineReport("{alpha,0,1-alpha}")
    for a in alphas:
        kind = "vertex" if a in (0.0, 1.0) else "edge"
        pt = FixedPoint(f"line(alpha={a:g})", (a, 0.0, 1.0 - a), kind, True, alpha=a)
        line.samples.append(_report(pt, "reduced4", p, _closed(closed_form_eigenpairs_4(p, a), "line")))
    out.append(line)
    try:
        x1, x2 = polymorphic_point(p)
    except DegenerateDenominator as exc:
        if strict:
            raise
        warnings.warn(str(exc), DegenerateDenominator, stacklevel=2)
        return out
    inside = _in_simplex((x1, x2, 0.0))
    pt = FixedPoint("C/D", (x1, x2, 0.0), "edge" if inside else "exterior", inside)
    out.append(_report(pt, "reduced4", p, _closed(rows, "C/D")))
    return out


def flatten_reports(reports) -> list[FixedPointReport]:
    out = []
    for r in reports:
        out.extend(r.samples if isinstance(r, FixedLineReport) else [r])
    return out


def partnership_census(p: GameParams) -> tuple[float, float, float]:
    """Shares of (cooperating pairs, defecting pairs, loners) at the stable C/D mixture.

    With a fraction ``x`` of conditional cooperators, random pairing gives
    ``x**2`` in cooperative partnerships, ``(1-x)**2`` in mutually defecting
    ones, and the mixed pairs split up, leaving ``2x(1-x)`` alone.
    """
    try:
        reports = fixed_points_3(p, strict=True)
    except DegenerateDenominator as exc:
        raise NotInRegionVI(str(exc)) from None
    poly = reports[3]
    if not (poly.point.exists_in_simplex and poly.stability is Stability.STABLE):
        raise NotInRegionVI(
            f"beta={p.beta}, z={p.z}: the polymorphic point is "
            f"{'stable' if poly.stability is Stability.STABLE else poly.stability.value}"
            f"{'' if poly.point.exists_in_simplex else ' and outside the simplex'}"
        )
    return census_from_share(poly.point.location[0])


def census_from_share(x: float) -> tuple[float, float, float]:
    return (x * x, (1.0 - x) ** 2, 2.0 * x * (1.0 - x))
