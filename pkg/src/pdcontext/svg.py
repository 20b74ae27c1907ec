"""Self-contained SVG renderings of portraits and atlases.

Output uses inline attributes only and fixed-precision coordinates, so the
same input always produces the same bytes.
"""

from __future__ import annotations

from xml.sax.saxutils import escape

import numpy as np

from .atlas import REGIONS, AtlasGrid, Portrait
from .equilibrium import FixedLineReport, Stability

SIZE = 480
PAD = 40
PALETTE = {
    "I": "#d9d9d9",
    "II": "#f4cccc",
    "III": "#fce5cd",
    "IV": "#fff2cc",
    "V": "#d9ead3",
    "VI": "#b6d7a8",
    "VII": "#cfe2f3",
    "VIII": "#d9d2e9",
    "IX": "#ead1dc",
    "X": "#c9daf8",
}
BOUNDARY_FILL = "#666666"
CURVE_STYLE = 'fill="none" stroke="#000000" stroke-width="1.2"'


def _f(v: float) -> str:
    return f"{v:.2f}"


def _header(width: int, height: int, title: str) -> list[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="12">',
        f"<title>{escape(title)}</title>",
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>',
    ]


def _polyline(points, style: str) -> str:
    coords = " ".join(f"{_f(x)},{_f(y)}" for x, y in points)
    return f'<polyline points="{coords}" {style}/>'


def _marker(x: float, y: float, stable: bool) -> str:
    fill = "#000000" if stable else "#ffffff"
    return f'<circle cx="{_f(x)}" cy="{_f(y)}" r="5" fill="{fill}" stroke="#000000" stroke-width="1.5"/>'


class _Projection:
    """Maps full-form shares to the drawing plane."""

    def __init__(self, n_strategies: int):
        lo, hi = PAD, SIZE - PAD
        if n_strategies == 3:
            # right triangle: x1 to the right, x2 upwards, all-B at the origin corner
            self.corners = np.array([[hi, hi], [lo, lo], [lo, hi]], dtype=float)
            self.names = ("C", "D", "B")
        else:
            # C, D, S on the outer triangle, B projected to the centroid
            top = [0.5 * (lo + hi), lo]
            outer = np.array([[lo, hi], [hi, hi], top], dtype=float)
            self.corners = np.vstack([outer, outer.mean(axis=0)])
            self.names = ("C", "D", "S", "B")

    def __call__(self, reduced) -> np.ndarray:
        x = np.atleast_2d(np.asarray(reduced, dtype=float))
        full = np.hstack([x, 1.0 - x.sum(axis=1, keepdims=True)])
        return full @ self.corners


def portrait_svg(pt: Portrait, max_points: int = 400) -> str:
    proj = _Projection(pt.n_strategies)
    title = f"beta={pt.params.beta:g}, z={pt.params.z:g}" + (f", region {pt.region}" if pt.region else "")
    out = _header(SIZE, SIZE, title)
    n = len(proj.names)
    edges = [(i, j) for i in range(n) for j in range(i + 1, n)]
    for i, j in edges:
        a, b = proj.corners[i], proj.corners[j]
        dashed = ' stroke-dasharray="4,3"' if n == 4 and "B" in (proj.names[i], proj.names[j]) else ""
        out.append(
            f'<line x1="{_f(a[0])}" y1="{_f(a[1])}" x2="{_f(b[0])}" y2="{_f(b[1])}" '
            f'stroke="#000000" stroke-width="1.5"{dashed}/>'
        )
    for name, (cx, cy) in zip(proj.names, proj.corners):
        out.append(f'<text x="{_f(cx + 6)}" y="{_f(cy - 6)}">{name}</text>')
    for tr in pt.trajectories:
        stride = max(1, (len(tr.points) - 1) // max_points)
        pts = proj(np.vstack([tr.points[::stride], tr.points[-1:]]))
        out.append(_polyline(pts, 'fill="none" stroke="#1f4e79" stroke-width="0.8" stroke-opacity="0.8"'))
    for fp in pt.fixed_points:
        if isinstance(fp, FixedLineReport):
            ends = proj([fp.samples[0].point.location, fp.samples[-1].point.location])
            out.append(_polyline(ends, 'fill="none" stroke="#000000" stroke-width="3"'))
            continue
        if not fp.point.exists_in_simplex:
            continue
        x, y = proj(fp.point.location)[0]
        out.append(_marker(x, y, fp.stability is Stability.STABLE))
    out.append(f'<text x="{PAD}" y="{PAD - 16}">{escape(title)}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def atlas_svg(grid: AtlasGrid, curve_samples: int = 400) -> str:
    nb, nz = len(grid.betas), len(grid.zs)
    b0 = grid.betas[0] - 0.5 * (grid.betas[1] - grid.betas[0]) if nb > 1 else 0.0
    b1 = grid.betas[-1] + 0.5 * (grid.betas[1] - grid.betas[0]) if nb > 1 else 1.0
    z0 = grid.zs[0] - 0.5 * (grid.zs[1] - grid.zs[0]) if nz > 1 else 0.0
    z1 = grid.zs[-1] + 0.5 * (grid.zs[1] - grid.zs[0]) if nz > 1 else 4.0
    span = SIZE - 2 * PAD

    def px(beta, z):
        return PAD + (beta - b0) / (b1 - b0) * span, SIZE - PAD - (z - z0) / (z1 - z0) * span

    out = _header(SIZE, SIZE, "regions of the (beta, z) plane")
    cw, ch = span / nb, span / nz
    for i in range(nz):
        for j in range(nb):
            lab = grid.labels[i][j]
            color = BOUNDARY_FILL if lab.is_boundary else PALETTE.get(lab.name, "#ffffff")
            x, y = px(grid.betas[j], grid.zs[i])
            out.append(
                f'<rect x="{_f(x - cw / 2)}" y="{_f(y - ch / 2)}" width="{_f(cw)}" height="{_f(ch)}" fill="{color}"/>'
            )
    # boundary curves, clipped to the viewport
    betas = np.linspace(max(b0, 1e-6), b1, curve_samples)
    curves = {
        "B1": [(b, 1.0) for b in betas],
        "B2": [(b, 3.0) for b in betas],
        "B3": [(b, 1.0 / b) for b in betas],
        "B4": [(b, 5.0 - 2.0 / b) for b in betas],
    }
    for name, pts in curves.items():
        inside = [px(b, z) for b, z in pts if z0 <= z <= z1]
        if len(inside) > 1:
            out.append(_polyline(inside, CURVE_STYLE))
    # B5 = 0 is quadratic in beta: beta (2 - beta) = (z + 3) / (z (5 - z))
    zz = np.linspace(z0, z1, curve_samples)
    b5 = []
    for z in zz:
        if z <= 0 or z >= 5:
            continue
        q = (z + 3.0) / (z * (5.0 - z))
        disc = 1.0 - q
        if disc >= 0:
            beta = 1.0 - np.sqrt(disc)
            if b0 <= beta <= b1:
                b5.append(px(beta, z))
    if len(b5) > 1:
        out.append(_polyline(b5, CURVE_STYLE))
    # axes
    out.append(f'<rect x="{PAD}" y="{PAD}" width="{span}" height="{span}" fill="none" stroke="#000000"/>')
    out.append(f'<text x="{SIZE / 2:.2f}" y="{SIZE - 10}" text-anchor="middle">beta</text>')
    out.append(f'<text x="12" y="{SIZE / 2:.2f}" text-anchor="middle">z</text>')
    for region in REGIONS:
        cells = [
            (grid.betas[j], grid.zs[i])
            for i in range(nz)
            for j in range(nb)
            if not grid.labels[i][j].is_boundary and grid.labels[i][j].name == region
        ]
        if cells:
            bx, bz = np.mean(cells, axis=0)
            x, y = px(bx, bz)
            out.append(f'<text x="{_f(x)}" y="{_f(y)}" text-anchor="middle">{region}</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
