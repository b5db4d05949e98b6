"""Deterministic SVG renderings of a fitted model.

All figures share a fixed 960x720 canvas, generic font families and a
fixed number format, so identical inputs give byte-identical files.
Axis indices are 0-based in code; file names use 1-based axis numbers.
"""
from __future__ import annotations

from dataclasses import dataclass
from xml.sax.saxutils import escape

import numpy as np

from .dataio import DistributionalTable
from .distributions import DomainError, Histogram, summarize
from .mfa import MfaModel

WIDTH, HEIGHT = 960, 720
PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)
FONT = "sans-serif"

# geometry of the correlation-circle figures, in pixels
CIRCLE_CX, CIRCLE_CY, CIRCLE_R = 380.0, 360.0, 300.0


def fmt(x: float) -> str:
    s = f"{x:.3f}"
    return "0.000" if s == "-0.000" else s


@dataclass(frozen=True)
class PlotSpec:
    kind: str
    plane: tuple[int, int] = (0, 1)
    variables: tuple[str, ...] = ()
    labels: str = "names"
    mean_shading: bool = False
    partial: bool = True

    def __post_init__(self):
        if self.kind not in ("fan", "circle", "plane", "scree"):
            raise DomainError(f"unknown plot kind {self.kind!r}")
        a, b = self.plane
        if a == b:
            raise DomainError("plane axes must differ")
        if self.labels not in ("names", "means"):
            raise DomainError(f"unknown label mode {self.labels!r}")

    def check(self, model: MfaModel):
        if self.kind == "scree":
            return
        if max(self.plane) >= model.rank or min(self.plane) < 0:
            raise DomainError(f"plane {self.plane} outside model rank {model.rank}")

    @property
    def filename(self) -> str:
        a, b = (x + 1 for x in self.plane)
        if self.kind == "plane":
            return f"plane-{'+'.join(self.variables)}_{a}_{b}.svg"
        return f"{self.kind}_{a}_{b}.svg"


class _Doc:
    def __init__(self, title: str):
        self.title = title
        self.parts: list[str] = []
        self.warnings: list[str] = []

    def add(self, element: str):
        self.parts.append(element)

    def text(self, x, y, s, size=14, anchor="start", fill="#000000", weight=None):
        extra = f' font-weight="{weight}"' if weight else ""
        self.add(
            f'<text x="{fmt(x)}" y="{fmt(y)}" font-family="{FONT}" font-size="{size}" '
            f'text-anchor="{anchor}" fill="{fill}"{extra}>{escape(str(s))}</text>'
        )

    def line(self, x1, y1, x2, y2, stroke="#000000", width=1.0, dash=None):
        extra = f' stroke-dasharray="{dash}"' if dash else ""
        self.add(
            f'<line x1="{fmt(x1)}" y1="{fmt(y1)}" x2="{fmt(x2)}" y2="{fmt(y2)}" '
            f'stroke="{stroke}" stroke-width="{fmt(width)}"{extra}/>'
        )

    def polyline(self, pts, stroke, fill="none", width=1.0, opacity=1.0, closed=False):
        coords = " ".join(f"{fmt(x)},{fmt(y)}" for x, y in pts)
        tag = "polygon" if closed else "polyline"
        self.add(
            f'<{tag} points="{coords}" stroke="{stroke}" fill="{fill}" '
            f'stroke-width="{fmt(width)}" fill-opacity="{fmt(opacity)}"/>'
        )

    def render(self) -> str:
        meta = ""
        if self.warnings:
            items = "".join(f"<warning>{escape(w)}</warning>" for w in self.warnings)
            meta = f"<metadata><warnings>{items}</warnings></metadata>\n"
        head = (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" '
            f'height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">\n'
            f"<title>{escape(self.title)}</title>\n{meta}"
            f'<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="#ffffff"/>\n'
        )
        return head + "\n".join(self.parts) + "\n</svg>\n"


def _circle_frame(doc: _Doc, model: MfaModel, plane):
    a, b = plane
    cx, cy, r = CIRCLE_CX, CIRCLE_CY, CIRCLE_R
    doc.add(
        f'<circle cx="{fmt(cx)}" cy="{fmt(cy)}" r="{fmt(r)}" fill="none" '
        f'stroke="#444444" stroke-width="1.000"/>'
    )
    doc.line(cx - r - 10, cy, cx + r + 10, cy, stroke="#999999", dash="4,3")
    doc.line(cx, cy - r - 10, cx, cy + r + 10, stroke="#999999", dash="4,3")
    pct = model.percent
    doc.text(cx + r + 12, cy + 4, f"Axis {a + 1} ({pct[a]:.2f}%)", size=12)
    doc.text(cx, cy - r - 16, f"Axis {b + 1} ({pct[b]:.2f}%)", size=12, anchor="middle")


def _to_px(x, y):
    return CIRCLE_CX + CIRCLE_R * x, CIRCLE_CY - CIRCLE_R * y


def _legend(doc: _Doc, names):
    x0, y0 = 740.0, 80.0
    for j, name in enumerate(names):
        color = PALETTE[j % len(PALETTE)]
        y = y0 + 24 * j
        doc.add(
            f'<rect x="{fmt(x0)}" y="{fmt(y - 11)}" width="14" height="14" fill="{color}" '
            f'fill-opacity="0.500" stroke="{color}"/>'
        )
        doc.text(x0 + 22, y + 1, name, size=13)


def fan_vertices(model: MfaModel, j: int, plane=(0, 1)):
    """Correlation-circle coordinates of block ``j``'s quantile columns.

    Returns ``(points, kept)`` where ``kept`` indexes the non-degenerate
    columns in their natural quantile order.
    """
    a, b = plane
    corr = model.column_correlations()[model.matrix.block_slice(j)]
    kept = np.flatnonzero(np.isfinite(corr[:, a]) & np.isfinite(corr[:, b]))
    return corr[kept][:, [a, b]], kept


def fan_opening_angle(points: np.ndarray) -> float:
    """Angular span (degrees) of the directions of the fan vertices."""
    pts = np.asarray(points, float)
    pts = pts[np.hypot(pts[:, 0], pts[:, 1]) > 1e-12]
    if len(pts) < 2:
        return 0.0
    ang = np.sort(np.degrees(np.arctan2(pts[:, 1], pts[:, 0])))
    gaps = np.diff(np.concatenate((ang, [ang[0] + 360.0])))
    return float(360.0 - gaps.max())


def spanish_fan(model: MfaModel, plane=(0, 1)) -> str:
    PlotSpec("fan", plane).check(model)
    doc = _Doc(f"Quantile fans on axes {plane[0] + 1} and {plane[1] + 1}")
    _circle_frame(doc, model, plane)
    for j, var in enumerate(model.variables):
        color = PALETTE[j % len(PALETTE)]
        pts, kept = fan_vertices(model, j, plane)
        omitted = sorted(set(range(model.blocks.blocks[j].K + 1)) - set(kept.tolist()))
        for l in omitted:
            doc.warnings.append(f"{var}:q{l} has zero variance and was omitted")
        if len(pts) == 0:
            continue
        px = [_to_px(x, y) for x, y in pts]
        doc.polyline([_to_px(0, 0), *px], stroke=color, fill=color, opacity=0.25, closed=True)
        for x, y in px:
            doc.add(f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="2.500" fill="{color}"/>')
        first, last = px[0], px[-1]
        doc.text(first[0], first[1] - 6, f"q{kept[0]}", size=10, fill=color)
        doc.text(last[0], last[1] - 6, f"q{kept[-1]}", size=10, fill=color)
    _legend(doc, model.variables)
    return doc.render()


def partial_axes_circle(model: MfaModel, plane=(0, 1), n_dims: int = 3) -> str:
    PlotSpec("circle", plane).check(model)
    a, b = plane
    doc = _Doc(f"Partial axes on axes {a + 1} and {b + 1}")
    _circle_frame(doc, model, plane)
    for j, var in enumerate(model.variables):
        color = PALETTE[j % len(PALETTE)]
        corr = np.nan_to_num(model.partial_axis_correlations(j, n_dims), nan=0.0)
        for d in range(corr.shape[0]):
            x, y = _to_px(corr[d, a], corr[d, b])
            doc.line(CIRCLE_CX, CIRCLE_CY, x, y, stroke=color, width=1.5)
            doc.add(f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="3.000" fill="{color}"/>')
            doc.text(x + 5, y - 5, f"{var}.{d + 1}", size=11, fill=color)
    _legend(doc, model.variables)
    return doc.render()


@dataclass(frozen=True)
class Glyph:
    unit: str
    variable: str
    anchor: tuple[float, float]
    points: np.ndarray  # data coordinates, shape (m, 2)
    gray: float
    label: str
    side: int = 1


def _density_profile(h: Histogram, min_width: float):
    """Step density of a piecewise-uniform histogram, lightly smoothed."""
    lo, hi = h.bounds[:-1], h.bounds[1:]
    width = np.maximum(hi - lo, min_width)
    heights = h.weights / width
    if len(heights) >= 3:
        padded = np.concatenate(([heights[0]], heights, [heights[-1]]))
        heights = 0.25 * padded[:-2] + 0.5 * padded[1:-1] + 0.25 * padded[2:]
    xs = [lo[0]]
    ys = [0.0]
    for l in range(len(heights)):
        xs += [lo[l], lo[l] + width[l]]
        ys += [heights[l], heights[l]]
    xs.append(lo[-1] + width[-1])
    ys.append(0.0)
    return np.array(xs), np.array(ys)


def plane_glyphs(
    model: MfaModel,
    table: DistributionalTable,
    variables,
    plane=(0, 1),
    partial: bool = True,
    labels: str = "names",
) -> list[Glyph]:
    """Glyph geometry for the individual plane, in data coordinates.

    With two variables the second is mirrored below the anchor. Anchors are
    the partial coordinates of the variable's block when ``partial`` is set
    and there is one variable, otherwise the global coordinates.
    """
    variables = tuple(variables)
    if not 1 <= len(variables) <= 2:
        raise DomainError("an individual plane shows one variable, or two mirrored")
    for v in variables:
        if v not in model.variables or v not in table.variables:
            raise DomainError(f"unknown variable {v!r}")
    if list(table.units) and len(table.units) != model.blocks.n:
        raise DomainError("table and model have different unit counts")
    a, b = plane
    if len(variables) == 1 and partial:
        j = model.block_index(variables[0])
        anchors = model.partial_row_coordinates[j][:, [a, b]]
    else:
        anchors = model.row_coordinates[:, [a, b]]

    span_x = float(np.ptp(anchors[:, 0])) or 1.0
    span_y = float(np.ptp(anchors[:, 1])) or 1.0
    glyphs = []
    for side, var in zip((1, -1), variables):
        hists = table.column(var)
        summaries = [summarize(h) for h in hists]
        means = np.array([s.mean for s in summaries])
        data_span = max(float(np.ptp(h.bounds)) for h in hists) or 1.0
        min_width = 1e-3 * (max(h.bounds[-1] for h in hists) - min(h.bounds[0] for h in hists) or 1.0)
        profiles = [_density_profile(h, min_width) for h in hists]
        peak = max(float(ys.max()) for _, ys in profiles) or 1.0
        hscale = 0.12 * span_x / data_span
        vscale = 0.10 * span_y / peak
        lo, hi = means.min(), means.max()
        for i, unit in enumerate(table.units):
            xs, ys = profiles[i]
            ax, ay = float(anchors[i, 0]), float(anchors[i, 1])
            pts = np.column_stack((ax + (xs - means[i]) * hscale, ay + side * ys * vscale))
            gray = 0.85 - 0.7 * (means[i] - lo) / (hi - lo) if hi > lo else 0.5
            label = unit if labels == "names" else f"{means[i]:.2f}"
            glyphs.append(Glyph(unit, var, (ax, ay), pts, float(gray), label, side))
    return glyphs


def individual_plane(
    model: MfaModel,
    table: DistributionalTable,
    variable,
    plane=(0, 1),
    labels: str = "names",
    mean_shading: bool = False,
    partial: bool = True,
) -> str:
    variables = (variable,) if isinstance(variable, str) else tuple(variable)
    spec = PlotSpec("plane", plane, variables, labels, mean_shading, partial)
    spec.check(model)
    glyphs = plane_glyphs(model, table, variables, plane, partial, labels)
    a, b = plane
    doc = _Doc(f"Individuals ({', '.join(variables)}) on axes {a + 1} and {b + 1}")

    allpts = np.vstack([g.points for g in glyphs] + [np.array([g.anchor for g in glyphs])])
    xmin, ymin = allpts.min(axis=0)
    xmax, ymax = allpts.max(axis=0)
    padx = 0.05 * ((xmax - xmin) or 1.0)
    pady = 0.05 * ((ymax - ymin) or 1.0)
    xmin, xmax, ymin, ymax = xmin - padx, xmax + padx, ymin - pady, ymax + pady
    left, right, top, bottom = 70.0, WIDTH - 40.0, 50.0, HEIGHT - 60.0

    def px(x, y):
        return (
            left + (x - xmin) / (xmax - xmin) * (right - left),
            bottom - (y - ymin) / (ymax - ymin) * (bottom - top),
        )

    doc.add(
        f'<rect x="{fmt(left)}" y="{fmt(top)}" width="{fmt(right - left)}" '
        f'height="{fmt(bottom - top)}" fill="none" stroke="#444444"/>'
    )
    if xmin < 0 < xmax:
        doc.line(*px(0, ymin), *px(0, ymax), stroke="#999999", dash="4,3")
    if ymin < 0 < ymax:
        doc.line(*px(xmin, 0), *px(xmax, 0), stroke="#999999", dash="4,3")
    pct = model.percent
    doc.text((left + right) / 2, HEIGHT - 20, f"Axis {a + 1} ({pct[a]:.2f}%)", anchor="middle")
    doc.add(
        f'<text x="20" y="{fmt((top + bottom) / 2)}" font-family="{FONT}" font-size="14" '
        f'text-anchor="middle" transform="rotate(-90 20 {fmt((top + bottom) / 2)})">'
        f"Axis {b + 1} ({pct[b]:.2f}%)</text>"
    )
    for g in glyphs:
        color = PALETTE[variables.index(g.variable) % len(PALETTE)]
        if mean_shading:
            level = int(round(255 * g.gray))
            fill = f"#{level:02x}{level:02x}{level:02x}"
        else:
            fill = color
        doc.polyline([px(x, y) for x, y in g.points], stroke=color, fill=fill,
                     opacity=0.6, width=1.0, closed=True)
    seen = set()
    for g in glyphs:
        if g.unit in seen and labels == "names":
            continue
        seen.add(g.unit)
        x, y = px(*g.anchor)
        doc.add(f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="2.500" fill="#000000"/>')
        dy = 14 if g.side > 0 else -6
        doc.text(x + 4, y + dy, g.label, size=11)
    if len(variables) > 1:
        _legend(doc, variables)
    return doc.render()


def scree(model: MfaModel) -> str:
    doc = _Doc("Eigenvalue percentages")
    pct = model.percent
    cum = model.cumulative_percent
    left, right, top, bottom = 80.0, WIDTH - 40.0, 50.0, HEIGHT - 70.0
    L = len(pct)
    slot = (right - left) / max(L, 1)

    def py(v):
        return bottom - v / 100.0 * (bottom - top)

    doc.line(left, bottom, right, bottom)
    doc.line(left, bottom, left, top)
    for tick in range(0, 101, 20):
        doc.line(left - 5, py(tick), left, py(tick))
        doc.text(left - 8, py(tick) + 4, f"{tick}", size=11, anchor="end")
    for k in range(L):
        x = left + k * slot + 0.15 * slot
        doc.add(
            f'<rect x="{fmt(x)}" y="{fmt(py(pct[k]))}" width="{fmt(0.7 * slot)}" '
            f'height="{fmt(bottom - py(pct[k]))}" fill="{PALETTE[0]}" data-percent="{pct[k]:.6f}"/>'
        )
        doc.text(left + (k + 0.5) * slot, bottom + 18, f"{k + 1}", size=11, anchor="middle")
    pts = [(left + (k + 0.5) * slot, py(cum[k])) for k in range(L)]
    if pts:
        doc.polyline(pts, stroke=PALETTE[1], width=2.0)
        for x, y in pts:
            doc.add(f'<circle cx="{fmt(x)}" cy="{fmt(y)}" r="3.000" fill="{PALETTE[1]}"/>')
    doc.text((left + right) / 2, HEIGHT - 25, "Component", anchor="middle")
    doc.text(left, top - 15, "% of inertia (bars), cumulative % (line)", size=13)
    return doc.render()


def render(spec: PlotSpec, model: MfaModel, table: DistributionalTable | None = None) -> str:
    spec.check(model)
    if spec.kind == "fan":
        return spanish_fan(model, spec.plane)
    if spec.kind == "circle":
        return partial_axes_circle(model, spec.plane)
    if spec.kind == "scree":
        return scree(model)
    if table is None:
        raise DomainError("individual planes need the source table")
    return individual_plane(
        model, table, spec.variables, spec.plane, spec.labels, spec.mean_shading, spec.partial
    )
