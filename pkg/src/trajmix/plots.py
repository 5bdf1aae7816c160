"""Deterministic SVG figures, written without a plotting dependency.

Every figure is a plain SVG 1.1 document assembled from rectangles,
polylines and text, so identical inputs produce byte-identical files and
tests can inspect the markup directly.
"""

import numpy as np

from .exceptions import NumericalError

WIDTH, HEIGHT = 640.0, 480.0
MARGIN = 56.0

PALETTE = (
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def _num(value):
    return f"{float(value):.3f}"


class SvgCanvas:
    """Collects SVG elements over a data-coordinate viewport."""

    def __init__(self, x_range, y_range, title=""):
        self.x_min, self.x_max = (float(v) for v in x_range)
        self.y_min, self.y_max = (float(v) for v in y_range)
        if self.x_max <= self.x_min:
            self.x_max = self.x_min + 1.0
        if self.y_max <= self.y_min:
            self.y_max = self.y_min + 1.0
        self.elements = []
        self.title = title

    def x_pix(self, x):
        frac = (x - self.x_min) / (self.x_max - self.x_min)
        return MARGIN + frac * (WIDTH - 2 * MARGIN)

    def y_pix(self, y):
        frac = (y - self.y_min) / (self.y_max - self.y_min)
        return HEIGHT - MARGIN - frac * (HEIGHT - 2 * MARGIN)

    def polyline(self, xs, ys, color, width=1.5):
        pts = " ".join(
            f"{_num(self.x_pix(x))},{_num(self.y_pix(y))}" for x, y in zip(xs, ys)
        )
        self.elements.append(
            f'<polyline fill="none" stroke="{color}" '
            f'stroke-width="{_num(width)}" points="{pts}"/>'
        )

    def rect_data(self, x0, y0, x1, y1, fill):
        xp, yp = self.x_pix(x0), self.y_pix(y1)
        w = self.x_pix(x1) - xp
        h = self.y_pix(y0) - yp
        self.elements.append(
            f'<rect x="{_num(xp)}" y="{_num(yp)}" width="{_num(w)}" '
            f'height="{_num(h)}" fill="{fill}"/>'
        )

    def _axes(self):
        x0, y0 = MARGIN, HEIGHT - MARGIN
        x1, y1 = WIDTH - MARGIN, MARGIN
        frame = (
            f'<rect x="{_num(x0)}" y="{_num(y1)}" width="{_num(x1 - x0)}" '
            f'height="{_num(y0 - y1)}" fill="none" stroke="#000000"/>'
        )
        labels = [
            (x0, y0 + 16, f"{self.x_min:.3g}", "start"),
            (x1, y0 + 16, f"{self.x_max:.3g}", "end"),
            (x0 - 6, y0, f"{self.y_min:.3g}", "end"),
            (x0 - 6, y1 + 10, f"{self.y_max:.3g}", "end"),
        ]
        texts = [
            f'<text x="{_num(x)}" y="{_num(y)}" font-size="12" '
            f'font-family="sans-serif" text-anchor="{anchor}">{label}</text>'
            for x, y, label, anchor in labels
        ]
        if self.title:
            texts.append(
                f'<text x="{_num(WIDTH / 2)}" y="24" font-size="14" '
                f'font-family="sans-serif" text-anchor="middle">{self.title}</text>'
            )
        return [frame] + texts

    def render(self):
        body = "\n".join(self.elements + self._axes())
        return (
            '<?xml version="1.0" encoding="UTF-8"?>\n'
            '<svg xmlns="http://www.w3.org/2000/svg" version="1.1" '
            f'width="{_num(WIDTH)}" height="{_num(HEIGHT)}" '
            f'viewBox="0 0 {_num(WIDTH)} {_num(HEIGHT)}">\n'
            f"{body}\n</svg>\n"
        )


def _gray(value):
    level = int(round(255 * (1.0 - value)))
    level = min(max(level, 0), 255)
    return f"#{level:02x}{level:02x}{level:02x}"


def trajectory_figure(trajectory_set, title="trajectories"):
    """Demos as polylines: x1 vs x2 for planar data, value over time else.

    ``None`` stands for an empty dataset and produces bare unit axes.
    """
    if trajectory_set is None:
        return SvgCanvas((0.0, 1.0), (0.0, 1.0), title).render()
    if trajectory_set.dim >= 2:
        xs = [v[:, 0] for v in trajectory_set.values]
        ys = [v[:, 1] for v in trajectory_set.values]
    else:
        xs = list(trajectory_set.times)
        ys = [v[:, 0] for v in trajectory_set.values]
    all_x = np.concatenate(xs)
    all_y = np.concatenate(ys)
    canvas = SvgCanvas(
        (all_x.min(), all_x.max()), (all_y.min(), all_y.max()), title
    )
    for i, (x, y) in enumerate(zip(xs, ys)):
        canvas.polyline(x, y, PALETTE[i % len(PALETTE)])
    return canvas.render()


def heatmap_figure(matrix, title="matrix"):
    """Grayscale cell grid of a matrix, darker for larger magnitude."""
    matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
    rows, cols = matrix.shape
    scale = float(np.max(np.abs(matrix)))
    norm = np.abs(matrix) / scale if scale > 0 else np.zeros_like(matrix)
    canvas = SvgCanvas((0.0, cols), (0.0, rows), title)
    for i in range(rows):
        for j in range(cols):
            canvas.rect_data(j, rows - 1 - i, j + 1, rows - i, _gray(norm[i, j]))
    return canvas.render()


def coefficients_figure(values, index_matrix, title="coefficients"):
    """Heatmap of a coefficient table (1-D tables become a single row)."""
    values = np.asarray(values, dtype=float)
    index_matrix = np.atleast_2d(np.asarray(index_matrix, dtype=int))
    if index_matrix.shape[1] == 1:
        grid = values.reshape(1, -1)
    elif index_matrix.shape[1] == 2:
        size = int(index_matrix.max()) + 1
        grid = np.zeros((size, size))
        grid[index_matrix[:, 0], index_matrix[:, 1]] = values
    else:
        raise ValueError("coefficient heatmaps support 1-D and 2-D tables")
    return heatmap_figure(grid, title)


def basis_figure(family, n_points=200, title=None):
    """Curves of one basis family over [0, 1].

    For a rescaled radial family the partition of unity is re-checked on
    the plotted values themselves; a violation aborts the figure.
    """
    t = np.linspace(0.0, 1.0, int(n_points))
    phi = family.matrix(t)
    if getattr(family, "rescaled", False):
        sums = phi.sum(axis=1)
        if np.max(np.abs(sums - 1.0)) > 1e-9:
            raise NumericalError(
                "plotted activations do not form a partition of unity"
            )
    canvas = SvgCanvas(
        (0.0, 1.0), (float(phi.min()), float(phi.max())),
        title or f"{family.kind} basis (K={family.n_basis})",
    )
    for k in range(phi.shape[1]):
        canvas.polyline(t, phi[:, k], PALETTE[k % len(PALETTE)])
    return canvas.render()


def save_figure(svg_text, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(svg_text)
