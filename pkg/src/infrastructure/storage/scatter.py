from __future__ import annotations

import os
import xml.etree.ElementTree as ET
from typing import Sequence

import numpy as np

from domain.errors import ShapeError
from domain.models import FloatArray
from infrastructure.common.atomic import atomic_write

from .delimited import read_samples

SVG_NAMESPACE = "http://www.w3.org/2000/svg"
CANVAS_SIZE = 480.0
MARGIN = 20.0
MARKER_RADIUS = 1.5
MARKER_COLOR = "#2ca02c"


def data_limits(samples: FloatArray, pad: float = 0.05) -> tuple[float, float, float, float]:
    """Bounding box of the samples with a relative pad; (-1, 1)^2 for an empty cloud."""
    if samples.shape[0] == 0:
        return (-1.0, 1.0, -1.0, 1.0)
    low = samples.min(axis=0)
    high = samples.max(axis=0)
    span = np.where(high > low, high - low, 1.0)
    return (
        float(low[0] - pad * span[0]),
        float(high[0] + pad * span[0]),
        float(low[1] - pad * span[1]),
        float(high[1] + pad * span[1]),
    )


def render_scatter_svg(samples: FloatArray, limits: Sequence[float] | None = None) -> str:
    """SVG document with one circle per sample inside a fixed viewport.

    The data box (xmin, xmax, ymin, ymax) is mapped affinely onto the canvas; the
    y axis points up.
    """
    points = np.asarray(samples, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 2:
        if points.size == 0:
            points = points.reshape(0, 2)
        else:
            raise ShapeError("emit_scatter_svg", [points.shape], "scatter plots need 2-D samples")
    x_min, x_max, y_min, y_max = (float(v) for v in (limits if limits is not None else data_limits(points)))
    if not (x_max > x_min and y_max > y_min):
        raise ValueError(f"invalid plot limits {(x_min, x_max, y_min, y_max)}")

    inner = CANVAS_SIZE - 2.0 * MARGIN
    sx = inner / (x_max - x_min)
    sy = inner / (y_max - y_min)

    ET.register_namespace("", SVG_NAMESPACE)
    size = f"{CANVAS_SIZE:g}"
    root = ET.Element(
        f"{{{SVG_NAMESPACE}}}svg",
        {"width": size, "height": size, "viewBox": f"0 0 {size} {size}"},
    )
    ET.SubElement(
        root,
        f"{{{SVG_NAMESPACE}}}rect",
        {
            "x": f"{MARGIN:g}",
            "y": f"{MARGIN:g}",
            "width": f"{inner:g}",
            "height": f"{inner:g}",
            "fill": "none",
            "stroke": "#999999",
        },
    )
    markers = ET.SubElement(root, f"{{{SVG_NAMESPACE}}}g", {"fill": MARKER_COLOR})
    for x, y in points:
        ET.SubElement(
            markers,
            f"{{{SVG_NAMESPACE}}}circle",
            {
                "cx": f"{MARGIN + (x - x_min) * sx:.3f}",
                "cy": f"{CANVAS_SIZE - MARGIN - (y - y_min) * sy:.3f}",
                "r": f"{MARKER_RADIUS:g}",
            },
        )
    return ET.tostring(root, encoding="unicode", xml_declaration=True)


def emit_scatter_svg(
    samples_path: str | os.PathLike[str],
    out_path: str | os.PathLike[str],
    limits: Sequence[float] | None = None,
) -> int:
    """Render a samples file; returns the number of markers written."""
    samples = read_samples(samples_path)
    document = render_scatter_svg(samples, limits)
    with atomic_write(out_path) as handle:
        handle.write(document)
    return int(samples.shape[0])


__all__ = ["CANVAS_SIZE", "MARGIN", "data_limits", "emit_scatter_svg", "render_scatter_svg"]
