"""Static SVG rendering of interval forecasts as horizontal bars."""

from __future__ import annotations

import xml.etree.ElementTree as ET

from .bounds import Interval

_WIDTH = 640
_ROW_HEIGHT = 30
_MARGIN_TOP = 40
_LABEL_WIDTH = 150
_PLOT_WIDTH = _WIDTH - _LABEL_WIDTH - 80


def _x(value: float) -> float:
    return _LABEL_WIDTH + value * _PLOT_WIDTH


def render_interval_bars(items: list[tuple[str, Interval]], title: str = "", threshold: float | None = None) -> str:
    """One labeled horizontal bar per item; returns a complete SVG document."""
    height = _MARGIN_TOP + _ROW_HEIGHT * len(items) + 30
    svg = ET.Element(
        "svg",
        xmlns="http://www.w3.org/2000/svg",
        width=str(_WIDTH),
        height=str(height),
        viewBox=f"0 0 {_WIDTH} {height}",
    )
    if title:
        head = ET.SubElement(svg, "text", x=str(_WIDTH / 2), y="22")
        head.set("text-anchor", "middle")
        head.set("font-family", "sans-serif")
        head.set("font-size", "15")
        head.text = title
    for tick in (0.0, 0.25, 0.5, 0.75, 1.0):
        x = _x(tick)
        ET.SubElement(
            svg, "line",
            x1=f"{x:.2f}", x2=f"{x:.2f}",
            y1=str(_MARGIN_TOP - 8), y2=str(height - 24),
            stroke="#cccccc", **{"stroke-width": "1"},
        )
        label = ET.SubElement(svg, "text", x=f"{x:.2f}", y=str(height - 10))
        label.set("text-anchor", "middle")
        label.set("font-family", "sans-serif")
        label.set("font-size", "10")
        label.text = f"{tick:g}"
    if threshold is not None:
        x = _x(threshold)
        ET.SubElement(
            svg, "line",
            x1=f"{x:.2f}", x2=f"{x:.2f}",
            y1=str(_MARGIN_TOP - 8), y2=str(height - 24),
            stroke="#d04040", **{"stroke-width": "1.5", "stroke-dasharray": "4 3"},
        )
    for row, (name, iv) in enumerate(items):
        y = _MARGIN_TOP + row * _ROW_HEIGHT
        mid = y + _ROW_HEIGHT / 2
        label = ET.SubElement(svg, "text", x="8", y=f"{mid + 4:.2f}")
        label.set("font-family", "sans-serif")
        label.set("font-size", "12")
        label.text = name
        x0, x1 = _x(iv.lower), _x(iv.upper)
        bar = ET.SubElement(
            svg, "rect", **{"class": "interval-bar"},
            x=f"{x0:.2f}", y=f"{mid - 6:.2f}",
            width=f"{max(x1 - x0, 1.5):.2f}", height="12",
            fill="#4878a8",
        )
        bar.set("data-name", name)
        value = ET.SubElement(svg, "text", x=f"{_LABEL_WIDTH + _PLOT_WIDTH + 8:.2f}", y=f"{mid + 4:.2f}")
        value.set("font-family", "sans-serif")
        value.set("font-size", "11")
        value.text = f"[{iv.lower:.3f}, {iv.upper:.3f}]"
    return ET.tostring(svg, encoding="unicode", xml_declaration=True) + "\n"
