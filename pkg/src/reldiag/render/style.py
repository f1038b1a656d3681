"""Visual constants shared by the SVG and DOT emitters."""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

from ..errors import ReldiagError


@dataclass(frozen=True)
class Style:
    font_family: str = "Helvetica, Arial, sans-serif"
    font_size: float = 8.0
    char_width: float = 5.0
    stroke: str = "#000000"
    stroke_width: float = 0.8
    dash: str = "4,2"
    corner_radius: float = 5.0
    header_fill: str = "#000000"
    header_text: str = "#ffffff"
    cell_fill: str = "#ffffff"
    output_fill: str = "#999999"
    output_cell_fill: str = "#d9d9d9"
    background: str = "#ffffff"
    separator: str = "#808080"


DEFAULT_STYLE = Style()


def parse_style(text: str, base: Style = DEFAULT_STYLE) -> Style:
    """Override ``base`` with ``key = value`` lines; ``#`` starts a comment line."""
    kinds = {f.name: f.type for f in fields(Style)}
    changes = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if not sep or key not in kinds:
            raise ReldiagError(f"style line {lineno}: unknown setting {key!r}")
        if kinds[key] in (float, "float"):
            try:
                changes[key] = float(value)
            except ValueError:
                raise ReldiagError(f"style line {lineno}: {key} needs a number") from None
        else:
            changes[key] = value
    return replace(base, **changes)
