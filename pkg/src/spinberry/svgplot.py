"""Self-contained SVG line plots for sweep CSV files; no plotting library."""

from __future__ import annotations

import csv
from pathlib import Path

from .errors import UsageError

_WIDTH, _HEIGHT = 720, 480
_LEFT, _RIGHT, _TOP, _BOTTOM = 80, 24, 56, 56
_PALETTE = (
    "#1f77b4",
    "#d62728",
    "#2ca02c",
    "#9467bd",
    "#ff7f0e",
    "#8c564b",
    "#17becf",
    "#e377c2",
)
_UNITS = {
    "theta": "rad",
    "chi": "rad",
    "xi": "rad",
    "eta": "rad",
    "energy": "energy units",
}


def _axis_label(column: str) -> str:
    if column in _UNITS:
        return f"{column} ({_UNITS[column]})"
    if "phase" in column or column.endswith(("_numeric", "_analytic", "_diff_mod_2pi")):
        return f"{column} (rad)"
    return column


def _read_table(csv_path: Path) -> tuple[list[str], list[dict]]:
    with open(csv_path, newline="", encoding="utf-8") as handle:
        reader = csv.DictReader(handle)
        if reader.fieldnames is None:
            raise UsageError(f"{csv_path} has no header row")
        rows = list(reader)
    if not rows:
        raise UsageError(f"{csv_path} has a header but no data rows")
    return list(reader.fieldnames), rows


def _series(rows: list[dict], x_column: str, y_column: str) -> dict[str, list[tuple[float, float]]]:
    """Points grouped by level (a single unnamed group without a level column)."""
    groups: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        try:
            x = float(row[x_column])
            y = float(row[y_column])
        except (TypeError, ValueError):
            continue  # error rows carry empty cells
        key = row.get("level", "")
        groups.setdefault(key, []).append((x, y))
    return groups


def emit_plot(csv_path: Path, x_column: str, y_columns: list[str], out_path: Path) -> Path:
    """Write an SVG with one polyline per requested column per level."""
    columns, rows = _read_table(Path(csv_path))
    missing = [c for c in [x_column, *y_columns] if c not in columns]
    if missing:
        raise UsageError(
            f"columns {missing} not found in {csv_path}; available: {', '.join(columns)}"
        )

    lines = []
    for y_column in y_columns:
        for level, points in sorted(_series(rows, x_column, y_column).items()):
            if points:
                label = f"{y_column} (level {level})" if level else y_column
                lines.append((label, points))
    if not lines:
        raise UsageError(f"no numeric data for {y_columns} vs {x_column} in {csv_path}")

    xs = [p[0] for _, pts in lines for p in pts]
    ys = [p[1] for _, pts in lines for p in pts]
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = min(ys), max(ys)
    if x_hi == x_lo:
        x_lo, x_hi = x_lo - 1.0, x_hi + 1.0
    if y_hi == y_lo:
        y_lo, y_hi = y_lo - 1.0, y_hi + 1.0

    def sx(x: float) -> float:
        return _LEFT + (x - x_lo) / (x_hi - x_lo) * (_WIDTH - _LEFT - _RIGHT)

    def sy(y: float) -> float:
        return _HEIGHT - _BOTTOM - (y - y_lo) / (y_hi - y_lo) * (_HEIGHT - _TOP - _BOTTOM)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" height="{_HEIGHT}" '
        f'viewBox="0 0 {_WIDTH} {_HEIGHT}" font-family="monospace" font-size="12">',
        f'<rect width="{_WIDTH}" height="{_HEIGHT}" fill="white"/>',
        f'<line x1="{_LEFT}" y1="{_HEIGHT - _BOTTOM}" x2="{_WIDTH - _RIGHT}" '
        f'y2="{_HEIGHT - _BOTTOM}" stroke="black"/>',
        f'<line x1="{_LEFT}" y1="{_TOP}" x2="{_LEFT}" y2="{_HEIGHT - _BOTTOM}" stroke="black"/>',
    ]
    for tick in range(5):
        xv = x_lo + tick * (x_hi - x_lo) / 4
        yv = y_lo + tick * (y_hi - y_lo) / 4
        parts.append(
            f'<line x1="{sx(xv):.2f}" y1="{_HEIGHT - _BOTTOM}" x2="{sx(xv):.2f}" '
            f'y2="{_HEIGHT - _BOTTOM + 5}" stroke="black"/>'
            f'<text x="{sx(xv):.2f}" y="{_HEIGHT - _BOTTOM + 18}" '
            f'text-anchor="middle">{xv:.4g}</text>'
        )
        parts.append(
            f'<line x1="{_LEFT - 5}" y1="{sy(yv):.2f}" x2="{_LEFT}" y2="{sy(yv):.2f}" '
            f'stroke="black"/>'
            f'<text x="{_LEFT - 8}" y="{sy(yv):.2f}" text-anchor="end" '
            f'dominant-baseline="middle">{yv:.4g}</text>'
        )
    parts.append(
        f'<text x="{(_LEFT + _WIDTH - _RIGHT) / 2:.0f}" y="{_HEIGHT - 12}" '
        f'text-anchor="middle">{_axis_label(x_column)}</text>'
    )
    parts.append(
        f'<text x="16" y="{(_TOP + _HEIGHT - _BOTTOM) / 2:.0f}" text-anchor="middle" '
        f'transform="rotate(-90 16 {(_TOP + _HEIGHT - _BOTTOM) / 2:.0f})">'
        f"{_axis_label(y_columns[0]) if len(y_columns) == 1 else 'value (rad)'}</text>"
    )
    for index, (label, points) in enumerate(lines):
        color = _PALETTE[index % len(_PALETTE)]
        coords = " ".join(f"{sx(x):.2f},{sy(y):.2f}" for x, y in points)
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="1.5"/>')
        parts.append(
            f'<text x="{_LEFT + 8}" y="{_TOP - 40 + 14 * index}" fill="{color}">{label}</text>'
        )
    parts.append("</svg>")

    out_path = Path(out_path)
    out_path.write_text("\n".join(parts) + "\n", encoding="utf-8")
    return out_path
