"""Serializers for analysis results: CSV, JSON, map-join fragments, SVG pyramids.

Distances are printed with 3 decimals and shares with 2 in CSV; JSON keeps
full precision. Nothing here embeds timestamps, so output is reproducible
byte for byte.
"""
from __future__ import annotations

import csv
import io
import json
from pathlib import Path
from typing import Iterable, Sequence
from xml.sax.saxutils import escape

import numpy as np

from .analysis import EpitomeTable, SimilarityMap, TrajectoryPoint
from .clustering import ClusterAssignment, Dendrogram
from .coda import Composition
from .demographics import AGE_LABELS, AgePyramid, Entity

DIST_FMT = "{:.3f}"
SHARE_FMT = "{:.2f}"


def _csv_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def write_text(path: Path, text: str) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    return path


def _entity_dict(e: Entity) -> dict:
    return {"id": e.id, "name": e.name, "kind": e.kind, "iso3": e.iso3}


# -- epitome tables ------------------------------------------------------------


def epitome_csv(table: EpitomeTable) -> str:
    return _csv_text(
        ["rank", "entity", "kind", "distance", "beyond_threshold"],
        (
            [e.rank, e.entity.name, e.entity.kind, DIST_FMT.format(e.distance), str(e.beyond_threshold).lower()]
            for e in table.entries
        ),
    )


def epitome_json(table: EpitomeTable, names: dict[int, str] | None = None, delta=None) -> str:
    names = names or {}
    return _json_text(
        {
            "world_year": table.world_year,
            "reference_year": table.reference_year,
            "section": table.section,
            "threshold": table.threshold,
            "delta": "auto" if delta is None else delta,
            "zero_replaced": [names.get(i, i) for i in table.zero_replaced],
            "entries": [
                {
                    "rank": e.rank,
                    "entity": _entity_dict(e.entity),
                    "distance": e.distance,
                    "beyond_threshold": e.beyond_threshold,
                }
                for e in table.entries
            ],
        }
    )


# -- map joins -----------------------------------------------------------------


def map_csv(m: SimilarityMap) -> str:
    return _csv_text(["iso3", "distance"], ([iso, DIST_FMT.format(d)] for iso, d in m.values.items()))


def map_join_json(m: SimilarityMap, names: dict[str, str] | None = None) -> str:
    """Properties fragment to merge into a world GeoJSON on its ISO3 field."""
    names = names or {}
    props = {}
    for iso, d in m.values.items():
        props[iso] = {"world_year": m.world_year, "aitchison_distance": d}
        if iso in names:
            props[iso]["name"] = names[iso]
    return _json_text({"join_key": "iso3", "world_year": m.world_year, "properties": props})


# -- trajectories --------------------------------------------------------------


def trajectory_csv(points: Iterable[TrajectoryPoint]) -> str:
    return _csv_text(
        ["entity", "world_year", "distance"],
        ([p.entity.name, p.world_year, DIST_FMT.format(p.distance)] for p in points),
    )


def trajectory_json(points: Iterable[TrajectoryPoint]) -> str:
    return _json_text(
        [{"entity": _entity_dict(p.entity), "world_year": p.world_year, "distance": p.distance} for p in points]
    )


# -- clusters --------------------------------------------------------------------


def assignment_csv(assignment: ClusterAssignment, entities: dict[int, Entity]) -> str:
    rows = sorted(assignment.labels.items(), key=lambda kv: (kv[1], kv[0]))
    return _csv_text(
        ["entity", "iso3", "cluster"],
        ([entities[e].name, entities[e].iso3 or "", c] for e, c in rows),
    )


def centroids_csv(centroids: Sequence[Composition]) -> str:
    """Wide table, oldest age group first; re-parses as a fixture table."""
    header = ["Class"] + [f"Cluster {i}" for i in range(1, len(centroids) + 1)]
    rows = (
        [AGE_LABELS[b]] + [SHARE_FMT.format(c.parts[b]) for c in centroids]
        for b in reversed(range(len(AGE_LABELS)))
    )
    return _csv_text(header, rows)


def dendrogram_json(d: Dendrogram, names: dict | None = None) -> str:
    return _json_text(d.to_nested(names))


# -- SVG pyramid -------------------------------------------------------------------


def pyramid_svg(p: AgePyramid, title: str | None = None, bar_height: int = 16, half_width: int = 220) -> str:
    """Mirrored horizontal bar chart of a both-sexes pyramid.

    Each side draws half of the age group's share; the mirroring is only a
    visual convention since the data is not split by sex.
    """
    shares = 100.0 * p.values / p.values.sum()
    n = len(shares)
    margin_left, margin_top, label_w = 70, 40, 60
    cx = margin_left + half_width
    width = margin_left + 2 * half_width + label_w + 10
    height = margin_top + n * bar_height + 30
    peak = float(np.max(shares / 2)) or 1.0
    scale = half_width / peak
    title = title or f"{p.entity.name} {p.year}"

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">',
        f"<title>{escape(title)}</title>",
        "<desc>Population share by five-year age group (percent, both sexes). "
        "Bars are mirrored about the axis for visual convention only; each side shows half the share.</desc>",
        '<metadata>{"mirrored": true, "side_value": "share/2", "unit": "percent"}</metadata>',
        f'<text x="{cx}" y="20" text-anchor="middle" font-size="14">{escape(title)}</text>',
    ]
    for i, share in enumerate(shares):
        # youngest group at the bottom
        y = margin_top + (n - 1 - i) * bar_height
        w = share / 2 * scale
        label = AGE_LABELS[i]
        out.append(
            f'<g class="age-group" data-age="{label}" data-share="{share:.6f}">'
            f'<text x="{margin_left - 6}" y="{y + bar_height - 4}" text-anchor="end">{label}</text>'
            f'<rect class="bar-left" x="{cx - w:.3f}" y="{y + 1}" width="{w:.3f}" height="{bar_height - 2}" fill="#4477aa"/>'
            f'<rect class="bar-right" x="{cx:.3f}" y="{y + 1}" width="{w:.3f}" height="{bar_height - 2}" fill="#4477aa"/>'
            f'<text class="value" x="{cx + half_width + 6}" y="{y + bar_height - 4}">{share:.2f}%</text>'
            "</g>"
        )
    axis_y = margin_top + n * bar_height
    out.append(f'<line x1="{cx}" y1="{margin_top}" x2="{cx}" y2="{axis_y}" stroke="#333"/>')
    out.append(f'<line x1="{margin_left}" y1="{axis_y}" x2="{cx + half_width}" y2="{axis_y}" stroke="#333"/>')
    out.append(
        f'<text x="{cx}" y="{axis_y + 18}" text-anchor="middle">share of population (%), '
        f"{peak:.2f}% per side at full width</text>"
    )
    out.append("</svg>")
    return "\n".join(out) + "\n"
