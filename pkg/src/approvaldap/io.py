"""Reading real-world ballot data and writing election artifacts.

Covers the Pabulib participatory-budgeting text format (approval files
only), a JSON native format that round-trips :class:`Election` exactly, a
generic score-threshold converter, and byte-deterministic CSV/SVG
emitters used by the experiment commands.
"""

from __future__ import annotations

import csv
import io as _io
import json
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np

from .core import Election

__all__ = [
    "ParseError",
    "parse_pabulib",
    "threshold_scores",
    "write_native",
    "read_native",
    "write_csv_matrix",
    "write_svg_scatter",
    "write_svg_heatmap",
]

_PABULIB_SECTIONS = ("META", "PROJECTS", "VOTES")


class ParseError(ValueError):
    """Structured parse failure; carries the 1-based input line if known."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


def parse_pabulib(text: str) -> Election:
    """Parse a Pabulib ``.pb`` file into an election.

    Candidates are the declared projects in file order; each VOTES row
    becomes one ballot approving the project ids in its ``vote`` field
    (duplicates collapsed, empty field allowed).  Costs and all metadata
    are ignored, except that files declaring a non-approval ``vote_type``
    are rejected.  Sections may appear in any order; trailing whitespace
    is insignificant.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError(f"not valid UTF-8: {exc}") from None
    text = text.lstrip("﻿")

    meta: dict[str, str] = {}
    project_order: list[str] = []
    project_seen: set[str] = set()
    vote_rows: list[tuple[int, str]] = []
    seen_sections: set[str] = set()

    section = None
    header: list[str] = []
    vote_col = -1
    id_col = -1

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        if not line:
            continue
        if line in _PABULIB_SECTIONS:
            if line in seen_sections:
                raise ParseError(f"duplicate section {line}", lineno)
            seen_sections.add(line)
            section = line
            header = []
            continue
        if line.isupper() and line.isalpha():
            raise ParseError(f"unknown section {line!r}", lineno)
        if section is None:
            raise ParseError("content before any section header", lineno)

        fields = line.split(";")
        if not header:
            header = [f.strip() for f in fields]
            if section == "PROJECTS":
                try:
                    id_col = header.index("project_id")
                except ValueError:
                    raise ParseError("PROJECTS header lacks a project_id column", lineno) from None
            elif section == "VOTES":
                try:
                    vote_col = header.index("vote")
                except ValueError:
                    raise ParseError("VOTES header lacks a vote column", lineno) from None
            continue

        if section == "META":
            if len(fields) < 2:
                raise ParseError("META row needs key;value", lineno)
            meta[fields[0].strip()] = fields[1].strip()
        elif section == "PROJECTS":
            if len(fields) != len(header):
                raise ParseError(
                    f"PROJECTS row has {len(fields)} fields, header has {len(header)}", lineno
                )
            pid = fields[id_col].strip()
            if not pid:
                raise ParseError("empty project id", lineno)
            if pid in project_seen:
                raise ParseError(f"duplicate project id {pid!r}", lineno)
            project_seen.add(pid)
            project_order.append(pid)
        elif section == "VOTES":
            if len(fields) != len(header):
                raise ParseError(
                    f"VOTES row has {len(fields)} fields, header has {len(header)}", lineno
                )
            vote_rows.append((lineno, fields[vote_col].strip()))

    vote_type = meta.get("vote_type", "approval").strip().lower()
    if vote_type != "approval":
        raise ParseError(f"only approval ballots are supported, file declares {vote_type!r}")
    if "VOTES" not in seen_sections:
        raise ParseError("missing VOTES section")
    if not project_order:
        raise ParseError("no projects declared")
    if not vote_rows:
        raise ParseError("VOTES section has no ballots")

    index = {pid: j for j, pid in enumerate(project_order)}
    ballots = []
    for lineno, vote in vote_rows:
        approved: set[int] = set()
        if vote:
            for token in vote.split(","):
                pid = token.strip()
                if not pid:
                    continue
                if pid not in index:
                    raise ParseError(f"vote references undeclared project {pid!r}", lineno)
                approved.add(index[pid])
        ballots.append(sorted(approved))
    label = meta.get("description") or meta.get("unit")
    return Election.from_approval_sets(len(project_order), ballots, label=label)


def threshold_scores(matrix, threshold: float) -> Election:
    """Convert an ``n x m`` score matrix into approvals at ``score >= threshold``."""
    rows = list(matrix)
    if not rows:
        raise ValueError("score matrix has no rows")
    widths = {len(row) for row in rows}
    if len(widths) != 1:
        raise ValueError(f"score matrix is ragged: row lengths {sorted(widths)}")
    scores = np.asarray(rows, dtype=np.float64)
    return Election((scores >= threshold).astype(np.uint8))


# -- native JSON format -------------------------------------------------


def write_native(e: Election) -> str:
    """Serialize an election as JSON (ballots as 0-based approved indices)."""
    ballots = [np.flatnonzero(e.ballot(i)).tolist() for i in range(e.num_voters)]
    doc = {"label": e.label, "num_candidates": e.num_candidates, "ballots": ballots}
    return json.dumps(doc, indent=None, separators=(",", ":")) + "\n"


def read_native(text: str) -> Election:
    """Inverse of :func:`write_native`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", exc.lineno) from None
    if not isinstance(doc, Mapping):
        raise ParseError("top-level JSON value must be an object")
    try:
        m = int(doc["num_candidates"])
        ballots = doc["ballots"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"missing or malformed field: {exc}") from None
    if not isinstance(ballots, list) or not all(isinstance(b, list) for b in ballots):
        raise ParseError("ballots must be a list of index lists")
    label = doc.get("label")
    if label is not None and not isinstance(label, str):
        raise ParseError("label must be a string or null")
    try:
        return Election.from_approval_sets(m, ballots, label=label)
    except (ValueError, TypeError, IndexError) as exc:
        raise ParseError(str(exc)) from None


# -- CSV / SVG emitters --------------------------------------------------


def _fmt(value) -> str:
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".6g")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def write_csv_matrix(matrix: Iterable[Iterable], headers: Sequence[str]) -> str:
    """RFC-4180-style CSV with a header row; floats use 6 significant digits."""
    buf = _io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow([str(h) for h in headers])
    for row in matrix:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
    "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
)


def write_svg_scatter(
    points: Sequence[Sequence[float]],
    labels: Sequence[str],
    colors: Optional[Mapping[str, str]] = None,
    title: str = "",
    size: int = 640,
) -> str:
    """Self-contained SVG scatter plot with one circle per point and a legend.

    ``labels`` assigns each point to a legend group; ``colors`` optionally
    maps group names to CSS colors (a default palette fills the gaps).
    """
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if pts.shape[0] != len(labels):
        raise ValueError("one label per point required")
    groups = list(dict.fromkeys(labels))
    palette = dict(colors or {})
    for i, g in enumerate(groups):
        palette.setdefault(g, _PALETTE[i % len(_PALETTE)])

    pad = 40
    legend_w = 170
    span = max(pts.max(axis=0) - pts.min(axis=0)) if pts.size else 1.0
    span = span if span > 0 else 1.0
    lo = pts.min(axis=0) if pts.size else np.zeros(2)
    scale = (size - 2 * pad) / span

    def sx(x: float) -> float:
        return pad + (x - lo[0]) * scale

    def sy(y: float) -> float:
        return size - pad - (y - lo[1]) * scale

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size + legend_w}" height="{size}" '
        f'viewBox="0 0 {size + legend_w} {size}">',
        f'<rect width="{size + legend_w}" height="{size}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{pad}" y="24" font-family="sans-serif" font-size="16">{_esc(title)}</text>')
    for (x, y), lab in zip(pts, labels):
        out.append(
            f'<circle cx="{sx(x):.2f}" cy="{sy(y):.2f}" r="4" fill="{palette[lab]}" fill-opacity="0.75"/>'
        )
    for i, g in enumerate(groups):
        ly = pad + 18 * i
        out.append(f'<rect x="{size + 8}" y="{ly - 9}" width="12" height="12" fill="{palette[g]}"/>')
        out.append(
            f'<text x="{size + 26}" y="{ly + 2}" font-family="sans-serif" font-size="12">{_esc(g)}</text>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def write_svg_heatmap(
    values: np.ndarray,
    row_labels: Sequence,
    col_labels: Sequence,
    title: str = "",
    cell: int = 36,
) -> str:
    """SVG heatmap of values in [0, 1]; the legend documents the gray scale
    (black = 0, white = 1)."""
    vals = np.asarray(values, dtype=np.float64)
    rows, cols = vals.shape
    if rows != len(row_labels) or cols != len(col_labels):
        raise ValueError("label counts do not match the value grid")
    pad_l, pad_t = 60, 50
    width = pad_l + cols * cell + 160
    height = pad_t + rows * cell + 30
    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
    ]
    if title:
        out.append(f'<text x="{pad_l}" y="24" font-family="sans-serif" font-size="15">{_esc(title)}</text>')
    for i in range(rows):
        for j in range(cols):
            v = min(1.0, max(0.0, vals[i, j]))
            shade = int(round(255 * v))
            out.append(
                f'<rect x="{pad_l + j * cell}" y="{pad_t + i * cell}" width="{cell}" height="{cell}" '
                f'fill="rgb({shade},{shade},{shade})" stroke="#ccc"/>'
            )
    for i, lab in enumerate(row_labels):
        out.append(
            f'<text x="{pad_l - 8}" y="{pad_t + i * cell + cell * 0.62:.0f}" text-anchor="end" '
            f'font-family="sans-serif" font-size="11">{_esc(lab)}</text>'
        )
    for j, lab in enumerate(col_labels):
        out.append(
            f'<text x="{pad_l + j * cell + cell / 2:.0f}" y="{pad_t - 8}" text-anchor="middle" '
            f'font-family="sans-serif" font-size="11">{_esc(lab)}</text>'
        )
    lx = pad_l + cols * cell + 20
    out.append(
        f'<text x="{lx}" y="{pad_t + 4}" font-family="sans-serif" font-size="11">scale: black=0, white=1</text>'
    )
    for step in range(5):
        shade = int(round(255 * step / 4))
        out.append(
            f'<rect x="{lx + step * 18}" y="{pad_t + 12}" width="18" height="12" '
            f'fill="rgb({shade},{shade},{shade})" stroke="#888"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _esc(text) -> str:
    return (
        str(text)
        .replace("&", "&amp;")
        .replace("<", "&lt;")
        .replace(">", "&gt;")
        .replace('"', "&quot;")
    )
