"""JSON / CSV / SVG emitters. Output is byte-stable for identical inputs."""

from __future__ import annotations

import csv
import io
import json
from datetime import datetime, timezone
from xml.sax.saxutils import escape

import numpy as np

COLORS = {"neumann": "#1f77b4", "dirichlet": "#d62728"}


def _default(o):
    if isinstance(o, np.generic):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not JSON serialisable: {type(o).__name__}")


def to_json_text(payload: dict, timestamp: bool = True) -> str:
    payload = dict(payload)
    if timestamp:
        payload["generated_at"] = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return json.dumps(payload, indent=2, sort_keys=True, default=_default) + "\n"


def to_csv_text(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for row in rows:
        writer.writerow(row)
    return buf.getvalue()


def _polyline(points, color, dash=None):
    d = " ".join(f"{x:.2f},{y:.2f}" for x, y in points)
    extra = f' stroke-dasharray="{dash}"' if dash else ""
    return f'<polyline points="{d}" fill="none" stroke="{color}" stroke-width="1.5"{extra}/>'


def spectrum_svg(merged, inequality, title: str = "") -> str:
    """Two panels: merged spectrum by source, and lambda_k against mu_{k+2}."""
    w, h, pad = 360, 260, 40
    vals = merged.values
    recs = inequality.records
    top = max([float(vals.max()) if len(vals) else 1.0]
              + [r.lambda_k for r in recs] + [r.mu_k2 for r in recs]) * 1.05

    def panel(x0, n):
        def xy(i, v):
            x = x0 + pad + (w - 2 * pad) * (i - 1) / max(n - 1, 1)
            y = h - pad - (h - 2 * pad) * v / top
            return x, y
        return xy

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * w}" height="{h}" '
           f'viewBox="0 0 {2 * w} {h}">',
           f'<text x="{w}" y="16" text-anchor="middle" font-size="13">{escape(title)}</text>']
    for x0 in (0, w):
        out.append(f'<rect x="{x0 + pad}" y="{pad}" width="{w - 2 * pad}" '
                   f'height="{h - 2 * pad}" fill="none" stroke="#999"/>')
    xy = panel(0, len(vals))
    out.append(f'<text x="{w // 2}" y="{h - 10}" text-anchor="middle" font-size="11">'
               f'merged index (blue Neumann, red Dirichlet)</text>')
    for i, e in enumerate(merged.entries, start=1):
        x, y = xy(i, e.value)
        out.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="3" fill="{COLORS[e.source]}"/>')
    xy = panel(w, len(recs))
    lam = [xy(r.k, r.lambda_k) for r in recs]
    mu = [xy(r.k, r.mu_k2) for r in recs]

    def stairs(pts):
        path = []
        for (xa, ya), (xb, _) in zip(pts, pts[1:]):
            path += [(xa, ya), (xb, ya)]
        return path + pts[-1:]
    if recs:
        out.append(_polyline(stairs(lam), COLORS["dirichlet"]))
        out.append(_polyline(stairs(mu), COLORS["neumann"], dash="4 3"))
    out.append(f'<text x="{w + w // 2}" y="{h - 10}" text-anchor="middle" font-size="11">'
               f'k: lambda_k (solid) vs mu_k+2 (dashed)</text>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
