"""SVG 1.1 drawings of workspaces, roadmaps, solutions and plan trees.

Written by hand: the output is a handful of polygons, lines and circles, and a
plotting library would add a heavy dependency for no gain.
"""
from __future__ import annotations

import re
from pathlib import Path
from typing import Any, Sequence
from xml.sax.saxutils import escape

from .bundle import ProblemBundle

PANEL = 600.0
MARGIN = 10.0
TREE_W = 400.0
_MOVE = re.compile(r"^m(\d+)-(\d+)$")


class _Frame:
    """World-to-pixel transform with y pointing up."""

    def __init__(self, bbox: tuple[float, float, float, float]):
        x0, y0, x1, y1 = bbox
        self.x0, self.y1 = x0, y1
        self.s = (PANEL - 2 * MARGIN) / max(x1 - x0, y1 - y0)
        self.w = (x1 - x0) * self.s + 2 * MARGIN
        self.h = (y1 - y0) * self.s + 2 * MARGIN

    def __call__(self, x: float, y: float) -> tuple[float, float]:
        return MARGIN + (x - self.x0) * self.s, MARGIN + (self.y1 - y) * self.s

    def pts(self, coords) -> str:
        return " ".join("%.2f,%.2f" % self(float(x), float(y)) for x, y in coords)


def solution_vertices(solution: Sequence[str]) -> list[int]:
    """Roadmap vertices visited by a solution, read from its move operator ids."""
    out: list[int] = []
    for op in solution:
        m = _MOVE.match(op)
        if m:
            a, b = int(m.group(1)), int(m.group(2))
            if not out:
                out.append(a)
            out.append(b)
    return out


def _workspace(p: Any, f: _Frame) -> list[str]:
    ws = p.workspace
    out = [f'<polygon class="bounds" points="{f.pts(ws.bounds.coords())}" fill="white" stroke="black"/>']
    for r in p.decomposition.regions:
        out.append(
            f'<polygon class="region" data-id="{escape(r.id)}" points="{f.pts(r.polygon.coords())}" '
            'fill="steelblue" fill-opacity="0.08" stroke="steelblue" stroke-width="0.8"/>'
        )
    for o in ws.obstacles:
        out.append(f'<polygon class="obstacle" points="{f.pts(o.coords())}" fill="#555"/>')
    for k, d in enumerate(getattr(p, "doors", ())):
        out.append(f'<polygon class="door" points="{f.pts(d.polygon.coords())}" fill="orange"/>')
        sx, sy = f(d.switch.x, d.switch.y)
        out.append(f'<rect class="switch" x="{sx - 4:.2f}" y="{sy - 4:.2f}" width="8" height="8" fill="orange"/>')
        out.append(f'<text x="{sx + 5:.2f}" y="{sy - 5:.2f}" font-size="10">{k + 1}</text>')
    out.append(f'<polygon class="goal" points="{f.pts(p.goal.coords())}" fill="green" fill-opacity="0.4"/>')
    sx, sy = f(p.start.x, p.start.y)
    out.append(f'<circle class="start" cx="{sx:.2f}" cy="{sy:.2f}" r="4" fill="red"/>')
    return out


def _roadmap(rm: Any, f: _Frame) -> list[str]:
    pts = rm.points
    segs = []
    for a, b, _ in rm.edges:
        (x0, y0), (x1, y1) = f(*pts[a]), f(*pts[b])
        segs.append(f"M{x0:.2f} {y0:.2f}L{x1:.2f} {y1:.2f}")
    return [f'<path class="roadmap" d="{"".join(segs)}" stroke="#999" stroke-width="0.4" stroke-dasharray="1,2" fill="none"/>']


def _tree(trace: Sequence[dict], x_off: float, height: float) -> list[str]:
    """One circle per expansion, joined to the expansion that generated it."""
    if not trace:
        return []
    id_key = "serial" if "serial" in trace[0] else "node"
    pos: dict = {}
    depth: dict = {}
    rows: dict[int, int] = {}
    for t in trace:
        parent = t.get("parent")
        d = depth.get(parent, -1) + 1 if parent in depth else 0
        depth[t[id_key]] = d
        rows[d] = rows.get(d, 0) + 1
    max_d = max(depth.values()) + 1
    widest = max(rows.values())
    seen: dict[int, int] = {}
    out = [f'<g class="plan-tree" transform="translate({x_off:.2f},0)">']
    dy = (height - 2 * MARGIN) / max(max_d, 1)
    lines, nodes = [], []
    for t in trace:
        d = depth[t[id_key]]
        k = seen.get(d, 0)
        seen[d] = k + 1
        x = MARGIN + (k + 0.5) * (TREE_W - 2 * MARGIN) / max(rows[d], 1)
        y = MARGIN + (d + 0.5) * dy
        pos[t[id_key]] = (x, y)
        parent = t.get("parent")
        if parent in pos:
            px, py = pos[parent]
            lines.append(f'<line x1="{px:.2f}" y1="{py:.2f}" x2="{x:.2f}" y2="{y:.2f}" stroke="#bbb" stroke-width="0.5"/>')
        r = 3.0 if widest < 60 else 1.5
        nodes.append(f'<circle class="plan-node" cx="{x:.2f}" cy="{y:.2f}" r="{r}" fill="navy"/>')
    return out + lines + nodes + ["</g>"]


def render_svg(
    bundle: ProblemBundle,
    abstraction: Any = None,
    solution: Sequence[str] | None = None,
    trace: Sequence[dict] | None = None,
) -> str:
    """Workspace, regions, doors and goal; plus the roadmap (dotted) when an
    abstraction is given, the solution polyline, and the plan tree from a trace."""
    p = bundle.problem
    geometric = bundle.kind in ("nav", "door")
    body: list[str] = []
    width = height = 2 * MARGIN
    if geometric:
        f = _Frame(p.workspace.bounds.bbox)
        width, height = f.w, f.h
        body += _workspace(p, f)
        rm = getattr(abstraction, "roadmap", None)
        if rm is not None:
            body += _roadmap(rm, f)
            verts = solution_vertices(solution or ())
            if len(verts) >= 2:
                body.append(
                    f'<polyline class="solution" points="{f.pts(rm.points[verts])}" '
                    'fill="none" stroke="crimson" stroke-width="2.5"/>'
                )
    if trace:
        height = max(height, PANEL)
        body += _tree(trace, width, height)
        width += TREE_W
    head = (
        '<?xml version="1.0" encoding="UTF-8"?>\n'
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width:.0f}" height="{height:.0f}" '
        f'viewBox="0 0 {width:.2f} {height:.2f}">'
    )
    title = f"<title>{escape(bundle.name or bundle.kind)}</title>"
    return "\n".join([head, title, *body, "</svg>"]) + "\n"


def write_svg(path: str | Path, *args, **kwargs) -> None:
    Path(path).write_text(render_svg(*args, **kwargs))
