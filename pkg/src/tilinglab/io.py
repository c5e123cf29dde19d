"""Graph file readers and writers.

Three formats, auto-detected by the first meaningful token:

  (a) plain edge list:  header "p <n_vertices> <n_edges>" then "u v" lines,
      0-based vertex ids;
  (b) DIMACS-like:      optional "p edge <n> <m>" header, edge lines
      "e u v" with 1-based vertex ids;
  (c) JSON:             {"n": int, "edges": [[u, v], ...]}.

Lines starting with "c" are comments in (a) and (b).  The writer emits
format (a) canonically: edges sorted lexicographically, one per line.
"""

from __future__ import annotations

import json
from typing import Iterable, Optional

from .graphs import Graph, GraphError


def parse_graph(text: str) -> Graph:
    stripped = text.lstrip()
    if not stripped:
        raise GraphError("empty graph file")
    if stripped[0] in "{[":
        return _parse_json(stripped)
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("c")]
    if not lines:
        raise GraphError("graph file has no data lines")
    first = lines[0].split()
    if first[0] == "p":
        if len(first) >= 2 and not _is_int(first[1]):
            return _parse_dimacs(lines)
        return _parse_plain(lines)
    if first[0] == "e":
        return _parse_dimacs(lines)
    raise GraphError(f"unrecognized graph format (first token {first[0]!r})")


def read_graph(path: str) -> Graph:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_graph(fh.read())


def _is_int(tok: str) -> bool:
    try:
        int(tok)
        return True
    except ValueError:
        return False


def _parse_plain(lines: list[str]) -> Graph:
    header = lines[0].split()
    if len(header) != 3 or header[0] != "p":
        raise GraphError(f"bad plain-format header: {lines[0]!r}")
    n, m = int(header[1]), int(header[2])
    edges = []
    for ln in lines[1:]:
        toks = ln.split()
        if len(toks) != 2:
            raise GraphError(f"bad edge line: {ln!r}")
        edges.append((int(toks[0]), int(toks[1])))
    if len(edges) != m:
        raise GraphError(f"header promises {m} edges, found {len(edges)}")
    return Graph.from_edges(n, edges)


def _parse_dimacs(lines: list[str]) -> Graph:
    n = None
    edges = []
    for ln in lines:
        toks = ln.split()
        if toks[0] == "p":
            n = int(toks[2])
        elif toks[0] == "e":
            if len(toks) != 3:
                raise GraphError(f"bad DIMACS edge line: {ln!r}")
            edges.append((int(toks[1]) - 1, int(toks[2]) - 1))
        else:
            raise GraphError(f"unrecognized DIMACS line: {ln!r}")
    if n is None:
        n = 1 + max((max(e) for e in edges), default=-1)
    return Graph.from_edges(n, edges)


def _parse_json(text: str) -> Graph:
    obj = json.loads(text)
    if not isinstance(obj, dict) or "n" not in obj or "edges" not in obj:
        raise GraphError('JSON graph needs fields "n" and "edges"')
    return Graph.from_edges(int(obj["n"]), [tuple(e) for e in obj["edges"]])


def format_graph(g: Graph, comments: Optional[Iterable[str]] = None) -> str:
    out = []
    for line in comments or []:
        out.append(f"c {line}")
    edges = sorted(g.edges())
    out.append(f"p {g.n} {len(edges)}")
    for u, v in edges:
        out.append(f"{u} {v}")
    return "\n".join(out) + "\n"


def write_graph(path: str, g: Graph, comments: Optional[Iterable[str]] = None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(format_graph(g, comments))
