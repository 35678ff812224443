"""Edge-list text format.

A graph block starts with a header line, either ``n <count>`` or
``bipartite <n_left> <n_right>``, followed by ``i j`` lines with 0-based node
indices.  ``#`` starts a comment line and blank lines are ignored.  Several
graphs may share one file when separated by a line holding only ``---``.
Bipartite blocks are projected onto their left mode on reading.
"""
from __future__ import annotations

from pathlib import Path

from .graph import BipartiteGraph, Graph, build_graph, project_one_mode

SEPARATOR = "---"
EDGE_SUFFIX = ".edges"


class EdgeListError(ValueError):
    """Malformed edge-list input; the message names the source and line."""


def _parse_block(lines: list[tuple[int, str]], source: str) -> Graph:
    header = None
    pairs: list[tuple[int, int]] = []
    header_line = 0
    for lineno, raw in lines:
        text = raw.strip()
        if not text or text.startswith("#"):
            continue
        parts = text.split()
        if header is None:
            header, header_line = parts, lineno
            continue
        if len(parts) != 2:
            raise EdgeListError(f"{source}:{lineno}: expected 'i j', got {text!r}")
        try:
            pairs.append((int(parts[0]), int(parts[1])))
        except ValueError:
            raise EdgeListError(f"{source}:{lineno}: non-integer node index in {text!r}") from None
    if header is None:
        raise EdgeListError(f"{source}: no header line ('n <count>' or 'bipartite <l> <r>')")
    try:
        if header[0] == "n" and len(header) == 2:
            n = int(header[1])
            try:
                return build_graph(n, pairs)
            except ValueError as exc:
                raise EdgeListError(f"{source}: {exc}") from None
        if header[0] == "bipartite" and len(header) == 3:
            b = BipartiteGraph(int(header[1]), int(header[2]), frozenset(pairs))
            return project_one_mode(b)
    except EdgeListError:
        raise
    except ValueError as exc:
        raise EdgeListError(f"{source}:{header_line}: {exc}") from None
    raise EdgeListError(f"{source}:{header_line}: bad header {' '.join(header)!r}")


def parse_edge_text(text: str, source: str = "<string>") -> list[Graph]:
    blocks: list[list[tuple[int, str]]] = [[]]
    for lineno, line in enumerate(text.splitlines(), start=1):
        if line.strip() == SEPARATOR:
            blocks.append([])
        else:
            blocks[-1].append((lineno, line))
    graphs = []
    for block in blocks:
        if all(not t.strip() or t.strip().startswith("#") for _, t in block):
            continue
        graphs.append(_parse_block(block, source))
    return graphs


def read_edge_list(path: str | Path) -> Graph:
    graphs = read_graphs(path)
    if len(graphs) != 1:
        raise EdgeListError(f"{path}: expected one graph, found {len(graphs)}")
    return graphs[0]


def read_graphs(path: str | Path) -> list[Graph]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise EdgeListError(f"{path}: unreadable ({exc.strerror})") from None
    return parse_edge_text(text, str(path))


def read_collection(path: str | Path) -> list[tuple[str, Graph]]:
    """Load ``(graph_id, graph)`` pairs from a directory of files or one multi-graph file.

    Directory entries are read in sorted filename order and identified by
    their stem; graphs inside a multi-graph file get ``<stem>_<k>`` ids.
    """
    path = Path(path)
    if path.is_dir():
        files = sorted(p for p in path.iterdir() if p.is_file() and not p.name.startswith(".")
                       and p.suffix not in {".json", ".csv", ".svg"})
    elif path.exists():
        files = [path]
    else:
        raise EdgeListError(f"{path}: no such file or directory")
    out: list[tuple[str, Graph]] = []
    for f in files:
        graphs = read_graphs(f)
        if len(graphs) == 1 and path.is_dir():
            out.append((f.stem, graphs[0]))
        else:
            out.extend((f"{f.stem}_{k}", g) for k, g in enumerate(graphs))
    return out


def format_edge_list(g: Graph) -> str:
    lines = [f"n {g.n}"]
    lines.extend(f"{i} {j}" for i, j in g.edges())
    return "\n".join(lines) + "\n"


def write_edge_list(g: Graph, path: str | Path) -> None:
    Path(path).write_text(format_edge_list(g))
