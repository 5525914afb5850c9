"""Undirected multigraph with stable integer ids and the structural queries
used by the rest of the pipeline: girth / odd cycles, bipartiteness, blocks,
vertex-disjoint edge sets, and Euler walks.

Vertices and edges are dense integers in insertion order, so every traversal
is reproducible run to run.  Graphs are immutable after construction and can
be shared freely between threads.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Hashable, Iterable, Sequence

from .errors import (
    DuplicateEdge,
    GraphFormatError,
    InvalidEdge,
    NotConnected,
    UnknownEdge,
)


class Graph:
    """Immutable undirected (multi)graph.

    Edge ids index ``edges``; the stored pair order (tail, head) doubles as
    the edge's orientation, which crossing schedules are read along.
    """

    __slots__ = ("n", "edges", "adj", "labels")

    def __init__(self, n: int, edges: Sequence[tuple[int, int]], labels: tuple | None = None):
        adj: list[list[int]] = [[] for _ in range(n)]
        for eid, (u, v) in enumerate(edges):
            if u == v:
                raise InvalidEdge(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise InvalidEdge(f"edge ({u}, {v}) outside vertex range 0..{n - 1}")
            adj[u].append(eid)
            adj[v].append(eid)
        self.n = n
        self.edges = [(u, v) for u, v in edges]
        self.adj = adj
        self.labels = labels

    @property
    def m(self) -> int:
        return len(self.edges)

    def endpoints(self, e: int) -> tuple[int, int]:
        try:
            return self.edges[e]
        except IndexError:
            raise UnknownEdge(f"edge id {e}") from None

    def other_end(self, e: int, v: int) -> int:
        u, w = self.endpoints(e)
        if v == u:
            return w
        if v == w:
            return u
        raise UnknownEdge(f"vertex {v} is not an endpoint of edge {e}")

    def degree(self, v: int) -> int:
        return len(self.adj[v])

    def neighbors(self, v: int) -> list[int]:
        return [self.other_end(e, v) for e in self.adj[v]]

    def has_edge(self, u: int, v: int) -> bool:
        if not (0 <= u < self.n):
            return False
        return any(self.other_end(e, u) == v for e in self.adj[u])

    def edge_between(self, u: int, v: int) -> int | None:
        """First edge id joining u and v, or None."""
        for e in self.adj[u]:
            if self.other_end(e, u) == v:
                return e
        return None

    def label(self, v: int):
        return self.labels[v] if self.labels is not None else v

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges == other.edges
        )

    def __hash__(self):
        return hash((self.n, tuple(self.edges)))


def build_graph(edge_list: Iterable[tuple[Hashable, Hashable]], multigraph: bool = False) -> Graph:
    """Build a graph from vertex-id pairs.

    Arbitrary hashable vertex ids are mapped to dense integers in first
    appearance order (kept in ``labels``).  Self-loops are always rejected;
    duplicate pairs are rejected unless ``multigraph`` is set.
    """
    index: dict[Hashable, int] = {}
    labels: list[Hashable] = []
    edges: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for a, b in edge_list:
        if a == b:
            raise InvalidEdge(f"self-loop at vertex {a!r}")
        for x in (a, b):
            if x not in index:
                index[x] = len(labels)
                labels.append(x)
        u, v = index[a], index[b]
        key = (u, v) if u < v else (v, u)
        if not multigraph:
            if key in seen:
                raise DuplicateEdge(f"duplicate edge {a!r}-{b!r}")
            seen.add(key)
        edges.append((u, v))
    return Graph(len(labels), edges, labels=tuple(labels))


def cycle_graph(k: int) -> Graph:
    """C_k with vertices 0..k-1 in cyclic order."""
    if k < 3:
        raise InvalidEdge(f"cycle length {k} < 3")
    return Graph(k, [(i, (i + 1) % k) for i in range(k)])


def path_graph(k: int) -> Graph:
    """Path with k edges on vertices 0..k."""
    return Graph(k + 1, [(i, i + 1) for i in range(k)])


def complete_graph(k: int) -> Graph:
    return Graph(k, [(i, j) for i in range(k) for j in range(i + 1, k)])


def complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)])


# ---------------------------------------------------------------------------
# Text format
# ---------------------------------------------------------------------------

def parse_graph(text: str) -> Graph:
    """Parse the line-based graph format.

    First non-comment line ``graph <n> <m>``, then m lines ``e <u> <v>``
    with 0-based integer vertex ids.  ``#`` starts a comment line.
    """
    header: tuple[int, int] | None = None
    edges: list[tuple[int, int]] = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if header is None:
            if parts[0] != "graph" or len(parts) != 3:
                raise GraphFormatError("expected 'graph <n> <m>' header", lineno)
            try:
                header = (int(parts[1]), int(parts[2]))
            except ValueError:
                raise GraphFormatError("non-integer counts in header", lineno) from None
            if header[0] < 0 or header[1] < 0:
                raise GraphFormatError("negative counts in header", lineno)
            continue
        if parts[0] != "e" or len(parts) != 3:
            raise GraphFormatError("expected 'e <u> <v>'", lineno)
        try:
            u, v = int(parts[1]), int(parts[2])
        except ValueError:
            raise GraphFormatError("non-integer vertex id", lineno) from None
        if not (0 <= u < header[0] and 0 <= v < header[0]):
            raise GraphFormatError(f"vertex id outside 0..{header[0] - 1}", lineno)
        if u == v:
            raise GraphFormatError("self-loop", lineno)
        edges.append((u, v))
    if header is None:
        raise GraphFormatError("missing 'graph' header")
    if len(edges) != header[1]:
        raise GraphFormatError(f"header announced {header[1]} edges, found {len(edges)}")
    return Graph(header[0], edges)


def format_graph(g: Graph) -> str:
    lines = [f"graph {g.n} {g.m}"]
    lines.extend(f"e {u} {v}" for u, v in g.edges)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Cycle structure
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CycleReport:
    """Exact cycle-length summary.

    ``girth`` is None on forests.  ``second_smallest_cycle_length`` is the
    minimum simple-cycle length strictly greater than the girth, when such a
    length exists.  ``shortest_odd_cycle`` is a vertex sequence of a
    minimum-length odd simple cycle, when the graph has one.
    """

    girth: int | None
    shortest_odd_cycle: tuple[int, ...] | None
    second_smallest_cycle_length: int | None


def girth(g: Graph) -> int | None:
    """Exact girth by BFS from every vertex; None for forests."""
    best: int | None = None
    for root in range(g.n):
        dist = [-1] * g.n
        parent_edge = [-1] * g.n
        dist[root] = 0
        queue = deque([root])
        while queue:
            v = queue.popleft()
            if best is not None and dist[v] * 2 >= best:
                continue
            for e in g.adj[v]:
                w = g.other_end(e, v)
                if dist[w] == -1:
                    dist[w] = dist[v] + 1
                    parent_edge[w] = e
                    queue.append(w)
                elif e != parent_edge[v]:
                    cand = dist[v] + dist[w] + 1
                    if best is None or cand < best:
                        best = cand
    return best


def _odd_closed_walk_through(g: Graph, root: int) -> list[int] | None:
    """Shortest odd closed walk through root, as a vertex sequence.

    BFS on the parity double cover; distance from (root, even) to (root, odd)
    is the shortest odd closed walk length through root.
    """
    size = 2 * g.n
    start = 2 * root
    target = 2 * root + 1
    dist = [-1] * size
    pred = [-1] * size
    dist[start] = 0
    queue = deque([start])
    while queue:
        node = queue.popleft()
        if node == target:
            break
        v, parity = node >> 1, node & 1
        for e in g.adj[v]:
            w = g.other_end(e, v)
            nxt = 2 * w + (parity ^ 1)
            if dist[nxt] == -1:
                dist[nxt] = dist[node] + 1
                pred[nxt] = node
                queue.append(nxt)
    if dist[target] == -1:
        return None
    walk = []
    node = target
    while node != -1:
        walk.append(node >> 1)
        node = pred[node]
    walk.reverse()
    return walk  # closed: walk[0] == walk[-1] == root


def _extract_odd_cycle(walk: list[int]) -> list[int]:
    """Pull a simple odd cycle out of a closed odd walk."""
    # Repeatedly split at a repeated vertex; one part stays odd.
    while True:
        seen: dict[int, int] = {}
        split = None
        for i, v in enumerate(walk[:-1]):
            if v in seen:
                split = (seen[v], i)
                break
            seen[v] = i
        if split is None:
            return walk[:-1]
        i, j = split
        inner = walk[i:j] + [walk[i]]
        outer = walk[:i] + walk[j:]
        walk = inner if (len(inner) - 1) % 2 == 1 else outer


def shortest_odd_cycle(g: Graph) -> tuple[int, ...] | None:
    best_walk: list[int] | None = None
    for root in range(g.n):
        walk = _odd_closed_walk_through(g, root)
        if walk is not None and (best_walk is None or len(walk) < len(best_walk)):
            best_walk = walk
    if best_walk is None:
        return None
    return tuple(_extract_odd_cycle(best_walk))


def _strip_leaves(g: Graph) -> tuple[list[int], list[bool]]:
    """Iteratively drop degree-1 vertices; returns (degrees, alive edge mask)."""
    deg = [g.degree(v) for v in range(g.n)]
    alive = [True] * g.m
    stack = [v for v in range(g.n) if deg[v] == 1]
    while stack:
        v = stack.pop()
        if deg[v] != 1:
            continue
        for e in g.adj[v]:
            if alive[e]:
                alive[e] = False
                w = g.other_end(e, v)
                deg[v] -= 1
                deg[w] -= 1
                if deg[w] == 1:
                    stack.append(w)
                break
    return deg, alive


def _weighted_core(g: Graph) -> tuple[list[tuple[int, int, int]], list[int]]:
    """Suppress degree-2 chains of the leaf-stripped graph.

    Returns (core edges as (u, v, weight) on original vertex ids, plus a list
    of lengths of pure-cycle components, which have no branch vertex at all).
    """
    deg, alive = _strip_leaves(g)
    core_edges: list[tuple[int, int, int]] = []
    cycle_lengths: list[int] = []
    used = [False] * g.m

    def walk_chain(start: int, first_edge: int) -> tuple[int, int]:
        """Follow degree-2 vertices from start along first_edge; returns
        (end branch vertex, chain weight)."""
        weight = 1
        prev, e = start, first_edge
        used[e] = True
        v = g.other_end(e, prev)
        while deg[v] == 2 and v != start:
            nxt = None
            for e2 in g.adj[v]:
                if alive[e2] and e2 != e and not used[e2]:
                    nxt = e2
                    break
            if nxt is None:
                break
            used[nxt] = True
            prev, e, v = v, nxt, g.other_end(nxt, v)
            weight += 1
        return v, weight

    for v in range(g.n):
        if deg[v] >= 3:
            for e in g.adj[v]:
                if alive[e] and not used[e]:
                    end, w = walk_chain(v, e)
                    core_edges.append((v, end, w))
    # Remaining alive, unused edges belong to pure 2-regular components.
    for v in range(g.n):
        if deg[v] == 2:
            for e in g.adj[v]:
                if alive[e] and not used[e]:
                    end, w = walk_chain(v, e)
                    if end == v:
                        cycle_lengths.append(w)
    return core_edges, cycle_lengths


def _core_cycle_lengths(core: list[tuple[int, int, int]], budget: int) -> set[int]:
    """All weights of simple cycles of the weighted core with weight <= budget.

    Exhaustive rooted DFS; the core is small (branch vertices only), so this
    is exact and fast at desk scale.  Core self-loops (a chain leaving and
    re-entering the same branch vertex) are cycles on their own.
    """
    lengths: set[int] = set()
    proper = []
    for (u, v, w) in core:
        if u == v:
            if w <= budget:
                lengths.add(w)
        else:
            proper.append((u, v, w))
    verts = sorted({u for u, _, _ in proper} | {v for _, v, _ in proper})
    adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in verts}
    for idx, (u, v, w) in enumerate(proper):
        adj[u].append((v, w, idx))
        adj[v].append((u, w, idx))

    def dfs(root: int, v: int, weight: int, used_edges: set[int], visited: set[int]):
        for (w, wt, idx) in adj[v]:
            if idx in used_edges or weight + wt > budget:
                continue
            if w == root and len(used_edges) >= 1:
                lengths.add(weight + wt)
                continue
            if w in visited or w < root:
                continue
            used_edges.add(idx)
            visited.add(w)
            dfs(root, w, weight + wt, used_edges, visited)
            visited.remove(w)
            used_edges.discard(idx)

    for root in verts:
        dfs(root, root, 0, set(), set())
    return lengths


def cycle_lengths_up_to(g: Graph, budget: int) -> set[int]:
    """Exact set of simple-cycle lengths of g that are <= budget."""
    core, pure_cycles = _weighted_core(g)
    lengths = {w for w in pure_cycles if w <= budget}
    lengths |= _core_cycle_lengths(core, budget)
    return lengths


def cycle_report(g: Graph) -> CycleReport:
    grt = girth(g)
    if grt is None:
        return CycleReport(None, None, None)
    odd = shortest_odd_cycle(g)
    second: int | None = None
    total_weight = g.m
    budget = grt
    while budget < total_weight:
        budget = min(budget + max(grt, 4), total_weight)
        longer = [length for length in cycle_lengths_up_to(g, budget) if length > grt]
        if longer:
            second = min(longer)
            break
    return CycleReport(grt, odd, second)


# ---------------------------------------------------------------------------
# Bipartiteness / blocks / disjoint edges / Euler walks
# ---------------------------------------------------------------------------

def is_bipartite(g: Graph) -> tuple[bool, dict[int, int] | tuple[int, ...]]:
    """(True, 2-coloring) or (False, odd-cycle vertex sequence)."""
    color: dict[int, int] = {}
    parent: dict[int, int] = {}
    for root in range(g.n):
        if root in color:
            continue
        color[root] = 0
        parent[root] = -1
        queue = deque([root])
        while queue:
            v = queue.popleft()
            for e in g.adj[v]:
                w = g.other_end(e, v)
                if w not in color:
                    color[w] = color[v] ^ 1
                    parent[w] = v
                    queue.append(w)
                elif color[w] == color[v]:
                    # Reconstruct odd cycle through the conflict edge.
                    pa = _path_to_root(parent, v)
                    pb = _path_to_root(parent, w)
                    # First shared vertex along either path is their LCA.
                    shared = set(pa) & set(pb)
                    ia = next(i for i, x in enumerate(pa) if x in shared)
                    ib = next(i for i, x in enumerate(pb) if x in shared)
                    cyc = pa[: ia + 1] + pb[:ib][::-1]
                    return False, tuple(cyc)
    return True, color


def _path_to_root(parent: dict[int, int], v: int) -> list[int]:
    path = [v]
    while parent[path[-1]] != -1:
        path.append(parent[path[-1]])
    return path


@dataclass(frozen=True)
class BlockDecomposition:
    """Blocks as edge-id tuples (bridges are single-edge blocks)."""

    blocks: tuple[tuple[int, ...], ...]
    cut_vertices: tuple[int, ...]


def block_decomposition(g: Graph) -> BlockDecomposition:
    """Biconnected components via iterative Tarjan DFS."""
    disc = [-1] * g.n
    low = [0] * g.n
    blocks: list[tuple[int, ...]] = []
    cuts: set[int] = set()
    counter = 0
    edge_stack: list[int] = []

    for root in range(g.n):
        if disc[root] != -1 or g.degree(root) == 0:
            continue
        root_children = 0
        stack = [(root, -1, iter(g.adj[root]))]
        disc[root] = low[root] = counter
        counter += 1
        while stack:
            v, pe, it = stack[-1]
            advanced = False
            for e in it:
                if e == pe:
                    continue
                w = g.other_end(e, v)
                if disc[w] == -1:
                    edge_stack.append(e)
                    disc[w] = low[w] = counter
                    counter += 1
                    stack.append((w, e, iter(g.adj[w])))
                    advanced = True
                    break
                elif disc[w] < disc[v]:
                    edge_stack.append(e)
                    low[v] = min(low[v], disc[w])
            if advanced:
                continue
            stack.pop()
            if stack:
                u, pe_u, _ = stack[-1]
                low[u] = min(low[u], low[v])
                if low[v] >= disc[u]:
                    if u == root:
                        root_children += 1
                    else:
                        cuts.add(u)
                    block = []
                    while edge_stack:
                        e = edge_stack.pop()
                        block.append(e)
                        if e == pe:
                            break
                    blocks.append(tuple(sorted(block)))
        if root_children >= 2:
            cuts.add(root)
    return BlockDecomposition(tuple(blocks), tuple(sorted(cuts)))


def disjoint_edges(g: Graph, e: int) -> frozenset[int]:
    """Edges vertex-disjoint from e (the paper's E_e)."""
    u, v = g.endpoints(e)
    touched = set(g.adj[u]) | set(g.adj[v])
    return frozenset(i for i in range(g.m) if i not in touched)


def is_connected(g: Graph) -> bool:
    if g.n == 0:
        return True
    seen = [False] * g.n
    seen[0] = True
    queue = deque([0])
    count = 1
    while queue:
        v = queue.popleft()
        for e in g.adj[v]:
            w = g.other_end(e, v)
            if not seen[w]:
                seen[w] = True
                count += 1
                queue.append(w)
    return count == g.n


def euler_walk_oriented(g: Graph) -> list[tuple[int, int, int]] | None:
    """Euler walk as (edge id, from, to) triples, or None if none exists.

    Hierholzer's method.  Requires a connected graph; starts at the smallest
    odd-degree vertex when the walk is open, else at vertex 0.
    """
    if not is_connected(g):
        raise NotConnected("euler_walk requires a connected graph")
    if g.m == 0:
        return []
    odd = [v for v in range(g.n) if g.degree(v) % 2 == 1]
    if len(odd) not in (0, 2):
        return None
    start = min(odd) if odd else 0
    next_idx = [0] * g.n
    used = [False] * g.m
    stack: list[tuple[int, int]] = [(start, -1)]  # (vertex, edge used to get here)
    walk_rev: list[tuple[int, int]] = []
    while stack:
        v, via = stack[-1]
        found = False
        while next_idx[v] < len(g.adj[v]):
            e = g.adj[v][next_idx[v]]
            next_idx[v] += 1
            if not used[e]:
                used[e] = True
                stack.append((g.other_end(e, v), e))
                found = True
                break
        if not found:
            stack.pop()
            if via != -1:
                walk_rev.append((via, v))
    walk_rev.reverse()
    out: list[tuple[int, int, int]] = []
    for e, to in walk_rev:
        out.append((e, g.other_end(e, to), to))
    return out


def euler_walk(g: Graph) -> list[int] | None:
    """Ordered edge list visiting every edge once, or None (Absent)."""
    oriented = euler_walk_oriented(g)
    if oriented is None:
        return None
    return [e for e, _, _ in oriented]
