"""Planarity testing and combinatorial embeddings.

Left-right planarity test in Brandes' formulation: a first DFS orients the
graph and computes lowpoints / nesting depths, a second DFS checks the
left-right constraint system on a stack of conflict pairs, and a third pass
assembles a rotation system.  Everything is iterative (no recursion limits)
and runs on dense integer arrays, because the backtracking search calls the
boolean test on every schedule extension.

Directed edge ends ("arcs") are encoded as ``2*edge_id + d`` where d = 0 is
tail->head.  Parallel edges are collapsed before testing and re-inserted
next to their representative in the final rotation; they never change the
verdict.
"""

from __future__ import annotations

from dataclasses import dataclass

from .graph import Graph


def arc(edge_id: int, reverse: bool) -> int:
    return 2 * edge_id + (1 if reverse else 0)


def arc_edge(a: int) -> int:
    return a >> 1


def arc_twin(a: int) -> int:
    return a ^ 1


class _Interval:
    __slots__ = ("low", "high")

    def __init__(self, low: int = -1, high: int = -1):
        self.low = low
        self.high = high

    def empty(self) -> bool:
        return self.low == -1 and self.high == -1

    def copy(self) -> "_Interval":
        return _Interval(self.low, self.high)


class _ConflictPair:
    __slots__ = ("L", "R")

    def __init__(self, L: _Interval | None = None, R: _Interval | None = None):
        self.L = L if L is not None else _Interval()
        self.R = R if R is not None else _Interval()

    def swap(self) -> None:
        self.L, self.R = self.R, self.L


class _LRState:
    """One run of the left-right test on a connected simple graph.

    Vertices are 0..n-1 of the host graph restricted to one component;
    ``edges`` holds (u, v) pairs of the simplified component.
    """

    def __init__(self, n: int, edges: list[tuple[int, int]], adj: list[list[int]]):
        self.n = n
        self.edges = edges
        self.adj = adj  # vertex -> outgoing arc candidates (both directions present)
        m2 = 2 * len(edges)
        self.height = [-1] * n
        self.parent_arc = [-1] * n
        self.orientation = [-1] * len(edges)  # edge -> its DFS-oriented arc
        self.lowpt = [0] * m2
        self.lowpt2 = [0] * m2
        self.nesting_depth = [0] * m2
        self.ref = [-1] * m2
        self.side = [1] * m2
        self.ordered_adj: list[list[int]] = [[] for _ in range(n)]
        self.S: list[_ConflictPair] = []
        self.stack_bottom: dict[int, _ConflictPair | None] = {}
        self.lowpt_edge = [-1] * m2
        self.roots: list[int] = []

    def arc_src(self, a: int) -> int:
        u, v = self.edges[a >> 1]
        return v if a & 1 else u

    def arc_dst(self, a: int) -> int:
        u, v = self.edges[a >> 1]
        return u if a & 1 else v

    # -- phase 1: orientation ---------------------------------------------

    def orient(self) -> None:
        for root in range(self.n):
            if self.height[root] != -1:
                continue
            self.roots.append(root)
            self.height[root] = 0
            stack = [(root, iter(self.adj[root]))]
            while stack:
                v, it = stack[-1]
                descended = False
                for a in it:
                    e = a >> 1
                    if self.orientation[e] != -1:
                        continue
                    w = self.arc_dst(a)
                    self.orientation[e] = a
                    self.lowpt[a] = self.height[v]
                    self.lowpt2[a] = self.height[v]
                    if self.height[w] == -1:
                        self.parent_arc[w] = a
                        self.height[w] = self.height[v] + 1
                        stack.append((w, iter(self.adj[w])))
                        descended = True
                        break
                    else:
                        # unoriented edge to a visited vertex is always a
                        # back edge (the other side would have oriented it)
                        self.lowpt[a] = self.height[w]
                        self._finish_arc(a, v)
                if descended:
                    continue
                stack.pop()
                pa = self.parent_arc[v]
                if pa != -1:
                    self._finish_arc(pa, self.arc_src(pa))

    def _finish_arc(self, a: int, v: int) -> None:
        """Set nesting depth of a and fold its lowpoints into v's parent arc."""
        self.nesting_depth[a] = 2 * self.lowpt[a]
        if self.lowpt2[a] < self.height[v]:
            self.nesting_depth[a] += 1  # chordal
        pa = self.parent_arc[v]
        if pa != -1:
            if self.lowpt[a] < self.lowpt[pa]:
                self.lowpt2[pa] = min(self.lowpt[pa], self.lowpt2[a])
                self.lowpt[pa] = self.lowpt[a]
            elif self.lowpt[a] > self.lowpt[pa]:
                self.lowpt2[pa] = min(self.lowpt2[pa], self.lowpt[a])
            else:
                self.lowpt2[pa] = min(self.lowpt2[pa], self.lowpt2[a])

    def sort_adjacency(self) -> None:
        depth = self.nesting_depth
        orientation = self.orientation
        for v in range(self.n):
            arcs = [a for a in self.adj[v] if orientation[a >> 1] == a]
            arcs.sort(key=lambda a: depth[a])
            self.ordered_adj[v] = arcs

    # -- phase 2: testing ---------------------------------------------------

    def _top(self) -> _ConflictPair | None:
        return self.S[-1] if self.S else None

    def _lowest(self, P: _ConflictPair) -> int:
        if P.L.empty():
            return self.lowpt[P.R.low]
        if P.R.empty():
            return self.lowpt[P.L.low]
        return min(self.lowpt[P.L.low], self.lowpt[P.R.low])

    def _conflicting(self, I: _Interval, b: int) -> bool:
        return (not I.empty()) and self.lowpt[I.high] > self.lowpt[b]

    def test(self) -> bool:
        for root in self.roots:
            # frames: (v, index into ordered_adj[v]); integration of arc i
            # happens when control returns to the frame with index i+1.
            stack = [(root, 0)]
            while stack:
                v, i = stack.pop()
                if i > 0:
                    # integrate the arc we just finished (tree arc return)
                    if not self._integrate(v, i - 1):
                        return False
                adj = self.ordered_adj[v]
                descended = False
                while i < len(adj):
                    a = adj[i]
                    self.stack_bottom[a] = self._top()
                    w = self.arc_dst(a)
                    if self.parent_arc[w] == a:
                        stack.append((v, i + 1))
                        stack.append((w, 0))
                        descended = True
                        break
                    else:
                        self.lowpt_edge[a] = a
                        self.S.append(_ConflictPair(R=_Interval(a, a)))
                        if not self._integrate(v, i):
                            return False
                        i += 1
                if descended:
                    continue
                # leaving v: trim back edges ending at v's parent
                pa = self.parent_arc[v]
                if pa != -1:
                    u = self.arc_src(pa)
                    self._trim(u)
                    if self.lowpt[pa] < self.height[u]:
                        top = self._top()
                        hl = top.L.high
                        hr = top.R.high
                        if hl != -1 and (hr == -1 or self.lowpt[hl] > self.lowpt[hr]):
                            self.ref[pa] = hl
                        else:
                            self.ref[pa] = hr
        return True

    def _integrate(self, v: int, i: int) -> bool:
        """Fold return edges of ordered_adj[v][i] into the constraint stack."""
        a = self.ordered_adj[v][i]
        pa = self.parent_arc[v]
        if self.lowpt[a] < self.height[v]:  # a has a return edge below v
            if i == 0:
                if pa != -1:
                    self.lowpt_edge[pa] = self.lowpt_edge[a]
            else:
                if not self._add_constraints(a, pa):
                    return False
        return True

    def _add_constraints(self, a: int, pa: int) -> bool:
        P = _ConflictPair()
        # merge return edges of a into P.R
        while True:
            Q = self.S.pop()
            if not Q.L.empty():
                Q.swap()
            if not Q.L.empty():
                return False
            if self.lowpt[Q.R.low] > self.lowpt[pa]:
                if P.R.empty():
                    P.R = Q.R.copy()
                else:
                    self.ref[P.R.low] = Q.R.high
                P.R.low = Q.R.low
            else:
                self.ref[Q.R.low] = self.lowpt_edge[pa]
            if self._top() is self.stack_bottom[a]:
                break
        # merge conflicting return edges of earlier siblings into P.L
        while True:
            top = self._top()
            if top is None or not (self._conflicting(top.L, a) or self._conflicting(top.R, a)):
                break
            Q = self.S.pop()
            if self._conflicting(Q.R, a):
                Q.swap()
            if self._conflicting(Q.R, a):
                return False
            self.ref[P.R.low] = Q.R.high
            if Q.R.low != -1:
                P.R.low = Q.R.low
            if P.L.empty():
                P.L = Q.L.copy()
            else:
                self.ref[P.L.low] = Q.L.high
            P.L.low = Q.L.low
        if not (P.L.empty() and P.R.empty()):
            self.S.append(P)
        return True

    def _trim(self, u: int) -> None:
        hu = self.height[u]
        while self.S and self._lowest(self.S[-1]) == hu:
            P = self.S.pop()
            if P.L.low != -1:
                self.side[P.L.low] = -1
        if self.S:
            P = self.S.pop()
            while P.L.high != -1 and self.arc_dst(P.L.high) == u:
                P.L.high = self.ref[P.L.high]
            if P.L.high == -1 and P.L.low != -1:
                self.ref[P.L.low] = P.R.low
                self.side[P.L.low] = -1
                P.L.low = -1
            while P.R.high != -1 and self.arc_dst(P.R.high) == u:
                P.R.high = self.ref[P.R.high]
            if P.R.high == -1 and P.R.low != -1:
                self.ref[P.R.low] = P.L.low
                self.side[P.R.low] = -1
                P.R.low = -1
            self.S.append(P)

    # -- phase 3: embedding ---------------------------------------------------

    def _sign(self, a: int) -> int:
        """Resolve side of a through its ref chain (iterative)."""
        chain = []
        while self.ref[a] != -1:
            chain.append(a)
            a = self.ref[a]
        result = self.side[a]
        for b in reversed(chain):
            self.side[b] *= result
            self.ref[b] = -1
            result = self.side[b]
        return result

    def embedding_rotations(self) -> list[list[int]]:
        """Rotation per vertex (arcs out of the vertex, one fixed handedness).

        Mirrors the reference left-right embedding: rotations start as the
        sign-corrected ordered adjacency (outgoing arcs only); a final DFS
        splices every incoming arc next to the tree arc it returns along.
        """
        for v in range(self.n):
            for a in self.ordered_adj[v]:
                self.nesting_depth[a] *= self._sign(a)
            self.ordered_adj[v].sort(key=lambda a: self.nesting_depth[a])

        # Doubly linked cyclic rotation per vertex, keyed by arc.
        first: list[int] = [-1] * self.n
        nxt: dict[int, int] = {}
        prv: dict[int, int] = {}

        def append(v: int, a: int) -> None:
            if first[v] == -1:
                first[v] = a
                nxt[a] = prv[a] = a
            else:
                f = first[v]
                last = prv[f]
                nxt[last] = a
                prv[a] = last
                nxt[a] = f
                prv[f] = a

        def add_first(v: int, a: int) -> None:
            append(v, a)
            first[v] = a

        def add_after(ref_arc: int, a: int) -> None:
            b = nxt[ref_arc]
            nxt[ref_arc] = a
            prv[a] = ref_arc
            nxt[a] = b
            prv[b] = a

        def add_before(v: int, ref_arc: int, a: int) -> None:
            b = prv[ref_arc]
            nxt[b] = a
            prv[a] = b
            nxt[a] = ref_arc
            prv[ref_arc] = a
            if first[v] == ref_arc:
                first[v] = a

        for v in range(self.n):
            for a in self.ordered_adj[v]:
                append(v, a)

        left_ref = [-1] * self.n
        right_ref = [-1] * self.n

        for root in self.roots:
            stack = [(root, 0)]
            while stack:
                v, i = stack.pop()
                adj = self.ordered_adj[v]
                descended = False
                while i < len(adj):
                    a = adj[i]
                    i += 1
                    w = self.arc_dst(a)
                    ta = arc_twin(a)
                    if self.parent_arc[w] == a:  # tree arc
                        add_first(w, ta)
                        left_ref[v] = a
                        right_ref[v] = a
                        stack.append((v, i))
                        stack.append((w, 0))
                        descended = True
                        break
                    else:  # back arc: splice twin into the ancestor's rotation
                        if self.side[a] == 1:
                            add_after(right_ref[w], ta)
                        else:
                            add_before(w, left_ref[w], ta)
                            left_ref[w] = ta
                if descended:
                    continue
        rotations: list[list[int]] = []
        for v in range(self.n):
            rot: list[int] = []
            if first[v] != -1:
                a = first[v]
                while True:
                    rot.append(a)
                    a = nxt[a]
                    if a == first[v]:
                        break
            rotations.append(rot)
        return rotations


def _simplify(n: int, edges: list[tuple[int, int]]) -> tuple[list[tuple[int, int]], list[int], dict[int, list[int]]]:
    """Collapse parallel edges; returns (simple edges, rep edge ids, groups)."""
    seen: dict[tuple[int, int], int] = {}
    simple: list[tuple[int, int]] = []
    reps: list[int] = []
    groups: dict[int, list[int]] = {}
    for eid, (u, v) in enumerate(edges):
        key = (u, v) if u < v else (v, u)
        if key in seen:
            groups[seen[key]].append(eid)
        else:
            seen[key] = eid
            groups[eid] = [eid]
            simple.append((u, v))
            reps.append(eid)
    return simple, reps, groups


def planar_check(n: int, edges: list[tuple[int, int]]) -> bool:
    """Boolean planarity of an (n, edges) multigraph.  Hot path."""
    simple, _, _ = _simplify(n, edges)
    m = len(simple)
    if m <= 2 or n <= 3:
        return True
    if m > 3 * n - 6:
        return False
    adj: list[list[int]] = [[] for _ in range(n)]
    for eid, (u, v) in enumerate(simple):
        adj[u].append(2 * eid)
        adj[v].append(2 * eid + 1)
    state = _LRState(n, simple, adj)
    state.orient()
    state.sort_adjacency()
    return state.test()


def is_planar(g: Graph) -> bool:
    return planar_check(g.n, g.edges)


@dataclass(frozen=True)
class PlanarEmbedding:
    """Rotation system plus derived faces of a planar multigraph.

    ``rotation[v]`` lists outgoing arcs (2*edge+dir ints) clockwise;
    ``faces`` are arc walks; ``outer_face`` indexes faces.
    """

    n: int
    edges: tuple[tuple[int, int], ...]
    rotation: tuple[tuple[int, ...], ...]
    faces: tuple[tuple[int, ...], ...]
    outer_face: int

    def face_lengths(self) -> list[int]:
        return [len(f) for f in self.faces]

    def rotation_edges(self, v: int) -> list[int]:
        return [a >> 1 for a in self.rotation[v]]

    def face_edge_ids(self, face_index: int) -> list[int]:
        return [a >> 1 for a in self.faces[face_index]]


@dataclass(frozen=True)
class PlanarityVerdict:
    planar: bool
    embedding: PlanarEmbedding | None = None
    obstruction: frozenset[int] | None = None


def faces_from_rotation(n: int, edges, rotation) -> list[list[int]]:
    """Face walks (arc sequences) induced by a rotation system.

    Next arc after a = rotation successor of twin(a) at a's head; the orbit
    of that map is one face boundary.
    """
    pos: dict[int, tuple[int, int]] = {}
    for v in range(n):
        for idx, a in enumerate(rotation[v]):
            pos[a] = (v, idx)
    faces: list[list[int]] = []
    visited: set[int] = set()
    for v in range(n):
        for a0 in rotation[v]:
            if a0 in visited:
                continue
            face = []
            a = a0
            while a not in visited:
                visited.add(a)
                face.append(a)
                t = a ^ 1
                w, idx = pos[t]
                rot = rotation[w]
                a = rot[(idx + 1) % len(rot)]
            faces.append(face)
    return faces


def embed(g: Graph) -> PlanarityVerdict:
    """Full planarity verdict with rotation system and faces.

    Disconnected input is embedded per component, components nested in the
    first component's outer face.  On non-planar input the obstruction is
    the edge set of a non-planar component.
    """
    simple, reps, groups = _simplify(g.n, g.edges)
    adj: list[list[int]] = [[] for _ in range(g.n)]
    for eid, (u, v) in enumerate(simple):
        adj[u].append(2 * eid)
        adj[v].append(2 * eid + 1)
    m = len(simple)
    state = _LRState(g.n, simple, adj)
    state.orient()
    state.sort_adjacency()
    if m > 2 and not state.test():
        # locate a non-planar component for the obstruction
        comp = _component_edge_sets(g)
        for edge_set in comp:
            sub_edges = [g.edges[e] for e in sorted(edge_set)]
            if not planar_check(g.n, sub_edges):
                return PlanarityVerdict(False, obstruction=frozenset(edge_set))
        return PlanarityVerdict(False, obstruction=frozenset(range(g.m)))

    rotations_simple = state.embedding_rotations()

    # Map simple-graph arcs back to original edge ids and re-insert parallel
    # edges as a nested bundle next to their representative.
    rotation: list[list[int]] = []
    for v in range(g.n):
        rot: list[int] = []
        for a in rotations_simple[v]:
            group = groups[reps[a >> 1]]
            rot.extend(_expand_group(v, group, g))
        rotation.append(rot)
    faces = faces_from_rotation(g.n, g.edges, rotation)
    outer = _pick_outer(faces)
    emb = PlanarEmbedding(
        n=g.n,
        edges=tuple(g.edges),
        rotation=tuple(tuple(r) for r in rotation),
        faces=tuple(tuple(f) for f in faces),
        outer_face=outer,
    )
    return PlanarityVerdict(True, embedding=emb)


def _expand_group(v: int, group: list[int], g: Graph) -> list[int]:
    """Arcs at v for a parallel-edge group, duplicates nested inside.

    Keeping group order at the lower endpoint and reversing it at the other
    makes each consecutive pair of parallels bound a bigon face.
    """
    out = [2 * orig + (1 if g.edges[orig][1] == v else 0) for orig in group]
    u2, v2 = g.edges[group[0]]
    if v != min(u2, v2):
        out.reverse()
    return out


def _component_edge_sets(g: Graph) -> list[set[int]]:
    seen = [False] * g.n
    comps: list[set[int]] = []
    for root in range(g.n):
        if seen[root] or g.degree(root) == 0:
            continue
        seen[root] = True
        stack = [root]
        edge_set: set[int] = set()
        while stack:
            v = stack.pop()
            for e in g.adj[v]:
                edge_set.add(e)
                w = g.other_end(e, v)
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        comps.append(edge_set)
    return comps


def _pick_outer(faces: list[list[int]]) -> int:
    if not faces:
        return 0
    best = 0
    for i, f in enumerate(faces):
        if len(f) > len(faces[best]):
            best = i
    return best


def face_census(embedding: PlanarEmbedding, c: int) -> tuple[int, int]:
    """(total face count, count of faces with at most c sides)."""
    f = len(embedding.faces)
    f_c = sum(1 for face in embedding.faces if len(face) <= c)
    return f, f_c


def dump_embedding(emb: PlanarEmbedding) -> str:
    """Debug/test dump: rot and face lines; outer face is listed first."""
    lines = []
    for v in range(emb.n):
        ids = " ".join(str(a >> 1) for a in emb.rotation[v])
        lines.append(f"rot {v}: {ids}".rstrip())
    order = [emb.outer_face] + [i for i in range(len(emb.faces)) if i != emb.outer_face]
    for i in order:
        face = emb.faces[i]
        ids = " ".join(str(a >> 1) for a in face)
        lines.append(f"face {len(face)}: {ids}")
    return "\n".join(lines) + "\n"
