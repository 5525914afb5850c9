"""Combinatorial model of a thrackle drawing.

A drawing of G is encoded by its crossing schedule: for every edge e, the
ordered list pi_e of vertex-disjoint edges it crosses, read along e's stored
orientation.  The gadget graph G' replaces each crossing by a degree-4
vertex, subdivides crossing-crossing segments, and wires a 4-cycle through
the neighbors of every crossing so that any plane embedding of G' forces a
proper crossing there.  G is thrackleable iff some complete schedule has a
planar G'.

Conway doubling replaces a witnessed odd cycle by an even cycle of twice
the length.  The local crossing pattern of the doubled bundle is fixed by
convention (the twist of each doubled edge happens right after its start
vertex, followed by the crossing with the same-side predecessor copy) and
certified by re-validating the produced witness.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import (
    AdjacentCrossing,
    DoublingFailed,
    GraphFormatError,
    InconsistentSchedule,
    NotACycle,
    NotOddCycle,
)
from .graph import Graph, disjoint_edges, is_bipartite, parse_graph, format_graph
from .planarity import (
    PlanarEmbedding,
    embed,
    faces_from_rotation,
    planar_check,
)


@dataclass(frozen=True)
class CrossingSchedule:
    """Per-edge crossing orders; may be partial during search."""

    order: tuple[tuple[int, ...], ...]

    @staticmethod
    def empty(g: Graph) -> "CrossingSchedule":
        return CrossingSchedule(tuple(() for _ in range(g.m)))

    @staticmethod
    def from_lists(lists) -> "CrossingSchedule":
        return CrossingSchedule(tuple(tuple(pi) for pi in lists))

    def complete_edges(self, g: Graph) -> tuple[bool, ...]:
        return tuple(
            len(self.order[e]) == len(disjoint_edges(g, e)) for e in range(g.m)
        )

    def is_complete(self, g: Graph) -> bool:
        return all(self.complete_edges(g))

    def crossings(self) -> int:
        return sum(len(pi) for pi in self.order) // 2


def check_schedule(g: Graph, s: CrossingSchedule) -> None:
    """Raise if s violates the schedule invariants for g."""
    if len(s.order) != g.m:
        raise InconsistentSchedule(
            f"schedule has {len(s.order)} edge entries, graph has {g.m}"
        )
    disjoint = [disjoint_edges(g, e) for e in range(g.m)]
    for e, pi in enumerate(s.order):
        if len(set(pi)) != len(pi):
            raise InconsistentSchedule(f"pi_{e} repeats an entry")
        for f in pi:
            if not (0 <= f < g.m):
                raise InconsistentSchedule(f"pi_{e} references unknown edge {f}")
            if f not in disjoint[e]:
                raise AdjacentCrossing(f"pi_{e} contains adjacent edge {f}")
            if e not in s.order[f]:
                raise InconsistentSchedule(
                    f"reciprocity: {f} in pi_{e} but {e} not in pi_{f}"
                )


# ---------------------------------------------------------------------------
# Gadget graph
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GadgetDetail:
    """Gadget graph plus the bookkeeping needed to interpret it.

    ``crossing_of`` maps the unordered edge pair (min, max) to the crossing
    vertex id; ``stops`` lists, per original edge, its path of gadget
    vertices from tail to head before subdivision; ``segment_at`` maps
    (vertex of G, incident edge) to the id of the unique gadget segment edge
    incident to that original vertex along that edge;
    ``crossing_segments[x]`` gives, for crossing x = (e, f), the four
    incident segment edge ids (e_in, e_out, f_in, f_out) read along the
    stored orientations of e and f.
    """

    gadget: Graph
    crossing_of: dict[tuple[int, int], int]
    stops: tuple[tuple[int, ...], ...]
    segment_at: dict[tuple[int, int], int]
    crossing_segments: dict[int, tuple[int, int, int, int]]
    subdivision_count: int


def build_gadget_detail(g: Graph, s: CrossingSchedule, validate: bool = True) -> GadgetDetail:
    if validate:
        check_schedule(g, s)
    n = g.n
    crossing_of: dict[tuple[int, int], int] = {}
    next_id = n
    for e in range(g.m):
        for f in s.order[e]:
            key = (e, f) if e < f else (f, e)
            if key not in crossing_of:
                crossing_of[key] = next_id
                next_id += 1

    stops: list[tuple[int, ...]] = []
    for e in range(g.m):
        u, v = g.endpoints(e)
        path = [u]
        for f in s.order[e]:
            key = (e, f) if e < f else (f, e)
            path.append(crossing_of[key])
        path.append(v)
        stops.append(tuple(path))

    # Segment edges with subdivision of crossing-crossing segments.
    edges: list[tuple[int, int]] = []
    segment_at: dict[tuple[int, int], int] = {}
    # per edge, per stop index: segment ids flanking each stop
    before: dict[tuple[int, int], int] = {}  # (edge, stop idx) -> incoming segment id
    after: dict[tuple[int, int], int] = {}
    sub_count = 0
    for e in range(g.m):
        path = stops[e]
        for i in range(len(path) - 1):
            a, b = path[i], path[i + 1]
            if a >= n and b >= n:
                w = next_id
                next_id += 1
                sub_count += 1
                edges.append((a, w))
                after[(e, i)] = len(edges) - 1
                edges.append((w, b))
                before[(e, i + 1)] = len(edges) - 1
            else:
                edges.append((a, b))
                after[(e, i)] = len(edges) - 1
                before[(e, i + 1)] = len(edges) - 1
        u, v = g.endpoints(e)
        segment_at[(u, e)] = after[(e, 0)]
        segment_at[(v, e)] = before[(e, len(path) - 1)]

    # 4-cycles around crossings, in crossing-id order.
    crossing_segments: dict[int, tuple[int, int, int, int]] = {}
    neighbor_of: dict[int, tuple[int, int, int, int]] = {}
    by_id = sorted(crossing_of.items(), key=lambda kv: kv[1])
    for (e, f), x in by_id:
        ie = stops[e].index(x)
        jf = stops[f].index(x)
        e_in, e_out = before[(e, ie)], after[(e, ie)]
        f_in, f_out = before[(f, jf)], after[(f, jf)]
        crossing_segments[x] = (e_in, e_out, f_in, f_out)

        def far_end(seg: int) -> int:
            a, b = edges[seg]
            return b if a == x else a

        ne, ne2 = far_end(e_in), far_end(e_out)
        nf, nf2 = far_end(f_in), far_end(f_out)
        edges.append((ne, nf))
        edges.append((nf, ne2))
        edges.append((ne2, nf2))
        edges.append((nf2, ne))

    gadget = Graph(next_id, edges)
    return GadgetDetail(
        gadget=gadget,
        crossing_of=crossing_of,
        stops=tuple(stops),
        segment_at=segment_at,
        crossing_segments=crossing_segments,
        subdivision_count=sub_count,
    )


def build_gadget_graph(g: Graph, s: CrossingSchedule) -> Graph:
    """The multigraph G' of (g, s); parallel gadget edges are kept."""
    return build_gadget_detail(g, s).gadget


def gadget_size(g: Graph, s: CrossingSchedule) -> tuple[int, int]:
    """(crossing count X, crossing-crossing segment count S) of G'."""
    detail = build_gadget_detail(g, s)
    return len(detail.crossing_of), detail.subdivision_count


# ---------------------------------------------------------------------------
# Witnesses
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ThrackleWitness:
    graph: Graph
    schedule: CrossingSchedule
    embedding: PlanarEmbedding


@dataclass
class ValidationReport:
    passed: bool
    failures: list[str] = field(default_factory=list)


def make_witness(g: Graph, s: CrossingSchedule) -> ThrackleWitness:
    """Embed G'(g, s) and package the result; raises if G' is non-planar."""
    check_schedule(g, s)
    gadget = build_gadget_graph(g, s)
    verdict = embed(gadget)
    if not verdict.planar:
        raise InconsistentSchedule("gadget graph is not planar")
    return ThrackleWitness(g, s, verdict.embedding)


def validate_witness(w: ThrackleWitness) -> ValidationReport:
    """Check all witness conditions; failures are itemized, never raised.

    The embedding is certified directly: the stored rotation system must be
    a rotation of the rebuilt G' whose face count satisfies Euler's formula,
    which proves planarity independently of the planarity tester.
    """
    failures: list[str] = []
    g, s = w.graph, w.schedule
    try:
        check_schedule(g, s)
    except (AdjacentCrossing, InconsistentSchedule) as exc:
        failures.append(f"schedule: {exc}")
        return ValidationReport(False, failures)

    for e, complete in enumerate(s.complete_edges(g)):
        if not complete:
            failures.append(f"incomplete: pi_{e} misses crossings")
    gadget = build_gadget_graph(g, s)
    emb = w.embedding
    if emb.n != gadget.n or tuple(emb.edges) != tuple(gadget.edges):
        failures.append("embedding: stored embedding is not of G'(graph, schedule)")
        return ValidationReport(False, failures)
    # rotation must contain every arc exactly once, at its source vertex
    seen: set[int] = set()
    ok = True
    for v in range(gadget.n):
        for a in emb.rotation[v]:
            e = a >> 1
            if e >= gadget.m:
                ok = False
                break
            u2, v2 = gadget.edges[e]
            src = v2 if a & 1 else u2
            if src != v or a in seen:
                ok = False
                break
            seen.add(a)
    if not ok or len(seen) != 2 * gadget.m:
        failures.append("embedding: rotation is not a permutation of edge ends")
        return ValidationReport(False, failures)
    faces = faces_from_rotation(gadget.n, gadget.edges, [list(r) for r in emb.rotation])
    if sorted(map(tuple, faces)) != sorted(map(tuple, emb.faces)):
        failures.append("embedding: stored faces disagree with rotation system")
    # Euler certificate: each component embedded on the sphere contributes
    # n_i - m_i + f_i = 2, which proves the rotation is planar without
    # trusting the planarity tester.
    comps = _component_count(gadget)
    used_vertices = sum(1 for v in range(gadget.n) if gadget.degree(v) > 0)
    if used_vertices - gadget.m + len(faces) != 2 * comps:
        failures.append("embedding: face count violates Euler's formula (non-planar rotation)")
    return ValidationReport(not failures, failures)


def _component_count(g: Graph) -> int:
    seen = [False] * g.n
    comps = 0
    for root in range(g.n):
        if seen[root] or g.degree(root) == 0:
            continue
        comps += 1
        stack = [root]
        seen[root] = True
        while stack:
            v = stack.pop()
            for e in g.adj[v]:
                w = g.other_end(e, v)
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
    return comps


# ---------------------------------------------------------------------------
# Witness text format
# ---------------------------------------------------------------------------

def format_witness(w: ThrackleWitness) -> str:
    from .planarity import dump_embedding

    parts = ["thrackle-witness v1\n"]
    parts.append(format_graph(w.graph))
    for e in range(w.graph.m):
        ids = " ".join(str(f) for f in w.schedule.order[e])
        parts.append(f"pi {e}: {ids}".rstrip() + "\n")
    parts.append(dump_embedding(w.embedding))
    return "".join(parts)


def parse_witness(text: str) -> ThrackleWitness:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "thrackle-witness v1":
        raise GraphFormatError("missing 'thrackle-witness v1' header", 1)
    graph_lines: list[str] = []
    pi_lines: list[tuple[int, str]] = []
    emb_lines: list[tuple[int, str]] = []
    for no, raw in enumerate(lines[1:], start=2):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.startswith(("graph", "e ")):
            graph_lines.append(line)
        elif line.startswith("pi "):
            pi_lines.append((no, line))
        elif line.startswith(("rot ", "face ")):
            emb_lines.append((no, line))
        else:
            raise GraphFormatError(f"unrecognized line {line!r}", no)
    g = parse_graph("\n".join(graph_lines))
    order: list[tuple[int, ...]] = [() for _ in range(g.m)]
    for no, line in pi_lines:
        head, _, rest = line.partition(":")
        try:
            e = int(head.split()[1])
            pi = tuple(int(x) for x in rest.split())
        except (ValueError, IndexError):
            raise GraphFormatError("malformed pi line", no) from None
        if not (0 <= e < g.m):
            raise GraphFormatError(f"pi line for unknown edge {e}", no)
        order[e] = pi
    schedule = CrossingSchedule(tuple(order))
    gadget = build_gadget_graph(g, schedule)
    rotation: list[list[int]] = [[] for _ in range(gadget.n)]
    faces: list[tuple[int, ...]] = []
    for no, line in emb_lines:
        head, _, rest = line.partition(":")
        ids = [int(x) for x in rest.split()]
        if line.startswith("rot "):
            v = int(head.split()[1])
            if not (0 <= v < gadget.n):
                raise GraphFormatError(f"rot line for unknown vertex {v}", no)
            for e in ids:
                if not (0 <= e < gadget.m):
                    raise GraphFormatError(f"rot line references unknown edge {e}", no)
                u2, v2 = gadget.edges[e]
                if v == u2:
                    rotation[v].append(2 * e)
                elif v == v2:
                    rotation[v].append(2 * e + 1)
                else:
                    raise GraphFormatError(f"edge {e} is not incident to vertex {v}", no)
        else:
            declared = int(head.split()[1])
            if declared != len(ids):
                raise GraphFormatError("face length disagrees with id count", no)
    # Face walks are reconstructed from the rotation (arc-level), then
    # reordered so the dump round-trips bit-exactly: outer face first.
    face_walks = faces_from_rotation(gadget.n, gadget.edges, rotation)
    emb_faces = [tuple(f) for f in face_walks]
    emb = PlanarEmbedding(
        n=gadget.n,
        edges=tuple(gadget.edges),
        rotation=tuple(tuple(r) for r in rotation),
        faces=tuple(emb_faces),
        outer_face=_outer_from_dump(emb_faces, emb_lines, gadget),
    )
    return ThrackleWitness(g, schedule, emb)


def _outer_from_dump(faces: list[tuple[int, ...]], emb_lines, gadget: Graph) -> int:
    """First 'face' line of the dump designates the outer face."""
    for _, line in emb_lines:
        if line.startswith("face "):
            _, _, rest = line.partition(":")
            ids = [int(x) for x in rest.split()]
            for idx, f in enumerate(faces):
                if [a >> 1 for a in f] == ids:
                    return idx
            break
    return 0


# ---------------------------------------------------------------------------
# Conway doubling
# ---------------------------------------------------------------------------

def _cycle_edges(g: Graph, cycle: tuple[int, ...]) -> list[int]:
    if len(set(cycle)) != len(cycle):
        raise NotACycle("repeated vertex in cycle sequence")
    if len(cycle) < 3:
        raise NotACycle("cycle must have length >= 3")
    eids = []
    for i, v in enumerate(cycle):
        w = cycle[(i + 1) % len(cycle)]
        e = g.edge_between(v, w)
        if e is None:
            raise NotACycle(f"no edge {v}-{w} in graph")
        eids.append(e)
    if len(set(eids)) != len(eids):
        raise NotACycle("cycle reuses an edge")
    return eids


class _Geometry:
    """Side queries against the stored G' embedding of a witness."""

    def __init__(self, w: ThrackleWitness):
        self.detail = build_gadget_detail(w.graph, w.schedule)
        self.emb = w.embedding
        self.g = w.graph

    def crossing_vertex(self, e: int, f: int) -> int:
        key = (e, f) if e < f else (f, e)
        return self.detail.crossing_of[key]

    def pattern_positive(self, e: int, f: int) -> bool:
        """True iff at the crossing of (e, f) the rotation reads cyclically
        (e_in, f_in, e_out, f_out) -- i.e. a traveler along e's stored
        orientation approaches the crossing from f's left side."""
        x = self.crossing_vertex(e, f)
        e_in, e_out, f_in, f_out = self.detail.crossing_segments[x]
        if e > f:
            e_in, e_out, f_in, f_out = f_in, f_out, e_in, e_out
        order = [a >> 1 for a in self.emb.rotation[x]]
        quad = [s for s in order if s in (e_in, e_out, f_in, f_out)]
        if len(quad) != 4:
            raise DoublingFailed("crossing rotation does not contain its four segments")
        i = quad.index(e_in)
        cyc = quad[i:] + quad[:i]
        if cyc == [e_in, f_in, e_out, f_out]:
            return True
        if cyc == [e_in, f_out, e_out, f_in]:
            return False
        raise DoublingFailed("crossing rotation does not alternate the two edges")

    def vertex_rotation_edges(self, v: int) -> list[int]:
        """Incident original edges of v in embedding rotation order."""
        seg_to_edge = {}
        for e in self.g.adj[v]:
            seg_to_edge[self.detail.segment_at[(v, e)]] = e
        out = []
        for a in self.emb.rotation[v]:
            seg = a >> 1
            if seg in seg_to_edge:
                out.append(seg_to_edge[seg])
        return out


def conway_double(w: ThrackleWitness, odd_cycle) -> ThrackleWitness:
    """Double an odd cycle of a validated witness (Conway's construction).

    The returned witness's graph replaces the cycle C by an even cycle of
    length 2|C|; every former C-vertex v splits into v1 (kept id) and v2,
    with non-cycle edges reattached by their local side of C read from the
    stored embedding.  The result is re-validated; if the fixed local rules
    ever fail to produce a planar gadget, DoublingFailed is raised.
    """
    cycle = tuple(odd_cycle)
    g = w.graph
    eids = _cycle_edges(g, cycle)
    k = len(cycle)
    if k % 2 == 0:
        raise NotOddCycle(f"cycle length {k} is even")
    report = validate_witness(w)
    if not report.passed:
        raise DoublingFailed("input witness does not validate: " + "; ".join(report.failures))

    geo = _Geometry(w)
    n, m = g.n, g.m
    cyc_index = {e: i for i, e in enumerate(eids)}
    # flip[i]: stored orientation of edge eids[i] disagrees with traversal
    flip = []
    for i, e in enumerate(eids):
        u, v = g.endpoints(e)
        flip.append(u != cycle[i])

    def pi_along(i: int) -> list[int]:
        pi = list(w.schedule.order[eids[i]])
        return pi[::-1] if flip[i] else pi

    # Split classes at each cycle vertex: edges strictly between the
    # outgoing and incoming cycle edge in rotation order go to side 1.
    side1: list[list[int]] = []
    side2: list[list[int]] = []
    for i, v in enumerate(cycle):
        rot = geo.vertex_rotation_edges(v)
        e_in = eids[(i - 1) % k]
        e_out = eids[i]
        pos_out = rot.index(e_out)
        cyc_rot = rot[pos_out:] + rot[:pos_out]
        pos_in = cyc_rot.index(e_in)
        s1 = cyc_rot[1:pos_in]
        s2 = cyc_rot[pos_in + 1:]
        side1.append(s1)
        side2.append(s2)

    # Doubled graph: b_i keeps edge id eids[i], c_i gets id m + i.
    # v^i_1 keeps the vertex id, v^i_2 = n + i.
    v2_of = {v: n + i for i, v in enumerate(cycle)}
    b = {i: eids[i] for i in range(k)}
    c = {i: m + i for i in range(k)}

    new_edges: list[tuple[int, int]] = [None] * (m + k)  # type: ignore[list-item]
    for e in range(m):
        if e in cyc_index:
            i = cyc_index[e]
            new_edges[e] = (cycle[i], v2_of[cycle[(i + 1) % k]])
        else:
            u, v = g.endpoints(e)
            if u in v2_of and e in side2[cycle.index(u)]:
                u = v2_of[u]
            if v in v2_of and e in side2[cycle.index(v)]:
                v = v2_of[v]
            new_edges[e] = (u, v)
    for i in range(k):
        new_edges[m + i] = (v2_of[cycle[i]], cycle[(i + 1) % k])

    def approach_left(traveler: int, crossed: int, flip_t: bool, flip_c: bool) -> bool:
        base = geo.pattern_positive(traveler, crossed)
        return base ^ flip_t ^ flip_c

    def bundle_pair(traveler: int, j: int, flip_t: bool) -> list[int]:
        # order in which traveler meets the two copies of cycle edge j
        left_first = approach_left(traveler, eids[j], flip_t, flip[j])
        return [c[j], b[j]] if left_first else [b[j], c[j]]

    new_order: list[list[int]] = [[] for _ in range(m + k)]
    for i in range(k):
        prev_i = (i - 1) % k
        next_i = (i + 1) % k
        mid_b: list[int] = []
        mid_c: list[int] = []
        for f in pi_along(i):
            if f in cyc_index:
                j = cyc_index[f]
                mid_b.extend(bundle_pair(eids[i], j, flip[i]))
                mid_c.extend(bundle_pair(eids[i], j, flip[i]))
            else:
                mid_b.append(f)
                mid_c.append(f)
        start_b = [c[i], b[prev_i]] + list(side2[i])
        end_b = list(reversed(side1[next_i])) + [b[next_i]]
        new_order[b[i]] = start_b + mid_b + end_b
        start_c = [b[i], c[prev_i]] + list(side1[i])
        end_c = list(reversed(side2[next_i])) + [c[next_i]]
        new_order[c[i]] = start_c + mid_c + end_c

    for e in range(m):
        if e in cyc_index:
            continue
        out: list[int] = []
        for f in w.schedule.order[e]:
            if f in cyc_index:
                j = cyc_index[f]
                left_first = approach_left(e, f, False, flip[j])
                out.extend([c[j], b[j]] if left_first else [b[j], c[j]])
            else:
                out.append(f)
        u, v = g.endpoints(e)
        # near-vertex blocks at split endpoints, read outward from the vertex
        head_block: list[int] = []
        tail_block: list[int] = []
        for vertex, at_tail in ((u, True), (v, False)):
            if vertex not in v2_of:
                continue
            i = cycle.index(vertex)
            if e in side1[i]:
                block = [b[(i - 1) % k], c[i]] + list(side2[i])
            else:
                block = [c[(i - 1) % k], b[i]] + list(side1[i])
            if at_tail:
                head_block = block
            else:
                tail_block = block
        new_order[e] = head_block + out + list(reversed(tail_block))

    doubled_graph = Graph(n + k, new_edges)
    schedule = CrossingSchedule.from_lists(new_order)
    try:
        check_schedule(doubled_graph, schedule)
        if not schedule.is_complete(doubled_graph):
            raise InconsistentSchedule("doubled schedule incomplete")
        gadget = build_gadget_graph(doubled_graph, schedule)
    except (AdjacentCrossing, InconsistentSchedule) as exc:
        raise DoublingFailed(f"doubled schedule invalid: {exc}") from exc
    verdict = embed(gadget)
    if not verdict.planar:
        raise DoublingFailed("doubled gadget graph is not planar")
    out_w = ThrackleWitness(doubled_graph, schedule, verdict.embedding)
    report = validate_witness(out_w)
    if not report.passed:
        raise DoublingFailed("doubled witness failed validation: " + "; ".join(report.failures))
    bip, _ = is_bipartite(doubled_graph)
    if not bip:
        raise DoublingFailed("doubled graph is not bipartite")
    return out_w
