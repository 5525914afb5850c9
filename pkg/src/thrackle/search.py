"""Backtracking thrackleability search with planarity pruning.

Edges are processed along an Euler walk (DFS order as fallback); the walk
direction orients them.  At each step the current edge picks which not-yet
crossed earlier edge it crosses next (appended to its own list) and where
that crossing sits along the other edge (insertion position).  Every
extension rebuilds the partial gadget graph and tests it for planarity;
non-planar partial gadgets can never extend to planar complete ones, so the
cut is exact.

The optional 6-cycle rotation prune encodes the known dichotomy for
thrackled hexagons: reading a 6-cycle f0..f5 along a fixed traversal,
either every list pi_{f_s} places f_{s+3} before both f_{s+2} and f_{s+4},
or every list places it after both.  Partial schedules violating both
branches on any 6-cycle are cut.
"""

from __future__ import annotations

import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import dataclass
from typing import Callable

from .graph import Graph, disjoint_edges, euler_walk_oriented, is_connected
from .planarity import planar_check
from .witness import (
    CrossingSchedule,
    ThrackleWitness,
    make_witness,
    validate_witness,
)

THRACKLEABLE = "thrackleable"
NOT_THRACKLEABLE = "not_thrackleable"
INCONCLUSIVE = "inconclusive"


@dataclass
class SearchOptions:
    edge_order: str = "euler"  # "euler" (with DFS fallback) or "dfs"
    prune_c6_rotation: bool = False
    symmetry_break_first_edge: bool = False
    node_limit: int | None = None
    time_limit: float | None = None  # wall-clock seconds
    parallel_branching: bool = False
    jobs: int = 1
    progress: Callable[["SearchStats"], None] | None = None
    progress_every: int = 1 << 16


@dataclass
class SearchStats:
    nodes: int = 0
    planarity_calls: int = 0
    planarity_prunes: int = 0
    rotation_prunes: int = 0
    leaves: int = 0
    max_depth: int = 0
    wall_time: float = 0.0

    def merge(self, other: "SearchStats") -> None:
        self.nodes += other.nodes
        self.planarity_calls += other.planarity_calls
        self.planarity_prunes += other.planarity_prunes
        self.rotation_prunes += other.rotation_prunes
        self.leaves += other.leaves
        self.max_depth = max(self.max_depth, other.max_depth)


@dataclass
class Decision:
    outcome: str
    stats: SearchStats
    witness: ThrackleWitness | None = None
    exhausted_nodes: int | None = None
    max_depth: int | None = None

    @property
    def thrackleable(self) -> bool:
        return self.outcome == THRACKLEABLE


class _LimitHit(Exception):
    pass


def _dfs_edge_order(g: Graph) -> list[tuple[int, int, int]]:
    """Edge order that always extends an already-visited vertex."""
    seen_v = [False] * g.n
    seen_e = [False] * g.m
    order: list[tuple[int, int, int]] = []
    stack = [0]
    seen_v[0] = True
    while stack:
        v = stack.pop()
        pushed = False
        for e in g.adj[v]:
            if seen_e[e]:
                continue
            w = g.other_end(e, v)
            seen_e[e] = True
            order.append((e, v, w))
            if not seen_v[w]:
                seen_v[w] = True
                stack.append(v)
                stack.append(w)
                pushed = True
                break
        if pushed:
            continue
    # Any edges missed by the simple stack sweep (multiple back edges):
    for v in range(g.n):
        for e in g.adj[v]:
            if not seen_e[e]:
                seen_e[e] = True
                order.append((e, v, g.other_end(e, v)))
    return order


def _edge_order(g: Graph, opts: SearchOptions) -> list[tuple[int, int, int]]:
    if opts.edge_order not in ("euler", "dfs"):
        raise ValueError(f"unknown edge_order {opts.edge_order!r}")
    if opts.edge_order == "euler":
        walk = euler_walk_oriented(g)
        if walk is not None:
            return walk
    return _dfs_edge_order(g)


def _enumerate_six_cycles(g: Graph) -> list[list[int]]:
    """All simple 6-cycles as vertex lists, deduplicated."""
    found: set[tuple[int, ...]] = set()
    out: list[list[int]] = []

    def canon(seq: list[int]) -> tuple[int, ...]:
        best = None
        k = len(seq)
        for rot in range(k):
            for cand_seq in (seq[rot:] + seq[:rot],):
                for s in (tuple(cand_seq), tuple([cand_seq[0]] + cand_seq[1:][::-1])):
                    if best is None or s < best:
                        best = s
        return best  # type: ignore[return-value]

    def dfs(path: list[int]):
        v = path[-1]
        for w in sorted(g.neighbors(v)):
            if len(path) == 6:
                if w == path[0]:
                    key = canon(path)
                    if key not in found:
                        found.add(key)
                        out.append(list(path))
                continue
            if w in path or w < path[0]:
                continue
            path.append(w)
            dfs(path)
            path.pop()

    for v in range(g.n):
        dfs([v])
    return out


class _Searcher:
    def __init__(self, g: Graph, opts: SearchOptions):
        self.orig = g
        self.opts = opts
        self.order = _edge_order(g, opts)
        if len(self.order) != g.m:
            raise ValueError("edge order did not cover every edge")
        # Reorient edges along the walk; remember which were flipped.
        self.flipped = [False] * g.m
        edges = list(g.edges)
        for e, frm, to in self.order:
            if edges[e] != (frm, to):
                edges[e] = (frm, to)
                self.flipped[e] = True
        self.g = Graph(g.n, edges)
        self.eo = [e for e, _, _ in self.order]
        self.m = g.m
        self.n = g.n
        self.disjoint_mask = [0] * self.m
        for e in range(self.m):
            mask = 0
            for f in disjoint_edges(self.g, e):
                mask |= 1 << f
            self.disjoint_mask[e] = mask

        self.pi: list[list[int]] = [[] for _ in range(self.m)]
        self.crossed = [0] * self.m
        self.depth = 0
        self.stats = SearchStats()
        self.deadline = (
            time.monotonic() + opts.time_limit if opts.time_limit is not None else None
        )
        self.prune_planarity = True
        self.collect: list[ThrackleWitness] | None = None
        self.collect_limit = 0
        self.forced_first: tuple[int, int] | None = None

        self.constraints_by_edge: dict[int, list[tuple[int, int, int, int]]] = {}
        self.viol: list[list[int]] = []
        self.blocked = 0
        if opts.prune_c6_rotation:
            self._build_rotation_constraints()

        self.sym_allowed_first: set[int] | None = None
        self.sym_first_edge = -1
        if opts.symmetry_break_first_edge:
            self._build_symmetry_orbits()

    # -- rotation dichotomy ---------------------------------------------------

    def _build_rotation_constraints(self) -> None:
        cycles = _enumerate_six_cycles(self.g)
        for cid, cyc in enumerate(cycles):
            self.viol.append([0, 0])
            eids = []
            flips = []
            for i in range(6):
                u, w = cyc[i], cyc[(i + 1) % 6]
                e = self.g.edge_between(u, w)
                eids.append(e)
                flips.append(self.g.endpoints(e) != (u, w))
            for s in range(6):
                e = eids[s]
                a, bb, cc = eids[(s + 2) % 6], eids[(s + 3) % 6], eids[(s + 4) % 6]
                # branch 0: b before a and b before c (traversal order);
                # branch 1: the mirror.  Stored order flips with the edge.
                if flips[s]:
                    pairs0 = [(a, bb), (cc, bb)]
                    pairs1 = [(bb, a), (bb, cc)]
                else:
                    pairs0 = [(bb, a), (bb, cc)]
                    pairs1 = [(a, bb), (cc, bb)]
                for x, y in pairs0:
                    self.constraints_by_edge.setdefault(e, []).append((cid, 0, x, y))
                for x, y in pairs1:
                    self.constraints_by_edge.setdefault(e, []).append((cid, 1, x, y))

    def _rotation_updates(self, e: int, new: int) -> list[tuple[int, int]]:
        """Constraint violations newly determined by adding `new` to pi[e]."""
        cons = self.constraints_by_edge.get(e)
        if not cons:
            return []
        pi = self.pi[e]
        hits: list[tuple[int, int]] = []
        for cid, branch, x, y in cons:
            if new == x:
                other = y
            elif new == y:
                other = x
            else:
                continue
            try:
                ix = pi.index(x)
                iy = pi.index(y)
            except ValueError:
                continue
            if ix > iy:  # violated: x must precede y
                hits.append((cid, branch))
        return hits

    def _apply_rotation(self, hits: list[tuple[int, int]]) -> None:
        for cid, branch in hits:
            v = self.viol[cid]
            v[branch] += 1
            if v[branch] == 1 and v[1 - branch] >= 1:
                self.blocked += 1

    def _undo_rotation(self, hits: list[tuple[int, int]]) -> None:
        for cid, branch in reversed(hits):
            v = self.viol[cid]
            if v[branch] == 1 and v[1 - branch] >= 1:
                self.blocked -= 1
            v[branch] -= 1

    # -- symmetry ---------------------------------------------------------------

    def _build_symmetry_orbits(self) -> None:
        """Restrict the first crossing partner to orbit representatives under
        automorphisms fixing the first scheduled edge with its orientation."""
        first = None
        processed = 0
        for idx, e in enumerate(self.eo):
            processed |= 1 << e
            if self.disjoint_mask[e] & processed & ~(1 << e):
                first = e
                break
        if first is None:
            return
        autos = _automorphisms(self.g)
        tail, head = self.g.endpoints(first)
        stab = [a for a in autos if a[tail] == tail and a[head] == head]
        edge_map = {}
        for e, (u, v) in enumerate(self.g.edges):
            edge_map[(u, v)] = e
            edge_map[(v, u)] = e
        candidates = [f for f in range(self.m) if (self.disjoint_mask[first] >> f) & 1]
        seen: set[int] = set()
        allowed: set[int] = set()
        for f in sorted(candidates):
            if f in seen:
                continue
            allowed.add(f)
            for a in stab:
                u, v = self.g.edges[f]
                seen.add(edge_map[(a[u], a[v])])
        self.sym_allowed_first = allowed
        self.sym_first_edge = first

    # -- gadget + planarity -----------------------------------------------------

    def _planar_now(self) -> bool:
        self.stats.planarity_calls += 1
        n, edges = self._partial_gadget_fast()
        return planar_check(n, edges)

    def _partial_gadget_fast(self) -> tuple[int, list[tuple[int, int]]]:
        """Dense rebuild used in the hot loop."""
        n = self.n
        m = self.m
        pi = self.pi
        edges_g = self.g.edges
        xid: dict[int, int] = {}
        next_id = n
        out: list[tuple[int, int]] = []
        # neighbors around each crossing: {x: [prev_e, next_e, prev_f, nxt_f]}
        # where "e" is the smaller edge id of the pair.
        nbr: dict[int, list[int]] = {}
        pending_sub: list[tuple[int, int, int, bool, bool]] = []
        for e in range(m):
            lst = pi[e]
            u, v = edges_g[e]
            if not lst:
                out.append((u, v))
                continue
            stops = [u]
            firsts = [False]
            for f in lst:
                key = (e * m + f) if e < f else (f * m + e)
                x = xid.get(key)
                if x is None:
                    x = next_id
                    next_id += 1
                    xid[key] = x
                    nbr[x] = [-1, -1, -1, -1]
                stops.append(x)
                firsts.append(e < f)
            stops.append(v)
            firsts.append(False)
            for i in range(len(stops) - 1):
                a, b = stops[i], stops[i + 1]
                if a >= n and b >= n:
                    pending_sub.append((a, b, e, firsts[i], firsts[i + 1]))
                else:
                    out.append((a, b))
                    if a >= n:
                        nbr[a][1 if firsts[i] else 3] = b
                    if b >= n:
                        nbr[b][0 if firsts[i + 1] else 2] = a
        for a, b, e, fa, fb in pending_sub:
            w = next_id
            next_id += 1
            out.append((a, w))
            out.append((w, b))
            nbr[a][1 if fa else 3] = w
            nbr[b][0 if fb else 2] = w
        for x in nbr:
            pe, ne, pf, nf = nbr[x]
            out.append((pe, pf))
            out.append((pf, ne))
            out.append((ne, nf))
            out.append((nf, pe))
        return next_id, out

    # -- main recursion ---------------------------------------------------------

    def run_decide(self) -> Decision:
        t0 = time.monotonic()
        try:
            found = self._extend(0, self._initial_mask())
        except _LimitHit:
            self.stats.wall_time = time.monotonic() - t0
            return Decision(INCONCLUSIVE, self.stats)
        self.stats.wall_time = time.monotonic() - t0
        if found is not None:
            report = validate_witness(found)
            if not report.passed:
                raise RuntimeError(
                    "search produced a non-validating witness: " + "; ".join(report.failures)
                )
            return Decision(THRACKLEABLE, self.stats, witness=found)
        return Decision(
            NOT_THRACKLEABLE,
            self.stats,
            exhausted_nodes=self.stats.nodes,
            max_depth=self.stats.max_depth,
        )

    def run_enumerate(self, limit: int, prune: bool) -> tuple[list[ThrackleWitness], SearchStats]:
        t0 = time.monotonic()
        self.collect = []
        self.collect_limit = limit
        self.prune_planarity = prune
        try:
            self._extend(0, self._initial_mask())
        except _LimitHit:
            pass
        self.stats.wall_time = time.monotonic() - t0
        return self.collect, self.stats

    def _initial_mask(self) -> int:
        return (1 << self.eo[0]) if self.m else 0

    def _tick(self) -> None:
        self.stats.nodes += 1
        if self.opts.node_limit is not None and self.stats.nodes > self.opts.node_limit:
            raise _LimitHit
        if self.stats.nodes % 256 == 0 and self.deadline is not None:
            if time.monotonic() > self.deadline:
                raise _LimitHit
        if self.opts.progress is not None and self.stats.nodes % self.opts.progress_every == 0:
            self.opts.progress(self.stats)

    def _emit_witness(self) -> ThrackleWitness:
        # Flip schedules back to the input graph's stored orientations.
        lists = []
        for e in range(self.m):
            lst = list(self.pi[e])
            if self.flipped[e]:
                lst.reverse()
            lists.append(lst)
        schedule = CrossingSchedule.from_lists(lists)
        return make_witness(self.orig, schedule)

    def _extend(self, k: int, processed: int) -> ThrackleWitness | None:
        if k >= self.m:
            # complete schedule; planarity held along the way (or is checked
            # at the leaf when pruning is off)
            self.stats.leaves += 1
            if not self.prune_planarity and not self._planar_now():
                return None
            w = self._emit_witness()
            if self.collect is not None:
                rep = validate_witness(w)
                if rep.passed:
                    self.collect.append(w)
                    if len(self.collect) >= self.collect_limit:
                        raise _LimitHit
                return None
            return w
        e = self.eo[k]
        rem = self.disjoint_mask[e] & processed & ~self.crossed[e]
        if rem == 0:
            nxt = k + 1
            if nxt < self.m:
                return self._extend(nxt, processed | (1 << self.eo[nxt]))
            return self._extend(nxt, processed)
        first_move = (
            self.sym_allowed_first is not None
            and e == self.sym_first_edge
            and self.crossed[e] == 0
        )
        forced = self.forced_first
        f_mask = rem
        while f_mask:
            f = (f_mask & -f_mask).bit_length() - 1
            f_mask &= f_mask - 1
            if forced is not None and f != forced[0]:
                continue
            if first_move and f not in self.sym_allowed_first:
                continue
            pif = self.pi[f]
            for pos in range(len(pif) + 1):
                if forced is not None and pos != forced[1]:
                    continue
                self._tick()
                pif.insert(pos, e)
                self.pi[e].append(f)
                self.crossed[e] |= 1 << f
                self.crossed[f] |= 1 << e
                self.depth += 1
                if self.depth > self.stats.max_depth:
                    self.stats.max_depth = self.depth
                hits: list[tuple[int, int]] = []
                ok = True
                if self.viol:
                    hits = self._rotation_updates(e, f) + self._rotation_updates(f, e)
                    self._apply_rotation(hits)
                    if self.blocked:
                        ok = False
                        self.stats.rotation_prunes += 1
                if ok and self.prune_planarity and not self._planar_now():
                    ok = False
                    self.stats.planarity_prunes += 1
                if ok:
                    self.forced_first = None
                    result = self._extend(k, processed)
                    self.forced_first = forced
                    if result is not None:
                        return result
                if hits:
                    self._undo_rotation(hits)
                self.depth -= 1
                self.crossed[e] &= ~(1 << f)
                self.crossed[f] &= ~(1 << e)
                self.pi[e].pop()
                pif.pop(pos)
        return None


def _automorphisms(g: Graph) -> list[tuple[int, ...]]:
    """All vertex automorphisms by degree-refined backtracking (small n)."""
    degs = [g.degree(v) for v in range(g.n)]
    adj_sets = [frozenset(g.neighbors(v)) for v in range(g.n)]
    perm = [-1] * g.n
    used = [False] * g.n
    out: list[tuple[int, ...]] = []

    def ok(v: int, w: int) -> bool:
        if degs[v] != degs[w]:
            return False
        for u in adj_sets[v]:
            if perm[u] != -1 and perm[u] not in adj_sets[w]:
                return False
        for u in range(g.n):
            if perm[u] == -1:
                continue
            if u in adj_sets[v] and perm[u] not in adj_sets[w]:
                return False
            if u not in adj_sets[v] and perm[u] in adj_sets[w]:
                return False
        return True

    def rec(v: int):
        if v == g.n:
            out.append(tuple(perm))
            return
        for w in range(g.n):
            if not used[w] and ok(v, w):
                perm[v] = w
                used[w] = True
                rec(v + 1)
                used[w] = False
                perm[v] = -1

    rec(0)
    return out


def _first_branch_moves(searcher: _Searcher) -> list[tuple[int, int]]:
    """Top-level (partner, position) choices of the first branching edge."""
    processed = 0
    for idx, e in enumerate(searcher.eo):
        processed |= 1 << e
        rem = searcher.disjoint_mask[e] & processed & ~(1 << e)
        if rem:
            moves = []
            f_mask = rem
            while f_mask:
                f = (f_mask & -f_mask).bit_length() - 1
                f_mask &= f_mask - 1
                moves.append((f, 0))
            return moves
    return []


def _branch_worker(args) -> tuple[str, int, bytes | None, dict]:
    import pickle

    n, edges, opts_dict, move = args
    g = Graph(n, [tuple(e) for e in edges])
    opts = SearchOptions(**opts_dict)
    opts.parallel_branching = False
    opts.progress = None
    searcher = _Searcher(g, opts)
    searcher.forced_first = move
    decision = searcher.run_decide()
    witness_blob = None
    if decision.witness is not None:
        witness_blob = pickle.dumps(decision.witness)
    stats = {
        "nodes": decision.stats.nodes,
        "planarity_calls": decision.stats.planarity_calls,
        "planarity_prunes": decision.stats.planarity_prunes,
        "rotation_prunes": decision.stats.rotation_prunes,
        "leaves": decision.stats.leaves,
        "max_depth": decision.stats.max_depth,
    }
    return decision.outcome, decision.stats.nodes, witness_blob, stats


def is_thrackleable(g: Graph, opts: SearchOptions | None = None) -> Decision:
    """Decide whether g can be drawn as a thrackle.

    Deterministic for fixed options (parallel branching changes only wall
    time and per-branch stats attribution, never the outcome).
    """
    opts = opts or SearchOptions()
    if not is_connected(g):
        raise ValueError("is_thrackleable expects a connected graph")
    if opts.parallel_branching and opts.jobs > 1:
        return _parallel_decide(g, opts)
    searcher = _Searcher(g, opts)
    return searcher.run_decide()


def _parallel_decide(g: Graph, opts: SearchOptions) -> Decision:
    import pickle

    searcher = _Searcher(g, opts)
    moves = _first_branch_moves(searcher)
    if not moves:
        return searcher.run_decide()
    opts_dict = {
        "edge_order": opts.edge_order,
        "prune_c6_rotation": opts.prune_c6_rotation,
        "symmetry_break_first_edge": opts.symmetry_break_first_edge,
        "node_limit": opts.node_limit,
        "time_limit": opts.time_limit,
    }
    args = [(g.n, list(g.edges), opts_dict, mv) for mv in moves]
    stats = SearchStats()
    t0 = time.monotonic()
    inconclusive = False
    witness: ThrackleWitness | None = None
    with ProcessPoolExecutor(max_workers=opts.jobs) as pool:
        futures = {pool.submit(_branch_worker, a): a for a in args}
        pending = set(futures)
        while pending:
            done, pending = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                outcome, _, blob, st = fut.result()
                sub = SearchStats(**st)
                stats.merge(sub)
                if outcome == THRACKLEABLE and witness is None:
                    witness = pickle.loads(blob)
                    for p in pending:
                        p.cancel()
                    pending = set()
                    break
                if outcome == INCONCLUSIVE:
                    inconclusive = True
    stats.wall_time = time.monotonic() - t0
    if witness is not None:
        return Decision(THRACKLEABLE, stats, witness=witness)
    if inconclusive:
        return Decision(INCONCLUSIVE, stats)
    return Decision(NOT_THRACKLEABLE, stats, exhausted_nodes=stats.nodes, max_depth=stats.max_depth)


def enumerate_witnesses(
    g: Graph,
    opts: SearchOptions | None = None,
    limit: int | None = None,
    prune: bool = True,
) -> tuple[list[ThrackleWitness], SearchStats]:
    """Collect witnesses; with prune=False the traversal visits every
    complete schedule (the brute-force oracle used by the tests)."""
    opts = opts or SearchOptions()
    searcher = _Searcher(g, opts)
    cap = limit if limit is not None else (1 << 62)
    return searcher.run_enumerate(cap, prune)
