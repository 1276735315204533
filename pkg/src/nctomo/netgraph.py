"""Directed acyclic networks with unit-capacity edges and their flow structure."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .errors import GenerationError, UsageError


class Edge(NamedTuple):
    """The ``k``-th parallel edge from ``tail`` to ``head``."""

    tail: str
    head: str
    k: int = 0

    @property
    def label(self) -> str:
        return f"{self.tail}:{self.head}:{self.k}"

    @classmethod
    def parse(cls, token: str) -> Edge:
        parts = token.split(":")
        if len(parts) == 2:
            return cls(parts[0], parts[1], 0)
        if len(parts) != 3:
            raise UsageError(f"bad edge token {token!r}")
        return cls(parts[0], parts[1], int(parts[2]))


@dataclass(frozen=True)
class ConnectivityProfile:
    min_out_degree: int
    min_in_degree: int
    kind: str  # weak | strong | locate-adv
    z: int = 0

    def __post_init__(self):
        if self.min_out_degree < 0 or self.min_in_degree < 0 or self.z < 0:
            raise UsageError("profile parameters must be nonnegative")
        if self.kind not in ("weak", "strong", "locate-adv"):
            raise UsageError(f"unknown profile kind {self.kind!r}")

    @classmethod
    def weak(cls) -> ConnectivityProfile:
        return cls(2, 0, "weak")

    @classmethod
    def strong(cls, z: int) -> ConnectivityProfile:
        return cls(2 * z + 1, 2 * z + 1, "strong", z)

    @classmethod
    def locate_adv(cls, z: int) -> ConnectivityProfile:
        return cls(2 * z, 0, "locate-adv", z)

    @classmethod
    def from_name(cls, name: str, z: int = 1) -> ConnectivityProfile:
        if name == "weak":
            return cls.weak()
        if name == "strong":
            return cls.strong(z)
        if name == "locate-adv":
            return cls.locate_adv(z)
        raise UsageError(f"unknown profile {name!r}")


class Network:
    """A DAG ``(nodes, edges)`` with a source and a receiver.

    Edges are stored sorted by (tail position, head position, parallel index),
    which fixes the order of ``in_edges(receiver)`` and hence the coordinate
    order of every impulse response vector.
    """

    def __init__(self, nodes: Iterable[str], edges: Iterable, source: str, receiver: str):
        self.nodes = tuple(str(n) for n in nodes)
        if len(set(self.nodes)) != len(self.nodes):
            raise UsageError("duplicate node labels")
        self._idx = {n: i for i, n in enumerate(self.nodes)}
        for lab in (source, receiver):
            if lab not in self._idx:
                raise UsageError(f"unknown node {lab!r}")
        self.source = source
        self.receiver = receiver
        es = []
        for e in edges:
            e = Edge(*e)
            if e.tail not in self._idx or e.head not in self._idx:
                raise UsageError(f"edge {e.label} references an unknown node")
            if e.tail == e.head:
                raise UsageError(f"self loop {e.label}")
            es.append(e)
        if len(set(es)) != len(es):
            raise UsageError("duplicate edge")
        es.sort(key=lambda e: (self._idx[e.tail], self._idx[e.head], e.k))
        self.edges = tuple(es)
        self._edge_pos = {e: i for i, e in enumerate(self.edges)}
        self._in = {n: [] for n in self.nodes}
        self._out = {n: [] for n in self.nodes}
        for e in self.edges:
            self._out[e.tail].append(e)
            self._in[e.head].append(e)
        self._topo = self._toposort()

    def _toposort(self) -> tuple:
        indeg = {n: len(self._in[n]) for n in self.nodes}
        ready = deque(n for n in self.nodes if indeg[n] == 0)
        order = []
        while ready:
            n = ready.popleft()
            order.append(n)
            for e in self._out[n]:
                indeg[e.head] -= 1
                if indeg[e.head] == 0:
                    ready.append(e.head)
        if len(order) != len(self.nodes):
            raise UsageError("network has a cycle")
        return tuple(order)

    # -- structure ----------------------------------------------------------

    def in_edges(self, v: str) -> list:
        return list(self._in[v])

    def out_edges(self, v: str) -> list:
        return list(self._out[v])

    @property
    def topo_order(self) -> tuple:
        return self._topo

    @property
    def capacity(self) -> int:
        return len(self._out[self.source])

    @property
    def internal_nodes(self) -> list:
        return [n for n in self.nodes if n not in (self.source, self.receiver)]

    def node_index(self, v: str) -> int:
        return self._idx[v]

    def edge_index(self, e: Edge) -> int:
        return self._edge_pos[e]

    def has_edge(self, e) -> bool:
        return Edge(*e) in self._edge_pos

    def edge_topo_order(self) -> list:
        """Edges ordered so every edge precedes the edges leaving its head."""
        return [e for n in self._topo for e in self._out[n]]

    def reachable_from(self, v: str) -> set:
        seen = {v}
        stack = [v]
        while stack:
            n = stack.pop()
            for e in self._out[n]:
                if e.head not in seen:
                    seen.add(e.head)
                    stack.append(e.head)
        return seen

    def with_edges(self, edges: Iterable) -> Network:
        return Network(self.nodes, edges, self.source, self.receiver)

    def validate(self) -> list:
        """Violations of the full network normalization (empty when valid)."""
        out = []
        if self._in[self.source]:
            out.append("source has incoming edges")
        if self._out[self.receiver]:
            out.append("receiver has outgoing edges")
        for n in self.nodes:
            if n != self.receiver and self.receiver not in self.reachable_from(n):
                out.append(f"node {n} has no path to the receiver")
        c_out = len(self._out[self.source])
        c_in = len(self._in[self.receiver])
        if c_out != c_in:
            out.append(f"|Out(s)|={c_out} differs from |In(r)|={c_in}")
        mc = min_cut(self)
        if mc != c_out:
            out.append(f"min cut {mc} differs from |Out(s)|={c_out}")
        return out

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Network)
            and set(self.nodes) == set(other.nodes)
            and set(self.edges) == set(other.edges)
            and self.source == other.source
            and self.receiver == other.receiver
        )

    def __hash__(self) -> int:
        return hash((frozenset(self.nodes), frozenset(self.edges), self.source, self.receiver))

    def __repr__(self) -> str:
        return f"Network({len(self.nodes)} nodes, {len(self.edges)} edges, C={self.capacity})"

    # -- text format ----------------------------------------------------------

    def to_text(self) -> str:
        lines = [f"node {n}" for n in self.nodes]
        lines += [f"edge {e.tail} {e.head} {e.k}" for e in self.edges]
        lines += [f"source {self.source}", f"receiver {self.receiver}"]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Network:
        nodes, edges = [], []
        source = receiver = None
        counts: dict = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            kw = parts[0]
            try:
                if kw == "node" and len(parts) == 2:
                    nodes.append(parts[1])
                elif kw == "edge" and len(parts) in (3, 4):
                    pair = (parts[1], parts[2])
                    if len(parts) == 4:
                        k = int(parts[3])
                    else:
                        k = counts.get(pair, 0)
                    counts[pair] = max(counts.get(pair, 0), k + 1)
                    edges.append(Edge(parts[1], parts[2], k))
                elif kw == "source" and len(parts) == 2:
                    source = parts[1]
                elif kw == "receiver" and len(parts) == 2:
                    receiver = parts[1]
                else:
                    raise ValueError
            except ValueError:
                raise UsageError(f"line {lineno}: cannot parse {raw!r}") from None
        if source is None or receiver is None:
            raise UsageError("network file needs both 'source' and 'receiver'")
        return cls(nodes, edges, source, receiver)


# ---------------------------------------------------------------------------
# max-flow
# ---------------------------------------------------------------------------


def _max_flow(n_vertices: int, arcs: Sequence[tuple], s: int, t: int) -> int:
    """Unit-capacity max-flow by BFS augmenting paths (Edmonds-Karp)."""
    if s == t:
        raise UsageError("source equals sink")
    head, cap, nxt = [], [], []
    first = [-1] * n_vertices

    def add(u, v, c):
        for a, b, cc in ((u, v, c), (v, u, 0)):
            head.append(b)
            cap.append(cc)
            nxt.append(first[a])
            first[a] = len(head) - 1

    for u, v, c in arcs:
        add(u, v, c)
    flow = 0
    while True:
        parent_arc = [-1] * n_vertices
        parent_arc[s] = -2
        queue = deque([s])
        while queue and parent_arc[t] == -1:
            u = queue.popleft()
            a = first[u]
            while a != -1:
                v = head[a]
                if cap[a] > 0 and parent_arc[v] == -1:
                    parent_arc[v] = a
                    queue.append(v)
                a = nxt[a]
        if parent_arc[t] == -1:
            return flow
        v = t
        while v != s:
            a = parent_arc[v]
            cap[a] -= 1
            cap[a ^ 1] += 1
            v = head[a ^ 1]
        flow += 1


def min_cut(net: Network) -> int:
    arcs = [(net.node_index(e.tail), net.node_index(e.head), 1) for e in net.edges]
    return _max_flow(len(net.nodes), arcs, net.node_index(net.source), net.node_index(net.receiver))


def _split_arcs(net: Network, marked: Sequence[Edge]):
    """Arcs with each marked edge split at a midpoint vertex.

    Returns ``(arcs, midpoint_ids, next_free_vertex)``.
    """
    marked_set = set(marked)
    n = len(net.nodes)
    mids = {}
    arcs = []
    for e in net.edges:
        u, v = net.node_index(e.tail), net.node_index(e.head)
        if e in marked_set:
            m = n + len(mids)
            mids[e] = m
            arcs.append((u, m, 1))
            arcs.append((m, v, 1))
        else:
            arcs.append((u, v, 1))
    return arcs, mids, n + len(mids)


def flow_rank(net: Network, edge_set: Iterable) -> int:
    """Max-flow to the receiver from a super-source feeding each edge's midpoint."""
    marked = [Edge(*e) for e in edge_set]
    for e in marked:
        if not net.has_edge(e):
            raise UsageError(f"edge {e.label} not in network")
    if not marked:
        return 0
    arcs, mids, free = _split_arcs(net, marked)
    src = free
    arcs += [(src, m, 1) for m in mids.values()]
    return _max_flow(free + 1, arcs, src, net.node_index(net.receiver))


def source_flow_to(net: Network, edge_set: Iterable) -> int:
    """Max-flow from the source that ends by traversing each edge of the set."""
    marked = [Edge(*e) for e in edge_set]
    if not marked:
        return 0
    arcs, mids, free = _split_arcs(net, marked)
    sink = free
    arcs += [(m, sink, 1) for m in mids.values()]
    return _max_flow(free + 1, arcs, net.node_index(net.source), sink)


def node_flow(net: Network, a: str, b: str) -> int:
    arcs = [(net.node_index(e.tail), net.node_index(e.head), 1) for e in net.edges]
    return _max_flow(len(net.nodes), arcs, net.node_index(a), net.node_index(b))


def flow_independent(net: Network, sets: Sequence[Iterable]) -> bool:
    sets = [list(s) for s in sets]
    union = {Edge(*e) for s in sets for e in s}
    return flow_rank(net, union) == sum(flow_rank(net, s) for s in sets)


def extended_set(net: Network, edge_set: Iterable, order: Sequence[Edge] | None = None) -> frozenset:
    """Largest superset of ``edge_set`` with the same flow-rank."""
    current = {Edge(*e) for e in edge_set}
    base = flow_rank(net, current)
    scan = list(net.edges) if order is None else [Edge(*e) for e in order]
    changed = True
    while changed:
        changed = False
        for e in scan:
            if e in current:
                continue
            if flow_rank(net, current | {e}) == base:
                current.add(e)
                changed = True
    return frozenset(current)


# ---------------------------------------------------------------------------
# profiles and random generation
# ---------------------------------------------------------------------------


def check_profile(net: Network, profile: ConnectivityProfile):
    """Return ``(ok, violations)`` for the degree requirements of ``profile``.

    The strong kind also checks that every internal node has max-flow at
    least ``2z+1`` from the source and to the receiver.
    """
    violations = []
    for v in net.internal_nodes:
        dout, din = len(net.out_edges(v)), len(net.in_edges(v))
        if dout < profile.min_out_degree:
            violations.append(f"{v}: out-degree {dout} < {profile.min_out_degree}")
        if din < profile.min_in_degree:
            violations.append(f"{v}: in-degree {din} < {profile.min_in_degree}")
    if profile.kind == "strong" and not violations:
        need = 2 * profile.z + 1
        for v in net.internal_nodes:
            f_in = node_flow(net, net.source, v)
            f_out = node_flow(net, v, net.receiver)
            if f_in < need or f_out < need:
                violations.append(f"{v}: connectivity ({f_in}, {f_out}) below {need}")
    return not violations, violations


def random_network(
    num_nodes: int,
    capacity: int,
    profile: ConnectivityProfile,
    rng: np.random.Generator,
    max_tries: int = 500,
    extra_degree: int = 2,
) -> Network:
    """Random DAG on ``num_nodes`` nodes (source ``s``, receiver ``r``, ``v1``...).

    Nodes are placed in a fixed topological order and wired by consuming
    outgoing "stubs" of earlier nodes; candidates violating the profile or
    the min-cut normalization are rejected and regenerated.
    """
    k = num_nodes - 2
    if k < 1 or capacity < 1:
        raise UsageError("need at least one internal node and capacity >= 1")
    min_out = max(profile.min_out_degree, 1)
    min_in = max(profile.min_in_degree, 1)
    if capacity < min_in:
        raise GenerationError(f"capacity {capacity} cannot feed in-degree {min_in}")
    internal = [f"v{i + 1}" for i in range(k)]
    nodes = ["s", *internal, "r"]
    for _ in range(max_tries):
        pool = ["s"] * capacity
        pairs = []
        ok = True
        for i, v in enumerate(internal):
            avail = len(pool)
            last = i == k - 1
            lo_m = min_in
            if last:
                lo_m = max(lo_m, avail - capacity + min_out)
            hi_m = max(lo_m, min(avail, min_in + extra_degree))
            if last:
                hi_m = max(hi_m, lo_m)
            if lo_m > avail or hi_m > avail:
                ok = False
                break
            m = int(rng.integers(lo_m, hi_m + 1))
            chosen = rng.choice(avail, size=m, replace=False)
            taken = set(int(c) for c in chosen)
            pairs += [(pool[c], v) for c in sorted(taken)]
            pool = [t for j, t in enumerate(pool) if j not in taken]
            if last:
                d = capacity - len(pool)
            else:
                lo_d = max(min_out, capacity - len(pool))
                d = int(rng.integers(lo_d, lo_d + extra_degree + 1))
            pool += [v] * d
        if not ok or len(pool) != capacity:
            continue
        pairs += [(t, "r") for t in pool]
        counts: dict = {}
        edges = []
        for t, h in pairs:
            j = counts.get((t, h), 0)
            counts[(t, h)] = j + 1
            edges.append(Edge(t, h, j))
        net = Network(nodes, edges, "s", "r")
        if net.validate():
            continue
        if not check_profile(net, profile)[0]:
            continue
        return net
    raise GenerationError(
        f"no network with {num_nodes} nodes, C={capacity}, profile {profile.kind} after {max_tries} tries"
    )
