"""Topology estimation and fault localization from receiver-side data.

Everything here consumes only what the receiver can see: received matrices,
decoded messages, codebooks or ID tables, and (for the localization routines
that assume a known topology) an :class:`~nctomo.codes.IrvTable`.
"""

from __future__ import annotations

import itertools
import json
import logging
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import linalg
from .codes import Codebook, IdTable, IrvTable, assign_rlnc, compute_irvs, transfer_matrix
from .errors import NoMatchError, ScaleCapError, UndecodableError, UsageError
from .netgraph import ConnectivityProfile, Edge, Network, check_profile
from .rscode import RsParitySpec, rs_decode

log = logging.getLogger(__name__)


class CandidateLines:
    """Deduplicated one-dimensional subspaces, each with the pairs that produced it."""

    def __init__(self, q: int):
        self.q = q
        self._lines: dict = {}

    def add(self, vec, provenance=None) -> tuple:
        line = linalg.canonical_line(vec, self.q)
        self._lines.setdefault(line, [])
        if provenance is not None:
            self._lines[line].append(provenance)
        return line

    def __contains__(self, vec) -> bool:
        v = linalg.as_vector(vec, self.q)
        if not v.any():
            return False
        return linalg.canonical_line(v, self.q) in self._lines

    def __iter__(self):
        return iter(sorted(self._lines))

    def __len__(self) -> int:
        return len(self._lines)

    def provenance(self, vec) -> list:
        return list(self._lines.get(linalg.canonical_line(vec, self.q), []))


@dataclass
class TomographyReport:
    kind: str  # topology | edge-set | estimate
    algorithm: str
    recovered: object  # Network, frozenset of edges, or float
    diagnostics: dict = field(default_factory=dict)

    def _payload(self) -> dict:
        if isinstance(self.recovered, Network):
            rec = {
                "nodes": list(self.recovered.nodes),
                "source": self.recovered.source,
                "receiver": self.recovered.receiver,
                "edges": [e.label for e in self.recovered.edges],
            }
        elif isinstance(self.recovered, (set, frozenset, list, tuple)):
            rec = {"edges": sorted(Edge(*e).label for e in self.recovered)}
        else:
            rec = {"value": self.recovered}
        return {"kind": self.kind, "algorithm": self.algorithm, "recovered": rec, "diagnostics": self.diagnostics}

    def to_json(self) -> str:
        return json.dumps(self._payload(), sort_keys=True, default=str)

    def to_text(self) -> str:
        p = self._payload()
        lines = ["report", f"kind {self.kind}", f"algorithm {self.algorithm}"]
        rec = p["recovered"]
        if "nodes" in rec:
            lines += [f"node {v}" for v in rec["nodes"]]
            lines += [f"source {rec['source']}", f"receiver {rec['receiver']}"]
            lines += ["edge " + " ".join(lbl.split(":")) for lbl in rec["edges"]]
        elif "edges" in rec:
            lines += [f"located {lbl}" for lbl in rec["edges"]]
        else:
            lines.append(f"value {rec['value']}")
        for k in sorted(self.diagnostics):
            lines.append(f"diag {k} {json.dumps(self.diagnostics[k], default=str)}")
        lines.append("end")
        return "\n".join(lines) + "\n"


# -- adversarial topology matching -------------------------------------------


def enumerate_candidates(
    nodes: Sequence[str],
    source: str,
    receiver: str,
    C: int,
    max_multiplicity: int = 1,
    profile: ConnectivityProfile | None = None,
    max_candidates: int = 100_000,
) -> list:
    """Every valid network on ``nodes`` with capacity ``C`` (parallel edges up to ``max_multiplicity``)."""
    pairs = [(u, v) for u in nodes for v in nodes if u != v and v != source and u != receiver]
    total = (max_multiplicity + 1) ** len(pairs)
    if total > max_candidates:
        raise ScaleCapError(f"{total} multiplicity patterns exceed the cap of {max_candidates}")
    out = []
    for mult in itertools.product(range(max_multiplicity + 1), repeat=len(pairs)):
        edges = [Edge(u, v, k) for (u, v), m in zip(pairs, mult) for k in range(m)]
        try:
            net = Network(nodes, edges, source, receiver)
        except UsageError:
            continue  # cyclic
        if len(net.in_edges(receiver)) != C or net.validate():
            continue
        if profile is not None and not check_profile(net, profile)[0]:
            continue
        out.append(net)
    return out


def _candidate_key(net: Network):
    return (len(net.edges), sorted(net.edges))


def topo_adv_rlnc(
    T_e,
    cb: Codebook,
    nodes: Sequence[str] | None = None,
    z: int = 0,
    candidates: Sequence[Network] | None = None,
    profile: ConnectivityProfile | None = None,
    *,
    source: str = "s",
    receiver: str = "r",
    max_multiplicity: int = 1,
    max_nodes: int = 4,
) -> Network:
    """First candidate (by edge count, then edge list) with ``rank(T(G) - T_e) <= z``."""
    if cb.kind != "strong":
        raise UsageError("adversarial topology matching needs a strong codebook")
    q = cb.q
    T_e = linalg.as_matrix(T_e, q)
    if candidates is None:
        if nodes is None:
            raise UsageError("give either a node set or an explicit candidate list")
        if len(nodes) > max_nodes:
            raise ScaleCapError(f"exhaustive enumeration over {len(nodes)} nodes exceeds the cap of {max_nodes}")
        candidates = enumerate_candidates(list(nodes), source, receiver, T_e.shape[0], max_multiplicity, profile)
    for net in sorted(candidates, key=_candidate_key):
        if len(net.in_edges(net.receiver)) != T_e.shape[0]:
            continue
        T = transfer_matrix(net, assign_rlnc(net, cb))
        if T.shape == T_e.shape and linalg.rank((T - T_e) % q, q) <= z:
            return net
    raise NoMatchError("no candidate network explains the observed transfer matrix")


# -- topology from random errors ---------------------------------------------


class _Subspace:
    """Column space with its reduced basis and annihilator, computed once."""

    __slots__ = ("basis", "dim", "annih", "line")

    def __init__(self, z, q: int):
        self.basis = linalg.reduced_col_basis(np.asarray(z, dtype=np.int64) % q, q)
        self.dim = self.basis.shape[1]
        self.annih = linalg.null_space(self.basis.T, q).T if self.dim else None
        self.line = linalg.canonical_line(self.basis[:, 0], q) if self.dim == 1 else None


def _rank_one_intersection(a: _Subspace, b: _Subspace, q: int):
    """The line col(a) ∩ col(b) when that intersection has dimension exactly 1, else None."""
    if a.dim == 0 or b.dim == 0 or a.dim + b.dim - a.basis.shape[0] > 1:
        return None
    if a.dim == 1 and b.dim == 1:
        return a.line if a.line == b.line else None
    if a.dim == 1 or b.dim == 1:
        one, other = (a, b) if a.dim == 1 else (b, a)
        vec = np.array(one.line, dtype=np.int64)
        if other.annih.shape[0] == 0 or not linalg.matvec(other.annih, vec, q).any():
            return one.line
        return None
    inter = linalg.col_space_intersect(a.basis, b.basis, q)
    return inter[:, 0] if inter.shape[1] == 1 else None


def find_irv(error_matrices: Sequence, q: int) -> CandidateLines:
    """Rank-1 pairwise intersections of the error matrices' column spaces."""
    spaces = [_Subspace(z, q) for z in error_matrices]
    cand = CandidateLines(q)
    for i, j in itertools.combinations(range(len(spaces)), 2):
        line = _rank_one_intersection(spaces[i], spaces[j], q)
        if line is not None:
            cand.add(line, (i, j))
    return cand


def estimate_dependence(error_matrices: Sequence, q: int) -> float:
    """Fraction of pairs whose error column spaces meet only in zero."""
    if len(error_matrices) < 2:
        raise UsageError("need at least two traces to estimate dependence")
    spaces = [_Subspace(z, q) for z in error_matrices]
    pairs = list(itertools.combinations(range(len(spaces)), 2))
    trivial = sum(1 for i, j in pairs if _independent(spaces[i], spaces[j], q))
    return trivial / len(pairs)


def _independent(a: _Subspace, b: _Subspace, q: int) -> bool:
    if a.dim == 0 or b.dim == 0:
        return True
    if a.dim + b.dim > a.basis.shape[0]:
        return False
    return linalg.rank(np.concatenate([a.basis, b.basis], axis=1), q) == a.dim + b.dim


def _would_cycle(reach: dict, u: str, v: str) -> bool:
    return u in reach.get(v, ()) or u == v


def find_topo(
    cand: CandidateLines,
    cb: Codebook,
    nodes: Sequence[str],
    source: str,
    receiver: str,
    receiver_in_edges: Iterable,
    max_multiplicity: int = 1,
) -> Network:
    """Grow the network upstream from the receiver, keeping edges whose IRV is a candidate line."""
    if cb.kind != "weak":
        raise UsageError("topology growth uses the weak codebook")
    q = cb.q
    nodes = list(nodes)
    label_order = sorted(nodes)
    edges = sorted(Edge(*e) for e in receiver_in_edges)
    if not edges:
        raise UsageError("the receiver must know its incoming edges")
    net = Network(nodes, edges, source, receiver)
    stats = {"accepted": 0, "tests": 0, "passes": 0}
    changed = True
    while changed:
        changed = False
        stats["passes"] += 1
        table = compute_irvs(net, assign_rlnc(net, cb))
        reach = {v: net.reachable_from(v) for v in nodes}
        for v in reversed(net.topo_order):
            if v in (source, receiver):
                continue
            outs = net.out_edges(v)
            if len(outs) == 0 or linalg.rank(table.matrix(outs), q) < 2:
                continue
            for u in label_order:
                if u in (v, receiver) or _would_cycle(reach, u, v):
                    continue
                for k in range(max_multiplicity):
                    e = Edge(u, v, k)
                    if net.has_edge(e):
                        continue
                    stats["tests"] += 1
                    theta = np.zeros(table.transfer.shape[0], dtype=np.int64)
                    for o in outs:
                        b = cb.beta(e, o, outs)
                        theta = (theta + b * table.irv[o] % q) % q
                    if theta.any() and theta in cand:
                        net = net.with_edges(list(net.edges) + [e])
                        stats["accepted"] += 1
                        changed = True
                        break
                if changed:
                    break
            if changed:
                break
    log.debug("find_topo: %s", stats)
    return net


# -- localization with a known topology --------------------------------------


def locate_adversary_rlnc(Z_hat, irv: IrvTable, z_max: int, max_subsets: int = 200_000) -> frozenset:
    """Union, over independent error columns, of a smallest edge set whose IRVs explain it."""
    q = irv.q
    Z = linalg.as_matrix(Z_hat, q)
    if not Z.any():
        return frozenset()
    cols, _ = linalg.column_basis(Z, q)
    edges = list(irv.edges)
    thetas = irv.matrix(edges)
    usable = [i for i in range(len(edges)) if thetas[:, i].any()]
    budget = max_subsets
    out = set()
    for c in range(cols.shape[1]):
        col = cols[:, c]
        found = None
        for size in range(1, z_max + 1):
            for combo in itertools.combinations(usable, size):
                budget -= 1
                if budget < 0:
                    raise ScaleCapError(f"minimal-support search exceeded {max_subsets} subsets")
                sub = thetas[:, combo]
                if size > 1 and linalg.rank(sub, q) < size:
                    continue
                if linalg.col_space_contains(sub, col, q):
                    found = combo
                    break
            if found is not None:
                break
        if found is None:
            raise UndecodableError(f"an error column needs more than {z_max} edges to explain")
        out.update(edges[i] for i in found)
    return frozenset(out)


def _edges_in_span(Z, irv: IrvTable) -> frozenset:
    q = irv.q
    Z = np.asarray(Z, dtype=np.int64) % q
    if not Z.any():
        return frozenset()
    edges = list(irv.edges)
    thetas = irv.matrix(edges)
    mask = linalg.members_of_col_space(Z, thetas, q) & thetas.any(axis=0)
    return frozenset(e for e, m in zip(edges, mask) if m)


def locate_random_rlnc(Z_r, irv: IrvTable) -> frozenset:
    """Edges whose IRV lies in col(Z_r)."""
    return _edges_in_span(Z_r, irv)


def locate_erasures(Y, X, irv: IrvTable) -> frozenset:
    """Edges whose IRV lies in col(Y - T X)."""
    q = irv.q
    Z = (np.asarray(Y, dtype=np.int64) - linalg.matmul(irv.transfer, np.asarray(X, dtype=np.int64) % q, q)) % q
    return _edges_in_span(Z, irv)


def locate_delays(deviation, irv: IrvTable) -> frozenset:
    """Delays treated as erasures: ``deviation`` is the received matrix minus what was expected."""
    return _edges_in_span(deviation, irv)


def find_irv_erasure(received: Sequence, C: int, q: int) -> CandidateLines:
    """Candidate lines from pairwise header differences of received matrices.

    A difference that is itself rank 1 (for example against an erasure-free
    generation) is a candidate on its own; otherwise differences are paired
    up exactly as error matrices are.
    """
    heads = [np.asarray(y, dtype=np.int64)[:, :C] % q for y in received]
    diffs, cand = [], CandidateLines(q)
    for i, j in itertools.combinations(range(len(heads)), 2):
        d = (heads[i] - heads[j]) % q
        if not d.any():
            continue
        basis = linalg.reduced_col_basis(d, q)
        if basis.shape[1] == 1:
            cand.add(basis[:, 0], (i, j))
        diffs.append(((i, j), basis))
    for (pa, a), (pb, b) in itertools.combinations(diffs, 2):
        inter = linalg.col_space_intersect(a, b, q)
        if inter.shape[1] == 1:
            cand.add(inter[:, 0], (pa, pb))
    return cand


# -- NRSC --------------------------------------------------------------------


def _pair_spec(ids: IdTable, depth: int, node_set: Iterable[str] | None):
    pairs = ids.pairs()
    if node_set is not None:
        allowed = set(node_set)
        pairs = [p for p in pairs if p[0] in allowed and p[1] in allowed]
    return pairs, RsParitySpec(tuple(ids.id(p) for p in pairs), depth, ids.q)


def rs_residual(X, Y, ids: IdTable, d: int, receiver_in_edges: Sequence) -> np.ndarray:
    """``L = Phi(In(r), d) Y - X[:d]``; equals ``Phi(E', d) Z``."""
    q = ids.q
    X = np.asarray(X, dtype=np.int64) % q
    if d > X.shape[0]:
        raise UsageError(f"depth d={d} exceeds C={X.shape[0]}")
    phi = linalg.vandermonde([ids.id(e) for e in receiver_in_edges], d, q)
    return (linalg.matmul(phi, np.asarray(Y, dtype=np.int64) % q, q) - X[:d]) % q


def locate_adversary_rs(X, Y, ids: IdTable, d: int, receiver_in_edges: Sequence, node_set=None) -> frozenset:
    """Decode every column of ``L`` as a sparse combination of node-pair VIRVs."""
    L = rs_residual(X, Y, ids, d, receiver_in_edges)
    if not L.any():
        return frozenset()
    pairs, spec = _pair_spec(ids, d, node_set)
    found = set()
    for col in np.unique(L[:, L.any(axis=0)].T, axis=0):
        found.update(rs_decode(spec, col, d // 2))
    return frozenset(Edge(*pairs[i]) for i in found)


def locate_random_rs(X, Y, ids: IdTable, d: int, receiver_in_edges: Sequence, node_set=None) -> frozenset:
    """Node pairs whose depth-``d`` VIRV lies in col(L)."""
    L = rs_residual(X, Y, ids, d, receiver_in_edges)
    if not L.any():
        return frozenset()
    pairs, spec = _pair_spec(ids, d, node_set)
    mask = linalg.members_of_col_space(L, spec.matrix(), ids.q)
    return frozenset(Edge(*p) for p, m in zip(pairs, mask) if m)


def find_topo_rs(error_matrices: Sequence, ids: IdTable, receiver_in_edges: Sequence) -> frozenset:
    """Edges recovered from the ID ratio ``h2 / h1`` of each rank-1 intersection."""
    q = ids.q
    phi = linalg.vandermonde([ids.id(e) for e in receiver_in_edges], 2, q)
    found, skipped = set(), 0
    for line in find_irv(error_matrices, q):
        h1, h2 = (int(x) for x in linalg.matvec(phi, np.array(line, dtype=np.int64), q))
        if h1 == 0:
            skipped += 1
            continue
        ratio = h2 * pow(h1, q - 2, q) % q
        found.update(Edge(*p) for p in ids.lookup(ratio))
    if skipped:
        log.info("find_topo_rs skipped %d candidate lines with h1 = 0", skipped)
    return frozenset(found)
