"""Linear network codes: RLNC from shared codebooks, NRSC from node-pair IDs.

Local coefficients are keyed by ``(incoming edge, outgoing edge)``. The
source is treated as a node whose "incoming edges" are the ``C`` message
rows; its coefficients form the source mixing matrix ``S`` whose rows follow
``net.out_edges(source)``.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import linalg
from .errors import AssignmentError, InvalidIdError, SingularMatrixError, UsageError
from .field import DEFAULT_Q, field_pow
from .netgraph import Edge, Network

MSG = "#msg"  # tail label of the virtual message inputs at the source


def _derive(q: int, *parts) -> int:
    """Keyed pseudo-random residue; 128-bit digest so the mod-q bias is negligible."""
    h = hashlib.blake2b("\x1f".join(map(str, parts)).encode(), digest_size=16)
    return int.from_bytes(h.digest(), "big") % q


@dataclass(frozen=True)
class Codebook:
    """Per-node random codebooks shared with the receiver, derived from a seed."""

    kind: str  # weak | strong
    seed: int
    q: int = DEFAULT_Q

    def __post_init__(self):
        if self.kind not in ("weak", "strong"):
            raise UsageError(f"unknown codebook kind {self.kind!r}")

    def entry(self, v: str, key: tuple) -> int:
        return _derive(self.q, "R", self.kind, self.seed, v, *key)

    def beta(self, e_in: Edge, e_out: Edge, out_edges: Iterable[Edge]) -> int:
        """Local coefficient from ``e_in`` via ``e_in.head`` to ``e_out``.

        The strong kind sums over ``out_edges`` (the node's actual outgoing
        edges), so adding or removing any outgoing edge perturbs every
        coefficient of the node.
        """
        v = e_out.tail
        u, i = e_in.tail, e_in.k
        w, j = e_out.head, e_out.k
        if self.kind == "weak":
            return self.entry(v, (u, w, i, j))
        total = 0
        for e2 in out_edges:
            total += self.entry(v, (u, w, e2.head, i, j, e2.k))
        return total % self.q


def derive_codebook(kind: str, seed: int, q: int = DEFAULT_Q) -> Codebook:
    return Codebook(kind, int(seed), q)


class IdTable:
    """Nonzero, pairwise distinct IDs for every ordered node pair (and parallel index)."""

    def __init__(self, ids: Mapping, q: int, seed: int | None = None):
        self.q = q
        self.seed = seed
        self._ids = {}
        for key, val in ids.items():
            key = tuple(key) if len(key) == 3 else (key[0], key[1], 0)
            val = int(val) % q
            if val == 0:
                raise InvalidIdError(f"zero ID for {key}")
            self._ids[key] = val
        self._rev: dict = {}
        for key, val in self._ids.items():
            self._rev.setdefault(val, []).append(key)

    @classmethod
    def derive(cls, seed: int, nodes: Iterable[str], multiplicity: int = 1, q: int = DEFAULT_Q) -> IdTable:
        """IDs for all ``(u, v, k)`` with ``u != v`` and ``k < multiplicity``.

        Zero values and collisions are resampled from a fresh subkey.
        """
        nodes = list(nodes)
        needed = len(nodes) * (len(nodes) - 1) * multiplicity
        if needed > q - 1:
            raise InvalidIdError(f"{needed} distinct nonzero IDs do not fit in GF({q})")
        ids, used = {}, set()
        for u in nodes:
            for v in nodes:
                if u == v:
                    continue
                for k in range(multiplicity):
                    attempt = 0
                    while True:
                        val = _derive(q, "ID", seed, u, v, k, attempt)
                        if val != 0 and val not in used:
                            break
                        attempt += 1
                    ids[(u, v, k)] = val
                    used.add(val)
        return cls(ids, q, seed)

    def id(self, e) -> int:
        key = (e[0], e[1], e[2] if len(e) > 2 else 0)
        try:
            return self._ids[key]
        except KeyError:
            raise InvalidIdError(f"no ID for node pair {key}") from None

    def pairs(self) -> list:
        return list(self._ids)

    def lookup(self, value: int) -> list:
        return list(self._rev.get(int(value) % self.q, []))

    def __contains__(self, key) -> bool:
        return tuple(key) in self._ids

    def __len__(self) -> int:
        return len(self._ids)


def virv(id_value: int, depth: int, q: int) -> np.ndarray:
    """``[id, id**2, ..., id**depth]``."""
    if int(id_value) % q == 0:
        raise InvalidIdError("VIRV of a zero ID")
    return linalg.vandermonde([id_value], depth, q)[:, 0]


@dataclass
class CodingAssignment:
    scheme: str  # rlnc | nrsc | explicit
    q: int
    beta: dict  # (e_in, e_out) -> coefficient
    source_edges: tuple
    source_mix: np.ndarray  # rows follow source_edges, columns are message rows
    meta: dict = field(default_factory=dict)

    def coeff(self, e_in: Edge, e_out: Edge) -> int:
        return self.beta.get((e_in, e_out), 0)


def _source_mix_rlnc(net: Network, cb: Codebook, c_msg: int) -> np.ndarray:
    out_s = net.out_edges(net.source)
    mix = np.zeros((len(out_s), c_msg), dtype=np.int64)
    for r, e in enumerate(out_s):
        for m in range(c_msg):
            mix[r, m] = cb.beta(Edge(MSG, net.source, m), e, out_s)
    return mix


def assign_rlnc(net: Network, cb: Codebook) -> CodingAssignment:
    beta = {}
    for v in net.nodes:
        if v == net.source:
            continue
        outs = net.out_edges(v)
        for e_in in net.in_edges(v):
            for e_out in outs:
                beta[(e_in, e_out)] = cb.beta(e_in, e_out, outs)
    c_msg = len(net.in_edges(net.receiver))
    mix = _source_mix_rlnc(net, cb, c_msg)
    return CodingAssignment("rlnc", cb.q, beta, tuple(net.out_edges(net.source)), mix, {"codebook": cb.kind})


def assign_nrsc(net: Network, ids: IdTable) -> CodingAssignment:
    """Each node solves ``Phi(Out(v), d) b(e) = phi(e, d)`` with ``d = |Out(v)|``."""
    q = ids.q
    beta = {}
    for v in net.nodes:
        if v in (net.source, net.receiver):
            continue
        outs = net.out_edges(v)
        if not outs:
            continue
        d = len(outs)
        try:
            phi_out = linalg.vandermonde([ids.id(e) for e in outs], d, q)
            phi_inv = linalg.invert(phi_out, q)
        except (InvalidIdError, SingularMatrixError) as exc:
            raise AssignmentError(f"node {v}: {exc}") from exc
        for e_in in net.in_edges(v):
            b = linalg.matvec(phi_inv, virv(ids.id(e_in), d, q), q)
            for i, e_out in enumerate(outs):
                beta[(e_in, e_out)] = int(b[i])
    out_s = net.out_edges(net.source)
    try:
        phi_s = linalg.vandermonde([ids.id(e) for e in out_s], len(out_s), q)
        mix = linalg.invert(phi_s, q)
    except (InvalidIdError, SingularMatrixError) as exc:
        raise AssignmentError(f"source: {exc}") from exc
    return CodingAssignment("nrsc", q, beta, tuple(out_s), mix)


def explicit_assignment(net: Network, q: int, beta: Mapping, source_mix=None) -> CodingAssignment:
    """Assignment from hand-written coefficients; missing adjacent pairs are 0."""
    full = {}
    for v in net.nodes:
        if v == net.source:
            continue
        for e_in in net.in_edges(v):
            for e_out in net.out_edges(v):
                full[(e_in, e_out)] = 0
    for (a, b), val in beta.items():
        a, b = Edge(*a), Edge(*b)
        if (a, b) not in full:
            raise UsageError(f"{a.label} -> {b.label} is not an adjacent pair")
        full[(a, b)] = int(val) % q
    out_s = net.out_edges(net.source)
    c_msg = len(net.in_edges(net.receiver))
    mix = linalg.identity(len(out_s))[:, :c_msg] if source_mix is None else linalg.as_matrix(source_mix, q)
    return CodingAssignment("explicit", q, full, tuple(out_s), mix)


@dataclass
class IrvTable:
    edges: tuple
    irv: dict  # edge -> theta(e), length C
    gev: dict  # edge -> global encoding vector, length C
    transfer: np.ndarray
    q: int

    def matrix(self, edge_set: Iterable) -> np.ndarray:
        cols = [self.irv[Edge(*e)] for e in edge_set]
        c = self.transfer.shape[0]
        if not cols:
            return np.zeros((c, 0), dtype=np.int64)
        return np.stack(cols, axis=1)

    def gev_matrix(self, edge_set: Iterable) -> np.ndarray:
        rows = [self.gev[Edge(*e)] for e in edge_set]
        if not rows:
            return np.zeros((0, self.transfer.shape[1]), dtype=np.int64)
        return np.stack(rows, axis=0)


def _combine(pairs, q: int, c: int) -> np.ndarray:
    acc = np.zeros(c, dtype=np.int64)
    for b, vec in pairs:
        if b:
            acc = (acc + b * vec % q) % q
    return acc


def compute_irvs(net: Network, asg: CodingAssignment) -> IrvTable:
    """IRVs by the reverse recursion from ``In(r)``; global encoding vectors forward."""
    q = asg.q
    in_r = net.in_edges(net.receiver)
    c = len(in_r)
    order = net.edge_topo_order()
    irv = {}
    for pos, e in enumerate(in_r):
        vec = np.zeros(c, dtype=np.int64)
        vec[pos] = 1
        irv[e] = vec
    for e in reversed(order):
        if e.head == net.receiver:
            continue
        irv[e] = _combine(((asg.coeff(e, o), irv[o]) for o in net.out_edges(e.head)), q, c)
    c_msg = asg.source_mix.shape[1]
    gev = {}
    src_row = {e: i for i, e in enumerate(asg.source_edges)}
    for e in order:
        if e.tail == net.source:
            gev[e] = asg.source_mix[src_row[e]] % q
        else:
            gev[e] = _combine(((asg.coeff(i, e), gev[i]) for i in net.in_edges(e.tail)), q, c_msg)
    if in_r:
        transfer = np.stack([gev[e] for e in in_r], axis=0)
    else:
        transfer = np.zeros((0, c_msg), dtype=np.int64)
    return IrvTable(net.edges, irv, gev, transfer, q)


def transfer_matrix(net: Network, asg: CodingAssignment) -> np.ndarray:
    """``T = Theta(Out(s)) @ S``."""
    table = compute_irvs(net, asg)
    theta_s = table.matrix(asg.source_edges)
    return linalg.matmul(theta_s, asg.source_mix, asg.q)


# -- text export -------------------------------------------------------------


def assignment_to_text(asg: CodingAssignment) -> str:
    lines = [f"scheme {asg.scheme}", f"q {asg.q}"]
    for (a, b), val in sorted(asg.beta.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        lines.append(f"beta {a.label} {a.head} {b.label} {val}")
    for e, row in zip(asg.source_edges, asg.source_mix):
        lines.append(f"source_mix {e.label} " + " ".join(str(int(x)) for x in row))
    return "\n".join(lines) + "\n"


def assignment_from_text(text: str) -> CodingAssignment:
    scheme, q = "explicit", None
    beta, src, rows = {}, [], []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if parts[0] == "scheme":
            scheme = parts[1]
        elif parts[0] == "q":
            q = int(parts[1])
        elif parts[0] == "beta" and len(parts) == 5:
            a, b = Edge.parse(parts[1]), Edge.parse(parts[3])
            if a.head != parts[2] or b.tail != parts[2]:
                raise UsageError(f"inconsistent beta line {raw!r}")
            beta[(a, b)] = int(parts[4])
        elif parts[0] == "source_mix":
            src.append(Edge.parse(parts[1]))
            rows.append([int(x) for x in parts[2:]])
        else:
            raise UsageError(f"cannot parse {raw!r}")
    if q is None:
        raise UsageError("assignment text lacks 'q'")
    mix = np.array(rows, dtype=np.int64).reshape(len(src), -1)
    return CodingAssignment(scheme, q, beta, tuple(src), mix)


def id_power(id_value: int, k: int, q: int) -> int:
    return field_pow(id_value, k, q)
