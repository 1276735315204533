"""One generation through the network: packets, injected faults, what r sees.

The source sends ``X = [I | M]``. Edge ``e`` carries
``y(e) = x(e) + z(e)``, where ``x(e)`` mixes the outputs of the edges entering
its tail. Receivers and tomography code only get ``X`` (after decoding) and
``Y``. The planted faults sit in a sealed ``GroundTruth`` that raises when
read outside :meth:`GenerationTrace.reveal`.
"""

from __future__ import annotations

import contextlib
import json
from dataclasses import dataclass, field
from typing import Iterable, Mapping

import numpy as np

from . import linalg
from .codes import CodingAssignment, compute_irvs
from .errors import AttackImpossibleError, GroundTruthAccessError, UndecodableError, UsageError
from .field import DEFAULT_Q
from .netgraph import Edge, Network

KINDS = ("none", "random", "adversarial", "erasure_random", "erasure_adversarial", "delay")
PRESETS = ("random", "sparse", "aligned", "header-only", "payload-only")


@dataclass(frozen=True)
class ErrorModel:
    kind: str = "none"
    p_f: float = 0.0
    sparsity: int = 1
    edges: tuple = ()
    packets: Mapping = field(default_factory=dict)
    meta: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise UsageError(f"unknown error model {self.kind!r}")
        if self.sparsity < 1:
            raise UsageError("sparsity must be at least 1")
        if not 0.0 <= self.p_f <= 1.0:
            raise UsageError("p_f must lie in [0, 1]")
        object.__setattr__(self, "edges", tuple(Edge(*e) for e in self.edges))
        if self.kind == "adversarial":
            pk = {Edge(*e): np.asarray(v, dtype=np.int64) for e, v in self.packets.items()}
            if set(pk) != set(self.edges):
                raise UsageError("adversarial packets must cover exactly the declared edges")
            if any(not v.any() for v in pk.values()):
                raise UsageError("adversarial packets must be nonzero")
            object.__setattr__(self, "packets", pk)

    @property
    def z(self) -> int:
        return len(self.edges)

    @classmethod
    def none(cls) -> ErrorModel:
        return cls("none")

    @classmethod
    def random(cls, p_f: float = 0.0, sparsity: int = 1, edges: Iterable = ()) -> ErrorModel:
        """Random errors: each edge fails with ``p_f``, or exactly ``edges`` fail."""
        return cls("random", p_f=p_f, sparsity=sparsity, edges=tuple(edges))

    @classmethod
    def adversarial(cls, packets: Mapping) -> ErrorModel:
        return cls("adversarial", edges=tuple(sorted(Edge(*e) for e in packets)), packets=packets)

    @classmethod
    def erasures(cls, edges: Iterable = (), p_f: float = 0.0) -> ErrorModel:
        edges = tuple(edges)
        kind = "erasure_adversarial" if edges else "erasure_random"
        return cls(kind, p_f=p_f, edges=edges)

    @classmethod
    def delays(cls, edges: Iterable) -> ErrorModel:
        return cls("delay", edges=tuple(edges))


@dataclass
class GroundTruth:
    error_edges: frozenset
    injected: dict  # edge -> z(e)
    carried: dict  # edge -> y(e), kept for the delay model
    model_kind: str


class GenerationTrace:
    """Observed matrices plus the sealed planted faults of one generation."""

    def __init__(self, X, Y, index: int, scheme: str, q: int, truth: GroundTruth | None, sealed: bool = True):
        self.X = np.asarray(X, dtype=np.int64)
        self.Y = np.asarray(Y, dtype=np.int64)
        self.index = index
        self.scheme = scheme
        self.q = q
        self._truth = truth
        self._sealed = sealed

    @property
    def C(self) -> int:
        return self.X.shape[0]

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def has_truth(self) -> bool:
        return self._truth is not None

    @property
    def truth(self) -> GroundTruth:
        if self._truth is None:
            raise GroundTruthAccessError("trace carries no ground truth")
        if self._sealed:
            raise GroundTruthAccessError("ground truth is sealed; use reveal() for comparisons")
        return self._truth

    @contextlib.contextmanager
    def reveal(self):
        prev = self._sealed
        self._sealed = False
        try:
            yield self.truth
        finally:
            self._sealed = prev

    def __repr__(self) -> str:
        return f"GenerationTrace(index={self.index}, C={self.C}, n={self.n}, scheme={self.scheme})"


def make_message(C: int, n: int, rng: np.random.Generator, q: int = DEFAULT_Q) -> np.ndarray:
    """``[I_C | uniform payload]``."""
    if n <= C:
        raise UsageError(f"block length n={n} must exceed C={C}")
    payload = rng.integers(0, q, size=(C, n - C), dtype=np.int64)
    return np.concatenate([linalg.identity(C), payload], axis=1)


def _sparse_symbols(n: int, s: int, rng: np.random.Generator, q: int) -> np.ndarray:
    vec = np.zeros(n, dtype=np.int64)
    pos = rng.choice(n, size=min(s, n), replace=False)
    vec[pos] = rng.integers(1, q, size=pos.size, dtype=np.int64)
    return vec


def adversary_packets(preset: str, edges: Iterable, n: int, C: int, rng: np.random.Generator, q: int = DEFAULT_Q) -> dict:
    """Named adversary strategies; every returned packet is nonzero."""
    edges = [Edge(*e) for e in edges]
    out = {}
    if preset == "random":
        for e in edges:
            v = rng.integers(0, q, size=n, dtype=np.int64)
            v[rng.integers(0, n)] = rng.integers(1, q)
            out[e] = v
    elif preset == "sparse":
        for e in edges:
            out[e] = _sparse_symbols(n, 1, rng, q)
    elif preset == "aligned":
        base = _sparse_symbols(n, n, rng, q)
        for e in edges:
            out[e] = base * int(rng.integers(1, q)) % q
    elif preset in ("header-only", "payload-only"):
        lo, hi = (0, C) if preset == "header-only" else (C, n)
        for e in edges:
            v = np.zeros(n, dtype=np.int64)
            v[lo:hi] = _sparse_symbols(hi - lo, hi - lo, rng, q)
            out[e] = v
    else:
        raise UsageError(f"unknown adversary preset {preset!r}; choose from {PRESETS}")
    return out


def transmit(
    net: Network,
    asg: CodingAssignment,
    X,
    model: ErrorModel,
    rng: np.random.Generator,
    *,
    index: int = 0,
    previous: GenerationTrace | None = None,
    seal: bool = True,
) -> GenerationTrace:
    q = asg.q
    X = linalg.as_matrix(X, q)
    c_msg, n = X.shape
    if asg.source_mix.shape[1] != c_msg:
        raise UsageError(f"message has {c_msg} rows, source mixing expects {asg.source_mix.shape[1]}")
    edges = net.edge_topo_order()
    for e in model.edges:
        if not net.has_edge(e):
            raise UsageError(f"model names unknown edge {e.label}")

    faulty: list
    if model.kind in ("random", "erasure_random") and not model.edges:
        faulty = [e for e in net.edges if rng.random() < model.p_f]
    else:
        faulty = list(model.edges)
    faulty_set = set(faulty)

    prev_carried = {}
    if model.kind == "delay" and previous is not None:
        with previous.reveal() as t:
            prev_carried = t.carried

    src_rows = linalg.matmul(asg.source_mix, X, q)
    src_pos = {e: i for i, e in enumerate(asg.source_edges)}
    carried, injected = {}, {}
    for e in edges:
        if e.tail == net.source:
            x = src_rows[src_pos[e]].copy()
        else:
            x = np.zeros(n, dtype=np.int64)
            for e_in in net.in_edges(e.tail):
                b = asg.coeff(e_in, e)
                if b:
                    x = (x + b * carried[e_in] % q) % q
        if e in faulty_set:
            if model.kind == "random":
                z = _sparse_symbols(n, model.sparsity, rng, q)
            elif model.kind == "adversarial":
                z = model.packets[e] % q
            elif model.kind in ("erasure_random", "erasure_adversarial"):
                z = (-x) % q
            else:  # delay
                stale = prev_carried.get(e, np.zeros(n, dtype=np.int64))
                z = (stale - x) % q
            injected[e] = z
            x = (x + z) % q
        carried[e] = x
    in_r = net.in_edges(net.receiver)
    Y = np.stack([carried[e] for e in in_r]) if in_r else np.zeros((0, n), dtype=np.int64)
    truth = GroundTruth(frozenset(faulty_set), injected, carried, model.kind)
    return GenerationTrace(X, Y, index, asg.scheme, q, truth, sealed=seal)


def decodable(kind: str, z: int, C: int) -> bool:
    if kind == "adversarial":
        return 2 * z + 1 <= C
    if kind == "none":
        return True
    return z + 1 <= C


def genie_decode(trace: GenerationTrace) -> np.ndarray:
    """The true ``X`` when the generation is within the correctable regime.

    Stands in for a network error-correcting decoder: this is the one place
    outside the acceptance harness that reads the planted faults.
    """
    if trace.has_truth:
        with trace.reveal() as t:
            z, kind = len(t.error_edges), t.model_kind
        if not decodable(kind, z, trace.C):
            raise UndecodableError(f"{z} faulty edges exceed what C={trace.C} can correct under {kind}")
    return trace.X.copy()


def error_matrix(Y, X_decoded, q: int) -> np.ndarray:
    """``Y_m - Y_h M`` for ``X_decoded = [I | M]``."""
    Y = np.asarray(Y, dtype=np.int64)
    X = np.asarray(X_decoded, dtype=np.int64)
    c = X.shape[0]
    if Y.shape[1] != X.shape[1] or X.shape[1] <= c:
        raise UsageError("cannot split header and payload columns")
    if not np.array_equal(X[:, :c] % q, linalg.identity(c)):
        raise UsageError("decoded message lacks an identity header")
    y_h, y_m = Y[:, :c], Y[:, c:]
    return (y_m - linalg.matmul(y_h, X[:, c:], q)) % q


def full_error_matrix(Y, X, T, q: int) -> np.ndarray:
    """``Y - T X``; equals ``Theta(E') Z``."""
    return (np.asarray(Y, dtype=np.int64) - linalg.matmul(T, X, q)) % q


def confusion_attack(net: Network, asg: CodingAssignment, E1: Iterable, E2: Iterable, X, rng: np.random.Generator) -> ErrorModel:
    """Errors on ``E1`` whose footprint at r could equally come from ``E2``.

    Picks ``w`` in col(Theta(E1)) ∩ col(Theta(E2)) and sends ``a_i p`` on the
    i-th edge of ``E1`` where ``Theta(E1) a = w``. The mirrored model on
    ``E2`` (same ``p``, ``Theta(E2) b = w``) is stored in ``meta['mirror']``.
    """
    q = asg.q
    E1 = sorted(Edge(*e) for e in E1)
    E2 = sorted(Edge(*e) for e in E2)
    table = compute_irvs(net, asg)
    th1, th2 = table.matrix(E1), table.matrix(E2)
    inter = linalg.col_space_intersect(th1, th2, q)
    if inter.shape[1] == 0:
        raise AttackImpossibleError("the two edge sets have independent IRV spans")
    w = inter[:, 0]
    a = linalg.solve(th1, w, q)
    b = linalg.solve(th2, w, q)
    n = np.asarray(X).shape[1]
    p = _sparse_symbols(n, n, rng, q)

    def packets(edges, coef):
        return {e: p * int(c) % q for e, c in zip(edges, coef) if int(c) % q}

    mirror = ErrorModel.adversarial(packets(E2, b))
    attack = ErrorModel.adversarial(packets(E1, a))
    return ErrorModel("adversarial", edges=attack.edges, packets=attack.packets, meta={"mirror": mirror, "line": w})


def mimic_packets(theta_err: np.ndarray, target_diff: np.ndarray, n: int, C: int, rng: np.random.Generator, q: int) -> np.ndarray:
    """Header errors that cancel as many rows of ``target_diff`` as possible.

    With ``Z_h`` chosen so that ``Theta(E') Z_h`` agrees with ``target_diff``
    on ``rank(Theta(E'))`` rows, the observed transfer matrix moves as close
    to a decoy's as ``z`` edges allow. Returns the full ``z x n`` packet
    matrix (random nonzero payloads).
    """
    theta_err = np.asarray(theta_err, dtype=np.int64)
    z = theta_err.shape[1]
    _, rows = linalg.column_basis(theta_err.T, q)  # independent rows
    cols_basis, cols = linalg.column_basis(theta_err[rows], q)
    Z = np.zeros((z, n), dtype=np.int64)
    if cols:
        sub = theta_err[np.ix_(rows, cols)]
        zh = linalg.matmul(linalg.invert(sub, q), np.asarray(target_diff, dtype=np.int64)[rows], q)
        Z[cols, :C] = zh
    Z[:, C:] = rng.integers(0, q, size=(z, n - C), dtype=np.int64)
    for i in range(z):
        if not Z[i].any():
            Z[i, C + int(rng.integers(0, n - C))] = int(rng.integers(1, q))
    return Z


# -- trace dumps -------------------------------------------------------------


def _rows(m: np.ndarray) -> list:
    return [" ".join(str(int(x)) for x in row) for row in m]


def trace_to_text(trace: GenerationTrace, include_truth: bool = False) -> str:
    lines = [
        f"generation {trace.index}",
        f"scheme {trace.scheme}",
        f"q {trace.q}",
        f"shape {trace.X.shape[0]} {trace.X.shape[1]} {trace.Y.shape[0]}",
        "X",
        *_rows(trace.X),
        "Y",
        *_rows(trace.Y),
    ]
    if include_truth and trace.has_truth:
        with trace.reveal() as t:
            lines.append("truth")
            lines.append(f"model {t.model_kind}")
            lines.append("error_edges " + " ".join(e.label for e in sorted(t.error_edges)))
            for e in sorted(t.injected):
                lines.append(f"z {e.label} " + " ".join(str(int(x)) for x in t.injected[e]))
    lines.append("end")
    return "\n".join(lines) + "\n"


def trace_to_json(trace: GenerationTrace, include_truth: bool = False) -> str:
    rec = {
        "generation": trace.index,
        "scheme": trace.scheme,
        "q": trace.q,
        "X": trace.X.tolist(),
        "Y": trace.Y.tolist(),
    }
    if include_truth and trace.has_truth:
        with trace.reveal() as t:
            rec["truth"] = {
                "model": t.model_kind,
                "error_edges": [e.label for e in sorted(t.error_edges)],
                "z": {e.label: t.injected[e].tolist() for e in sorted(t.injected)},
            }
    return json.dumps(rec, sort_keys=True)


def _truth_from(model: str, labels: Iterable[str], zs: Mapping) -> GroundTruth:
    injected = {Edge.parse(k): np.asarray(v, dtype=np.int64) for k, v in zs.items()}
    return GroundTruth(frozenset(Edge.parse(x) for x in labels), injected, {}, model)


def traces_from_text(text: str) -> list:
    """Parse text or json-lines trace dumps (detected per record)."""
    out = []
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln and not ln.startswith("#")]
    i = 0
    while i < len(lines):
        if lines[i].startswith("{"):
            rec = json.loads(lines[i])
            truth = None
            if "truth" in rec:
                t = rec["truth"]
                truth = _truth_from(t["model"], t["error_edges"], t["z"])
            q = int(rec["q"])
            X = np.array(rec["X"], dtype=np.int64)
            Y = np.array(rec["Y"], dtype=np.int64).reshape(-1, X.shape[1])
            out.append(GenerationTrace(X, Y, int(rec["generation"]), rec["scheme"], q, truth))
            i += 1
            continue
        try:
            head = dict(ln.split(None, 1) for ln in lines[i : i + 4])
            c, n, c_out = (int(x) for x in head["shape"].split())
            i += 4
            if lines[i] != "X":
                raise ValueError("expected X")
            X = np.array([ln.split() for ln in lines[i + 1 : i + 1 + c]], dtype=np.int64).reshape(c, n)
            i += 1 + c
            if lines[i] != "Y":
                raise ValueError("expected Y")
            Y = np.array([ln.split() for ln in lines[i + 1 : i + 1 + c_out]], dtype=np.int64).reshape(c_out, n)
            i += 1 + c_out
            truth = None
            if lines[i] == "truth":
                i += 1
                model, labels, zs = "none", [], {}
                while lines[i] != "end":
                    parts = lines[i].split()
                    if parts[0] == "model":
                        model = parts[1]
                    elif parts[0] == "error_edges":
                        labels = parts[1:]
                    elif parts[0] == "z":
                        zs[parts[1]] = [int(x) for x in parts[2:]]
                    i += 1
                truth = _truth_from(model, labels, zs)
            if lines[i] != "end":
                raise ValueError("expected end")
            i += 1
        except (KeyError, ValueError, IndexError) as exc:
            raise UsageError(f"malformed trace dump near line {i + 1}: {exc}") from exc
        out.append(GenerationTrace(X, Y, int(head["generation"]), head["scheme"], int(head["q"]), truth))
    return out
