"""Seeded multi-trial experiments, scenario dumps, and the named suites.

Each trial gets its own generator from ``SeedSequence(master, spawn_key=(i,))``
so any trial can be replayed alone. Suites build a scenario, hand only
observable data to the tomography routines, then compare against the sealed
ground truth through ``trace.reveal()``.
"""

from __future__ import annotations

import dataclasses
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import channel, codes, linalg, rscode
from . import tomography as tm
from .errors import GenerationError, ModelViolationError, NCTomoError, UsageError
from .field import DEFAULT_Q, GF
from .netgraph import (
    ConnectivityProfile,
    Edge,
    Network,
    check_profile,
    extended_set,
    flow_rank,
    random_network,
    source_flow_to,
)

SCHEMES = ("rlnc-weak", "rlnc-strong", "nrsc")


@dataclass
class ExperimentConfig:
    suite: str = "toy"
    q: int = DEFAULT_Q
    nodes: int = 10
    capacity: int = 3
    profile: str = "weak"
    z: int = 1
    depth: int = 0  # 0: 2z for adversarial RS, z+1 for random RS
    scheme: str = "rlnc-weak"
    model: str = "random"
    p_f: float = 0.0  # 0: pick from |E|
    sparsity: int = 1
    n: int = 0  # 0: 64 C
    t: int = 0  # 0: pick from |E| log |E|
    trials: int = 10
    seed: int = 0
    preset: str = "random"
    candidates: int = 10
    max_subsets: int = 200_000
    max_nodes: int = 4
    jobs: int = 1
    record_timings: bool = False

    def validate(self) -> None:
        GF(self.q)
        for name in ("nodes", "capacity", "sparsity"):
            if getattr(self, name) < 1:
                raise UsageError(f"{name} must be positive")
        for name in ("z", "depth", "n", "t", "trials", "jobs", "max_subsets", "max_nodes"):
            if getattr(self, name) < 0:
                raise UsageError(f"{name} must be nonnegative")
        if self.scheme not in SCHEMES:
            raise UsageError(f"scheme must be one of {SCHEMES}")
        if self.model not in channel.KINDS:
            raise UsageError(f"model must be one of {channel.KINDS}")
        if self.preset not in channel.PRESETS:
            raise UsageError(f"preset must be one of {channel.PRESETS}")
        if self.suite not in SUITES:
            raise UsageError(f"unknown suite {self.suite!r}; choose from {sorted(SUITES)}")
        need = SUITE_SCHEME.get(self.suite)
        if need and self.scheme not in need:
            raise UsageError(f"suite {self.suite} needs scheme in {need}, got {self.scheme}")
        if self.n and self.n <= self.capacity:
            raise UsageError("block length n must exceed capacity")

    @property
    def block(self) -> int:
        return self.n or 64 * self.capacity

    def to_text(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in dataclasses.fields(self))


def _coerce(kind, raw: str, key: str):
    try:
        if kind is bool or kind == "bool":
            if raw.lower() in ("1", "true", "yes", "on"):
                return True
            if raw.lower() in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind is int or kind == "int":
            return int(raw, 10)
        if kind is float or kind == "float":
            return float(raw)
        return raw
    except ValueError:
        raise UsageError(f"config key {key!r}: cannot read {raw!r}") from None


def parse_config(text: str, **overrides) -> ExperimentConfig:
    """Flat ``key = value`` (or ``key value``) lines; ``#`` starts a comment."""
    types = {f.name: f.type for f in dataclasses.fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, _, val = line.partition("=")
        else:
            key, _, val = line.partition(" ")
        key, val = key.strip().replace("-", "_"), val.strip()
        if key not in types:
            raise UsageError(f"line {lineno}: unknown config key {key!r}")
        values[key] = _coerce(types[key], val, key)
    values.update({k: v for k, v in overrides.items() if v is not None})
    cfg = ExperimentConfig(**values)
    cfg.validate()
    return cfg


@dataclass
class TrialRecord:
    suite: str
    trial: int
    seed: int
    ok: bool
    truth: dict = field(default_factory=dict)
    output: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    error: str | None = None

    def to_dict(self, timings: bool = False) -> dict:
        d = dataclasses.asdict(self)
        if not timings:
            d.pop("timings")
        return d

    def to_json(self, timings: bool = False) -> str:
        return json.dumps(self.to_dict(timings), sort_keys=True, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, Edge):
        return obj.label
    if isinstance(obj, (set, frozenset)):
        return sorted(_jsonable(x) if isinstance(x, Edge) else x for x in obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return str(obj)


def _labels(edges) -> list:
    return sorted(Edge(*e).label for e in edges)


def trial_rng(master: int, index: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(master, spawn_key=(index,)))


def _subseed(rng: np.random.Generator) -> int:
    return int(rng.integers(0, 2**62))


# ---------------------------------------------------------------------------
# fixed networks
# ---------------------------------------------------------------------------


def toy_network(q: int = DEFAULT_Q):
    """Two parallel edges s->u and u->r with x3 = x1 + 2 x2 and x4 = x1 + x2."""
    net = Network(["s", "u", "r"], [("s", "u", 0), ("s", "u", 1), ("u", "r", 0), ("u", "r", 1)], "s", "r")
    e1, e2, e3, e4 = net.edges
    asg = codes.explicit_assignment(net, q, {(e1, e3): 1, (e2, e3): 2, (e1, e4): 1, (e2, e4): 1})
    return net, asg


def two_path_network(q: int = DEFAULT_Q):
    """s->u, s->w, u->w, u->r, w->r with the coefficients used for the IRV table example."""
    net = Network(["s", "u", "w", "r"], [("s", "u"), ("s", "w"), ("u", "w"), ("u", "r"), ("w", "r")], "s", "r")
    e1, e2, e3, e4, e5 = (Edge(*x) for x in [("s", "u", 0), ("s", "w", 0), ("u", "w", 0), ("u", "r", 0), ("w", "r", 0)])
    asg = codes.explicit_assignment(net, q, {(e1, e4): 3, (e1, e3): 2, (e2, e5): 2, (e3, e5): 1})
    return net, asg, (e1, e2, e3, e4, e5)


# ---------------------------------------------------------------------------
# shared scenario pieces
# ---------------------------------------------------------------------------


def _multiplicity(net: Network) -> int:
    return max(e.k for e in net.edges) + 1


def _build(cfg: ExperimentConfig, rng, profile: ConnectivityProfile, capacity=None, nodes=None):
    return random_network(nodes or cfg.nodes, capacity or cfg.capacity, profile, rng)


def _assignment(cfg: ExperimentConfig, net: Network, seed: int):
    if cfg.scheme == "nrsc":
        ids = codes.IdTable.derive(seed, net.nodes, _multiplicity(net), cfg.q)
        return codes.assign_nrsc(net, ids), ids
    cb = codes.derive_codebook("strong" if cfg.scheme == "rlnc-strong" else "weak", seed, cfg.q)
    return codes.assign_rlnc(net, cb), cb


def _pick(rng, edges, k: int) -> list:
    idx = rng.choice(len(edges), size=k, replace=False)
    return sorted(edges[int(i)] for i in idx)


def perturb(net: Network, rng, profile: ConnectivityProfile, tries: int = 400) -> Network:
    """A different valid network: one edge added or re-headed at an internal node."""
    internal = list(net.internal_nodes)
    for _ in range(tries):
        v = internal[int(rng.integers(len(internal)))]
        above = {u for u in net.nodes if v in net.reachable_from(u)}
        heads = [w for w in net.nodes if w not in above and w not in (net.source, net.receiver, v)]
        if not heads:
            continue
        w = heads[int(rng.integers(len(heads)))]
        k = sum(1 for e in net.out_edges(v) if e.head == w)
        edges = list(net.edges)
        if rng.random() < 0.5:
            outs = [e for e in net.out_edges(v) if e.head != net.receiver]
            if outs:
                old = outs[int(rng.integers(len(outs)))]
                edges.remove(old)
                edges = _renumber(edges)
        edges.append(Edge(v, w, k))
        try:
            cand = Network(net.nodes, _renumber(edges), net.source, net.receiver)
        except UsageError:
            continue
        if cand == net or cand.validate() or not check_profile(cand, profile)[0]:
            continue
        return cand
    raise GenerationError("could not perturb the network within the profile")


def _renumber(edges) -> list:
    counts, out = {}, []
    for e in sorted(Edge(*x) for x in edges):
        k = counts.get((e.tail, e.head), 0)
        counts[(e.tail, e.head)] = k + 1
        out.append(Edge(e.tail, e.head, k))
    return out


# ---------------------------------------------------------------------------
# suites: each takes (cfg, rng) and returns (ok, truth, output)
# ---------------------------------------------------------------------------


def suite_toy(cfg, rng):
    q = cfg.q
    net, asg = toy_network(q)
    e1 = net.edges[0]
    tr = channel.transmit(net, asg, [[1], [2]], channel.ErrorModel.adversarial({e1: [2]}), rng)
    T = codes.compute_irvs(net, asg)
    Z = channel.full_error_matrix(tr.Y, tr.X, T.transfer, q)
    got = tm.locate_adversary_rlnc(Z, T, 1)
    ok = tr.Y.ravel().tolist() == [7, 5] and Z.ravel().tolist() == [2, 2] and got == {e1}
    return ok, {"error_edges": [e1.label]}, {"Y": tr.Y.ravel().tolist(), "Z": Z.ravel().tolist(), "located": _labels(got)}


def suite_irv_table(cfg, rng):
    net, asg, es = two_path_network(cfg.q)
    t = codes.compute_irvs(net, asg)
    got = [t.irv[e].tolist() for e in es]
    want = [[3, 2], [0, 2], [0, 1], [1, 0], [0, 1]]
    return got == want, {"irvs": want}, {"irvs": got}


def suite_nrsc_identity(cfg, rng):
    q = cfg.q
    d = cfg.depth or int(rng.integers(2, 5))
    C = d + int(rng.integers(0, 2))
    nodes = int(rng.integers(max(4, cfg.nodes // 2), cfg.nodes + 1))
    net = random_network(nodes, C, ConnectivityProfile(d, 0, "weak"), rng)
    ids = codes.IdTable.derive(_subseed(rng), net.nodes, _multiplicity(net), q)
    table = codes.compute_irvs(net, codes.assign_nrsc(net, ids))
    phi = linalg.vandermonde([ids.id(e) for e in net.in_edges(net.receiver)], d, q)
    bad = [
        e.label
        for e in net.edges
        if not np.array_equal(linalg.matvec(phi, table.irv[e], q), codes.virv(ids.id(e), d, q))
    ]
    return not bad, {"d": d, "edges": len(net.edges)}, {"mismatched": bad}


def suite_rs_locate(cfg, rng):
    q, z = cfg.q, cfg.z
    d = cfg.depth or 2 * z
    C = max(cfg.capacity, 2 * z + 1, d)
    net = _build(cfg, rng, ConnectivityProfile.locate_adv(z) if d == 2 * z else ConnectivityProfile(d, 0, "locate-adv", z), C)
    ids = codes.IdTable.derive(_subseed(rng), net.nodes, _multiplicity(net), q)
    asg = codes.assign_nrsc(net, ids)
    n = cfg.n or C + 8
    X = channel.make_message(C, n, rng, q)
    planted = _pick(rng, net.edges, z)
    preset = channel.PRESETS[int(rng.integers(len(channel.PRESETS)))] if cfg.preset == "random" else cfg.preset
    packets = channel.adversary_packets(preset, planted, n, C, rng, q)
    tr = channel.transmit(net, asg, X, channel.ErrorModel.adversarial(packets), rng)
    X_dec = channel.genie_decode(tr)
    got = tm.locate_adversary_rs(X_dec, tr.Y, ids, d, net.in_edges(net.receiver))
    with tr.reveal() as truth:
        want = truth.error_edges
    return got == want, {"error_edges": _labels(want), "preset": preset}, {"located": _labels(got)}


def suite_random_rs(cfg, rng):
    q = cfg.q
    z = cfg.z
    d = cfg.depth or z + 1
    C = max(cfg.capacity, d, z + 1)
    net = _build(cfg, rng, ConnectivityProfile(d, 0, "weak"), C)
    ids = codes.IdTable.derive(_subseed(rng), net.nodes, _multiplicity(net), q)
    asg = codes.assign_nrsc(net, ids)
    X = channel.make_message(C, cfg.block, rng, q)
    planted = _pick(rng, net.edges, z)
    tr = channel.transmit(net, asg, X, channel.ErrorModel.random(edges=planted, sparsity=cfg.sparsity), rng)
    got = tm.locate_random_rs(channel.genie_decode(tr), tr.Y, ids, d, net.in_edges(net.receiver))
    return got == set(planted), {"error_edges": _labels(planted)}, {"located": _labels(got)}


def suite_random_locate(cfg, rng):
    q = cfg.q
    net = _build(cfg, rng, ConnectivityProfile.from_name(cfg.profile, cfg.z))
    asg, _ = _assignment(cfg, net, _subseed(rng))
    C = cfg.capacity
    z = cfg.z if cfg.z else int(rng.integers(1, C))
    z = min(z, C - 1)
    X = channel.make_message(C, cfg.block, rng, q)
    planted = _pick(rng, net.edges, z)
    tr = channel.transmit(net, asg, X, channel.ErrorModel.random(edges=planted, sparsity=cfg.sparsity), rng)
    Zr = channel.error_matrix(tr.Y, channel.genie_decode(tr), q)
    got = tm.locate_random_rlnc(Zr, codes.compute_irvs(net, asg))
    want = extended_set(net, planted)
    return got == want, {"error_edges": _labels(planted), "extended": _labels(want)}, {"located": _labels(got)}


def suite_adversary_rlnc(cfg, rng):
    q, z = cfg.q, cfg.z
    C = max(cfg.capacity, 2 * z + 1)
    net = _build(cfg, rng, ConnectivityProfile.locate_adv(z), C)
    asg, _ = _assignment(cfg, net, _subseed(rng))
    n = cfg.n or C + 8
    X = channel.make_message(C, n, rng, q)
    planted = _pick(rng, net.edges, z)
    packets = channel.adversary_packets(cfg.preset, planted, n, C, rng, q)
    tr = channel.transmit(net, asg, X, channel.ErrorModel.adversarial(packets), rng)
    table = codes.compute_irvs(net, asg)
    Z = channel.full_error_matrix(tr.Y, channel.genie_decode(tr), table.transfer, q)
    got = tm.locate_adversary_rlnc(Z, table, z, cfg.max_subsets)
    return got == set(planted), {"error_edges": _labels(planted)}, {"located": _labels(got)}


def choose_generations(num_edges: int, expected_errors: float, independence: float) -> int:
    """``ceil(c |E| ln |E|)`` with ``c`` large enough that every edge fails
    about ``6 ln |E|`` times alongside independent co-failures."""
    independence = max(independence, 0.05)
    c = 6.0 / (expected_errors * independence)
    return math.ceil(c * num_edges * math.log(max(num_edges, 2)))


def _random_generations(net, asg, cfg, rng, count, p_f, start=0):
    """Successful generations only: at most C-1 faulty edges each."""
    q, C = cfg.q, net.capacity
    out = []
    model = channel.ErrorModel.random(p_f=p_f, sparsity=cfg.sparsity)
    n = cfg.n or C + 16
    for i in range(count):
        X = channel.make_message(C, n, rng, q)
        while True:
            tr = channel.transmit(net, asg, X, model, rng, index=start + i)
            with tr.reveal() as truth:
                if len(truth.error_edges) <= C - 1:
                    break
        out.append(tr)
    return out


def suite_topo_random(cfg, rng):
    q = cfg.q
    net = _build(cfg, rng, ConnectivityProfile.weak())
    cb = codes.derive_codebook("weak", _subseed(rng), q)
    asg = codes.assign_rlnc(net, cb)
    E = len(net.edges)
    lam = min(1.5, net.capacity - 1)
    p_f = cfg.p_f or lam / E
    pilot = _random_generations(net, asg, cfg, rng, 2 * E, p_f)
    zs = [channel.error_matrix(tr.Y, channel.genie_decode(tr), q) for tr in pilot]
    est = tm.estimate_dependence(zs, q)
    t = cfg.t or choose_generations(E, p_f * E, est)
    more = _random_generations(net, asg, cfg, rng, max(0, t - len(pilot)), p_f, start=len(pilot))
    zs += [channel.error_matrix(tr.Y, channel.genie_decode(tr), q) for tr in more]
    cand = tm.find_irv(zs, q)
    got = tm.find_topo(cand, cb, net.nodes, net.source, net.receiver, net.in_edges(net.receiver), _multiplicity(net))
    truth = {"edges": len(net.edges), "t": len(zs), "independence": round(est, 4)}
    return got == net, truth, {"candidates": len(cand), "missing": _labels(set(net.edges) - set(got.edges)), "extra": _labels(set(got.edges) - set(net.edges))}


def _decoys(net, rng, profile, count):
    out, seen = [], {net}
    guard = 0
    while len(out) < count:
        guard += 1
        if guard > 50 * count:
            raise GenerationError("not enough distinct decoy networks")
        d = perturb(net, rng, profile)
        if d not in seen:
            seen.add(d)
            out.append(d)
    return out


def suite_topo_adv(cfg, rng):
    q, z = cfg.q, cfg.z
    C = max(cfg.capacity, 2 * z + 1)
    profile = ConnectivityProfile.strong(z)
    net = _build(cfg, rng, profile, C)
    decoys = _decoys(net, rng, profile, cfg.candidates - 1)
    cb = codes.derive_codebook("strong", _subseed(rng), q)
    asg = codes.assign_rlnc(net, cb)
    T = codes.compute_irvs(net, asg).transfer
    decoy_T = [codes.transfer_matrix(d, codes.assign_rlnc(d, cb)) for d in decoys]
    dist = [linalg.rank((Td - T) % q, q) for Td in decoy_T]
    nearest = int(np.argmin(dist))
    planted = _pick(rng, net.edges, z)
    n = cfg.n or C + 8
    theta = codes.compute_irvs(net, asg).matrix(planted)
    Zm = channel.mimic_packets(theta, (decoy_T[nearest] - T) % q, n, C, rng, q)
    packets = {e: Zm[i] for i, e in enumerate(planted)}
    X = channel.make_message(C, n, rng, q)
    tr = channel.transmit(net, asg, X, channel.ErrorModel.adversarial(packets), rng)
    T_e = tr.Y[:, :C]
    order = list(decoys) + [net]
    rng.shuffle(order)
    got = tm.topo_adv_rlnc(T_e, cb, z=z, candidates=order)
    return got == net, {"min_rank_distance": min(dist), "error_edges": _labels(planted)}, {"selected_true": got == net}


def suite_rank_distance(cfg, rng):
    q, z = cfg.q, cfg.z
    C = max(cfg.capacity, 2 * z + 1)
    profile = ConnectivityProfile.strong(z)
    net = _build(cfg, rng, profile, C)
    other = perturb(net, rng, profile)
    cb = codes.derive_codebook("strong", _subseed(rng), q)
    T1 = codes.transfer_matrix(net, codes.assign_rlnc(net, cb))
    T2 = codes.transfer_matrix(other, codes.assign_rlnc(other, cb))
    r = linalg.rank((T1 - T2) % q, q)
    return r >= 2 * z + 1, {"needed": 2 * z + 1}, {"rank": r}


def suite_rs_oracle(cfg, rng):
    q = [7, 13, 101, cfg.q][int(rng.integers(4))]
    l2 = int(rng.integers(3, min(q - 1, 40) + 1))
    l1 = int(rng.integers(1, l2))
    locs = [int(x) + 1 for x in rng.choice(q - 1, size=l2, replace=False)]
    spec = rscode.RsParitySpec(tuple(locs), l1, q)
    w = int(rng.integers(0, l1 // 2 + 1))
    sup = rng.choice(l2, size=w, replace=False)
    b = {int(i): int(rng.integers(1, q)) for i in sup}
    got = rscode.rs_decode(spec, rscode.rs_syndrome(spec, b), l1 // 2)
    return got == dict(sorted(b.items())), {"q": q, "l1": l1, "l2": l2, "weight": w}, {"ok": got == b}


def _erasure_set(net, rng, C):
    for _ in range(200):
        k = int(rng.integers(1, C))
        cand = _pick(rng, net.edges, k)
        if source_flow_to(net, cand) == len(cand):
            return cand
    raise GenerationError("no erasure set meets the source max-flow condition")


def _independent_singletons(net, table, rng, k, q):
    for _ in range(500):
        cand = _pick(rng, net.edges, k)
        if (
            linalg.rank(table.matrix(cand), q) == k
            and flow_rank(net, cand) == k
            and source_flow_to(net, cand) == k
        ):
            return cand
    raise GenerationError("no flow-independent singleton edges found")


def suite_erasure(cfg, rng):
    q = cfg.q
    net = _build(cfg, rng, ConnectivityProfile.weak())
    asg, _ = _assignment(cfg, net, _subseed(rng))
    table = codes.compute_irvs(net, asg)
    C = net.capacity
    n = cfg.n or C + 8
    erased = _erasure_set(net, rng, C)
    X = channel.make_message(C, n, rng, q)
    tr = channel.transmit(net, asg, X, channel.ErrorModel.erasures(erased), rng)
    Zhat = channel.full_error_matrix(tr.Y, X, table.transfer, q)
    span_ok = linalg.same_col_space(Zhat, table.matrix(erased), q)
    located = tm.locate_erasures(tr.Y, X, table)
    locate_ok = located == extended_set(net, erased)
    # header differences across three generations, one erased edge each
    singles = _independent_singletons(net, table, rng, min(3, C), q)
    ys = []
    for e in singles:
        Xi = channel.make_message(C, n, rng, q)
        ys.append(channel.transmit(net, asg, Xi, channel.ErrorModel.erasures([e]), rng).Y)
    if len(singles) < 3:  # C = 2: add an erasure-free baseline
        ys.append(channel.transmit(net, asg, channel.make_message(C, n, rng, q), channel.ErrorModel.none(), rng).Y)
    cand = tm.find_irv_erasure(ys, C, q)
    header_ok = all(table.irv[e] in cand for e in singles)
    out = {"span_ok": span_ok, "locate_ok": locate_ok, "header_ok": header_ok, "located": _labels(located)}
    return span_ok and locate_ok and header_ok, {"erased": _labels(erased), "singles": _labels(singles)}, out


def suite_delay(cfg, rng):
    q = cfg.q
    net = _build(cfg, rng, ConnectivityProfile.weak())
    asg, _ = _assignment(cfg, net, _subseed(rng))
    table = codes.compute_irvs(net, asg)
    C = net.capacity
    n = cfg.n or C + 8
    delayed = _pick(rng, net.edges, 1)
    first = channel.transmit(net, asg, channel.make_message(C, n, rng, q), channel.ErrorModel.none(), rng)
    X = channel.make_message(C, n, rng, q)
    tr = channel.transmit(net, asg, X, channel.ErrorModel.delays(delayed), rng, previous=first)
    deviation = channel.full_error_matrix(tr.Y, X, table.transfer, q)
    got = tm.locate_delays(deviation, table)
    want = extended_set(net, delayed)
    return got == want, {"delayed": _labels(delayed), "extended": _labels(want)}, {"located": _labels(got)}


def suite_topo_rs(cfg, rng):
    q = cfg.q
    net = _build(cfg, rng, ConnectivityProfile(2, 0, "weak"))
    ids = codes.IdTable.derive(_subseed(rng), net.nodes, _multiplicity(net), q)
    asg = codes.assign_nrsc(net, ids)
    E = len(net.edges)
    lam = min(1.5, net.capacity - 1)
    t = cfg.t or choose_generations(E, lam, 0.8)
    gens = _random_generations(net, asg, cfg, rng, t, cfg.p_f or lam / E)
    zs = [channel.error_matrix(tr.Y, channel.genie_decode(tr), q) for tr in gens]
    got = tm.find_topo_rs(zs, ids, net.in_edges(net.receiver))
    return got == set(net.edges), {"edges": E, "t": t}, {"missing": _labels(set(net.edges) - got), "extra": _labels(got - set(net.edges))}


def _confusable_pair(net, rng):
    pairs = [(a, b) for a, b in itertools.combinations(net.edges, 2) if flow_rank(net, [a, b]) < 2]
    if not pairs:
        return None
    return pairs[int(rng.integers(len(pairs)))]


def suite_negative_controls(cfg, rng):
    """False edges from NRSC topology recovery, and a realized confusion attack."""
    q = cfg.q
    net = _build(cfg, rng, ConnectivityProfile(2, 0, "weak"))
    ids = codes.IdTable.derive(_subseed(rng), net.nodes, _multiplicity(net), q)
    asg = codes.assign_nrsc(net, ids)
    t = cfg.t or 10
    gens = _random_generations(net, asg, cfg, rng, t, cfg.p_f or min(1.5, net.capacity - 1) / len(net.edges))
    zs = [channel.error_matrix(tr.Y, channel.genie_decode(tr), q) for tr in gens]
    got = tm.find_topo_rs(zs, ids, net.in_edges(net.receiver))
    false_edges = got - set(net.edges)

    # confusion attack on a pair whose IRVs share a line
    for _ in range(100):
        cnet = _build(cfg, rng, ConnectivityProfile(1, 0, "weak"))
        pair = _confusable_pair(cnet, rng)
        if pair is not None:
            break
    else:
        raise GenerationError("no network with a confusable edge pair")
    casg, _ = _assignment(dataclasses.replace(cfg, scheme="rlnc-weak"), cnet, _subseed(rng))
    C = cnet.capacity
    X = channel.make_message(C, cfg.n or C + 8, rng, q)
    attack = channel.confusion_attack(cnet, casg, [pair[0]], [pair[1]], X, rng)
    mirror = attack.meta["mirror"]
    seed = _subseed(rng)
    y1 = channel.transmit(cnet, casg, X, attack, np.random.default_rng(seed)).Y
    y2 = channel.transmit(cnet, casg, X, mirror, np.random.default_rng(seed)).Y
    table = codes.compute_irvs(cnet, casg)
    loc = tm.locate_adversary_rlnc(channel.full_error_matrix(y1, X, table.transfer, q), table, 1)
    ambiguous = bool(np.array_equal(y1, y2)) and pair[0] != pair[1]
    ok = ambiguous and not false_edges
    truth = {"edges": len(net.edges), "t": t, "pair": _labels(pair)}
    return ok, truth, {"false_edges": _labels(false_edges), "ambiguous": ambiguous, "located": _labels(loc)}


SUITES = {
    "toy": suite_toy,
    "irv-table": suite_irv_table,
    "nrsc-identity": suite_nrsc_identity,
    "rs-locate": suite_rs_locate,
    "random-rs": suite_random_rs,
    "random-locate": suite_random_locate,
    "adversary-rlnc": suite_adversary_rlnc,
    "topo-random": suite_topo_random,
    "topo-rs": suite_topo_rs,
    "topo-adv": suite_topo_adv,
    "rank-distance": suite_rank_distance,
    "rs-oracle": suite_rs_oracle,
    "erasure": suite_erasure,
    "delay": suite_delay,
    "negative-controls": suite_negative_controls,
}

SUITE_SCHEME = {
    "rs-locate": ("nrsc",),
    "random-rs": ("nrsc",),
    "topo-rs": ("nrsc",),
    "random-locate": ("rlnc-weak", "rlnc-strong"),
    "adversary-rlnc": ("rlnc-weak", "rlnc-strong"),
    "erasure": ("rlnc-weak", "rlnc-strong"),
    "delay": ("rlnc-weak", "rlnc-strong"),
}


def run_trial(cfg: ExperimentConfig, index: int) -> TrialRecord:
    rng = trial_rng(cfg.seed, index)
    start = time.perf_counter()
    try:
        ok, truth, output = SUITES[cfg.suite](cfg, rng)
        err = None
    except (ModelViolationError, GenerationError) as exc:
        ok, truth, output, err = False, {}, {}, f"{type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    return TrialRecord(cfg.suite, index, cfg.seed, bool(ok), truth, output, {"seconds": elapsed}, err)


def _run_one(args):
    cfg, index = args
    return run_trial(cfg, index)


def summarize(cfg: ExperimentConfig, records: list) -> dict:
    n = len(records)
    wins = sum(r.ok for r in records)
    return {
        "suite": cfg.suite,
        "trials": n,
        "successes": wins,
        "rate": (wins / n) if n else None,
        "errors": sum(1 for r in records if r.error),
    }


def run_experiment(cfg: ExperimentConfig):
    """Run ``cfg.trials`` trials; returns ``(records, summary)`` ordered by trial index."""
    cfg.validate()
    jobs = [(cfg, i) for i in range(cfg.trials)]
    if cfg.jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    return records, summarize(cfg, records)


# ---------------------------------------------------------------------------
# scenario dumps for the CLI
# ---------------------------------------------------------------------------


@dataclass
class Scenario:
    cfg: ExperimentConfig
    net: Network
    asg: codes.CodingAssignment
    code_seed: int
    traces: list

    @property
    def codebook(self):
        kind = "strong" if self.cfg.scheme == "rlnc-strong" else "weak"
        return codes.derive_codebook(kind, self.code_seed, self.cfg.q)

    @property
    def ids(self):
        return codes.IdTable.derive(self.code_seed, self.net.nodes, _multiplicity(self.net), self.cfg.q)


def _scenario_profile(cfg):
    if cfg.scheme == "nrsc" and cfg.model == "adversarial":
        return ConnectivityProfile.locate_adv(cfg.z)
    if cfg.profile == "strong" or cfg.scheme == "rlnc-strong":
        return ConnectivityProfile.strong(cfg.z)
    return ConnectivityProfile.from_name(cfg.profile, cfg.z)


def simulate(cfg: ExperimentConfig) -> Scenario:
    """Network, code and ``t`` generations under ``cfg.model``."""
    cfg.validate()
    rng = trial_rng(cfg.seed, 0)
    C = cfg.capacity
    if cfg.model == "adversarial":
        C = max(C, 2 * cfg.z + 1)
    net = random_network(cfg.nodes, C, _scenario_profile(cfg), rng)
    code_seed = _subseed(rng)
    asg, _ = _assignment(cfg, net, code_seed)
    q = cfg.q
    n = cfg.block
    t = cfg.t or 1
    traces, prev = [], None
    for i in range(t):
        X = channel.make_message(C, n, rng, q)
        if cfg.model == "adversarial":
            planted = _pick(rng, net.edges, cfg.z)
            model = channel.ErrorModel.adversarial(channel.adversary_packets(cfg.preset, planted, n, C, rng, q))
        elif cfg.model == "random":
            p_f = cfg.p_f or min(1.5, C - 1) / len(net.edges)
            model = channel.ErrorModel.random(p_f=p_f, sparsity=cfg.sparsity)
        elif cfg.model == "erasure_random":
            model = channel.ErrorModel.erasures(p_f=cfg.p_f)
        elif cfg.model in ("erasure_adversarial", "delay"):
            picked = _pick(rng, net.edges, max(1, cfg.z))
            model = channel.ErrorModel.erasures(picked) if cfg.model != "delay" else channel.ErrorModel.delays(picked)
        else:
            model = channel.ErrorModel.none()
        while True:
            tr = channel.transmit(net, asg, X, model, rng, index=i, previous=prev)
            if cfg.model != "random":
                break
            with tr.reveal() as truth:
                if len(truth.error_edges) <= C - 1:
                    break
        traces.append(tr)
        prev = tr
    return Scenario(cfg, net, asg, code_seed, traces)


def write_scenario(sc: Scenario, out: Path, fmt: str = "text", with_truth: bool = True) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "network.txt").write_text(sc.net.to_text())
    (out / "assignment.txt").write_text(codes.assignment_to_text(sc.asg))
    (out / "config.txt").write_text(sc.cfg.to_text() + f"# code seed\ncode_seed = {sc.code_seed}\n")
    if fmt == "json-lines":
        body = "".join(channel.trace_to_json(t, with_truth) + "\n" for t in sc.traces)
        (out / "traces.jsonl").write_text(body)
    else:
        (out / "traces.txt").write_text("".join(channel.trace_to_text(t, with_truth) for t in sc.traces))


def read_scenario(path: Path) -> Scenario:
    path = Path(path)
    cfg_text = (path / "config.txt").read_text()
    code_seed = None
    kept = []
    for line in cfg_text.splitlines():
        body = line.split("#", 1)[0].strip()
        if body.replace(" ", "").startswith("code_seed="):
            code_seed = int(body.split("=", 1)[1])
        else:
            kept.append(line)
    if code_seed is None:
        raise UsageError(f"{path}/config.txt lacks code_seed")
    cfg = parse_config("\n".join(kept))
    net = Network.from_text((path / "network.txt").read_text())
    asg = codes.assignment_from_text((path / "assignment.txt").read_text())
    tfile = path / "traces.txt"
    if not tfile.exists():
        tfile = path / "traces.jsonl"
    traces = channel.traces_from_text(tfile.read_text())
    return Scenario(cfg, net, asg, code_seed, traces)


def _error_matrices(sc: Scenario) -> list:
    out = []
    for tr in sc.traces:
        try:
            out.append(channel.error_matrix(tr.Y, channel.genie_decode(tr), sc.cfg.q))
        except NCTomoError:
            continue
    return out


def run_topology(sc: Scenario, alg: str) -> tm.TomographyReport:
    q = sc.cfg.q
    net = sc.net
    in_r = net.in_edges(net.receiver)
    if alg == "find-topo":
        zs = _error_matrices(sc)
        cand = tm.find_irv(zs, q)
        got = tm.find_topo(cand, sc.codebook, net.nodes, net.source, net.receiver, in_r, _multiplicity(net))
        diag = {"traces": len(zs), "candidate_lines": len(cand)}
        if len(zs) >= 2:
            diag["independence_estimate"] = tm.estimate_dependence(zs, q)
        return tm.TomographyReport("topology", alg, got, diag)
    if alg == "find-topo-rs":
        zs = _error_matrices(sc)
        got = tm.find_topo_rs(zs, sc.ids, in_r)
        return tm.TomographyReport("edge-set", alg, got, {"traces": len(zs)})
    if alg == "adv-rlnc":
        if sc.cfg.scheme != "rlnc-strong":
            raise UsageError("adv-rlnc needs a scenario simulated with scheme rlnc-strong")
        C = net.capacity
        T_e = sc.traces[0].Y[:, :C]
        got = tm.topo_adv_rlnc(T_e, sc.codebook, nodes=net.nodes, z=sc.cfg.z, source=net.source,
                               receiver=net.receiver, max_multiplicity=_multiplicity(net), max_nodes=sc.cfg.max_nodes)
        return tm.TomographyReport("topology", alg, got, {})
    raise UsageError(f"unknown topology algorithm {alg!r}")


def run_locate(sc: Scenario, alg: str, generation: int = 0) -> tm.TomographyReport:
    q = sc.cfg.q
    net = sc.net
    if not 0 <= generation < len(sc.traces):
        raise UsageError(f"generation {generation} not in dump")
    tr = sc.traces[generation]
    in_r = net.in_edges(net.receiver)
    table = codes.compute_irvs(net, sc.asg)
    X = channel.genie_decode(tr)
    z = sc.cfg.z
    if alg == "adversary-rlnc":
        got = tm.locate_adversary_rlnc(channel.full_error_matrix(tr.Y, X, table.transfer, q), table, z, sc.cfg.max_subsets)
    elif alg == "random-rlnc":
        got = tm.locate_random_rlnc(channel.error_matrix(tr.Y, X, q), table)
    elif alg == "adversary-rs":
        got = tm.locate_adversary_rs(X, tr.Y, sc.ids, sc.cfg.depth or 2 * z, in_r)
    elif alg == "random-rs":
        got = tm.locate_random_rs(X, tr.Y, sc.ids, sc.cfg.depth or z + 1, in_r)
    elif alg == "erasure":
        got = tm.locate_erasures(tr.Y, X, table)
    elif alg == "delay":
        got = tm.locate_delays(channel.full_error_matrix(tr.Y, X, table.transfer, q), table)
    else:
        raise UsageError(f"unknown localization algorithm {alg!r}")
    return tm.TomographyReport("edge-set", alg, got, {"generation": generation})
