"""Acceptance suite: one test per criterion, each at its stated size and tolerance."""

import itertools
import math
import time

import numpy as np

from nctomo import channel, codes, harness, linalg
from nctomo import tomography as tm
from nctomo.field import DEFAULT_Q
from nctomo.harness import ExperimentConfig, run_experiment
from nctomo.rscode import RsParitySpec, rs_decode, rs_syndrome

Q = DEFAULT_Q


def timed(cfg):
    start = time.perf_counter()
    records, summary = run_experiment(cfg)
    return records, summary, time.perf_counter() - start


def test_c01_toy_reproduction(criterion):
    net, asg = harness.toy_network(Q)
    table = codes.compute_irvs(net, asg)
    e1 = net.edges[0]
    model = channel.ErrorModel.adversarial({e1: [2]})
    rng = np.random.default_rng(0)

    def pipeline():
        tr = channel.transmit(net, asg, [[1], [2]], model, rng)
        Z = channel.full_error_matrix(tr.Y, tr.X, table.transfer, Q)
        return tr.Y, Z, tm.locate_adversary_rlnc(Z, table, 1)

    pipeline()  # warm-up
    samples = []
    for _ in range(50):
        start = time.perf_counter()
        Y, Z, got = pipeline()
        samples.append(time.perf_counter() - start)
    ms = 1000 * float(np.median(samples))
    ok = Y.ravel().tolist() == [7, 5] and Z.ravel().tolist() == [2, 2] and got == {e1} and ms < 1.0
    criterion(1, ok, f"Y={Y.ravel().tolist()} Z={Z.ravel().tolist()} located={sorted(e.label for e in got)} median {ms:.3f} ms")
    assert ok


def test_c02_irv_table(criterion):
    net, asg, es = harness.two_path_network(Q)
    table = codes.compute_irvs(net, asg)
    got = [table.irv[e].tolist() for e in es]
    ok = got == [[3, 2], [0, 2], [0, 1], [1, 0], [0, 1]]
    criterion(2, ok, f"IRVs e1..e5 = {got}")
    assert ok


def test_c03_nrsc_identity(criterion):
    _, s, secs = timed(ExperimentConfig(suite="nrsc-identity", scheme="nrsc", nodes=15, trials=100, seed=3))
    ok = s["rate"] == 1.0 and secs < 10
    criterion(3, ok, f"{s['successes']}/{s['trials']} exact, {secs:.1f} s")
    assert ok


def test_c04_locate_adversary_rs(criterion):
    total, wins, secs = 0, 0, 0.0
    for z in (1, 2):
        cfg = ExperimentConfig(suite="rs-locate", scheme="nrsc", z=z, nodes=10, trials=100, seed=40 + z)
        _, s, dt = timed(cfg)
        total, wins, secs = total + s["trials"], wins + s["successes"], secs + dt
    ok = wins == total == 200 and secs < 30
    criterion(4, ok, f"{wins}/{total} exact over z in {{1,2}}, {secs:.1f} s")
    assert ok


def test_c05_locate_random_rlnc(criterion):
    total, wins, secs = 0, 0, 0.0
    for C in (2, 3):
        cfg = ExperimentConfig(suite="random-locate", capacity=C, nodes=10, z=0, trials=100, seed=50 + C)
        _, s, dt = timed(cfg)
        total, wins, secs = total + s["trials"], wins + s["successes"], secs + dt
    rate = wins / total
    ok = rate >= 0.99 and secs < 60
    criterion(5, ok, f"{wins}/{total} = extended set ({rate:.3f}), n = 64C, {secs:.1f} s")
    assert ok


def test_c06_topology_round_trip(criterion):
    cfg = ExperimentConfig(suite="topo-random", nodes=12, capacity=3, trials=50, seed=60)
    records, s, secs = timed(cfg)
    ts = [r.truth.get("t", 0) for r in records]
    ok = s["rate"] >= 0.95 and secs < 300
    criterion(6, ok, f"{s['successes']}/{s['trials']} exact topologies, t in [{min(ts)}, {max(ts)}], {secs:.1f} s")
    assert ok


def test_c07_topo_adv_rlnc(criterion):
    cfg = ExperimentConfig(suite="topo-adv", scheme="rlnc-strong", nodes=8, z=1, candidates=10, trials=50, seed=70)
    _, s, secs = timed(cfg)
    ok = s["rate"] == 1.0 and secs < 120
    criterion(7, ok, f"{s['successes']}/{s['trials']} correct among 10 candidates, {secs:.1f} s")
    assert ok


def test_c08_rank_distance(criterion):
    cfg = ExperimentConfig(suite="rank-distance", scheme="rlnc-strong", nodes=8, z=1, trials=50, seed=80)
    records, s, _ = timed(cfg)
    ranks = [r.output.get("rank") for r in records]
    ok = s["rate"] == 1.0
    criterion(8, ok, f"{s['successes']}/{s['trials']} with rank >= 3, min rank {min(r for r in ranks if r is not None)}")
    assert ok


def test_c09_rs_exhaustive(criterion):
    start = time.perf_counter()
    checked = bad = 0
    for q, l2, depths in ((7, 6, range(1, 6)), (13, 10, range(1, 7))):
        locs = tuple(range(1, l2 + 1))
        for l1 in depths:
            spec = RsParitySpec(locs, l1, q)
            for w in range(l1 // 2 + 1):
                for sup in itertools.combinations(range(l2), w):
                    for vals in itertools.product(range(1, q), repeat=w):
                        b = dict(zip(sup, vals))
                        checked += 1
                        bad += rs_decode(spec, rs_syndrome(spec, b), l1 // 2) != b
    secs = time.perf_counter() - start
    ok = bad == 0 and secs < 30
    criterion(9, ok, f"{checked - bad}/{checked} round trips over GF(7) and GF(13), {secs:.1f} s")
    assert ok


def test_c10_erasures(criterion):
    cfg = ExperimentConfig(suite="erasure", nodes=10, capacity=3, trials=100, seed=100)
    records, s, _ = timed(cfg)
    rate = lambda key: sum(bool(r.output.get(key)) for r in records) / len(records)
    span, loc, head = rate("span_ok"), rate("locate_ok"), rate("header_ok")
    ok = span >= 0.99 and loc >= 0.99 and head >= 0.95
    criterion(10, ok, f"span {span:.2f}, locate {loc:.2f}, header-difference lines {head:.2f}")
    assert ok


def test_c11_negative_controls(criterion):
    cfg = ExperimentConfig(suite="negative-controls", scheme="nrsc", nodes=10, capacity=3, t=10, trials=1000, seed=110)
    records, s, secs = timed(cfg)
    false_trials = sum(bool(r.output.get("false_edges")) for r in records)
    ambiguous = sum(bool(r.output.get("ambiguous")) for r in records)
    bound = 10 * cfg.nodes**2 * cfg.t**2 / Q
    rate = false_trials / len(records)
    ok = rate <= bound and ambiguous == len(records)
    criterion(
        11,
        ok,
        f"false-edge rate {rate:.4f} (bound {bound:.2e}), confusion ambiguous {ambiguous}/{len(records)}, {secs:.1f} s",
    )
    assert ok
