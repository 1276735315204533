import json

import pytest

from nctomo.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_bench_rs_locate(capsys):
    code, out, _ = run(capsys, "bench", "--suite", "rs-locate", "--set", "scheme=nrsc", "--trials", "3")
    assert code == 0 and "summary" in out and "rate=1.0" in out


def test_bench_json_lines(capsys):
    code, out, _ = run(capsys, "bench", "--suite", "toy", "--trials", "2", "--format", "json-lines")
    rows = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and rows[-1]["summary"]["successes"] == 2


def test_usage_errors(capsys):
    assert run(capsys, "frobnicate")[0] == 1
    assert run(capsys, "bench", "--nope")[0] == 1
    assert run(capsys, "bench", "--suite", "toy", "--set", "garbage")[0] == 1
    assert run(capsys, "topo", "--alg", "find-topo", "--in", "/nonexistent/dir")[0] == 1


def test_scale_cap_exit(capsys, tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("scheme = rlnc-strong\nmodel = adversarial\nnodes = 12\ncapacity = 5\nz = 2\nmax_subsets = 5\nt = 1\n")
    code, _, err = run(capsys, "locate", "--alg", "adversary-rlnc", "--config", str(cfg))
    assert code == 3 and "ScaleCapError" in err


def test_model_violation_exit(capsys):
    # two adversarial edges against a depth-2 RS residual that corrects one
    args = ["--set", "scheme=nrsc", "--set", "model=adversarial", "--set", "z=2", "--set", "depth=2", "--set", "t=1"]
    code, _, err = run(capsys, "locate", "--alg", "adversary-rs", *args)
    assert code == 2 and "DecodeFailure" in err


def test_simulate_deterministic(tmp_path, capsys):
    a, b = tmp_path / "a", tmp_path / "b"
    assert run(capsys, "simulate", "--seed", "7", "--out", str(a))[0] == 0
    assert run(capsys, "simulate", "--seed", "7", "--out", str(b))[0] == 0
    for name in ("network.txt", "assignment.txt", "config.txt", "traces.txt"):
        assert (a / name).read_text() == (b / name).read_text()
    assert "truth" in (a / "traces.txt").read_text()


def test_simulate_then_locate_and_topo(tmp_path, capsys):
    d = tmp_path / "sc"
    assert run(capsys, "simulate", "--seed", "3", "--set", "t=40", "--out", str(d), "--no-truth")[0] == 0
    assert "truth" not in (d / "traces.txt").read_text()
    code, out, _ = run(capsys, "locate", "--alg", "random-rlnc", "--in", str(d))
    assert code == 0 and out.startswith("report")
    code, out, _ = run(capsys, "topo", "--alg", "find-topo", "--in", str(d), "--format", "json-lines")
    assert code == 0 and json.loads(out)["kind"] == "topology"


def test_gen_net(tmp_path, capsys):
    out = tmp_path / "net.txt"
    assert run(capsys, "gen-net", "--nodes", "7", "--capacity", "3", "--seed", "4", "--out", str(out))[0] == 0
    from nctomo.netgraph import Network, min_cut

    assert min_cut(Network.from_text(out.read_text())) == 3
