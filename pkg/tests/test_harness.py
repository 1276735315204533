import pytest

from nctomo import harness
from nctomo.errors import UsageError
from nctomo.harness import ExperimentConfig, parse_config, run_experiment


def test_parse_config_forms():
    cfg = parse_config("suite = rs-locate  # comment\nscheme nrsc\nz=2\n\nrecord_timings = yes\n")
    assert (cfg.suite, cfg.scheme, cfg.z, cfg.record_timings) == ("rs-locate", "nrsc", 2, True)
    assert parse_config("seed = 3", seed=9).seed == 9
    again = parse_config(cfg.to_text())
    assert again == cfg


@pytest.mark.parametrize(
    "text",
    ["bogus = 1", "z = two", "suite = nope", "suite = rs-locate\nscheme = rlnc-weak", "nodes = 0", "n = 2\ncapacity = 3"],
)
def test_parse_config_rejects(text):
    with pytest.raises(UsageError):
        parse_config(text)


def test_zero_trials():
    records, summary = run_experiment(ExperimentConfig(suite="toy", trials=0))
    assert records == [] and summary["trials"] == 0 and summary["rate"] is None


def test_determinism_and_parallel_equivalence():
    cfg = ExperimentConfig(suite="random-locate", trials=4, seed=11, capacity=3, nodes=8)
    a, _ = run_experiment(cfg)
    b, _ = run_experiment(cfg)
    c, _ = run_experiment(ExperimentConfig(**{**cfg.__dict__, "jobs": 2}))
    lines = lambda rs: [r.to_json() for r in rs]
    assert lines(a) == lines(b) == lines(c)


def test_trial_replay():
    cfg = ExperimentConfig(suite="rs-locate", scheme="nrsc", trials=3, seed=5)
    records, _ = run_experiment(cfg)
    assert harness.run_trial(cfg, 2).to_json() == records[2].to_json()


def test_suites_smoke():
    skip = {"topo-random", "topo-rs"}
    for name in sorted(harness.SUITES):
        if name in skip:
            continue
        scheme = harness.SUITE_SCHEME.get(name, ("rlnc-weak",))[0]
        _, summary = run_experiment(ExperimentConfig(suite=name, scheme=scheme, trials=2, seed=1, nodes=8))
        assert summary["rate"] == 1.0, (name, summary)


def test_choose_generations_grows_with_edges():
    assert harness.choose_generations(20, 1.5, 0.8) < harness.choose_generations(40, 1.5, 0.8)
    assert harness.choose_generations(20, 1.5, 0.0) == harness.choose_generations(20, 1.5, 0.05)


def test_scenario_round_trip(tmp_path):
    cfg = ExperimentConfig(scheme="nrsc", capacity=3, nodes=7, t=3, seed=2)
    sc = harness.simulate(cfg)
    harness.write_scenario(sc, tmp_path, "text", True)
    back = harness.read_scenario(tmp_path)
    assert back.net == sc.net and len(back.traces) == 3
    assert all((a.Y == b.Y).all() for a, b in zip(sc.traces, back.traces))
