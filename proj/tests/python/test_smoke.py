from pathlib import Path

import pytest

import dsdivn

ROOT = Path(__file__).resolve().parents[2]
SCENARIO = ROOT / "scenarios" / "paper-sec5.json"


def small_scenario(**over):
    cfg = dsdivn.load_scenario(SCENARIO)
    cfg.update(n_vehicles=60, sim_duration_s=12.0)
    cfg["failure"] = {"target_segment": 3, "target_dir": 1, "start_s": 6.0, "duration_s": 3.0}
    cfg.update(over)
    return cfg


def test_geometry():
    assert dsdivn.segment_of(0.0, 150.0) == 0
    assert dsdivn.segment_of(150.0, 150.0) == 1
    assert dsdivn.residual_time(160.0, 10.0, 1, 150.0) == pytest.approx(14.0)
    assert dsdivn.residual_time(160.0, 10.0, -1, 150.0) == pytest.approx(1.0)


def test_link_delay():
    expect = 100 * 8 / 6e6 + 100 / 3e8 + 1e-3
    assert dsdivn.link_delay(100.0, 100) == pytest.approx(expect)
    two_hops = 2 * (100 * 8 / 6e6 + 150.5 / 3e8 + 1e-3)
    assert dsdivn.link_delay(301.0, 100) == pytest.approx(two_hops)
    with pytest.raises(ValueError):
        dsdivn.link_delay(10.0, 0)


def test_election():
    members = [(7, 10.0, 10.0, 1), (3, 60.0, 10.0, 1), (5, 10.0, 10.0, 1)]
    assert dsdivn.elect_head(members, 150.0) == 5
    assert dsdivn.rank_candidates(members, 5, 150.0) == [7, 3]
    assert dsdivn.elect_head([], 150.0) is None
    with pytest.raises(ValueError):
        dsdivn.elect_head([(1, 10.0, 10.0, 0)], 150.0)


def test_simulate_report():
    r = dsdivn.simulate(small_scenario(), seed=4)
    assert r["mode"] == "dsdivn"
    assert r["sent"] == r["received"] + r["dropped"] + r["in_flight"]
    assert r["invariant_violations"] == 0
    assert len(r["pdr"]) == 12
    assert r["counters"]["failures_injected"] == 1


def test_simulate_is_deterministic(tmp_path):
    a = dsdivn.simulate(SCENARIO, seed=9, mode="no-fallback", out_dir=tmp_path / "a")
    b = dsdivn.simulate(SCENARIO, seed=9, mode="no-fallback", out_dir=tmp_path / "b")
    assert a == b
    for name in ("pdr.csv", "install.csv", "counters.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_bad_scenario():
    with pytest.raises(dsdivn.ConfigError):
        dsdivn.simulate(small_scenario(segment_len_m=-1))
    with pytest.raises(ValueError):
        dsdivn.simulate(small_scenario(), mode="central")


def test_sweep_trend():
    cells = dsdivn.sweep([150, 450, 900], [100, 1500], reps=3)
    assert len(cells) == 6
    by_size = {}
    for dist, size, t in cells:
        by_size.setdefault(size, []).append(t)
    for times in by_size.values():
        assert times == sorted(times)
    assert all(t15 > t1 for t1, t15 in zip(by_size[100], by_size[1500]))
