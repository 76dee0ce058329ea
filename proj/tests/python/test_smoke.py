import math

import hcfloop

TINY = """
[experiment]
name = smoke
seed = 7
[signal]
channels = 1
payload_symbols = 2048
prefix_symbols = 256
[receiver]
osnr_loading_db = 30
[sweep]
fut = hcf
powers_dbm = 17
"""


def test_presets_listed():
    names = hcfloop.list_presets()
    assert "fig2" in names
    assert "fig2-scaled" in names


def test_shaped_constellation():
    points, probs, entropy = hcfloop.shaped_constellation(5.7)
    assert len(points) == 64
    assert len(probs) == 64
    assert abs(entropy - 5.7) < 1e-6
    assert abs(sum(probs) - 1.0) < 1e-9
    energy = sum(p * abs(c) ** 2 for p, c in zip(probs, points))
    assert abs(energy - 1.0) < 1e-9


def test_fiber_presets():
    hcf = hcfloop.fiber_preset("hcf")
    smf = hcfloop.fiber_preset("smf")
    assert hcf["latency_us_per_km"] < smf["latency_us_per_km"]
    assert abs(smf["latency_us_per_km"] - hcf["latency_us_per_km"] - 1.56) < 0.05
    assert hcf["gamma_per_w_km"] < 1e-3


def test_config_round_trip():
    cfg = hcfloop.parse_config_text(TINY)
    assert cfg.name == "smoke"
    assert cfg.channel_count == 1
    assert len(cfg.points) == 1
    assert cfg.points[0].fut_kind == "hcf"
    assert hcfloop.config_hash(cfg) == hcfloop.config_hash(hcfloop.parse_config_text(TINY))


def test_run_point():
    cfg = hcfloop.parse_config_text(TINY)
    r = hcfloop.run_point(cfg, 0)
    assert r["error"] == ""
    assert r["fut_kind"] == "hcf"
    assert r["n_loops"] == 1
    assert r["snr_db"] > 15.0
    assert 4.5 < r["gmi"] <= 5.7 + 1e-9
    assert math.isclose(r["air_gbps"], 2.0 * 16.0 * r["gmi"], rel_tol=1e-9)


def test_run_sweep_deterministic():
    cfg = hcfloop.parse_config_text(TINY)
    a = hcfloop.run_sweep(cfg, workers=1)
    b = hcfloop.run_sweep(cfg, workers=2)
    assert len(a) == len(b) == 1
    assert a[0]["snr_db"] == b[0]["snr_db"]
    assert a[0]["gmi"] == b[0]["gmi"]
