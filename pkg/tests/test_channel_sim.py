"""Synthetic sum-of-rays channel generator: determinism, rank structure,
Doppler eigenvalues, noise calibration, and scenario config files."""

import numpy as np
import pytest

from tuckerdmd import channel_sim, dmd, tensor_ops, tucker
from tuckerdmd.channel_sim import PathSet, ScenarioConfig
from tuckerdmd.errors import DataFormatError

SPEED_OF_LIGHT = 299792458.0


def _small(**overrides):
    base = dict(n_rx=2, n_tx=4, n_sc=16, n_paths=3, n_snapshots=8, seed=7)
    base.update(overrides)
    return ScenarioConfig(**base)


# ---------------------------------------------------------------------------
# ScenarioConfig
# ---------------------------------------------------------------------------


def test_config_defaults_are_desk_scale():
    cfg = ScenarioConfig()
    assert (cfg.n_rx, cfg.n_tx, cfg.n_sc) == (2, 8, 64)
    assert cfg.carrier_ghz == 3.5
    assert cfg.ue_speed_kmh == 5.0
    assert cfg.period_ms == 5.0
    assert cfg.snr_db is None


def test_max_doppler_matches_kinematics():
    cfg = ScenarioConfig()
    expected = (5.0 / 3.6) * 3.5e9 / SPEED_OF_LIGHT
    assert abs(cfg.max_doppler_hz - expected) < 1e-9
    assert abs(cfg.max_doppler_hz - 16.2) < 0.05
    assert ScenarioConfig(ue_speed_kmh=0.0).max_doppler_hz == 0.0


def test_config_validation():
    with pytest.raises(ValueError):
        ScenarioConfig(n_paths=0)
    with pytest.raises(ValueError):
        ScenarioConfig(ue_speed_kmh=-1.0)
    with pytest.raises(ValueError):
        ScenarioConfig(period_ms=0.0)
    with pytest.raises(ValueError):
        ScenarioConfig(n_sc=4000)  # exceeds bandwidth / subcarrier spacing
    with pytest.raises(ValueError):
        ScenarioConfig(snr_db=np.inf)


def test_path_set_validation():
    ok = dict(gains=np.ones(2, dtype=complex), delays_s=np.zeros(2),
              aod_rad=np.zeros(2), aoa_rad=np.zeros(2), doppler_hz=np.zeros(2))
    PathSet(**ok)
    bad = dict(ok, delays_s=np.array([-1e-9, 0.0]))
    with pytest.raises(ValueError):
        PathSet(**bad)
    bad = dict(ok, doppler_hz=np.zeros(3))
    with pytest.raises(ValueError):
        PathSet(**bad)


def test_draw_paths_respects_bounds():
    cfg = _small(n_paths=64, ue_speed_kmh=30.0)
    paths = channel_sim.draw_paths(cfg)
    assert paths.gains.shape == (64,)
    assert np.all(paths.delays_s >= 0)
    assert np.all(np.abs(paths.doppler_hz) <= cfg.max_doppler_hz + 1e-12)
    assert np.all(np.abs(paths.aod_rad) <= np.pi / 2)
    assert np.all(np.abs(paths.aoa_rad) <= np.pi / 2)


# ---------------------------------------------------------------------------
# generate_sequence structure
# ---------------------------------------------------------------------------


def test_single_static_ray_is_constant_rank_one():
    cfg = _small(n_paths=1, ue_speed_kmh=0.0)
    seq = channel_sim.generate_sequence(cfg)
    assert len(seq) == 8
    first = seq.snapshots[0]
    scale = tensor_ops.frobenius_norm(first)
    for snap in seq.snapshots[1:]:
        assert tensor_ops.frobenius_norm(snap - first) <= 1e-12 * scale
    model, _ = tucker.hosvd(first, 1e-6)
    assert model.ranks == (1, 1, 1)


def test_single_moving_ray_snapshots_are_rank_one():
    cfg = _small(n_paths=1, ue_speed_kmh=30.0)
    seq = channel_sim.generate_sequence(cfg)
    for snap in (seq.snapshots[0], seq.snapshots[-1]):
        model, _ = tucker.hosvd(snap, 1e-6)
        assert model.ranks == (1, 1, 1)


def test_zero_speed_any_paths_is_constant():
    for n_paths in (2, 5):
        cfg = _small(n_paths=n_paths, ue_speed_kmh=0.0)
        seq = channel_sim.generate_sequence(cfg)
        first = seq.snapshots[0]
        scale = tensor_ops.frobenius_norm(first)
        for snap in seq.snapshots[1:]:
            assert tensor_ops.frobenius_norm(snap - first) <= 1e-12 * scale


def test_two_path_dmd_recovers_doppler_eigenvalues():
    # with fixed geometry each ray only rotates by exp(2 pi i f_p T_p) per
    # step, so the vec'd sequence evolves linearly with those eigenvalues
    cfg = _small(n_paths=2, ue_speed_kmh=30.0, n_snapshots=12, seed=11)
    paths = channel_sim.draw_paths(cfg)
    assert abs(paths.doppler_hz[0] - paths.doppler_hz[1]) > 1e-3

    seq = channel_sim.generate_sequence(cfg)
    flat = np.stack([tensor_ops.vec(s) for s in seq.snapshots])
    model = dmd.fit(dmd.build_snapshots(flat), rank=2)
    expected = np.exp(2j * np.pi * paths.doppler_hz * cfg.period_ms * 1e-3)
    assert dmd.eigenvalue_mismatch(model.eigenvalues, expected) < 1e-8


def test_sequence_rank_bounded_by_path_count():
    cfg = _small(n_paths=3, ue_speed_kmh=30.0, n_snapshots=10)
    seq = channel_sim.generate_sequence(cfg)
    flat = np.stack([tensor_ops.vec(s) for s in seq.snapshots])
    s = np.linalg.svd(flat, compute_uv=False)
    assert s[3] <= 1e-10 * s[0]  # trajectory spans at most n_paths directions
    for snap in seq.snapshots:
        model, _ = tucker.hosvd(snap, 1e-8)
        assert all(r <= 3 for r in model.ranks)


def test_generation_is_deterministic():
    cfg = _small(ue_speed_kmh=12.0)
    a = channel_sim.generate_sequence(cfg)
    b = channel_sim.generate_sequence(cfg)
    assert np.array_equal(a.snapshots, b.snapshots)
    c = channel_sim.generate_sequence(_small(ue_speed_kmh=12.0, seed=8))
    assert not np.array_equal(a.snapshots, c.snapshots)


def test_sequence_carries_period():
    cfg = _small(period_ms=7.5)
    assert channel_sim.generate_sequence(cfg).period_ms == 7.5


# ---------------------------------------------------------------------------
# add_noise
# ---------------------------------------------------------------------------


def test_add_noise_none_is_identity():
    seq = channel_sim.generate_sequence(_small())
    assert channel_sim.add_noise(seq, None, seed=3) is seq


def test_add_noise_is_deterministic():
    seq = channel_sim.generate_sequence(_small())
    a = channel_sim.add_noise(seq, 10.0, seed=5)
    b = channel_sim.add_noise(seq, 10.0, seed=5)
    assert np.array_equal(a.snapshots, b.snapshots)
    c = channel_sim.add_noise(seq, 10.0, seed=6)
    assert not np.array_equal(a.snapshots, c.snapshots)


def test_add_noise_empirical_snr_calibration():
    seq = channel_sim.generate_sequence(_small(n_snapshots=6))
    signal = np.sum(np.abs(seq.snapshots) ** 2)
    ratios = []
    for trial in range(100):
        noisy = channel_sim.add_noise(seq, 10.0, seed=1000 + trial)
        noise = np.sum(np.abs(noisy.snapshots - seq.snapshots) ** 2)
        ratios.append(signal / noise)
    measured_db = 10.0 * np.log10(np.mean(ratios))
    assert abs(measured_db - 10.0) < 0.5


def test_add_noise_rejects_nonfinite_snr():
    seq = channel_sim.generate_sequence(_small())
    with pytest.raises(ValueError):
        channel_sim.add_noise(seq, np.nan, seed=0)


# ---------------------------------------------------------------------------
# scenario config files
# ---------------------------------------------------------------------------


def test_config_file_round_trip(tmp_path):
    cfg = _small(snr_db=12.5, ue_speed_kmh=3.0, period_ms=7.5)
    path = tmp_path / "scenario.cfg"
    channel_sim.save_config(cfg, path)
    assert channel_sim.load_config(path) == cfg


def test_config_file_round_trip_noiseless(tmp_path):
    cfg = _small(snr_db=None)
    path = tmp_path / "scenario.cfg"
    channel_sim.save_config(cfg, path)
    loaded = channel_sim.load_config(path)
    assert loaded.snr_db is None
    assert loaded == cfg


def test_config_file_defaults_and_comments(tmp_path):
    path = tmp_path / "partial.cfg"
    path.write_text("# comment line\n\nn_rx = 4\nseed = 42\n", encoding="utf-8")
    cfg = channel_sim.load_config(path)
    assert cfg.n_rx == 4
    assert cfg.seed == 42
    assert cfg.n_tx == ScenarioConfig().n_tx


def test_config_file_errors(tmp_path):
    path = tmp_path / "bad.cfg"
    path.write_text("made_up_field = 3\n", encoding="utf-8")
    with pytest.raises(DataFormatError):
        channel_sim.load_config(path)
    path.write_text("n_rx = banana\n", encoding="utf-8")
    with pytest.raises(DataFormatError):
        channel_sim.load_config(path)
    path.write_text("n_rx\n", encoding="utf-8")
    with pytest.raises(DataFormatError):
        channel_sim.load_config(path)
    path.write_text("ue_speed_kmh = none\n", encoding="utf-8")
    with pytest.raises(DataFormatError):
        channel_sim.load_config(path)
    path.write_text("n_paths = 0\n", encoding="utf-8")
    with pytest.raises(DataFormatError):
        channel_sim.load_config(path)
