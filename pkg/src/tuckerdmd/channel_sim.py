"""Synthetic time-varying MIMO-OFDM channel generator.

The channel is a finite sum of specular rays. Snapshot ``t`` (sampled
every ``period_ms``) has entries

    H_t[i, j, k] = sum_p g_p * a_rx(theta_p)[i] * a_tx(phi_p)[j]
                   * exp(-2j pi f_k tau_p) * exp(2j pi nu_p t T_p)

with half-wavelength uniform linear arrays at both ends
(``a(theta)[m] = exp(1j pi m sin(theta))``), pilot subcarrier offsets
``f_k = k * subcarrier spacing``, path delays ``tau_p`` drawn from an
exponential power-delay profile, and Dopplers ``nu_p = (v f_c / c)
cos(alpha_p)`` for uniform ray angles ``alpha_p``. All randomness comes
from one seeded PCG64 stream, so a configuration generates the same
sequence on every run.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError
from .predictors import ChannelSequence

SPEED_OF_LIGHT = 299_792_458.0

#: RMS of the exponential power-delay profile, seconds
DELAY_SPREAD_S = 300e-9


@dataclass(frozen=True)
class ScenarioConfig:
    """Scenario knobs; defaults are the desk-scale benchmark settings."""

    n_rx: int = 2
    n_tx: int = 8
    n_sc: int = 64
    n_paths: int = 8
    carrier_ghz: float = 3.5
    bandwidth_mhz: float = 100.0
    subcarrier_khz: float = 30.0
    ue_speed_kmh: float = 5.0
    period_ms: float = 5.0
    n_snapshots: int = 20
    snr_db: float | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("n_rx", "n_tx", "n_sc", "n_paths", "n_snapshots"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1, got {getattr(self, name)}")
        for name in ("carrier_ghz", "bandwidth_mhz", "subcarrier_khz", "period_ms"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")
        if self.ue_speed_kmh < 0:
            raise ValueError(f"ue_speed_kmh must be >= 0, got {self.ue_speed_kmh}")
        if self.n_sc > self.bandwidth_mhz * 1e3 / self.subcarrier_khz:
            raise ValueError(
                f"n_sc={self.n_sc} does not fit in {self.bandwidth_mhz} MHz "
                f"at {self.subcarrier_khz} kHz spacing"
            )
        if self.snr_db is not None and not np.isfinite(self.snr_db):
            raise ValueError(f"snr_db must be finite or None, got {self.snr_db}")

    @property
    def max_doppler_hz(self):
        return (self.ue_speed_kmh / 3.6) * (self.carrier_ghz * 1e9) / SPEED_OF_LIGHT


@dataclass(frozen=True)
class PathSet:
    """Per-ray parameters; arrays all share length ``n_paths``."""

    gains: np.ndarray
    delays_s: np.ndarray
    aod_rad: np.ndarray
    aoa_rad: np.ndarray
    doppler_hz: np.ndarray

    def __post_init__(self):
        n = len(self.gains)
        for name in ("gains", "delays_s", "aod_rad", "aoa_rad", "doppler_hz"):
            arr = np.asarray(getattr(self, name))
            if arr.ndim != 1 or arr.size != n:
                raise ValueError(f"{name} must be a length-{n} vector")
            object.__setattr__(self, name, arr)
        if np.any(self.delays_s < 0):
            raise ValueError("path delays must be non-negative")


def draw_paths(cfg):
    """Draw the random ray parameters for a scenario (deterministic per seed).

    Gains are circularly-symmetric Gaussian with an exponential power-delay
    profile normalised to unit total mean power; departure and arrival
    angles are uniform over (-pi/2, pi/2); Doppler shifts are
    ``f_max cos(alpha)`` with ``alpha`` uniform over (0, 2 pi).
    """
    rng = np.random.default_rng(cfg.seed)
    p = cfg.n_paths
    delays = rng.exponential(scale=DELAY_SPREAD_S, size=p)
    powers = np.exp(-delays / DELAY_SPREAD_S)
    powers /= powers.sum()
    gains = np.sqrt(powers / 2.0) * (rng.standard_normal(p) + 1j * rng.standard_normal(p))
    aod = rng.uniform(-np.pi / 2, np.pi / 2, size=p)
    aoa = rng.uniform(-np.pi / 2, np.pi / 2, size=p)
    doppler = cfg.max_doppler_hz * np.cos(rng.uniform(0.0, 2.0 * np.pi, size=p))
    return PathSet(gains=gains, delays_s=delays, aod_rad=aod, aoa_rad=aoa,
                   doppler_hz=doppler)


def _steering(angles_rad, n_elements):
    # half-wavelength ULA response, one row per path
    m = np.arange(n_elements)
    return np.exp(1j * np.pi * np.outer(np.sin(angles_rad), m))


def generate_sequence(cfg):
    """Generate the noiseless snapshot sequence for a scenario."""
    paths = draw_paths(cfg)
    a_rx = _steering(paths.aoa_rad, cfg.n_rx)
    a_tx = _steering(paths.aod_rad, cfg.n_tx)
    subcarrier_hz = np.arange(cfg.n_sc) * cfg.subcarrier_khz * 1e3
    freq = np.exp(-2j * np.pi * np.outer(paths.delays_s, subcarrier_hz))
    t = np.arange(cfg.n_snapshots)
    rotation = np.exp(2j * np.pi * np.outer(t, paths.doppler_hz) * (cfg.period_ms * 1e-3))
    snaps = np.einsum("p,tp,pi,pj,pk->tijk", paths.gains, rotation, a_rx, a_tx, freq,
                      optimize=True)
    return ChannelSequence(snapshots=snaps, period_ms=cfg.period_ms)


def add_noise(seq, snr_db, seed):
    """Additive circularly-symmetric Gaussian noise at a per-snapshot SNR.

    Each snapshot gets noise of total expected power
    ``||H_t||_F^2 / 10^(snr_db/10)`` spread evenly over its entries.
    ``snr_db=None`` means noiseless and returns the sequence unchanged.
    """
    if snr_db is None:
        return seq
    if not np.isfinite(snr_db):
        raise ValueError(f"snr_db must be finite or None, got {snr_db}")
    rng = np.random.default_rng(seed)
    snaps = seq.snapshots
    n_entries = snaps[0].size
    power = np.sum(np.abs(snaps) ** 2, axis=(1, 2, 3))
    var = power / (n_entries * 10.0 ** (snr_db / 10.0))
    scale = np.sqrt(var / 2.0)[:, None, None, None]
    noise = scale * (rng.standard_normal(snaps.shape) + 1j * rng.standard_normal(snaps.shape))
    return ChannelSequence(snapshots=snaps + noise, period_ms=seq.period_ms)


# ---------------------------------------------------------------------------
# Flat key=value config files. Keys are the ScenarioConfig field names;
# lines starting with '#' and blank lines are ignored.
# ---------------------------------------------------------------------------

_FIELD_NAMES = tuple(f.name for f in dataclasses.fields(ScenarioConfig))
_INT_FIELDS = frozenset({"n_rx", "n_tx", "n_sc", "n_paths", "n_snapshots", "seed"})


def _format_value(value):
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def save_config(cfg, path):
    """Write every field as ``key = value``; round-trips through load_config."""
    lines = [f"{name} = {_format_value(getattr(cfg, name))}" for name in _FIELD_NAMES]
    with open(path, "w", encoding="utf-8") as f:
        f.write("\n".join(lines) + "\n")


def _parse_value(name, text):
    if text.lower() == "none":
        if name != "snr_db":
            raise DataFormatError(f"{name} cannot be none")
        return None
    try:
        return int(text) if name in _INT_FIELDS else float(text)
    except ValueError as exc:
        raise DataFormatError(f"bad value for {name}: {text!r}") from exc


def load_config(path):
    """Parse a key=value scenario file; unset fields keep their defaults."""
    values = {}
    with open(path, "r", encoding="utf-8") as f:
        for lineno, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise DataFormatError(f"{path}:{lineno}: expected key = value, got {line!r}")
            name, _, text = line.partition("=")
            name = name.strip()
            if name not in _FIELD_NAMES:
                raise DataFormatError(f"{path}:{lineno}: unknown field {name!r}")
            values[name] = _parse_value(name, text.strip())
    try:
        return ScenarioConfig(**values)
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
