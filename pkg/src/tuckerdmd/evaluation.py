"""Monte-Carlo NMSE evaluation of channel predictors.

NMSE for one trial is the relative error norm ``||H - Hhat||_F / ||H||_F``
against the *noiseless* future channel, expressed in dB as
``20 log10(ratio)`` and floored at -120 dB. Cell averages are taken in the
dB domain over the successful trials.

Trials are deterministic: trial ``i`` generates its channel with seed
``base_seed + i`` and draws observation noise from an offset stream, so a
report is byte-for-byte reproducible.
"""

import csv
from dataclasses import dataclass, replace

import numpy as np

from . import channel_sim, predictors, tensor_ops, tucker
from .errors import NumericalError
from .predictors import ChannelSequence, Method, PredictorConfig

NMSE_FLOOR_DB = -120.0

# keeps the noise stream disjoint from the path-parameter stream of the trial
_NOISE_SEED_OFFSET = 2 ** 32


def nmse(truth, prediction):
    """Relative Frobenius error ``||truth - prediction||_F / ||truth||_F``."""
    truth = tensor_ops.as_tensor(truth)
    prediction = tensor_ops.as_tensor(prediction)
    if truth.shape != prediction.shape:
        raise ValueError(f"shape mismatch: {truth.shape} vs {prediction.shape}")
    denom = tensor_ops.frobenius_norm(truth)
    if denom == 0.0:
        raise ValueError("NMSE is undefined for an all-zero truth tensor")
    return tensor_ops.frobenius_norm(truth - prediction) / denom


def nmse_db(ratio):
    """Error ratio in dB, floored at :data:`NMSE_FLOOR_DB`."""
    if ratio < 0:
        raise ValueError(f"ratio must be non-negative, got {ratio}")
    if ratio == 0.0:
        return NMSE_FLOOR_DB
    return max(20.0 * float(np.log10(ratio)), NMSE_FLOOR_DB)


@dataclass(frozen=True)
class ExperimentSpec:
    """Cartesian experiment grid over predictors, horizons, SNRs, periods."""

    scenario: channel_sim.ScenarioConfig
    predictors: tuple
    horizons: tuple
    snrs_db: tuple = (None,)
    periods_ms: tuple = (5.0,)
    n_trials: int = 100
    base_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "predictors", tuple(self.predictors))
        object.__setattr__(self, "horizons", tuple(int(t) for t in self.horizons))
        object.__setattr__(self, "snrs_db", tuple(self.snrs_db))
        object.__setattr__(self, "periods_ms", tuple(float(p) for p in self.periods_ms))
        if not self.predictors:
            raise ValueError("predictor list must not be empty")
        if not self.horizons or min(self.horizons) < 1:
            raise ValueError(f"horizons must be >= 1, got {self.horizons}")
        if not self.snrs_db or not self.periods_ms:
            raise ValueError("snrs_db and periods_ms must not be empty")
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be >= 1, got {self.n_trials}")


@dataclass(frozen=True)
class NmseCell:
    """One aggregated grid cell of a report."""

    method: str
    tau: int
    snr_db: float | None
    period_ms: float
    ranks: tuple
    compression: float
    nmse_db: float
    trials: int
    failures: int


CSV_HEADER = ("method", "tau", "snr_db", "period_ms", "r_rx", "r_tx", "r_sc",
              "compression", "nmse_db", "trials", "failures")


@dataclass(frozen=True)
class NmseReport:
    rows: tuple

    def cell(self, method, tau, snr_db=None, period_ms=None):
        """The unique row matching the given coordinates."""
        hits = [r for r in self.rows
                if r.method == method and r.tau == tau
                and (snr_db is None or r.snr_db == snr_db)
                and (period_ms is None or r.period_ms == period_ms)]
        if len(hits) != 1:
            raise KeyError(f"{len(hits)} rows match ({method}, {tau}, {snr_db}, {period_ms})")
        return hits[0]

    def write_csv(self, path):
        """UTF-8, LF line endings, fixed column order and number formats."""
        with open(path, "w", encoding="utf-8", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(CSV_HEADER)
            for r in self.rows:
                writer.writerow([
                    r.method,
                    r.tau,
                    "" if r.snr_db is None else f"{r.snr_db:g}",
                    f"{r.period_ms:g}",
                    r.ranks[0], r.ranks[1], r.ranks[2],
                    f"{r.compression:.6g}",
                    f"{r.nmse_db:.6f}",
                    r.trials,
                    r.failures,
                ])


def _cell_ranks(observed, cfg):
    if cfg.method in (Method.T_AR, Method.T_DMD):
        model = predictors.fixed_tucker_model(observed, cfg)
        return model.ranks, tucker.compression_ratio(model.dims, model.ranks)
    dims = observed.dims
    return dims, 1.0


def run_experiment(spec):
    """Run the grid and aggregate per-cell mean NMSE in dB.

    Per trial, a noiseless sequence long enough for the largest history
    plus the largest horizon is generated; the first ``max history``
    snapshots (noisy at the cell's SNR) form the observation, and truth is
    the noiseless snapshot ``tau`` steps past the observation end. A trial
    whose predictor raises is counted as a failure for that cell; the cell
    reports NaN only if every trial failed.
    """
    h_max = max(p.history for p in spec.predictors)
    needed = h_max + max(spec.horizons)
    rows = []
    for period in spec.periods_ms:
        for snr in spec.snrs_db:
            values = {(i, tau): [] for i in range(len(spec.predictors))
                      for tau in spec.horizons}
            failures = dict.fromkeys(values, 0)
            ranks = {}
            for trial in range(spec.n_trials):
                seed = spec.base_seed + trial
                scen = replace(spec.scenario, period_ms=period,
                               n_snapshots=needed, seed=seed, snr_db=snr)
                clean = channel_sim.generate_sequence(scen)
                observed = channel_sim.add_noise(
                    ChannelSequence(clean.snapshots[:h_max], period),
                    snr, seed + _NOISE_SEED_OFFSET)
                for i, pcfg in enumerate(spec.predictors):
                    if i not in ranks:
                        try:
                            ranks[i] = _cell_ranks(observed, pcfg)
                        except (ValueError, NumericalError):
                            pass
                    for tau in spec.horizons:
                        truth = clean.snapshots[h_max - 1 + tau]
                        try:
                            prediction = predictors.predict(observed, pcfg, tau)
                            values[(i, tau)].append(nmse_db(nmse(truth, prediction)))
                        except (ValueError, NumericalError):
                            failures[(i, tau)] += 1
            for i, pcfg in enumerate(spec.predictors):
                cell_ranks, compression = ranks.get(i, ((0, 0, 0), float("nan")))
                for tau in spec.horizons:
                    got = values[(i, tau)]
                    rows.append(NmseCell(
                        method=pcfg.method.value,
                        tau=tau,
                        snr_db=snr,
                        period_ms=period,
                        ranks=cell_ranks,
                        compression=compression,
                        nmse_db=float(np.mean(got)) if got else float("nan"),
                        trials=len(got),
                        failures=failures[(i, tau)],
                    ))
    return NmseReport(rows=tuple(rows))


def sweep_horizon(spec):
    """Horizon sweep at the benchmark operating point (5 ms, 30 dB)."""
    return run_experiment(replace(spec, snrs_db=(30.0,), periods_ms=(5.0,)))


def sweep_snr(spec):
    """SNR sweep at fixed horizon 5 and period 5 ms."""
    return run_experiment(replace(spec, horizons=(5,), periods_ms=(5.0,)))


def sweep_period(spec):
    """Sounding-period sweep at fixed horizon 5, noiseless."""
    return run_experiment(replace(spec, horizons=(5,), snrs_db=(None,)))
