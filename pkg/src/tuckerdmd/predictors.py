"""Channel predictors: ZOH, per-entry AR, full-tensor DMD, and their
Tucker-compressed variants.

Every predictor sees the last ``history`` snapshots of a sequence and
forecasts the channel ``tau`` steps past the final observed snapshot.
The Tucker variants fix their factor matrices from the first snapshot of
the window, project every window snapshot onto that subspace, run the
scalar method on the vectorised cores, and lift the result back.
"""

from dataclasses import dataclass
from enum import Enum

import numpy as np

from . import dmd, tensor_ops, tucker
from .errors import NumericalError

__all__ = [
    "Method", "ChannelSequence", "PredictorConfig", "OperatorEquivalence",
    "predict", "predict_zoh", "predict_ar", "predict_t_ar",
    "predict_full_dmd", "predict_t_dmd", "fit_ar", "fixed_tucker_model",
    "verify_operator_equivalence",
]


class Method(str, Enum):
    ZOH = "zoh"
    AR = "ar"
    T_AR = "t_ar"
    FULL_DMD = "full_dmd"
    T_DMD = "t_dmd"


@dataclass(frozen=True)
class ChannelSequence:
    """Uniformly sampled channel snapshots, shape ``(T, n_rx, n_tx, n_sc)``."""

    snapshots: np.ndarray
    period_ms: float

    def __post_init__(self):
        snaps = np.asarray(self.snapshots, dtype=tensor_ops.COMPLEX)
        if snaps.ndim != 4 or snaps.shape[0] < 1 or min(snaps.shape[1:]) < 1:
            raise ValueError(f"expected snapshots shaped (T, I, J, K), got {snaps.shape}")
        if not np.all(np.isfinite(snaps)):
            raise ValueError("sequence contains non-finite entries")
        period = float(self.period_ms)
        if not (np.isfinite(period) and period > 0):
            raise ValueError(f"period_ms must be positive, got {self.period_ms}")
        object.__setattr__(self, "snapshots", snaps)
        object.__setattr__(self, "period_ms", period)

    def __len__(self):
        return self.snapshots.shape[0]

    @property
    def dims(self):
        return tuple(self.snapshots.shape[1:])

    def save(self, path):
        tensor_ops.write_sequence(path, self.snapshots, self.period_ms)

    @classmethod
    def load(cls, path):
        snaps, period_ms = tensor_ops.read_sequence(path)
        return cls(snapshots=snaps, period_ms=period_ms)


@dataclass(frozen=True)
class PredictorConfig:
    """Knobs shared by the predictors.

    ``dmd_rank=None`` lets the DMD stage pick its rank adaptively.
    """

    method: Method = Method.T_DMD
    history: int = 10
    ar_order: int = 3
    tucker_threshold: float = 1e-3
    dmd_rank: int | None = None

    def __post_init__(self):
        if self.history < 1:
            raise ValueError(f"history must be >= 1, got {self.history}")
        if self.ar_order < 1:
            raise ValueError(f"ar_order must be >= 1, got {self.ar_order}")
        if self.ar_order >= self.history:
            raise ValueError(
                f"ar_order ({self.ar_order}) must be smaller than history ({self.history})"
            )
        if not 0 <= self.tucker_threshold < 1:
            raise ValueError(f"tucker_threshold must lie in [0, 1), got {self.tucker_threshold}")
        if self.dmd_rank is not None and self.dmd_rank < 1:
            raise ValueError(f"dmd_rank must be >= 1 or None, got {self.dmd_rank}")
        object.__setattr__(self, "method", Method(self.method))


def _check_tau(tau):
    tau = int(tau)
    if tau < 1:
        raise ValueError(f"prediction horizon tau must be >= 1, got {tau}")
    return tau


def _window(seq, history):
    if history > len(seq):
        raise ValueError(f"history {history} exceeds sequence length {len(seq)}")
    return seq.snapshots[-history:]


def _vec_window(window):
    return np.stack([tensor_ops.vec(s) for s in window])


def predict_zoh(seq, tau):
    """Zero-order hold: repeat the last observed snapshot."""
    _check_tau(tau)
    return seq.snapshots[-1].copy()


def _fit_ar_batch(series, order):
    """Per-column least-squares AR(order) coefficients.

    ``series`` has shape ``(n_samples, n_series)``; returns ``(n_series,
    order)`` coefficients ``a`` for the model ``s[t] = sum_k a[k] *
    s[t-1-k]``. The fit is the SVD minimum-norm solution, which
    extrapolates exactly whenever every column obeys one recursion of at
    most the given order. Columns whose design matrix is identically zero
    fall back to hold-last-value coefficients.
    """
    n, m = series.shape
    order = int(order)
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    if n < 2 * order:
        raise ValueError(f"need at least {2 * order} samples for order {order}, got {n}")
    rows = n - order
    design = np.empty((m, rows, order), dtype=tensor_ops.COMPLEX)
    for k in range(order):
        design[:, :, k] = series[order - 1 - k:n - 1 - k].T
    targets = series[order:].T
    u, s, vh = np.linalg.svd(design, full_matrices=False)
    cutoff = max(rows, order) * np.finfo(np.float64).eps * s[:, :1]
    s_inv = np.zeros_like(s)
    np.divide(1.0, s, out=s_inv, where=s > cutoff)
    uty = np.einsum("mrk,mr->mk", u.conj(), targets)
    coeffs = np.einsum("mkp,mk->mp", vh.conj(), s_inv * uty)
    dead = s[:, 0] == 0.0
    if np.any(dead):
        coeffs[dead] = 0.0
        coeffs[dead, 0] = 1.0
    return coeffs


def fit_ar(series, order):
    """AR(order) coefficients of one scalar series by direct least squares."""
    series = np.asarray(series, dtype=tensor_ops.COMPLEX)
    if series.ndim != 1:
        raise ValueError("expected a one-dimensional series")
    return _fit_ar_batch(series[:, None], order)[0]


def _ar_forecast(series, coeffs, steps):
    # series (n, m), coeffs (m, p); recursion applied `steps` times with
    # predictions fed back as new lags
    p = coeffs.shape[1]
    lags = series[:-p - 1:-1].T.copy()  # lags[:, k] is the value k+1 steps back
    for _ in range(steps):
        nxt = np.einsum("mp,mp->m", coeffs, lags)
        lags = np.roll(lags, 1, axis=1)
        lags[:, 0] = nxt
    return nxt


def predict_ar(seq, cfg, tau):
    """Independent scalar AR model for every tensor entry."""
    tau = _check_tau(tau)
    window = _window(seq, cfg.history)
    flat = _vec_window(window)
    coeffs = _fit_ar_batch(flat, cfg.ar_order)
    return tensor_ops.unvec(_ar_forecast(flat, coeffs, tau), seq.dims)


def predict_t_ar(seq, cfg, tau):
    """Per-entry AR run on Tucker cores with factors fixed from the first
    window snapshot."""
    tau = _check_tau(tau)
    window = _window(seq, cfg.history)
    model, _ = tucker.hosvd(window[0], cfg.tucker_threshold)
    cores = _vec_window([tucker.project_core(s, model) for s in window])
    coeffs = _fit_ar_batch(cores, cfg.ar_order)
    core = tensor_ops.unvec(_ar_forecast(cores, coeffs, tau), model.ranks)
    return tucker.reconstruct(model, core)


def predict_full_dmd(seq, cfg, tau):
    """DMD on the vectorised full tensors."""
    tau = _check_tau(tau)
    window = _window(seq, cfg.history)
    pair = dmd.build_snapshots(_vec_window(window))
    model = dmd.fit(pair, rank=cfg.dmd_rank)
    ahead = dmd.predict(model, cfg.history - 1 + tau)
    return tensor_ops.unvec(ahead, seq.dims)


def predict_t_dmd(seq, cfg, tau):
    """DMD on vectorised Tucker cores.

    Factors come from the first window snapshot and stay fixed across the
    window; the forecast core is lifted back through the same factors.
    """
    tau = _check_tau(tau)
    window = _window(seq, cfg.history)
    model, _ = tucker.hosvd(window[0], cfg.tucker_threshold)
    cores = _vec_window([tucker.project_core(s, model) for s in window])
    pair = dmd.build_snapshots(cores)
    fitted = dmd.fit(pair, rank=cfg.dmd_rank)
    ahead = dmd.predict(fitted, cfg.history - 1 + tau)
    return tucker.reconstruct(model, tensor_ops.unvec(ahead, model.ranks))


_DISPATCH = {
    Method.ZOH: lambda seq, cfg, tau: predict_zoh(seq, tau),
    Method.AR: predict_ar,
    Method.T_AR: predict_t_ar,
    Method.FULL_DMD: predict_full_dmd,
    Method.T_DMD: predict_t_dmd,
}


def predict(seq, cfg, tau):
    """Dispatch to the predictor named by ``cfg.method``."""
    return _DISPATCH[Method(cfg.method)](seq, cfg, tau)


def fixed_tucker_model(seq, cfg):
    """The Tucker model a compressed method would fix for this window."""
    window = _window(seq, cfg.history)
    model, _ = tucker.hosvd(window[0], cfg.tucker_threshold)
    return model


@dataclass(frozen=True)
class OperatorEquivalence:
    """Comparison of the full-space and core-space reduced propagators.

    ``comparable`` is False when the two adaptive rank selections disagree,
    in which case the diffs are NaN. ``tucker_residual`` is the relative
    Frobenius error of the fixed-factor representation over the window and
    bounds how far from exact the equivalence can be.
    """

    operator_diff: float
    eigenvalue_diff: float
    tucker_residual: float
    rank: int
    comparable: bool


def _auto_rank(x):
    s = np.linalg.svd(x, compute_uv=False)
    if s[0] == 0.0:
        raise NumericalError("snapshot matrix is identically zero")
    return max(1, int(np.count_nonzero(s >= dmd.DEFAULT_RANK_THRESHOLD * s[0])))


def verify_operator_equivalence(seq, cfg):
    """Fit the reduced DMD propagator in full space and in core space at
    equal truncation rank and measure how far apart they are."""
    window = _window(seq, cfg.history)
    model, _ = tucker.hosvd(window[0], cfg.tucker_threshold)
    cores = [tucker.project_core(s, model) for s in window]
    err2 = sum(tensor_ops.frobenius_norm(s - tucker.reconstruct(model, g)) ** 2
               for s, g in zip(window, cores))
    ref2 = sum(tensor_ops.frobenius_norm(s) ** 2 for s in window)
    residual = float(np.sqrt(err2 / ref2))

    full_pair = dmd.build_snapshots(_vec_window(window))
    core_pair = dmd.build_snapshots(_vec_window(cores))
    if cfg.dmd_rank is not None:
        rank = cfg.dmd_rank
    else:
        rank = _auto_rank(full_pair.x)
        if rank != _auto_rank(core_pair.x):
            return OperatorEquivalence(
                operator_diff=float("nan"), eigenvalue_diff=float("nan"),
                tucker_residual=residual, rank=0, comparable=False,
            )
    op_full = dmd.reduced_operator(full_pair, rank=rank)
    op_core = dmd.reduced_operator(core_pair, rank=rank)
    denom = np.linalg.norm(op_core)
    if denom == 0.0:
        raise NumericalError("core-space operator is identically zero")
    op_diff = float(np.linalg.norm(op_full - op_core) / denom)
    eig_diff = dmd.eigenvalue_mismatch(np.linalg.eigvals(op_full),
                                       np.linalg.eigvals(op_core))
    return OperatorEquivalence(
        operator_diff=op_diff, eigenvalue_diff=eig_diff,
        tucker_residual=residual, rank=rank, comparable=True,
    )
