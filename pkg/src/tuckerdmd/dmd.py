"""Exact dynamic mode decomposition of complex snapshot sequences.

Given snapshots ``h_1 .. h_T`` stacked into the lagged matrices
``X = [h_1 .. h_{T-1}]`` and ``Y = [h_2 .. h_T]``, the best-fit linear
propagator ``Y ~ A X`` is analysed through the rank-r truncated SVD
``X ~ U_r S_r V_r^H``:

* reduced operator  ``A_r = U_r^H Y V_r S_r^{-1}``  (r x r)
* eigenpairs        ``A_r W = W diag(lambda)``
* exact modes       ``Phi = Y V_r S_r^{-1} W``
* amplitudes        ``b = pinv(Phi) h_1``

so that ``Phi diag(lambda)^k b`` propagates the first snapshot ``k`` steps
forward. The exponent is taken literally here; callers that anchor at the
end of the observation window add their own offset.

Eigenvalues are ordered by descending magnitude, ties broken by descending
real part, which makes fitted models reproducible.
"""

from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from . import tensor_ops
from .errors import DataFormatError, NumericalError

#: relative singular-value cutoff used when no explicit rank is requested
DEFAULT_RANK_THRESHOLD = 1e-10

# requesting a rank whose singular value is this far below s_0 is an error
_DEFICIENCY_RTOL = 1e-13


@dataclass(frozen=True)
class SnapshotPair:
    """Lagged snapshot matrices ``x`` (inputs) and ``y`` (one-step images)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = np.asarray(self.x, dtype=tensor_ops.COMPLEX)
        y = np.asarray(self.y, dtype=tensor_ops.COMPLEX)
        if x.ndim != 2 or y.ndim != 2 or x.shape != y.shape:
            raise ValueError(f"x and y must be equal-shape matrices, got {x.shape} and {y.shape}")
        if x.shape[0] < 1 or x.shape[1] < 2:
            raise ValueError(f"need at least two snapshot columns, got shape {x.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("snapshot matrices contain non-finite entries")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)


@dataclass(frozen=True)
class DmdModel:
    """Fitted modes, eigenvalues and amplitudes.

    ``operator`` keeps the reduced propagator the eigenvalues came from;
    it is not stored in the DMD1 file format, so loaded models carry
    ``operator=None``.
    """

    modes: np.ndarray
    eigenvalues: np.ndarray
    amplitudes: np.ndarray
    rank: int
    operator: np.ndarray | None = None

    def save(self, path):
        n, r = self.modes.shape
        header = f"DMD1 {n} {r}\n".encode("ascii")
        with open(path, "wb") as f:
            f.write(header)
            f.write(tensor_ops._interleave(np.ravel(self.modes, order="F")).tobytes())
            f.write(tensor_ops._interleave(self.eigenvalues).tobytes())
            f.write(tensor_ops._interleave(self.amplitudes).tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            n, r = tensor_ops._header_ints(
                tensor_ops._read_header(f, "DMD1", 2, path), path
            )
            if r > n:
                raise DataFormatError(f"{path}: rank {r} exceeds dimension {n}")
            entries = tensor_ops._read_payload(f, n * r + 2 * r, path)
        modes = entries[:n * r].reshape((n, r), order="F")
        eigenvalues = entries[n * r:n * r + r]
        amplitudes = entries[n * r + r:]
        return cls(modes=modes, eigenvalues=eigenvalues, amplitudes=amplitudes,
                   rank=r, operator=None)


def build_snapshots(vectors):
    """Stack a sequence of >= 3 equal-length vectors into a SnapshotPair."""
    mat = np.asarray(vectors, dtype=tensor_ops.COMPLEX)
    if mat.ndim != 2:
        raise ValueError("expected a sequence of equal-length vectors")
    if mat.shape[0] < 3:
        raise ValueError(f"need at least 3 snapshots, got {mat.shape[0]}")
    cols = mat.T  # columns are snapshots
    return SnapshotPair(x=cols[:, :-1], y=cols[:, 1:])


def _truncated_svd(x, rank, threshold):
    u, s, vh = np.linalg.svd(x, full_matrices=False)
    if s[0] == 0.0:
        raise NumericalError("snapshot matrix is identically zero")
    if rank is None:
        r = max(1, int(np.count_nonzero(s >= threshold * s[0])))
    else:
        r = int(rank)
        if not 1 <= r <= s.size:
            raise ValueError(f"rank must lie in [1, {s.size}], got {r}")
        if s[r - 1] < _DEFICIENCY_RTOL * s[0]:
            raise NumericalError(
                f"requested rank {r} exceeds numerical rank (s_{r - 1}/s_0 = {s[r - 1] / s[0]:.2e})"
            )
    u, vh = u[:, :r].copy(), vh[:r].copy()
    # Resolve the per-pair phase ambiguity of the SVD on the right singular
    # vectors, which live in the snapshot-time coordinate. Fitting the same
    # dynamics through any isometry of the state then yields the *same*
    # reduced operator, not just a similar one.
    for j in range(r):
        row = vh[j]
        nz = np.flatnonzero(np.abs(row) > 1e-12)
        if nz.size:
            pivot = row[nz[0]]
            phase = pivot / np.abs(pivot)
            vh[j] *= np.conj(phase)
            u[:, j] *= phase
    return u, s[:r], vh.conj().T


def reduced_operator(pair, rank=None, threshold=DEFAULT_RANK_THRESHOLD):
    """Rank-truncated propagator ``U_r^H Y V_r S_r^{-1}`` without eigenanalysis."""
    u, s, v = _truncated_svd(pair.x, rank, threshold)
    return (u.conj().T @ pair.y @ v) / s


def fit(pair, rank=None, threshold=DEFAULT_RANK_THRESHOLD):
    """Fit a DmdModel to a SnapshotPair.

    ``rank=None`` selects the rank adaptively: singular values below
    ``threshold * s_0`` are dropped (at least one is kept). An explicit
    rank must not exceed the numerical rank of ``x``.
    """
    u, s, v = _truncated_svd(pair.x, rank, threshold)
    a_reduced = (u.conj().T @ pair.y @ v) / s
    lam, w = np.linalg.eig(a_reduced)
    order = np.lexsort((-lam.imag, -lam.real, -np.abs(lam)))
    lam = lam[order]
    w = w[:, order]
    modes = ((pair.y @ v) / s) @ w
    amplitudes, *_ = np.linalg.lstsq(modes, pair.x[:, 0], rcond=None)
    return DmdModel(modes=modes, eigenvalues=lam, amplitudes=amplitudes,
                    rank=s.size, operator=a_reduced)


def predict(model, exponent):
    """Propagate the fitted first snapshot: ``Phi diag(lambda)^exponent b``."""
    exponent = int(exponent)
    if exponent < 0:
        raise ValueError(f"exponent must be non-negative, got {exponent}")
    return model.modes @ (model.eigenvalues ** exponent * model.amplitudes)


def eigenvalue_mismatch(a, b):
    """Max absolute difference between two eigenvalue multisets under the
    best one-to-one matching."""
    a = np.asarray(a, dtype=tensor_ops.COMPLEX).ravel()
    b = np.asarray(b, dtype=tensor_ops.COMPLEX).ravel()
    if a.size != b.size:
        raise ValueError(f"eigenvalue sets differ in size: {a.size} vs {b.size}")
    cost = np.abs(a[:, None] - b[None, :])
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].max())
