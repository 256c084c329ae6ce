"""Truncated higher-order SVD (Tucker decomposition) with adaptive ranks.

The multilinear rank is selected per mode by thresholding singular values
of the mode unfolding relative to the largest one: mode-n keeps every
singular vector whose singular value satisfies ``s_i >= threshold * s_0``,
with a floor of one. The factors returned are orthonormal bases of the
dominant mode subspaces; the core is the projection of the tensor onto
them.
"""

from dataclasses import dataclass

import numpy as np

from . import tensor_ops
from .errors import DataFormatError, NumericalError


@dataclass(frozen=True)
class TuckerModel:
    """Orthonormal factor matrices of a (rx, tx, sc) Tucker subspace.

    Each factor has shape ``(dim, rank)`` with ``rank <= dim`` and
    orthonormal columns. The phase of every column is normalised so its
    first non-negligible entry is real and positive, which makes factor
    matrices reproducible across runs.
    """

    u_rx: np.ndarray
    u_tx: np.ndarray
    u_sc: np.ndarray

    def __post_init__(self):
        for name, u in zip(("u_rx", "u_tx", "u_sc"), self.factors):
            arr = np.asarray(u, dtype=tensor_ops.COMPLEX)
            if arr.ndim != 2 or arr.shape[1] > arr.shape[0] or arr.shape[1] < 1:
                raise ValueError(f"{name}: expected a tall (dim, rank) matrix, got {arr.shape}")
            object.__setattr__(self, name, arr)

    @property
    def factors(self):
        return (self.u_rx, self.u_tx, self.u_sc)

    @property
    def dims(self):
        return tuple(u.shape[0] for u in self.factors)

    @property
    def ranks(self):
        return tuple(u.shape[1] for u in self.factors)

    def save(self, path):
        """Write the factors as a TKM1 file (column-major complex pairs)."""
        n = self.dims
        r = self.ranks
        header = f"TKM1 {n[0]} {r[0]} {n[1]} {r[1]} {n[2]} {r[2]}\n".encode("ascii")
        with open(path, "wb") as f:
            f.write(header)
            for u in self.factors:
                f.write(tensor_ops._interleave(np.ravel(u, order="F")).tobytes())

    @classmethod
    def load(cls, path):
        with open(path, "rb") as f:
            fields = tensor_ops._header_ints(
                tensor_ops._read_header(f, "TKM1", 6, path), path
            )
            n = fields[0::2]
            r = fields[1::2]
            if any(rk > dim for rk, dim in zip(r, n)):
                raise DataFormatError(f"{path}: rank exceeds dimension in header")
            total = sum(dim * rk for dim, rk in zip(n, r))
            entries = tensor_ops._read_payload(f, total, path)
        factors = []
        start = 0
        for dim, rk in zip(n, r):
            factors.append(entries[start:start + dim * rk].reshape((dim, rk), order="F"))
            start += dim * rk
        return cls(*factors)


def _fix_column_phases(u):
    # Rotate each column so its first entry of non-negligible magnitude is
    # real positive; resolves the per-column phase ambiguity of the SVD.
    u = u.copy()
    for j in range(u.shape[1]):
        col = u[:, j]
        nz = np.flatnonzero(np.abs(col) > 1e-12)
        if nz.size:
            pivot = col[nz[0]]
            col *= np.conj(pivot) / np.abs(pivot)
    return u


def hosvd(t, threshold):
    """Adaptive-rank truncated HOSVD.

    Parameters
    ----------
    t : order-3 complex tensor
    threshold : float in [0, 1)
        Relative singular-value cutoff per mode. Zero keeps every mode
        direction (exact reconstruction); larger values truncate harder.

    Returns
    -------
    (TuckerModel, core) where ``core`` has shape ``model.ranks``.
    """
    t = tensor_ops.as_tensor(t)
    if not np.all(np.isfinite(t)):
        raise ValueError("tensor contains non-finite entries")
    if not 0 <= threshold < 1:
        raise ValueError(f"threshold must lie in [0, 1), got {threshold}")
    if tensor_ops.frobenius_norm(t) == 0.0:
        raise NumericalError("hosvd of an all-zero tensor is undefined")
    factors = []
    for mode in (1, 2, 3):
        m = tensor_ops.unfold(t, mode)
        u, s, _ = np.linalg.svd(m, full_matrices=False)
        rank = max(1, int(np.count_nonzero(s >= threshold * s[0])))
        factors.append(_fix_column_phases(u[:, :rank]))
    model = TuckerModel(*factors)
    return model, project_core(t, model)


def project_core(t, model):
    """Project a tensor onto the model's factor subspaces."""
    t = tensor_ops.as_tensor(t)
    if t.shape != model.dims:
        raise ValueError(f"tensor shape {t.shape} does not match model dims {model.dims}")
    g = tensor_ops.mode_product(t, model.u_rx.conj().T, 1)
    g = tensor_ops.mode_product(g, model.u_tx.conj().T, 2)
    return tensor_ops.mode_product(g, model.u_sc.conj().T, 3)


def reconstruct(model, core):
    """Lift a core tensor back to the full (rx, tx, sc) space."""
    core = tensor_ops.as_tensor(core)
    if core.shape != model.ranks:
        raise ValueError(f"core shape {core.shape} does not match model ranks {model.ranks}")
    t = tensor_ops.mode_product(core, model.u_rx, 1)
    t = tensor_ops.mode_product(t, model.u_tx, 2)
    return tensor_ops.mode_product(t, model.u_sc, 3)


def compression_ratio(dims, ranks):
    """Full entry count divided by core entry count."""
    dims = tuple(int(d) for d in dims)
    ranks = tuple(int(r) for r in ranks)
    if len(dims) != 3 or len(ranks) != 3:
        raise ValueError("dims and ranks must each have three entries")
    if min(ranks) < 1 or any(r > d for r, d in zip(ranks, dims)):
        raise ValueError(f"ranks {ranks} must satisfy 1 <= rank <= dim for dims {dims}")
    return float(np.prod(dims)) / float(np.prod(ranks))
