"""Dense complex order-3 tensor algebra and binary tensor file formats.

Layout convention used everywhere in this package: vectorisation is
first-index-fastest (Fortran order), so for a tensor ``t`` of shape
``(I, J, K)``::

    vec(mode_product(mode_product(mode_product(t, A, 1), B, 2), C, 3))
        == kron(C, kron(B, A)) @ vec(t)

Mode numbers are 1-based (1, 2, 3). The mode-n unfolding has the mode-n
fibers as columns, ordered so the identity above holds.
"""

import numpy as np

from .errors import DataFormatError

COMPLEX = np.complex128

_MAX_HEADER = 256  # header lines are short ASCII; anything longer is garbage


def as_tensor(t):
    """Coerce to a complex order-3 ndarray, rejecting empty dimensions."""
    arr = np.asarray(t, dtype=COMPLEX)
    if arr.ndim != 3:
        raise ValueError(f"expected an order-3 tensor, got ndim={arr.ndim}")
    if min(arr.shape) < 1:
        raise ValueError(f"tensor dimensions must be positive, got {arr.shape}")
    return arr


def _axis(mode):
    if mode not in (1, 2, 3):
        raise ValueError(f"mode must be 1, 2, or 3, got {mode!r}")
    return mode - 1


def vec(t):
    """Flatten a tensor to a vector, first index fastest."""
    return np.ravel(np.asarray(t, dtype=COMPLEX), order="F")


def unvec(v, dims):
    """Inverse of :func:`vec` for the given ``(I, J, K)`` dimensions."""
    arr = np.asarray(v, dtype=COMPLEX)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ValueError(f"dims must be three positive integers, got {dims}")
    n = dims[0] * dims[1] * dims[2]
    if arr.ndim != 1 or arr.size != n:
        raise ValueError(f"vector of length {arr.size} does not match dims {dims}")
    return arr.reshape(dims, order="F")


def unfold(t, mode):
    """Mode-n unfolding: mode-n fibers as columns.

    Column ordering follows the vec convention, i.e. the remaining modes
    vary earliest-mode-fastest.
    """
    t = as_tensor(t)
    axis = _axis(mode)
    return np.reshape(np.moveaxis(t, axis, 0), (t.shape[axis], -1), order="F")


def fold(m, mode, dims):
    """Inverse of :func:`unfold` back to a tensor of shape ``dims``."""
    axis = _axis(mode)
    dims = tuple(int(d) for d in dims)
    if len(dims) != 3 or min(dims) < 1:
        raise ValueError(f"dims must be three positive integers, got {dims}")
    m = np.asarray(m, dtype=COMPLEX)
    rest = tuple(d for i, d in enumerate(dims) if i != axis)
    if m.ndim != 2 or m.shape != (dims[axis], rest[0] * rest[1]):
        raise ValueError(f"matrix shape {m.shape} does not match mode {mode} of dims {dims}")
    moved = m.reshape((dims[axis],) + rest, order="F")
    return np.moveaxis(moved, 0, axis)


def mode_product(t, m, mode):
    """Mode-n product ``t x_n m``: multiply every mode-n fiber by ``m``."""
    t = as_tensor(t)
    axis = _axis(mode)
    m = np.asarray(m, dtype=COMPLEX)
    if m.ndim != 2:
        raise ValueError(f"expected a matrix, got ndim={m.ndim}")
    if m.shape[1] != t.shape[axis]:
        raise ValueError(
            f"matrix columns ({m.shape[1]}) must match mode-{mode} dimension ({t.shape[axis]})"
        )
    out = np.tensordot(m, t, axes=(1, axis))
    return np.moveaxis(out, 0, axis)


def kron(a, b):
    """Kronecker product of two matrices."""
    a = np.asarray(a, dtype=COMPLEX)
    b = np.asarray(b, dtype=COMPLEX)
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("kron operands must be matrices")
    return np.kron(a, b)


def frobenius_norm(t):
    """Frobenius norm, sqrt of the summed squared entry magnitudes."""
    return float(np.linalg.norm(np.ravel(t)))


# ---------------------------------------------------------------------------
# Binary file formats. Each file is a single ASCII header line followed by
# raw little-endian float64 (real, imag) pairs.
# ---------------------------------------------------------------------------


def _interleave(values):
    out = np.empty(values.size * 2, dtype="<f8")
    out[0::2] = values.real
    out[1::2] = values.imag
    return out


def _check_finite_payload(values, path):
    if not np.all(np.isfinite(values)):
        raise DataFormatError(f"{path}: payload contains non-finite values")


def _read_header(f, magic, n_fields, path):
    line = f.readline(_MAX_HEADER)
    if not line.endswith(b"\n"):
        raise DataFormatError(f"{path}: missing or oversized header line")
    try:
        fields = line.decode("ascii").split()
    except UnicodeDecodeError as exc:
        raise DataFormatError(f"{path}: header is not ASCII") from exc
    if not fields or fields[0] != magic:
        raise DataFormatError(f"{path}: expected {magic} header, got {fields[:1]}")
    if len(fields) != n_fields + 1:
        raise DataFormatError(
            f"{path}: {magic} header needs {n_fields} fields, got {len(fields) - 1}"
        )
    return fields[1:]


def _header_ints(fields, path):
    try:
        values = [int(x) for x in fields]
    except ValueError as exc:
        raise DataFormatError(f"{path}: non-integer header field") from exc
    if any(v < 1 for v in values):
        raise DataFormatError(f"{path}: header dimensions must be positive")
    return values


def _read_payload(f, count, path):
    raw = f.read()
    payload = np.frombuffer(raw, dtype="<f8")
    if payload.size != 2 * count:
        raise DataFormatError(
            f"{path}: expected {2 * count} float64 values, found {payload.size}"
        )
    _check_finite_payload(payload, path)
    return payload[0::2] + 1j * payload[1::2]


def write_tensor(path, t):
    """Write one tensor as a CT1 file (header + vec-order complex pairs)."""
    t = as_tensor(t)
    if not np.all(np.isfinite(t)):
        raise ValueError("refusing to write non-finite tensor")
    header = f"CT1 {t.shape[0]} {t.shape[1]} {t.shape[2]}\n".encode("ascii")
    with open(path, "wb") as f:
        f.write(header)
        f.write(_interleave(vec(t)).tobytes())


def read_tensor(path):
    """Read a CT1 file back into a complex order-3 tensor."""
    with open(path, "rb") as f:
        dims = _header_ints(_read_header(f, "CT1", 3, path), path)
        entries = _read_payload(f, dims[0] * dims[1] * dims[2], path)
    return unvec(entries, dims)


def write_sequence(path, snapshots, period_ms):
    """Write a snapshot sequence as a CTS1 file.

    ``snapshots`` is an array of shape ``(T, I, J, K)`` (or a list of
    order-3 tensors); each snapshot payload is stored in vec order.
    """
    snaps = np.asarray(snapshots, dtype=COMPLEX)
    if snaps.ndim != 4 or snaps.shape[0] < 1 or min(snaps.shape[1:]) < 1:
        raise ValueError(f"expected snapshots shaped (T, I, J, K), got {snaps.shape}")
    if not np.all(np.isfinite(snaps)):
        raise ValueError("refusing to write non-finite sequence")
    period_ms = float(period_ms)
    if not period_ms > 0:
        raise ValueError(f"period_ms must be positive, got {period_ms}")
    t, i, j, k = snaps.shape
    header = f"CTS1 {t} {i} {j} {k} {period_ms!r}\n".encode("ascii")
    flat = np.empty((t, i * j * k), dtype=COMPLEX)
    for idx in range(t):
        flat[idx] = vec(snaps[idx])
    with open(path, "wb") as f:
        f.write(header)
        f.write(_interleave(flat.ravel()).tobytes())


def read_sequence(path):
    """Read a CTS1 file; returns ``(snapshots, period_ms)``."""
    with open(path, "rb") as f:
        fields = _read_header(f, "CTS1", 5, path)
        t, i, j, k = _header_ints(fields[:4], path)
        try:
            period_ms = float(fields[4])
        except ValueError as exc:
            raise DataFormatError(f"{path}: bad period field {fields[4]!r}") from exc
        if not period_ms > 0 or not np.isfinite(period_ms):
            raise DataFormatError(f"{path}: period must be positive, got {period_ms}")
        entries = _read_payload(f, t * i * j * k, path)
    per = i * j * k
    snaps = np.empty((t, i, j, k), dtype=COMPLEX)
    for idx in range(t):
        snaps[idx] = unvec(entries[idx * per:(idx + 1) * per], (i, j, k))
    return snaps, period_ms
