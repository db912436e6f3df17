"""
CSR matricization of a weight tensor with precomputed layout offsets.
"""
from dataclasses import dataclass

import numpy as np

from sparseconv.errors import CsrFormatError
from sparseconv.models.layer import LayerSpec


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class SparseKernelMatrix:
    """
    Mode-1 matricization W_(1) of an N x C x R x S tensor in CSR form.

    ``colidx[j]`` is the offset of (c, r, s) in the zero-padded input, so
    ``in[colidx[j] + f(0, y, x)]`` is the input element multiplied by
    non-zero j at output position (y, x). ``origin`` keeps the (c, r, s)
    triple of every non-zero and is not read by the kernels.
    """
    rowptr: np.ndarray
    colidx: np.ndarray
    value: np.ndarray
    origin: np.ndarray
    spec: LayerSpec

    def __post_init__(self):
        object.__setattr__(self, "rowptr", _frozen(self.rowptr, np.int64))
        object.__setattr__(self, "colidx", _frozen(self.colidx, np.int32))
        object.__setattr__(self, "value", _frozen(self.value, np.float32))
        origin = np.asarray(self.origin, dtype=np.int32)
        if origin.size == 0:
            origin = origin.reshape(0, 3)
        object.__setattr__(self, "origin", _frozen(origin, np.int32))
        self.validate()

    @property
    def rows(self) -> int:
        return self.spec.N

    @property
    def nnz(self) -> int:
        return int(self.rowptr[-1])

    @property
    def density(self) -> float:
        N, C, R, S = self.spec.weight_shape
        return self.nnz / float(N * C * R * S)

    def row_of_nonzeros(self) -> np.ndarray:
        """Row index of every non-zero."""
        return np.repeat(np.arange(self.rows, dtype=np.int64), np.diff(self.rowptr))

    def validate(self) -> None:
        """Check the structural CSR invariants; raise CsrFormatError on violation."""
        spec = self.spec
        rowptr, colidx, value, origin = self.rowptr, self.colidx, self.value, self.origin

        if rowptr.ndim != 1 or rowptr.shape[0] != spec.N + 1:
            raise CsrFormatError(f"rowptr must have N+1={spec.N + 1} entries, got {rowptr.shape}")
        if rowptr[0] != 0:
            raise CsrFormatError("rowptr[0] must be 0")
        if np.any(np.diff(rowptr) < 0):
            raise CsrFormatError("rowptr must be nondecreasing")
        nnz = int(rowptr[-1])
        if not (colidx.shape == (nnz,) and value.shape == (nnz,) and origin.shape == (nnz, 3)):
            raise CsrFormatError(
                "rowptr[N] must equal len(colidx) = len(value) = len(origin)",
                {"nnz": nnz, "colidx": colidx.shape, "value": value.shape, "origin": origin.shape},
            )
        if not np.isfinite(value).all():
            raise CsrFormatError("non-zero values must be finite")
        if nnz == 0:
            return

        c, r, s = origin[:, 0], origin[:, 1], origin[:, 2]
        if (c < 0).any() or (c >= spec.C).any() or (r < 0).any() or (r >= spec.R).any() \
                or (s < 0).any() or (s >= spec.S).any():
            raise CsrFormatError("origin triple outside the weight tensor")
        expected = (c.astype(np.int64) * spec.H_pad + r) * spec.W_pad + s
        if not np.array_equal(expected, colidx):
            raise CsrFormatError("colidx does not match f(c, r, s) of origin")

        # strictly increasing within a row: every step is positive except at row starts
        steps = np.diff(colidx.astype(np.int64))
        row_starts = rowptr[1:-1]
        row_starts = row_starts[(row_starts > 0) & (row_starts < nnz)] - 1
        inside = np.ones(nnz - 1, dtype=bool)
        inside[row_starts] = False
        if np.any(steps[inside] <= 0):
            raise CsrFormatError("colidx must be strictly increasing within each row")
