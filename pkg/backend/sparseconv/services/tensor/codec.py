"""
Little-endian binary formats for dense tensors (SCKT) and CSR kernels (SCSR).

SCKT: magic, u32 version, u8 mode (3 or 4), mode x u32 dims, f32 payload.
SCSR: magic, u32 version, 8 x u32 geometry (N, C, R, S, H_in, W_in, stride,
pad), u64 nnz, rowptr (N+1 x u64), colidx (u32), origin (3 x u32 per
non-zero), values (f32).
"""
import struct
from pathlib import Path
from typing import Union

import numpy as np
from pydantic import ValidationError

from sparseconv.errors import CodecError, CsrFormatError, GeometryError
from sparseconv.models.layer import LayerSpec
from sparseconv.models.sparse_kernel import SparseKernelMatrix
from sparseconv.models.tensor import Tensor3, Tensor4

TENSOR_MAGIC = b"SCKT"
KERNEL_MAGIC = b"SCSR"
FORMAT_VERSION = 1

_HEADER = struct.Struct("<4sI")
_GEOMETRY = struct.Struct("<8I")
_NNZ = struct.Struct("<Q")

PathLike = Union[str, Path]


class _Reader:
    """Cursor over a byte buffer that reports truncation as CodecError."""

    def __init__(self, buffer: bytes, source: str):
        self.buffer = memoryview(buffer)
        self.source = source
        self.pos = 0

    def unpack(self, layout: struct.Struct) -> tuple:
        end = self.pos + layout.size
        if end > len(self.buffer):
            raise CodecError(self.source, f"truncated header at byte {self.pos}")
        values = layout.unpack_from(self.buffer, self.pos)
        self.pos = end
        return values

    def array(self, dtype: str, count: int) -> np.ndarray:
        nbytes = np.dtype(dtype).itemsize * count
        end = self.pos + nbytes
        if end > len(self.buffer):
            raise CodecError(self.source, f"truncated payload: need {nbytes} bytes at {self.pos}")
        values = np.frombuffer(self.buffer[self.pos:end], dtype=dtype, count=count)
        self.pos = end
        return values

    def finish(self) -> None:
        if self.pos != len(self.buffer):
            raise CodecError(self.source, f"{len(self.buffer) - self.pos} trailing bytes")

    def header(self, magic: bytes) -> None:
        found, version = self.unpack(_HEADER)
        if found != magic:
            raise CodecError(self.source, f"bad magic {found!r}, expected {magic!r}")
        if version != FORMAT_VERSION:
            raise CodecError(self.source, f"unsupported version {version}")


# ==================== Dense tensors ====================

def encode_tensor(tensor: Union[Tensor3, Tensor4]) -> bytes:
    dims = tensor.shape
    head = _HEADER.pack(TENSOR_MAGIC, FORMAT_VERSION) + struct.pack("<B", len(dims))
    head += struct.pack(f"<{len(dims)}I", *dims)
    return head + tensor.data.astype("<f4", copy=False).tobytes()


def decode_tensor(buffer: bytes, source: str = "<bytes>") -> Union[Tensor3, Tensor4]:
    reader = _Reader(buffer, source)
    reader.header(TENSOR_MAGIC)
    (mode,) = reader.unpack(struct.Struct("<B"))
    if mode not in (3, 4):
        raise CodecError(source, f"tensor mode must be 3 or 4, got {mode}")
    dims = reader.unpack(struct.Struct(f"<{mode}I"))
    payload = reader.array("<f4", int(np.prod(dims, dtype=np.int64)))
    reader.finish()
    try:
        data = payload.astype(np.float32).reshape(dims)
        return Tensor3(data) if mode == 3 else Tensor4(data)
    except GeometryError as e:
        raise CodecError(source, e.message) from e


def save_tensor(path: PathLike, tensor: Union[Tensor3, Tensor4]) -> None:
    Path(path).write_bytes(encode_tensor(tensor))


def load_tensor(path: PathLike) -> Union[Tensor3, Tensor4]:
    path = Path(path)
    try:
        buffer = path.read_bytes()
    except OSError as e:
        raise CodecError(str(path), f"cannot read: {e}") from e
    return decode_tensor(buffer, str(path))


# ==================== CSR kernels ====================

def encode_kernel(kernel: SparseKernelMatrix) -> bytes:
    spec = kernel.spec
    parts = [
        _HEADER.pack(KERNEL_MAGIC, FORMAT_VERSION),
        _GEOMETRY.pack(spec.N, spec.C, spec.R, spec.S, spec.H_in, spec.W_in, spec.stride, spec.pad),
        _NNZ.pack(kernel.nnz),
        kernel.rowptr.astype("<u8").tobytes(),
        kernel.colidx.astype("<u4").tobytes(),
        kernel.origin.astype("<u4").tobytes(),
        kernel.value.astype("<f4").tobytes(),
    ]
    return b"".join(parts)


def decode_kernel(buffer: bytes, source: str = "<bytes>") -> SparseKernelMatrix:
    reader = _Reader(buffer, source)
    reader.header(KERNEL_MAGIC)
    N, C, R, S, H_in, W_in, stride, pad = reader.unpack(_GEOMETRY)
    try:
        spec = LayerSpec(N=N, C=C, R=R, S=S, H_in=H_in, W_in=W_in, stride=stride, pad=pad)
    except (ValidationError, GeometryError) as e:
        raise CodecError(source, f"invalid geometry block: {e}") from e
    (nnz,) = reader.unpack(_NNZ)
    rowptr = reader.array("<u8", N + 1).astype(np.int64)
    colidx = reader.array("<u4", nnz).astype(np.int32)
    origin = reader.array("<u4", 3 * nnz).astype(np.int32).reshape(nnz, 3)
    value = reader.array("<f4", nnz).astype(np.float32)
    reader.finish()
    try:
        return SparseKernelMatrix(rowptr=rowptr, colidx=colidx, value=value, origin=origin, spec=spec)
    except CsrFormatError as e:
        raise CodecError(source, e.message) from e


def save_kernel(path: PathLike, kernel: SparseKernelMatrix) -> None:
    Path(path).write_bytes(encode_kernel(kernel))


def load_kernel(path: PathLike) -> SparseKernelMatrix:
    path = Path(path)
    try:
        buffer = path.read_bytes()
    except OSError as e:
        raise CodecError(str(path), f"cannot read: {e}") from e
    return decode_kernel(buffer, str(path))
