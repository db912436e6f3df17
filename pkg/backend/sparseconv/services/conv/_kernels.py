"""
Compiled loops. Every kernel writes disjoint output slices per prange task
and sums the non-zeros of a row in ascending order, so results do not
depend on the thread count.
"""
import numpy as np
from numba import njit, prange


@njit(parallel=True, cache=True)
def sparse_direct_kernel(inp, out, colidx, value, band_ptr,
                         H_out, W_out, W_pad, stride,
                         tile_n, block_h, block_w):
    """
    inp: (B, C*H_pad*W_pad) padded images; out: (B, N, H_out*W_out),
    pre-filled with bias. band_ptr[n, b] .. band_ptr[n, b+1] are the
    non-zeros of row n whose input channel falls in column band b.
    """
    batch = inp.shape[0]
    N = out.shape[1]
    n_bands = band_ptr.shape[1] - 1
    n_tiles = (N + tile_n - 1) // tile_n

    for task in prange(batch * n_tiles):
        b = task // n_tiles
        n0 = (task % n_tiles) * tile_n
        n1 = min(N, n0 + tile_n)
        img = inp[b]
        o = out[b]
        acc = np.empty((block_h, block_w), dtype=np.float32)

        for band in range(n_bands):
            for n in range(n0, n1):
                j0 = band_ptr[n, band]
                j1 = band_ptr[n, band + 1]
                if j0 == j1:
                    continue
                for y0 in range(0, H_out, block_h):
                    h = min(block_h, H_out - y0)
                    for x0 in range(0, W_out, block_w):
                        w = min(block_w, W_out - x0)
                        for ky in range(h):
                            for kx in range(w):
                                acc[ky, kx] = o[n, (y0 + ky) * W_out + x0 + kx]
                        for j in range(j0, j1):
                            coeff = value[j]
                            for ky in range(h):
                                # f(0, y*stride, x*stride) added to the precomputed offset
                                off = colidx[j] + (y0 + ky) * stride * W_pad + x0 * stride
                                for kx in range(w):
                                    acc[ky, kx] += coeff * img[off + kx * stride]
                        for ky in range(h):
                            for kx in range(w):
                                o[n, (y0 + ky) * W_out + x0 + kx] = acc[ky, kx]


@njit(parallel=True, cache=True)
def spmdm_kernel(rowptr, colidx, value, act, out, tile_rows, block_cols):
    """out (M, B) += W (CSR, M x K) @ act (K, B); out pre-filled with bias."""
    M = out.shape[0]
    B = out.shape[1]
    n_tiles = (M + tile_rows - 1) // tile_rows

    for t in prange(n_tiles):
        r0 = t * tile_rows
        r1 = min(M, r0 + tile_rows)
        acc = np.empty(block_cols, dtype=np.float32)
        for m in range(r0, r1):
            j0 = rowptr[m]
            j1 = rowptr[m + 1]
            for c0 in range(0, B, block_cols):
                w = min(block_cols, B - c0)
                for k in range(w):
                    acc[k] = out[m, c0 + k]
                for j in range(j0, j1):
                    coeff = value[j]
                    col = colidx[j]
                    for k in range(w):
                        acc[k] += coeff * act[col, c0 + k]
                for k in range(w):
                    out[m, c0 + k] = acc[k]


@njit(parallel=True, cache=True)
def triad_kernel(a, b, c, scalar):
    for i in prange(a.shape[0]):
        a[i] = b[i] + scalar * c[i]
