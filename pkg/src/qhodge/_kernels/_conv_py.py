"""Numpy implementation of the frequency-convolution scatter kernel."""

import numpy as np

# pairs per einsum chunk; keeps temporaries around ~64 MB at r = 4
_CHUNK = 1 << 18


def conv_scatter(fa, ca, fb, cb, sign, side, freq_sign_a, box, halfwidth, strides):
    """Accumulate sign * (ca_i X cb_j) into box at freq_sign_a*ka + kb.

    fa, fb : (m, 4) int64 frequencies; ca, cb : (m, r, r) complex blocks.
    side 0: matrix product ca @ cb, side 1: cb @ ca.
    box : (n_lin, r, r) accumulator over the cube |k|_inf <= halfwidth,
    linear index sum((k_mu + halfwidth) * strides_mu).
    """
    ma = fa.shape[0]
    mb = fb.shape[0]
    if ma == 0 or mb == 0:
        return
    lin_b = ((fb + halfwidth) * strides).sum(axis=1)
    rows = max(1, _CHUNK // mb)
    for start in range(0, ma, rows):
        stop = min(start + rows, ma)
        fa_c = fa[start:stop]
        lin = (freq_sign_a * fa_c * strides).sum(axis=1)[:, None] + lin_b[None, :]
        if side == 0:
            prod = np.einsum("aij,bjk->abik", ca[start:stop], cb, optimize=True)
        else:
            prod = np.einsum("bij,ajk->abik", cb, ca[start:stop], optimize=True)
        r = prod.shape[-1]
        np.add.at(box, lin.ravel(), sign * prod.reshape(-1, r, r))
