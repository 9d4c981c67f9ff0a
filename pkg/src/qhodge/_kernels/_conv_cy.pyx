# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled frequency-convolution scatter kernel (see _conv_py for semantics)."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def conv_scatter(cnp.int64_t[:, ::1] fa, double complex[:, :, ::1] ca,
                 cnp.int64_t[:, ::1] fb, double complex[:, :, ::1] cb,
                 double complex sign, int side, int freq_sign_a,
                 double complex[:, :, ::1] box,
                 cnp.int64_t halfwidth, cnp.int64_t[::1] strides):
    cdef Py_ssize_t ma = fa.shape[0]
    cdef Py_ssize_t mb = fb.shape[0]
    cdef Py_ssize_t r = ca.shape[1]
    cdef Py_ssize_t i, j, a, b, c, mu
    cdef cnp.int64_t lin, lin_a
    cdef double complex acc
    for i in range(ma):
        lin_a = 0
        for mu in range(4):
            lin_a += (freq_sign_a * fa[i, mu] + halfwidth) * strides[mu]
        for j in range(mb):
            lin = lin_a
            for mu in range(4):
                lin += (fb[j, mu]) * strides[mu]
            if side == 0:
                for a in range(r):
                    for c in range(r):
                        acc = 0
                        for b in range(r):
                            acc = acc + ca[i, a, b] * cb[j, b, c]
                        box[lin, a, c] = box[lin, a, c] + sign * acc
            else:
                for a in range(r):
                    for c in range(r):
                        acc = 0
                        for b in range(r):
                            acc = acc + cb[j, a, b] * ca[i, b, c]
                        box[lin, a, c] = box[lin, a, c] + sign * acc
