# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled RAC trial loop; same contract and results as ``_kernels_py``."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


cdef inline long pmod(long v, long p) noexcept nogil:
    v = v % p
    return v + p if v < 0 else v


cdef inline long ipow(long b, long e, long p) noexcept nogil:
    cdef long r = 1
    b = pmod(b, p)
    while e > 0:
        if e & 1:
            r = r * b % p
        b = b * b % p
        e >>= 1
    return r


def rac_batch(long p, long group, long levels, long c,
              cnp.int64_t[:, :] F, double[:, :] cum,
              cnp.int64_t[:, :] xs, cnp.int64_t[:] ys,
              cnp.int64_t[:, :, :] rints, double[:, :] us):
    cdef Py_ssize_t S = xs.shape[0]
    cdef Py_ssize_t N = xs.shape[1]
    cdef long n_out = p * p
    cdef cnp.int64_t[:] out = np.empty(S, dtype=np.int64)
    cdef cnp.int64_t[:] vec = np.empty(N, dtype=np.int64)
    cdef cnp.int64_t[:] bvals = np.empty(max(N - 1, 1), dtype=np.int64)
    cdef cnp.int64_t[:] bob_grp = np.empty(levels, dtype=np.int64)
    cdef cnp.int64_t[:] bob_pos = np.empty(levels, dtype=np.int64)
    cdef Py_ssize_t s, i, t, grp, lvl, box, base, length, offset, first
    cdef long idx, q, form, x_in, y_in, al, be, ga, a, o, row
    cdef double u

    with nogil:
        for s in range(S):
            idx = ys[s]
            for lvl in range(levels):
                bob_grp[lvl] = idx // group
                bob_pos[lvl] = idx % group
                idx = idx // group
            for i in range(N):
                vec[i] = xs[s, i]

            box = 0
            length = N
            for lvl in range(levels):
                for grp in range(length // group):
                    base = grp * group
                    q = 0
                    for i in range(group):
                        q += F[0, i] * vec[base + i]
                    for t in range(1, group):
                        form = 0
                        for i in range(group):
                            form += F[t, i] * vec[base + i]
                        x_in = pmod(form, p)
                        if grp == bob_grp[lvl]:
                            y_in = ipow(bob_pos[lvl], t, p)
                        else:
                            y_in = 0
                        al = rints[s, box, 0]
                        be = rints[s, box, 1]
                        ga = rints[s, box, 2]
                        row = pmod(x_in + al, p) * p + pmod(y_in + be, p)
                        u = us[s, box]
                        o = 0
                        while o < n_out - 1 and u >= cum[row, o]:
                            o += 1
                        a = o // p - be * x_in - al * be + ga
                        bvals[box] = pmod(o % p + al * y_in + ga, p)
                        q += a
                        box += 1
                    # level vectors shrink in place; group grp only reads slots >= grp
                    vec[grp] = pmod(q, p)
                length = length // group

            q = vec[0]
            offset = N - 1
            length = group
            for lvl in range(levels - 1, -1, -1):
                offset -= (length // group) * (group - 1)
                first = offset + bob_grp[lvl] * (group - 1)
                for t in range(group - 1):
                    q -= bvals[first + t]
                if lvl == 0:
                    q -= c
                q = pmod(q, p)
                length = length * group
            out[s] = q
    return np.asarray(out)
