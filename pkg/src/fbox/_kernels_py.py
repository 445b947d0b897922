"""Pure-Python RAC trial loop; mirrors ``_kernels.pyx`` line for line."""

import numpy as np


def _draw(cum_row, u, n_out):
    o = 0
    while o < n_out - 1 and u >= cum_row[o]:
        o += 1
    return o


def rac_batch(p, group, levels, c, F, cum, xs, ys, rints, us):
    """Bob's final guesses for a batch of random-access-code trials.

    ``xs`` (S, N) and ``ys`` (S,) are the task inputs; ``rints`` (S, N-1, 3)
    holds each box's twirl variables and ``us`` (S, N-1) the uniforms that
    pick its joint outcome from ``cum`` (row ``x*p + y``, column ``a*p + b``).
    """
    S, N = xs.shape
    n_out = p * p
    F = F.tolist()
    cum = cum.tolist()
    out = np.empty(S, dtype=np.int64)
    for s in range(S):
        x_row = xs[s].tolist()
        r_row = rints[s].tolist()
        u_row = us[s].tolist()
        y = int(ys[s])

        # Bob's group and position at every level
        bob_grp = [0] * levels
        bob_pos = [0] * levels
        idx = y
        for lvl in range(levels):
            bob_grp[lvl] = idx // group
            bob_pos[lvl] = idx % group
            idx //= group

        bvals = [0] * (N - 1)
        vec = x_row
        box = 0
        length = N
        for lvl in range(levels):
            nxt = []
            for grp in range(length // group):
                base = grp * group
                q = 0
                for i in range(group):
                    q += F[0][i] * vec[base + i]
                for t in range(1, group):
                    form = 0
                    for i in range(group):
                        form += F[t][i] * vec[base + i]
                    x_in = form % p
                    y_in = pow(bob_pos[lvl], t, p) if grp == bob_grp[lvl] else 0
                    al, be, ga = r_row[box]
                    o = _draw(cum[((x_in + al) % p) * p + (y_in + be) % p], u_row[box], n_out)
                    a = o // p - be * x_in - al * be + ga
                    bvals[box] = (o % p + al * y_in + ga) % p
                    q += a
                    box += 1
                nxt.append(q % p)
            vec = nxt
            length //= group

        # Bob walks back down through his cone
        q = vec[0]
        offset = N - 1
        length = group
        for lvl in reversed(range(levels)):
            offset -= (length // group) * (group - 1)
            first = offset + bob_grp[lvl] * (group - 1)
            for t in range(group - 1):
                q -= bvals[first + t]
            if lvl == 0:
                q -= c
            q %= p
            length *= group
        out[s] = q
    return out
