"""Numba inner loop for the single-site Metropolis chain.

The loop consumes pre-drawn proposal integers so the random stream is
owned entirely by numpy on the Python side; the compiled code is pure
bookkeeping.  One proposal r in [0, 3n) encodes (vertex, color) as
(r // 3, r % 3).
"""

import numpy as np
from numba import njit


@njit(cache=True)
def metropolis_chunk(
    colors,      # uint8[n], mutated in place
    neigh,       # int64[n, 2d]
    sign,        # int64[n], +1 even, -1 odd
    draws,       # int64[chunk], proposals in [0, 3n)
    imb,         # int64, imbalance on entry
    esc_step,    # int64, first escape step so far, -1 if none
    esc_dir,     # int64, 0 none, +1 watch imb >= esc_cut, -1 watch imb <= esc_cut
    esc_cut,     # int64, signed cutoff
    step0,       # int64, global step count before this chunk
    stride,      # int64, sampling stride
    imb_out,     # int64[n_samples], sample sink indexed by step // stride
):
    twod = neigh.shape[1]
    for t in range(draws.shape[0]):
        r = draws[t]
        v = r // 3
        j = np.uint8(r % 3)
        c = colors[v]
        if j != c:
            ok = True
            for a in range(twod):
                if colors[neigh[v, a]] == j:
                    ok = False
                    break
            if ok:
                colors[v] = j
                if c == 0:
                    imb -= sign[v]
                if j == 0:
                    imb += sign[v]
                if esc_step < 0 and esc_dir != 0:
                    if esc_dir > 0:
                        if imb >= esc_cut:
                            esc_step = step0 + t + 1
                    elif imb <= esc_cut:
                        esc_step = step0 + t + 1
        step = step0 + t + 1
        if step % stride == 0:
            imb_out[step // stride] = imb
    return imb, esc_step


@njit(cache=True)
def balanced_steps_count(imb_samples, cutoff):
    """How many recorded samples are in the balanced band |imb| < cutoff."""
    total = 0
    for i in range(imb_samples.shape[0]):
        v = imb_samples[i]
        if -cutoff < v < cutoff:
            total += 1
    return total
