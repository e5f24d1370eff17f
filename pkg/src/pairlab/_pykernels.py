"""Pure numpy implementations of the event-stream kernels.

Same signatures and results as the compiled ``_kernels`` module; used
when the extension is not built or ``PAIRLAB_PURE_PYTHON`` is set.
"""

import numpy as np

NAME = "python"

# bound on the number of (a, b) pairs expanded at once
_PAIR_BLOCK = 1 << 22


def lag_histogram(a, b, max_lag, bin_width, n_bins):
    """Histogram of all differences b - a with |b - a| < max_lag.

    Bins have width ``bin_width`` starting at -max_lag; each bin includes
    its edge nearer zero lag, so swapping a and b mirrors the result.
    """
    counts = np.zeros(n_bins, dtype=np.int64)
    if len(a) == 0 or len(b) == 0:
        return counts
    start = np.searchsorted(b, a - max_lag, side="right")
    stop = np.searchsorted(b, a + max_lag, side="left")
    per_a = stop - start
    cum = np.cumsum(per_a)
    i0 = 0
    while i0 < len(a):
        base = cum[i0 - 1] if i0 else 0
        i1 = int(np.searchsorted(cum, base + _PAIR_BLOCK, side="right"))
        i1 = max(i1, i0 + 1)
        n = per_a[i0:i1]
        total = int(n.sum())
        if total:
            owner = np.repeat(np.arange(i0, i1), n)
            first = np.repeat(start[i0:i1] - (np.cumsum(n) - n), n)
            j = first + np.arange(total)
            d = b[j] - a[owner]
            k = np.where(d >= 0, (d + max_lag) // bin_width,
                         n_bins - 1 - (max_lag - d) // bin_width)
            counts += np.bincount(k, minlength=n_bins)
        i0 = i1
    return counts


def greedy_coincidences(a, b, lo, hi):
    """One-to-one matching of a-events to b-events with lo <= b - a <= hi.

    a-events are visited in time order; each takes the unmatched b-event
    closest to a + (lo + hi) / 2, the earlier one on ties.
    """
    if len(a) == 0 or len(b) == 0:
        return 0
    start = np.searchsorted(b, a + lo, side="left")
    stop = np.searchsorted(b, a + hi, side="right")
    cand = np.flatnonzero(stop > start)
    matched = np.zeros(len(b), dtype=bool)
    b_list = b.tolist()
    mid2 = lo + hi
    count = 0
    for i in cand.tolist():
        target2 = 2 * int(a[i]) + mid2
        best = -1
        best_dist = 0
        for j in range(int(start[i]), int(stop[i])):
            if matched[j]:
                continue
            dist = abs(2 * b_list[j] - target2)
            if best < 0 or dist < best_dist:
                best, best_dist = j, dist
        if best >= 0:
            matched[best] = True
            count += 1
    return count


def dead_time_mask(t, dead_time):
    """Non-paralyzable dead time: keep events at least dead_time after the last kept one."""
    n = len(t)
    keep = np.ones(n, dtype=bool)
    if n < 2 or dead_time <= 0:
        return keep
    close = np.flatnonzero(np.diff(t) < dead_time) + 1
    if len(close) == 0:
        return keep
    # an event whose gap to its predecessor is >= dead_time is always kept,
    # so only runs of close events need the sequential rule
    t_list = t.tolist()
    last = None
    prev_idx = -2
    for i in close.tolist():
        if i != prev_idx + 1:
            last = t_list[i - 1]
        if t_list[i] - last < dead_time:
            keep[i] = False
        else:
            last = t_list[i]
        prev_idx = i
    return keep
