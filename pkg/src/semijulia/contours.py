"""Marching-squares contour extraction from boolean cell masks.

Vertices sit on midpoints between differing pixel centers, so every contour
is a closed polyline living strictly between the two phases.  Checkerboard
2x2 blocks are pinch points (the curve touches itself at grid scale); they
are counted and resolved with a fixed pairing so tracing stays total.
"""

from __future__ import annotations

import numpy as np

# edge keys: ("h", j, i) between pixels (j,i)-(j,i+1); ("v", j, i) between
# pixels (j,i)-(j+1,i); indices refer to the padded mask.


def _block_segments(a, b, c, d):
    """Segment endpoints (pairs of local edge names) for one 2x2 block with
    corner values top-left a, top-right b, bottom-right c, bottom-left d."""
    code = (a << 3) | (b << 2) | (c << 1) | d
    T, R, B, L = "T", "R", "B", "L"
    table = {
        0b0000: (), 0b1111: (),
        0b1000: ((T, L),), 0b0111: ((T, L),),
        0b0100: ((T, R),), 0b1011: ((T, R),),
        0b0010: ((R, B),), 0b1101: ((R, B),),
        0b0001: ((B, L),), 0b1110: ((B, L),),
        0b1100: ((L, R),), 0b0011: ((L, R),),
        0b1001: ((T, B),), 0b0110: ((T, B),),
        # saddles: fixed pairing, flagged as pinches by the caller
        0b1010: ((T, R), (B, L)),
        0b0101: ((T, L), (R, B)),
    }
    return table[code]


def trace_mask_contours(mask: np.ndarray):
    """All closed contours of the mask boundary.

    Returns (loops, pinch_count) where each loop is an (n, 2) float array of
    (row, col) positions in unpadded pixel coordinates (pixel centers at
    integer positions)."""
    ny, nx = mask.shape
    m = np.zeros((ny + 2, nx + 2), dtype=bool)
    m[1:-1, 1:-1] = mask

    a = m[:-1, :-1]
    b = m[:-1, 1:]
    c = m[1:, 1:]
    d = m[1:, :-1]
    code = (a.astype(np.int8) << 3) | (b.astype(np.int8) << 2) \
        | (c.astype(np.int8) << 1) | d.astype(np.int8)
    active = np.nonzero((code != 0) & (code != 0b1111))
    pinch_count = int(np.count_nonzero((code == 0b1010) | (code == 0b0101)))

    # local edge name -> global edge key for block at (j, i)
    def edge_key(j, i, name):
        if name == "T":
            return ("h", j, i)
        if name == "B":
            return ("h", j + 1, i)
        if name == "L":
            return ("v", j, i)
        return ("v", j, i + 1)

    adjacency = {}
    for j, i in zip(*active):
        for e1, e2 in _block_segments(bool(a[j, i]), bool(b[j, i]),
                                      bool(c[j, i]), bool(d[j, i])):
            k1, k2 = edge_key(j, i, e1), edge_key(j, i, e2)
            adjacency.setdefault(k1, []).append(k2)
            adjacency.setdefault(k2, []).append(k1)

    def edge_pos(key):
        kind, j, i = key
        # padded pixel (j, i) center is at unpadded (j - 1, i - 1)
        if kind == "h":
            return (j - 1.0, i - 0.5)
        return (j - 0.5, i - 1.0)

    # every contour edge sits between two active blocks, so it has exactly
    # two pairings: walking "not where I came from" closes each cycle
    loops = []
    visited = set()
    for start in sorted(adjacency):
        if start in visited:
            continue
        loop = [start]
        visited.add(start)
        prev, cur = None, start
        while True:
            nbrs = adjacency[cur]
            if len(nbrs) < 2:
                break
            nxt = nbrs[0] if nbrs[0] != prev else nbrs[1]
            if nxt == start or nxt in visited:
                break
            loop.append(nxt)
            visited.add(nxt)
            prev, cur = cur, nxt
        loops.append(np.asarray([edge_pos(k) for k in loop], dtype=float))
    loops.sort(key=len, reverse=True)
    return loops, pinch_count
