"""Independent brute-force homology checks for small complexes.

These share no reduction code with :mod:`topofeat.homology`; Betti numbers
come straight from GF(2) ranks of dense boundary matrices, so they can sit
on the other side of an equivalence test.
"""

from __future__ import annotations

import numpy as np

from .homology import FiltrationSimplex

ORACLE_VERTEX_CAP = 12


def gf2_rank(mat: np.ndarray) -> int:
    """Rank over the two-element field by plain Gaussian elimination."""
    m = (np.asarray(mat, dtype=np.uint8) & 1).copy()
    rows, cols = m.shape
    rank = 0
    for c in range(cols):
        pivot = None
        for r in range(rank, rows):
            if m[r, c]:
                pivot = r
                break
        if pivot is None:
            continue
        m[[rank, pivot]] = m[[pivot, rank]]
        hits = np.nonzero(m[:, c])[0]
        hits = hits[hits != rank]
        m[hits] ^= m[rank]
        rank += 1
    return rank


def brute_force_betti(filtration, eps: float, dim: int) -> int:
    """Betti number at scale ``eps`` from full boundary-matrix ranks.

    Only complexes on at most 12 vertices are accepted; anything larger is
    outside the oracle's remit.
    """
    simplices = [s for s in filtration if s.value <= eps]
    verts = sorted({v for s in simplices for v in s.vertices})
    if len(verts) > ORACLE_VERTEX_CAP:
        raise ValueError("oracle scale exceeded")
    if dim not in (0, 1):
        raise ValueError("oracle computes dimensions 0 and 1 only")

    vid = {v: i for i, v in enumerate(verts)}
    edges = [s.vertices for s in simplices if s.dim == 1]
    tris = [s.vertices for s in simplices if s.dim == 2]
    eid = {e: i for i, e in enumerate(edges)}

    d1 = np.zeros((len(verts), len(edges)), dtype=np.uint8)
    for j, (a, b) in enumerate(edges):
        d1[vid[a], j] = 1
        d1[vid[b], j] = 1
    d2 = np.zeros((len(edges), len(tris)), dtype=np.uint8)
    for j, (a, b, c) in enumerate(tris):
        d2[eid[(a, b)], j] = 1
        d2[eid[(a, c)], j] = 1
        d2[eid[(b, c)], j] = 1

    rank_d1 = gf2_rank(d1) if edges else 0
    if dim == 0:
        return len(verts) - rank_d1
    rank_d2 = gf2_rank(d2) if tris else 0
    return (len(edges) - rank_d1) - rank_d2
