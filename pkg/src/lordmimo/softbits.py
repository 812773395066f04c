"""Max-log bit LLRs from two LORD scans, with brute-force and exact-APP oracles.

LLR layout is ``2 * bits_per_symbol`` values per channel use: the bits of X1
followed by the bits of X2, each in the constellation's MSB-first label order.
Sign convention: ``L = ln P(b=1|y) / P(b=0|y)``, so a positive value favours 1.
"""

from __future__ import annotations

import numpy as np

from .constellation import Constellation
from .detect import all_candidates, lord_search, squared_distances
from .lattice import RealLattice
from .preprocess import ChannelSummary, ObservationProjection, Ordering, triangularize


def _check_n0(n0: float) -> None:
    if not n0 > 0:
        raise ValueError(f"noise density n0 must be positive, got {n0!r}")


def _pair_bits(c: Constellation) -> np.ndarray:
    """``(M**2, bits_per_symbol)`` labels of the symbol at pair index ``i*M + q``."""
    lb = c.level_bits
    m = c.order_per_dim
    return np.concatenate([np.repeat(lb, m, axis=0), np.tile(lb, (m, 1))], axis=1)


def _maxlog(dist: np.ndarray, bits: np.ndarray) -> np.ndarray:
    """``min_{b=0} dist - min_{b=1} dist`` for every bit column of ``bits``."""
    out = np.empty(dist.shape[:-1] + (bits.shape[1],))
    for j in range(bits.shape[1]):
        ones = bits[:, j] == 1
        out[..., j] = dist[..., ~ones].min(axis=-1) - dist[..., ones].min(axis=-1)
    return out


def lord_llr(
    cs: ChannelSummary, op: ObservationProjection, c: Constellation, n0: float
) -> np.ndarray:
    """Exact max-log LLRs for both antennas from ``2 * M**2`` scanned sequences.

    X2's bits come from the antenna-1-first model, where X2 is the enumerated
    bottom layer; X1's bits come from the reversed model. In each scan the
    sliced top layer is the best completion of every bottom-layer pair, so the
    minimum over each bit's half-set is found exactly.
    """
    _check_n0(n0)
    pair_bits = _pair_bits(c)
    parts = []
    for ordering in (Ordering.ANTENNA2_FIRST, Ordering.ANTENNA1_FIRST):
        res = lord_search(triangularize(cs, op, ordering), c)
        # -T equals ||y_r - B x||**2 up to an x-independent constant, and the
        # max-log LLR is the distance difference divided by 2 * sigma**2 = n0.
        parts.append(_maxlog(-res.metric, pair_bits))
    return np.concatenate(parts, axis=-1) / n0


def _sequence_bits(c: Constellation) -> np.ndarray:
    idx = all_candidates(c)
    b = c.index_bits(idx)  # (M**4, 4, bits_per_dim)
    # regroup as [X1: I bits, Q bits][X2: I bits, Q bits]
    return b.reshape(idx.shape[0], -1)


def bruteforce_maxlog_llr(
    lat: RealLattice, y_r, c: Constellation, n0: float
) -> np.ndarray:
    """Max-log LLRs by scoring all ``M**4`` symbol vectors."""
    _check_n0(n0)
    idx = all_candidates(c)
    dist = squared_distances(lat, y_r, c.levels[idx]) / n0
    return _maxlog(dist, _sequence_bits(c))


def jacln(a, b):
    """``ln(exp(a) + exp(b))`` evaluated as ``max + log1p(exp(-|a - b|))``."""
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    return np.maximum(a, b) + np.log1p(np.exp(-np.abs(a - b)))


def jacln_sum(values, axis: int = -1) -> np.ndarray:
    """Log-sum-exp along ``axis`` by pairwise :func:`jacln` folding."""
    v = np.moveaxis(np.asarray(values, dtype=float), axis, -1)
    while v.shape[-1] > 1:
        n = v.shape[-1]
        half = n // 2
        folded = jacln(v[..., :half], v[..., half : 2 * half])
        if n % 2:
            folded = np.concatenate([folded, v[..., -1:]], axis=-1)
        v = folded
    return v[..., 0]


def exact_app_llr(lat: RealLattice, y_r, c: Constellation, n0: float) -> np.ndarray:
    """Exact LLRs (no max-log approximation) summed over all ``M**4`` vectors."""
    _check_n0(n0)
    idx = all_candidates(c)
    neg_d = -squared_distances(lat, y_r, c.levels[idx]) / n0
    bits = _sequence_bits(c)
    out = np.empty(neg_d.shape[:-1] + (bits.shape[1],))
    for j in range(bits.shape[1]):
        ones = bits[:, j] == 1
        out[..., j] = jacln_sum(neg_d[..., ones]) - jacln_sum(neg_d[..., ~ones])
    return out
