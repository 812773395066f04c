"""Hard-output detection: the LORD search plus exhaustive-ML and ZF references.

LORD conditions on the bottom layer (the two real symbols of one antenna),
which leaves the top layer's I and Q decoupled, so each is decided by slicing.
Scanning all ``M**2`` bottom-layer pairs therefore finds the exact ML point.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .constellation import Constellation
from .instrument import tally
from .lattice import DegenerateChannelError, RealLattice
from .preprocess import TriangularModel


@dataclass(frozen=True, eq=False)
class HardDecision:
    """A detected symbol vector.

    Attributes:
        indices: ``(..., 4)`` level indices for ``x1 .. x4`` (natural order).
        metric: Detector metric at the decision. For LORD this is ``T``; for
            the exhaustive and ZF references it is ``-||y_r - B x||**2``.
        candidates_evaluated: Lattice points scored per channel use.
    """

    indices: np.ndarray
    metric: np.ndarray
    candidates_evaluated: int

    def real_symbols(self, c: Constellation) -> np.ndarray:
        return c.levels[self.indices]

    def symbols(self, c: Constellation) -> np.ndarray:
        """Decided complex symbols ``(X1, X2)`` as a ``(..., 2)`` array."""
        lv = c.levels[self.indices]
        return lv[..., 0::2] + 1j * lv[..., 1::2]

    def bits(self, c: Constellation) -> np.ndarray:
        """Gray labels of the decision, ``(..., 2*bits_per_symbol)``."""
        b = c.index_bits(self.indices)
        return b.reshape(*b.shape[:-2], -1)


def metric_T(tm: TriangularModel, x_r) -> np.ndarray:
    """Weighted negative residual of the triangular model at ``x_r``.

    ``x_r`` holds real level values in natural order ``(x1, x2, x3, x4)``.
    Differences of ``T`` between two points equal the negated difference of
    their squared Euclidean distances ``||y_r - B x_r||**2``.
    """
    z = tm.to_layers(np.asarray(x_r, dtype=float))
    d, r3 = tm.diag_top, tm.diag_bottom
    y = tm.y_tilde
    cross = np.einsum("...ij,...j->...i", tm.upper, z[..., 2:])
    top = (y[..., :2] - d[..., None] * z[..., :2] - cross) ** 2
    bottom = (y[..., 2:] - r3[..., None] * z[..., 2:]) ** 2
    return -top.sum(axis=-1) / d - bottom.sum(axis=-1) / (d * r3)


def bottom_penalty(tm: TriangularModel, zc, zd) -> np.ndarray:
    """``C3``: the part of ``-T`` that depends only on the bottom layer."""
    d, r3 = tm.diag_top[..., None], tm.diag_bottom[..., None]
    y3, y4 = tm.y_tilde[..., 2:3], tm.y_tilde[..., 3:4]
    return ((y3 - r3 * zc) ** 2 + (y4 - r3 * zd) ** 2) / (d * r3)


@dataclass(frozen=True, eq=False)
class SearchResult:
    """Per-candidate output of a LORD scan.

    ``metric[..., k]`` is ``T`` for bottom-layer pair ``k = ic * M + id`` with
    its conditionally optimal top layer ``(top_a[..., k], top_b[..., k])``.
    """

    candidates: np.ndarray  # (K,)
    metric: np.ndarray  # (..., K)
    top_a: np.ndarray  # (..., K)
    top_b: np.ndarray  # (..., K)


def lord_search(
    tm: TriangularModel, c: Constellation, candidates=None
) -> SearchResult:
    """Score every bottom-layer pair (or the given subset of pair indices).

    Disjoint subsets can be scanned independently and reduced by max; the
    full scan is just the subset ``range(M**2)``.
    """
    m = c.order_per_dim
    cand = np.arange(m * m) if candidates is None else np.asarray(candidates)
    zc = c.levels[cand // m]
    zd = c.levels[cand % m]

    d = tm.diag_top[..., None]
    u = tm.upper
    c1 = u[..., 0, 0, None] * zc + u[..., 0, 1, None] * zd
    c2 = u[..., 1, 0, None] * zc + u[..., 1, 1, None] * zd
    e1 = tm.y_tilde[..., 0:1] - c1
    e2 = tm.y_tilde[..., 1:2] - c2
    tally("candidates", c1.size)
    top_a = c.slice(e1 / d)
    top_b = c.slice(e2 / d)
    r1 = e1 - d * c.levels[top_a]
    r2 = e2 - d * c.levels[top_b]
    metric = -(r1**2 + r2**2) / d - bottom_penalty(tm, zc, zd)
    return SearchResult(cand, metric, top_a, top_b)


def lord_hard(tm: TriangularModel, c: Constellation) -> HardDecision:
    """Exact ML decision from ``M**2`` candidates and ``2 * M**2`` slicings."""
    res = lord_search(tm, c)
    m = c.order_per_dim
    best = np.argmax(res.metric, axis=-1)[..., None]
    k = res.candidates[best[..., 0]]
    z_idx = np.stack(
        [
            np.take_along_axis(res.top_a, best, -1)[..., 0],
            np.take_along_axis(res.top_b, best, -1)[..., 0],
            k // m,
            k % m,
        ],
        axis=-1,
    )
    metric = np.take_along_axis(res.metric, best, -1)[..., 0]
    return HardDecision(tm.from_layers(z_idx), metric, len(res.candidates))


def all_candidates(c: Constellation) -> np.ndarray:
    """Every ``(x1, x2, x3, x4)`` index tuple in lexicographic order, ``(M**4, 4)``."""
    m = c.order_per_dim
    return np.array(list(itertools.product(range(m), repeat=4)), dtype=np.intp)


def squared_distances(lat: RealLattice, y_r, points: np.ndarray) -> np.ndarray:
    """``||y_r - B x||**2`` for each row of ``points`` (real ``x_r`` values).

    Returns ``(..., P)``. Batches are processed in chunks to bound memory.
    """
    y_r = np.asarray(y_r, dtype=float)
    batch = lat.batch_shape
    cols = lat.columns.reshape(-1, *lat.columns.shape[-2:])
    ys = np.broadcast_to(y_r, batch + y_r.shape[-1:]).reshape(-1, y_r.shape[-1])
    n_pts = points.shape[0]
    chunk = max(1, 2_000_000 // (n_pts * cols.shape[-2]))
    out = np.empty((cols.shape[0], n_pts))
    for s in range(0, cols.shape[0], chunk):
        proj = cols[s : s + chunk] @ points.T  # (b, 2Lr, P)
        out[s : s + chunk] = ((ys[s : s + chunk, :, None] - proj) ** 2).sum(axis=1)
    return out.reshape(batch + (n_pts,))


def ml_exhaustive(lat: RealLattice, y_r, c: Constellation) -> HardDecision:
    """Brute-force ML over all ``M**4`` symbol vectors (test-scale oracle)."""
    if c.order_per_dim > 8:
        raise ValueError("exhaustive search is limited to M <= 8")
    idx = all_candidates(c)
    dist = squared_distances(lat, y_r, c.levels[idx])
    tally("candidates", dist.size)
    best = np.argmin(dist, axis=-1)
    metric = -np.take_along_axis(dist, best[..., None], -1)[..., 0]
    return HardDecision(idx[best], metric, idx.shape[0])


def zf_detect(h, y, c: Constellation, es: float) -> HardDecision:
    """Zero-forcing: pseudo-inverse equalization followed by per-dimension slicing."""
    h = np.asarray(h, dtype=complex)
    y = np.asarray(y, dtype=complex)
    a = np.sqrt(es / 2.0) * h
    sv = np.linalg.svd(a, compute_uv=False)
    if np.any(~(sv[..., -1] > 1e-12 * sv[..., 0])):
        raise DegenerateChannelError("channel matrix is not full column rank")
    x_tilde = np.einsum("...ij,...j->...i", np.linalg.pinv(a), y)
    i_idx = c.slice(x_tilde.real)
    q_idx = c.slice(x_tilde.imag)
    indices = np.stack([i_idx[..., 0], q_idx[..., 0], i_idx[..., 1], q_idx[..., 1]], -1)
    lv = c.levels[indices]
    x_hat = lv[..., 0::2] + 1j * lv[..., 1::2]
    resid = y - np.einsum("...ij,...j->...i", a, x_hat)
    metric = -(np.abs(resid) ** 2).sum(axis=-1)
    return HardDecision(indices, metric, 0)
