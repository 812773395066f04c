"""Square QAM constellations built from two Gray-labelled M-PAM dimensions.

Every symbol is ``levels[i] + 1j * levels[q]``. The first ``log2(M)`` bits of
a symbol label pick the in-phase level and the last ``log2(M)`` bits pick the
quadrature level, each through a binary-reflected Gray code read MSB first.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .instrument import tally

SUPPORTED_ORDERS = (4, 16, 64)


def gray_code(nbits: int) -> np.ndarray:
    """Binary-reflected Gray code: entry ``i`` is the label of level ``i``."""
    i = np.arange(1 << nbits)
    return i ^ (i >> 1)


def int_to_bits(values: np.ndarray, nbits: int) -> np.ndarray:
    """Expand integers into MSB-first bit arrays along a new trailing axis."""
    values = np.asarray(values)
    shifts = np.arange(nbits - 1, -1, -1)
    return ((values[..., None] >> shifts) & 1).astype(np.int8)


def bits_to_int(bits: np.ndarray) -> np.ndarray:
    bits = np.asarray(bits)
    weights = 1 << np.arange(bits.shape[-1] - 1, -1, -1)
    return (bits.astype(np.int64) * weights).sum(axis=-1)


@dataclass(frozen=True, eq=False)
class Constellation:
    """An ``M**2``-QAM alphabet described per real dimension.

    Attributes:
        order_per_dim: Number of PAM levels ``M`` per dimension.
        scale: Level spacing half-width ``alpha``; levels are odd multiples of it.
        levels: Increasing PAM levels ``(-(M-1), ..., M-1) * alpha``.
        label: ``label[i]`` is the Gray label (as an integer) of ``levels[i]``.
    """

    order_per_dim: int
    scale: float
    levels: np.ndarray = field(repr=False)
    label: np.ndarray = field(repr=False)
    _index_of_label: np.ndarray = field(repr=False)
    _midpoints: np.ndarray = field(repr=False)

    @property
    def order(self) -> int:
        return self.order_per_dim**2

    @property
    def bits_per_dim(self) -> int:
        return self.order_per_dim.bit_length() - 1

    @property
    def bits_per_symbol(self) -> int:
        return 2 * self.bits_per_dim

    @property
    def level_bits(self) -> np.ndarray:
        """``(M, bits_per_dim)`` table of the bit label of each level."""
        return int_to_bits(self.label, self.bits_per_dim)

    @property
    def points(self) -> np.ndarray:
        """All ``M**2`` complex symbols, indexed ``i * M + q``."""
        return (self.levels[:, None] + 1j * self.levels[None, :]).ravel()

    def slice(self, v):
        """Index of the nearest PAM level to ``v``.

        Values beyond the outermost levels clip to the edge. A value exactly
        midway between two levels goes to the lower index. Works elementwise
        on arrays.
        """
        v = np.asarray(v, dtype=float)
        if not np.all(np.isfinite(v)):
            raise ValueError("cannot slice non-finite values")
        tally("slice", v.size)
        idx = np.searchsorted(self._midpoints, v, side="left")
        return int(idx) if idx.ndim == 0 else idx

    def map_bits(self, bits) -> complex | np.ndarray:
        """Map ``(..., bits_per_symbol)`` bit arrays to complex symbols."""
        bits = np.asarray(bits)
        if bits.shape[-1:] != (self.bits_per_symbol,):
            raise ValueError(
                f"expected {self.bits_per_symbol} bits per symbol, "
                f"got trailing shape {bits.shape[-1:]}"
            )
        if np.any((bits != 0) & (bits != 1)):
            raise ValueError("bits must be 0 or 1")
        k = self.bits_per_dim
        i_idx = self._index_of_label[bits_to_int(bits[..., :k])]
        q_idx = self._index_of_label[bits_to_int(bits[..., k:])]
        sym = self.levels[i_idx] + 1j * self.levels[q_idx]
        return complex(sym) if sym.ndim == 0 else sym

    def level_index(self, values) -> np.ndarray:
        """Exact inverse of ``levels[...]``; rejects anything off the alphabet."""
        values = np.asarray(values, dtype=float)
        idx = np.clip(np.searchsorted(self._midpoints, values), 0, self.order_per_dim - 1)
        if not np.allclose(self.levels[idx], values, rtol=0.0, atol=1e-9):
            raise ValueError("value is not a constellation level")
        return idx

    def index_bits(self, idx) -> np.ndarray:
        """Bit labels for level indices, ``(..., bits_per_dim)``."""
        return int_to_bits(self.label[np.asarray(idx)], self.bits_per_dim)

    def demap_symbol(self, s) -> np.ndarray:
        """Inverse of :meth:`map_bits` for symbols lying exactly on the grid."""
        s = np.asarray(s, dtype=complex)
        i_idx = self.level_index(s.real)
        q_idx = self.level_index(s.imag)
        return np.concatenate([self.index_bits(i_idx), self.index_bits(q_idx)], axis=-1)


def build_qam(order: int) -> Constellation:
    """Build a unit-energy square QAM constellation of 4, 16 or 64 points."""
    if order not in SUPPORTED_ORDERS:
        raise ValueError(
            f"unsupported QAM order {order!r}; expected one of {SUPPORTED_ORDERS}"
        )
    m = int(round(np.sqrt(order)))
    alpha = float(np.sqrt(3.0 / (2.0 * (order - 1))))
    levels = alpha * np.arange(-(m - 1), m, 2, dtype=float)
    label = gray_code(m.bit_length() - 1)
    index_of_label = np.argsort(label)
    midpoints = 0.5 * (levels[:-1] + levels[1:])
    for arr in (levels, label, index_of_label, midpoints):
        arr.setflags(write=False)
    return Constellation(m, alpha, levels, label, index_of_label, midpoints)
