"""Real-valued lattice form of the two-transmit-antenna MIMO model.

The complex model ``y = sqrt(Es/2) H x + n`` is rewritten as
``y_r = B x_r + n_r`` with ``x_r = [Re X1, Im X1, Re X2, Im X2]`` and the rows
of ``y_r`` ordered ``Re Y1, Im Y1, Re Y2, Im Y2, ...``. Column ``2k-1`` of the
real channel holds the interleaved (Re, Im) parts of the ``k``-th complex
column and column ``2k`` holds (-Im, Re), so the two columns belonging to one
transmit antenna are orthogonal and of equal norm.

All functions accept arbitrary leading batch dimensions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class DegenerateChannelError(ValueError):
    """The channel does not support a usable triangular model."""


@dataclass(frozen=True, eq=False)
class RealLattice:
    """Real lattice generator with the energy factor already applied.

    Attributes:
        columns: ``(..., 2*Lr, 4)`` array whose columns are ``h_1 .. h_4``
            multiplied by ``sqrt(Es/2)``.
        energy_scale: The folded factor ``sqrt(Es/2)``.
    """

    columns: np.ndarray
    energy_scale: float

    @property
    def num_rx(self) -> int:
        return self.columns.shape[-2] // 2

    @property
    def batch_shape(self) -> tuple[int, ...]:
        return self.columns.shape[:-2]

    def column(self, k: int) -> np.ndarray:
        """Column ``h_k`` (1-based, matching the usual naming) as ``(..., 2*Lr)``."""
        return self.columns[..., k - 1]

    def apply(self, x_r) -> np.ndarray:
        """Noise-free lattice point ``B @ x_r`` for ``x_r`` of shape ``(..., 4)``."""
        return np.einsum("...ij,...j->...i", self.columns, np.asarray(x_r, dtype=float))

    def swapped(self) -> "RealLattice":
        """The same lattice with the two transmit antennas exchanged."""
        return RealLattice(self.columns[..., [2, 3, 0, 1]], self.energy_scale)


def _interleave(re: np.ndarray, im: np.ndarray) -> np.ndarray:
    out = np.stack([re, im], axis=-1)
    return out.reshape(*re.shape[:-1], 2 * re.shape[-1])


def realize_channel(h, es: float) -> RealLattice:
    """Build the real lattice generator from an ``(..., Lr, 2)`` complex channel.

    Args:
        h: Complex channel matrix; ``h[..., j, i]`` is the gain from transmit
            antenna ``i`` to receive antenna ``j``.
        es: Total energy per channel use. The factor ``sqrt(es/2)`` is folded
            into the returned columns.
    """
    h = np.asarray(h, dtype=complex)
    if h.ndim < 2 or h.shape[-1] != 2:
        raise ValueError(f"channel must have shape (..., Lr, 2), got {h.shape}")
    if h.shape[-2] < 2:
        raise ValueError("at least two receive antennas are required")
    if not np.all(np.isfinite(h)):
        raise ValueError("channel entries must be finite")
    if not es > 0:
        raise ValueError(f"energy per symbol must be positive, got {es!r}")

    scale = float(np.sqrt(es / 2.0))
    cols = []
    for k in range(2):
        hk = h[..., :, k]
        cols.append(_interleave(hk.real, hk.imag))
        cols.append(_interleave(-hk.imag, hk.real))
    return RealLattice(scale * np.stack(cols, axis=-1), scale)


def realize_observation(y) -> np.ndarray:
    """Interleave ``(..., Lr)`` complex observations into ``(..., 2*Lr)`` reals."""
    y = np.asarray(y, dtype=complex)
    if not np.all(np.isfinite(y)):
        raise ValueError("observations must be finite")
    return _interleave(y.real, y.imag)


def to_real_symbols(x) -> np.ndarray:
    """``(..., 2)`` complex symbol pair to ``(..., 4)`` real vector ``x_r``."""
    return realize_observation(x)


def to_complex_symbols(x_r) -> np.ndarray:
    x_r = np.asarray(x_r, dtype=float)
    return x_r[..., 0::2] + 1j * x_r[..., 1::2]
