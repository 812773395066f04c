"""Closed-form orthogonal triangularization of the two-antenna lattice.

Instead of a general QR factorization, the triangular model is assembled from
eight scalars: four channel-only inner products (``sigma1_sq``, ``sigma2_sq``,
``s1``, ``s2``) and four channel/observation inner products (``V1 .. V4``).
The orthogonal factor is never formed, and no square roots or divisions are
taken.

For the antenna-1-first ordering the model is::

    y_tilde = [V1, V2, sigma1_sq*V3 - s1*V1 + s2*V2, sigma1_sq*V4 - s2*V1 - s1*V2]

    R_tilde = [[sigma1_sq, 0,         s1,  s2],
               [0,         sigma1_sq, -s2, s1],
               [0,         0,         r3,  0 ],
               [0,         0,         0,   r3]]

with ``r3 = sigma1_sq*sigma2_sq - s1**2 - s2**2``. The noise on ``y_tilde`` is
independent with variances ``N0/2 * [sigma1_sq, sigma1_sq, sigma1_sq*r3,
sigma1_sq*r3]``. Reversing the antenna order gives the analogous model with
``sigma2_sq`` on top.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .instrument import tally
from .lattice import DegenerateChannelError, RealLattice

DEGENERACY_THRESHOLD = 1e-12


class Ordering(enum.Enum):
    ANTENNA1_FIRST = "antenna1-first"
    ANTENNA2_FIRST = "antenna2-first"

    @property
    def layer_perm(self) -> tuple[int, int, int, int]:
        """Positions of ``x_r`` entries in the model's layer order (top pair first)."""
        if self is Ordering.ANTENNA1_FIRST:
            return (0, 1, 2, 3)
        return (2, 3, 0, 1)


def _inner(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.einsum("...i,...i->...", a, b)
    tally("inner_product", out.size)
    return out


@dataclass(frozen=True, eq=False)
class ChannelSummary:
    sigma1_sq: np.ndarray
    sigma2_sq: np.ndarray
    s1: np.ndarray
    s2: np.ndarray

    @property
    def r3(self) -> np.ndarray:
        return self.sigma1_sq * self.sigma2_sq - self.s1**2 - self.s2**2

    def degenerate(self) -> np.ndarray:
        """Boolean mask of channel uses whose bottom layer has (near) zero gain."""
        scale = self.sigma1_sq * self.sigma2_sq
        return ~(self.r3 > DEGENERACY_THRESHOLD * scale) | ~(scale > 0)

    def check(self) -> None:
        bad = self.degenerate()
        if np.any(bad):
            raise DegenerateChannelError(
                f"{int(np.count_nonzero(bad))} channel(s) have linearly dependent "
                "antenna columns (r3 below threshold)"
            )


@dataclass(frozen=True, eq=False)
class ObservationProjection:
    v: np.ndarray  # (..., 4): V_i = h_i . y_r


@dataclass(frozen=True, eq=False)
class TriangularModel:
    """Upper-triangular equivalent of the lattice for one antenna ordering.

    Variables are in layer order ``z``: for ``ANTENNA1_FIRST`` that is
    ``(x1, x2, x3, x4)``; for ``ANTENNA2_FIRST`` it is ``(x3, x4, x1, x2)``.
    """

    ordering: Ordering
    y_tilde: np.ndarray  # (..., 4)
    diag_top: np.ndarray  # (...)
    upper: np.ndarray  # (..., 2, 2), the rotation block coupling the two layers
    diag_bottom: np.ndarray  # (...), r3

    @property
    def noise_scale_top(self) -> np.ndarray:
        return self.diag_top

    @property
    def noise_scale_bottom(self) -> np.ndarray:
        return self.diag_top * self.diag_bottom

    def matrix(self) -> np.ndarray:
        """Dense ``(..., 4, 4)`` effective matrix acting on layer-ordered ``z``."""
        shape = self.diag_top.shape
        r = np.zeros(shape + (4, 4))
        r[..., 0, 0] = r[..., 1, 1] = self.diag_top
        r[..., 2, 2] = r[..., 3, 3] = self.diag_bottom
        r[..., :2, 2:] = self.upper
        return r

    def to_layers(self, x_r) -> np.ndarray:
        return np.asarray(x_r)[..., list(self.ordering.layer_perm)]

    def from_layers(self, z) -> np.ndarray:
        # the permutation is an involution
        return np.asarray(z)[..., list(self.ordering.layer_perm)]


def summarize_channel(lat: RealLattice) -> ChannelSummary:
    """The four channel-only scalars, from four inner products per channel use."""
    h1, h3, h4 = lat.column(1), lat.column(3), lat.column(4)
    cs = ChannelSummary(
        sigma1_sq=_inner(h1, h1),
        sigma2_sq=_inner(h3, h3),
        s1=_inner(h1, h3),
        s2=_inner(h1, h4),
    )
    cs.check()
    return cs


def project_observation(lat: RealLattice, y_r) -> ObservationProjection:
    y_r = np.asarray(y_r, dtype=float)
    if y_r.shape[-1] != lat.columns.shape[-2]:
        raise ValueError(
            f"observation length {y_r.shape[-1]} does not match lattice "
            f"with {lat.columns.shape[-2]} rows"
        )
    v = np.stack([_inner(lat.column(k), y_r) for k in range(1, 5)], axis=-1)
    return ObservationProjection(v)


def triangularize(
    cs: ChannelSummary,
    op: ObservationProjection,
    ordering: Ordering = Ordering.ANTENNA1_FIRST,
) -> TriangularModel:
    cs.check()
    v1, v2, v3, v4 = np.moveaxis(op.v, -1, 0)
    s1 = cs.s1
    if ordering is Ordering.ANTENNA1_FIRST:
        top, s2 = cs.sigma1_sq, cs.s2
    else:
        # swapping antennas maps sigma1_sq <-> sigma2_sq, s2 -> -s2, V1,V2 <-> V3,V4
        top, s2 = cs.sigma2_sq, -cs.s2
        v1, v2, v3, v4 = v3, v4, v1, v2
    y_tilde = np.stack(
        [v1, v2, top * v3 - s1 * v1 + s2 * v2, top * v4 - s2 * v1 - s1 * v2], axis=-1
    )
    upper = np.stack([np.stack([s1, s2], -1), np.stack([-s2, s1], -1)], -2)
    return TriangularModel(ordering, y_tilde, top, upper, cs.r3)


def preprocess(lat: RealLattice, y_r) -> tuple[ChannelSummary, ObservationProjection]:
    """Run both preprocessing steps: eight inner products per channel use."""
    return summarize_channel(lat), project_observation(lat, y_r)
