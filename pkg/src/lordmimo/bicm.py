"""Outer code for the BICM link: K=7 (133, 171) convolutional code, 12x12
block interleaver, framing onto two-antenna QAM channel uses, and a Viterbi
decoder fed with LLRs (positive = bit 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constellation import Constellation


@dataclass(frozen=True)
class CodeConfig:
    constraint_length: int = 7
    generators: tuple[int, ...] = (0o133, 0o171)

    @property
    def memory(self) -> int:
        return self.constraint_length - 1

    @property
    def num_states(self) -> int:
        return 1 << self.memory

    @property
    def rate_inv(self) -> int:
        return len(self.generators)


@dataclass(frozen=True)
class FrameConfig:
    info_bits: int = 66
    interleaver_rows: int = 12
    interleaver_cols: int = 12
    code: CodeConfig = CodeConfig()

    @property
    def coded_bits(self) -> int:
        return self.code.rate_inv * (self.info_bits + self.code.memory)

    def __post_init__(self):
        if self.coded_bits != self.interleaver_rows * self.interleaver_cols:
            raise ValueError(
                f"{self.coded_bits} coded bits do not fill a "
                f"{self.interleaver_rows}x{self.interleaver_cols} interleaver"
            )


DEFAULT_CODE = CodeConfig()
DEFAULT_FRAME = FrameConfig()


def _parity(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.int64)
    p = np.zeros_like(x)
    while np.any(x):
        p ^= x & 1
        x = x >> 1
    return p


def _taps(cfg: CodeConfig) -> np.ndarray:
    """``(n_out, K)`` tap matrix; column 0 multiplies the current input bit."""
    k = cfg.constraint_length
    shifts = np.arange(k - 1, -1, -1)
    return np.array([(g >> shifts) & 1 for g in cfg.generators], dtype=np.int64)


def conv_encode(info, cfg: CodeConfig = DEFAULT_CODE) -> np.ndarray:
    """Zero-tailed encoding of ``(..., n)`` bits into ``(..., 2 * (n + 6))`` bits.

    Output is interleaved per input bit: ``(g0, g1, g0, g1, ...)``.
    """
    info = np.asarray(info, dtype=np.int64)
    padded = np.concatenate(
        [info, np.zeros(info.shape[:-1] + (cfg.memory,), dtype=np.int64)], axis=-1
    )
    taps = _taps(cfg)
    # out[t] = sum_j taps[j] * u[t - j]  (mod 2)
    n = padded.shape[-1]
    out = np.zeros(padded.shape + (cfg.rate_inv,), dtype=np.int64)
    for j in range(cfg.constraint_length):
        shifted = np.zeros_like(padded)
        shifted[..., j:] = padded[..., : n - j]
        out ^= shifted[..., None] * taps[:, j]
    return out.reshape(*padded.shape[:-1], -1).astype(np.int8)


def _trellis(cfg: CodeConfig):
    """Predecessor tables for each next state.

    State is the last ``K-1`` inputs, most recent in the MSB. A transition from
    ``s`` with input ``u`` lands in ``(u << (K-2)) | (s >> 1)``.
    """
    m = cfg.memory
    ns = cfg.num_states
    nxt = np.arange(ns)
    u = nxt >> (m - 1)
    base = (nxt << 1) & (ns - 1)
    prev = np.stack([base, base | 1], axis=-1)  # (ns, 2)
    reg = (u[:, None] << m) | prev  # full K-bit register, current input at MSB
    outs = np.stack([_parity(reg & g) for g in cfg.generators], axis=-1)
    return prev, u, outs  # outs: (ns, 2, n_out)


def viterbi_decode(llrs, cfg: CodeConfig = DEFAULT_CODE) -> np.ndarray:
    """Maximum-likelihood path through the zero-terminated trellis.

    Args:
        llrs: ``(..., 2 * (n + 6))`` channel LLRs in encoder output order.
            Hard decisions can be passed as +/-1.

    Returns:
        ``(..., n)`` decoded information bits (tail removed).
    """
    llrs = np.asarray(llrs, dtype=float)
    r = cfg.rate_inv
    if llrs.shape[-1] % r:
        raise ValueError(f"LLR length must be a multiple of {r}")
    batch = llrs.shape[:-1]
    steps = llrs.shape[-1] // r
    if steps < cfg.memory:
        raise ValueError("frame shorter than the code tail")
    obs = llrs.reshape(-1, steps, r)
    nb = obs.shape[0]

    prev, _, outs = _trellis(cfg)
    signs = 2.0 * outs - 1.0  # (ns, 2, r)
    ns = cfg.num_states
    metric = np.full((nb, ns), -np.inf)
    metric[:, 0] = 0.0
    choice = np.empty((steps, nb, ns), dtype=np.int8)
    for t in range(steps):
        branch = np.einsum("br,sjr->bsj", obs[:, t], signs)
        cand = metric[:, prev] + branch  # (nb, ns, 2)
        c = np.argmax(cand, axis=-1)
        choice[t] = c
        metric = np.take_along_axis(cand, c[..., None], -1)[..., 0]

    state = np.zeros(nb, dtype=np.int64)
    decided = np.empty((nb, steps), dtype=np.int8)
    rows = np.arange(nb)
    for t in range(steps - 1, -1, -1):
        decided[:, t] = state >> (cfg.memory - 1)
        state = prev[state, choice[t, rows, state]]
    return decided[:, : steps - cfg.memory].reshape(batch + (steps - cfg.memory,))


def _check_len(bits: np.ndarray, frame: FrameConfig) -> None:
    if bits.shape[-1] != frame.coded_bits:
        raise ValueError(
            f"expected {frame.coded_bits} values per frame, got {bits.shape[-1]}"
        )


def interleave(bits, frame: FrameConfig = DEFAULT_FRAME) -> np.ndarray:
    """Row-write / column-read block interleaver over the last axis."""
    bits = np.asarray(bits)
    _check_len(bits, frame)
    rows, cols = frame.interleaver_rows, frame.interleaver_cols
    grid = bits.reshape(*bits.shape[:-1], rows, cols)
    return np.swapaxes(grid, -1, -2).reshape(bits.shape)


def deinterleave(bits, frame: FrameConfig = DEFAULT_FRAME) -> np.ndarray:
    bits = np.asarray(bits)
    _check_len(bits, frame)
    rows, cols = frame.interleaver_rows, frame.interleaver_cols
    grid = bits.reshape(*bits.shape[:-1], cols, rows)
    return np.swapaxes(grid, -1, -2).reshape(bits.shape)


def channel_uses_per_frame(c: Constellation, frame: FrameConfig = DEFAULT_FRAME) -> int:
    per_use = 2 * c.bits_per_symbol
    if frame.coded_bits % per_use:
        raise ValueError(
            f"{frame.coded_bits} coded bits do not split into channel uses of "
            f"{per_use} bits"
        )
    return frame.coded_bits // per_use


def frame_to_symbols(
    coded, c: Constellation, frame: FrameConfig = DEFAULT_FRAME
) -> np.ndarray:
    """Interleave a coded frame and map it to ``(..., uses, 2)`` symbol pairs.

    Each channel use takes ``2 * bits_per_symbol`` consecutive interleaved
    bits: the first half labels X1, the second half X2.
    """
    coded = np.asarray(coded)
    uses = channel_uses_per_frame(c, frame)
    grouped = interleave(coded, frame).reshape(
        *coded.shape[:-1], uses, 2, c.bits_per_symbol
    )
    return c.map_bits(grouped)


def llrs_to_frame(llrs, frame: FrameConfig = DEFAULT_FRAME) -> np.ndarray:
    """Flatten ``(..., uses, 2*bits_per_symbol)`` LLRs and undo the interleaver."""
    llrs = np.asarray(llrs)
    flat = llrs.reshape(*llrs.shape[:-2], -1)
    return deinterleave(flat, frame)
