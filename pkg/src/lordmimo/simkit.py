"""Monte Carlo link simulation for the uncoded and BICM experiments.

Trials are generated in fixed-size blocks. Block ``b`` always draws from the
stream seeded by ``(seed, b)``, whatever SNR point or worker runs it, so a run
is reproducible bit for bit and independent of the worker count. Noise is
drawn at unit variance and scaled, which makes every SNR point see the same
bits, channels and noise shapes (common random numbers).

SNR is Es/N0 with Es the total transmit energy per channel use, i.e.
``y = sqrt(Es/2) H x + n`` with unit-energy symbols on each antenna.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .bicm import (
    DEFAULT_FRAME,
    channel_uses_per_frame,
    conv_encode,
    frame_to_symbols,
    llrs_to_frame,
    viterbi_decode,
)
from .constellation import Constellation, build_qam
from .detect import lord_hard, ml_exhaustive, zf_detect
from .lattice import DegenerateChannelError, realize_channel, realize_observation
from .preprocess import preprocess, triangularize
from .softbits import bruteforce_maxlog_llr, lord_llr

log = logging.getLogger(__name__)

DETECTORS = ("lord", "zf", "ml")
FADING_MODES = ("fast", "block")
ES = 1.0


def _shape(size) -> tuple[int, ...]:
    return (int(size),) if np.ndim(size) == 0 else tuple(int(s) for s in size)


def draw_channel(lr: int, rng: np.random.Generator, size=()) -> np.ndarray:
    """I.i.d. Rayleigh channel(s) of shape ``size + (lr, 2)``, variance 0.5 per real dimension."""
    if lr < 2:
        raise ValueError("at least two receive antennas are required")
    g = rng.standard_normal(_shape(size) + (lr, 2, 2))
    return np.sqrt(0.5) * (g[..., 0] + 1j * g[..., 1])


def draw_noise(lr: int, n0: float, rng: np.random.Generator, size=()) -> np.ndarray:
    """Circularly symmetric complex AWGN with ``n0/2`` per real dimension."""
    if not n0 > 0:
        raise ValueError(f"n0 must be positive, got {n0!r}")
    g = rng.standard_normal(_shape(size) + (lr, 2))
    return np.sqrt(n0 / 2.0) * (g[..., 0] + 1j * g[..., 1])


@dataclass(frozen=True)
class SimConfig:
    modulation: int = 64
    detector: str = "lord"
    soft: bool = True
    coded: bool = False
    lr: int = 2
    snr_db: tuple[float, ...] = (10.0,)
    trials: int = 10_000
    target_errors: int = 100
    fading: str = "fast"
    seed: int = 0
    workers: int = 1
    block_size: int | None = None

    def __post_init__(self):
        build_qam(self.modulation)
        if self.detector not in DETECTORS:
            raise ValueError(f"detector must be one of {DETECTORS}, got {self.detector!r}")
        if self.fading not in FADING_MODES:
            raise ValueError(f"fading must be one of {FADING_MODES}, got {self.fading!r}")
        if self.lr < 2:
            raise ValueError("lr must be at least 2")
        if not self.snr_db:
            raise ValueError("SNR grid is empty")
        if self.trials <= 0:
            raise ValueError("trials must be positive")
        if self.target_errors <= 0:
            raise ValueError("target_errors must be positive")
        if self.workers <= 0:
            raise ValueError("workers must be positive")
        if self.coded and self.soft and self.detector == "zf":
            raise ValueError("soft output is not available for the zf detector")
        if self.block_size is not None and self.block_size <= 0:
            raise ValueError("block_size must be positive")

    @property
    def trials_per_block(self) -> int:
        if self.block_size is not None:
            return self.block_size
        return 100 if self.coded else 2000


@dataclass
class PointResult:
    snr_db: float
    trials: int = 0
    bits: int = 0
    bit_errors: int = 0
    words: int = 0
    word_errors: int = 0
    seconds: float = 0.0

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits if self.bits else float("nan")

    @property
    def wer(self) -> float:
        return self.word_errors / self.words if self.words else float("nan")


CSV_HEADER = ("snr_db", "trials", "bits", "bit_errors", "ber", "words", "word_errors", "wer", "seconds")


def _dec(x: float) -> str:
    return np.format_float_positional(x, trim="-")


@dataclass
class SimResult:
    config: SimConfig
    points: list[PointResult] = field(default_factory=list)

    def to_csv(self, include_seconds: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for p in self.points:
            w.writerow(
                [
                    _dec(p.snr_db), p.trials, p.bits, p.bit_errors, _dec(p.ber),
                    p.words, p.word_errors, _dec(p.wer),
                    f"{p.seconds:.3f}" if include_seconds else "",
                ]
            )
        return buf.getvalue()


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence([seed, block]))


def _hard_detect(detector: str, h, y, c: Constellation):
    """Decided bit labels ``(..., 2*bits_per_symbol)`` for a batch of channel uses."""
    if detector == "zf":
        return zf_detect(h, y, c, ES).bits(c)
    lat = realize_channel(h, ES)
    y_r = realize_observation(y)
    if detector == "ml":
        return ml_exhaustive(lat, y_r, c).bits(c)
    cs, op = preprocess(lat, y_r)
    return lord_hard(triangularize(cs, op), c).bits(c)


def _soft_detect(detector: str, h, y, c: Constellation, n0: float):
    lat = realize_channel(h, ES)
    y_r = realize_observation(y)
    if detector == "ml":
        return bruteforce_maxlog_llr(lat, y_r, c, n0)
    cs, op = preprocess(lat, y_r)
    return lord_llr(cs, op, c, n0)


def _robust(fn, h, y, fallback_shape, *args):
    """Run ``fn`` on a batch; on a degenerate channel redo it one use at a time.

    Uses that still fail get NaN outputs, which the callers count as errors.
    """
    try:
        return fn(h, y, *args)
    except DegenerateChannelError:
        pass
    flat_h = h.reshape(-1, *h.shape[-2:])
    flat_y = y.reshape(-1, y.shape[-1])
    out = np.full((flat_h.shape[0],) + fallback_shape, np.nan)
    failures = 0
    for i in range(flat_h.shape[0]):
        try:
            out[i] = fn(flat_h[i], flat_y[i], *args)
        except DegenerateChannelError:
            failures += 1
    log.warning("%d degenerate channel use(s) counted as errors", failures)
    return out.reshape(h.shape[:-2] + fallback_shape)


def _uncoded_block(cfg: SimConfig, snr_db: float, block: int):
    c = build_qam(cfg.modulation)
    n = cfg.trials_per_block
    n0 = ES / 10 ** (snr_db / 10)
    rng = _block_rng(cfg.seed, block)
    bits = rng.integers(0, 2, size=(n, 2, c.bits_per_symbol))
    h = draw_channel(cfg.lr, rng, n)
    noise = draw_noise(cfg.lr, 1.0, rng, n) * np.sqrt(n0)
    y = np.sqrt(ES / 2) * np.einsum("nij,nj->ni", h, c.map_bits(bits)) + noise

    decided = _robust(
        lambda hh, yy: _hard_detect(cfg.detector, hh, yy, c),
        h, y, (2 * c.bits_per_symbol,),
    )
    wrong = decided != bits.reshape(n, -1)  # NaN compares unequal: failures count as errors
    return wrong.sum(axis=-1), wrong.any(axis=-1), 2 * c.bits_per_symbol


def _bicm_block(cfg: SimConfig, snr_db: float, block: int):
    c = build_qam(cfg.modulation)
    frame = DEFAULT_FRAME
    n = cfg.trials_per_block
    uses = channel_uses_per_frame(c, frame)
    n0 = ES / 10 ** (snr_db / 10)
    rng = _block_rng(cfg.seed, block)
    info = rng.integers(0, 2, size=(n, frame.info_bits))
    x = frame_to_symbols(conv_encode(info), c, frame)  # (n, uses, 2)
    if cfg.fading == "fast":
        h = draw_channel(cfg.lr, rng, (n, uses))
    else:
        h = np.broadcast_to(draw_channel(cfg.lr, rng, (n, 1)), (n, uses, cfg.lr, 2))
    noise = draw_noise(cfg.lr, 1.0, rng, (n, uses)) * np.sqrt(n0)
    y = np.sqrt(ES / 2) * np.einsum("nuij,nuj->nui", h, x) + noise

    width = (2 * c.bits_per_symbol,)
    if cfg.soft:
        llr = _robust(lambda hh, yy: _soft_detect(cfg.detector, hh, yy, c, n0), h, y, width)
    else:
        llr = 2.0 * _robust(lambda hh, yy: _hard_detect(cfg.detector, hh, yy, c), h, y, width) - 1.0
    # a failed detection carries no information
    llr = np.nan_to_num(llr, nan=0.0)
    decoded = viterbi_decode(llrs_to_frame(llr, frame))
    wrong = decoded != info
    return wrong.sum(axis=-1), wrong.any(axis=-1), frame.info_bits


def _run_block(cfg: SimConfig, snr_db: float, block: int):
    fn = _bicm_block if cfg.coded else _uncoded_block
    return fn(cfg, snr_db, block)


def _run_point(cfg: SimConfig, snr_db: float, pool) -> PointResult:
    start = time.perf_counter()
    point = PointResult(snr_db=snr_db)
    per_block = cfg.trials_per_block
    block = 0
    while point.trials < cfg.trials and point.word_errors < cfg.target_errors:
        wave = range(block, block + cfg.workers)
        if pool is None:
            results = [_run_block(cfg, snr_db, b) for b in wave]
        else:
            results = list(pool.map(_run_block, [cfg] * len(wave), [snr_db] * len(wave), wave))
        block += len(wave)
        for bit_err, word_err, bits_per_word in results:
            need = min(per_block, cfg.trials - point.trials)
            cum = np.cumsum(word_err[:need])
            hit = np.flatnonzero(cum >= cfg.target_errors - point.word_errors)
            take = int(hit[0]) + 1 if hit.size else need
            point.trials += take
            point.words += take
            point.bits += take * bits_per_word
            point.bit_errors += int(bit_err[:take].sum())
            point.word_errors += int(word_err[:take].sum())
            if point.trials >= cfg.trials or point.word_errors >= cfg.target_errors:
                break
    point.seconds = time.perf_counter() - start
    log.info(
        "Es/N0 %.2f dB: %d trials, BER %.3e, WER %.3e (%.1fs)",
        snr_db, point.trials, point.ber, point.wer, point.seconds,
    )
    return point


def run(cfg: SimConfig) -> SimResult:
    """Run every SNR point of ``cfg`` and collect the counters."""
    result = SimResult(cfg)
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for snr in cfg.snr_db:
            result.points.append(_run_point(cfg, float(snr), pool))
    finally:
        if pool is not None:
            pool.shutdown()
    return result


def run_uncoded(cfg: SimConfig) -> SimResult:
    if cfg.coded:
        raise ValueError("run_uncoded needs an uncoded configuration")
    return run(cfg)


def run_bicm(cfg: SimConfig) -> SimResult:
    if not cfg.coded:
        raise ValueError("run_bicm needs a coded configuration")
    return run(cfg)
