"""Layered orthogonal lattice detection for two-transmit-antenna MIMO.

Exact ML hard decisions from ``M**2`` lattice points and exact max-log bit
LLRs from ``2 * M**2``, plus the reference detectors and link simulator used
to check them.
"""

from .bicm import (
    CodeConfig,
    FrameConfig,
    conv_encode,
    deinterleave,
    frame_to_symbols,
    interleave,
    llrs_to_frame,
    viterbi_decode,
)
from .constellation import Constellation, build_qam
from .detect import HardDecision, lord_hard, lord_search, metric_T, ml_exhaustive, zf_detect
from .instrument import count_ops
from .lattice import DegenerateChannelError, RealLattice, realize_channel, realize_observation
from .preprocess import (
    ChannelSummary,
    ObservationProjection,
    Ordering,
    TriangularModel,
    preprocess,
    project_observation,
    summarize_channel,
    triangularize,
)
from .simkit import SimConfig, SimResult, draw_channel, draw_noise, run, run_bicm, run_uncoded
from .softbits import bruteforce_maxlog_llr, exact_app_llr, jacln, lord_llr

__version__ = "0.1.0"
