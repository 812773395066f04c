"""Command-line front end: ``lord-sim``.

Writes one CSV row per Es/N0 point. Options may also come from a
``key=value`` config file (``--config``); flags given on the command line win.
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from .simkit import DETECTORS, FADING_MODES, SimConfig, run

_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def parse_grid(text: str) -> tuple[float, ...]:
    """``start:step:stop`` (stop inclusive), or a single value, or a comma list."""
    text = text.strip()
    if "," in text:
        return tuple(float(v) for v in text.split(","))
    parts = text.split(":")
    if len(parts) == 1:
        return (float(parts[0]),)
    if len(parts) != 3:
        raise argparse.ArgumentTypeError(f"bad SNR grid {text!r}; use start:step:stop")
    start, step, stop = (float(p) for p in parts)
    if step <= 0 or stop < start:
        raise argparse.ArgumentTypeError(f"bad SNR grid {text!r}")
    n = int(np.floor((stop - start) / step + 1e-9)) + 1
    return tuple(float(round(start + i * step, 10)) for i in range(n))


def read_config_file(path: str) -> dict:
    """Parse ``key=value`` lines into argparse defaults. ``#`` starts a comment."""
    values: dict = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key in ("soft", "hard", "coded", "uncoded"):
                flag = _BOOL.get(val.lower())
                if flag is None:
                    raise ValueError(f"{path}:{lineno}: {key} expects a boolean")
                if key in ("hard", "uncoded"):
                    key, flag = ("soft" if key == "hard" else "coded"), not flag
                values[key] = flag
            elif key == "mod":
                values[key] = int(val)
            elif key in ("lr", "trials", "target_errors", "seed", "workers"):
                values[key] = int(val)
            elif key == "snr_db":
                values[key] = parse_grid(val)
            elif key in ("detector", "fading", "out"):
                values[key] = val
            else:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
    return values


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="lord-sim",
        description="Monte Carlo BER/WER simulation of 2-transmit-antenna MIMO "
        "detection (LORD, zero forcing, exhaustive ML), uncoded or BICM.",
    )
    p.add_argument("--config", metavar="FILE", help="key=value file mirroring these flags")
    p.add_argument("--mod", type=int, choices=(4, 16, 64), default=64, help="QAM order per antenna")
    p.add_argument("--detector", choices=DETECTORS, default="lord")
    soft = p.add_mutually_exclusive_group()
    soft.add_argument("--soft", dest="soft", action="store_true", default=True,
                      help="max-log LLRs into the decoder (coded mode, default)")
    soft.add_argument("--hard", dest="soft", action="store_false",
                      help="hard symbol decisions as +/-1 into the decoder")
    coded = p.add_mutually_exclusive_group()
    coded.add_argument("--coded", dest="coded", action="store_true", default=False,
                       help="BICM: K=7 (133,171) code, 144-bit frames, 12x12 interleaver")
    coded.add_argument("--uncoded", dest="coded", action="store_false", help="(default)")
    p.add_argument("--lr", type=int, default=2, help="receive antennas")
    p.add_argument("--snr-db", type=parse_grid, default=(10.0,), metavar="START:STEP:STOP",
                   help="Es/N0 grid in dB; Es is the total transmit energy per channel "
                   "use summed over both antennas (not per antenna, not per bit)")
    p.add_argument("--trials", type=int, default=10_000,
                   help="max channel uses (uncoded) or frames (coded) per point")
    p.add_argument("--target-errors", type=int, default=100,
                   help="stop a point after this many word/frame errors")
    p.add_argument("--fading", choices=FADING_MODES, default="fast",
                   help="fast: new channel every channel use; block: one per frame")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", metavar="FILE", help="CSV destination (default: stdout)")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    pre, _ = parser.parse_known_args(argv)
    if pre.config:
        try:
            parser.set_defaults(**read_config_file(pre.config))
        except (OSError, ValueError) as exc:
            parser.error(str(exc))
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(asctime)s %(levelname)s %(message)s",
    )
    try:
        cfg = SimConfig(
            modulation=args.mod,
            detector=args.detector,
            soft=args.soft,
            coded=args.coded,
            lr=args.lr,
            snr_db=args.snr_db,
            trials=args.trials,
            target_errors=args.target_errors,
            fading=args.fading,
            seed=args.seed,
            workers=args.workers,
        )
    except ValueError as exc:
        parser.error(str(exc))
    text = run(cfg).to_csv()
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
