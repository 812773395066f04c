from dataclasses import dataclass

import numpy as np
import pytest

from lordmimo import build_qam, realize_channel, realize_observation


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


@pytest.fixture(params=[4, 16, 64], ids=["qpsk", "16qam", "64qam"])
def qam(request):
    return build_qam(request.param)


@dataclass
class Instance:
    h: np.ndarray  # (n, lr, 2) complex
    bits: np.ndarray  # (n, 2 * bits_per_symbol)
    x: np.ndarray  # (n, 2) complex
    y: np.ndarray  # (n, lr) complex
    es: float
    n0: float

    @property
    def lattice(self):
        return realize_channel(self.h, self.es)

    @property
    def y_r(self):
        return realize_observation(self.y)


def make_instances(rng, c, n, snr_db=15.0, lr=2, es=1.0, noise=True):
    """Random Rayleigh channels, uniform symbols and AWGN built in complex arithmetic."""
    h = (rng.standard_normal((n, lr, 2)) + 1j * rng.standard_normal((n, lr, 2))) / np.sqrt(2)
    bits = rng.integers(0, 2, (n, 2 * c.bits_per_symbol))
    x = c.map_bits(bits.reshape(n, 2, c.bits_per_symbol))
    n0 = es / 10 ** (snr_db / 10)
    y = np.sqrt(es / 2) * (h @ x[..., None])[..., 0]
    if noise:
        y = y + np.sqrt(n0 / 2) * (
            rng.standard_normal((n, lr)) + 1j * rng.standard_normal((n, lr))
        )
    return Instance(h, bits, x, y, es, n0)


@pytest.fixture
def instances():
    return make_instances


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
