"""
Embedded Code Fixtures
Desk-scale parity-check matrices shipped with the repository
"""
from pathlib import Path

from .alist import read_alist
from .matrix import CodeSpec, ParityCheckMatrix

DATA_DIR = Path(__file__).resolve().parent / 'data'

# name -> (file, known minimum distance)
FIXTURES = {
    'repetition3': ('repetition3.alist', 3),
    'hamming74': ('hamming74.alist', 3),
    'bch15_7': ('bch15_7.alist', 5),
}


def fixture_path(name: str) -> Path:
    if name not in FIXTURES:
        raise ValueError(f"Unknown code fixture {name!r}; choose from {sorted(FIXTURES)}")
    return DATA_DIR / FIXTURES[name][0]


def load_fixture_pcm(name: str) -> ParityCheckMatrix:
    return read_alist(fixture_path(name))


def load_fixture(name: str) -> CodeSpec:
    """CodeSpec for a shipped fixture, with its known d_min."""
    return CodeSpec.from_pcm(load_fixture_pcm(name), d_min=FIXTURES[name][1], name=name)
