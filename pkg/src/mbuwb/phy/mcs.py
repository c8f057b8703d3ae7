from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from ..errors import ConfigurationError

DATA_TONES = 100
SYMBOL_DURATION_NS = Fraction(625, 2)  # 312.5 ns incl. zero-padded guard


@dataclass(frozen=True)
class McsConfig:
    data_rate: Fraction  # Mbit/s
    modulation: str  # "QPSK" | "DCM"
    code_rate: Fraction
    fds: bool
    tds: bool

    @property
    def label(self) -> str:
        return f"{float(self.data_rate):g}"

    @property
    def spreading_factor(self) -> int:
        return (2 if self.fds else 1) * (2 if self.tds else 1)

    @property
    def info_bits_per_tone(self) -> Fraction:
        """Information bits per data tone per OFDM symbol (Es/Eb ratio)."""
        return 2 * self.code_rate / self.spreading_factor

    def esn0_db(self, snr_db: float, axis: str = "esn0") -> float:
        """Es/N0 per data tone for an SNR given on ``axis`` ("esn0" or "ebn0")."""
        if axis == "esn0":
            return float(snr_db)
        if axis == "ebn0":
            return float(snr_db) + 10.0 * math.log10(self.info_bits_per_tone)
        raise ConfigurationError(f"unknown SNR axis {axis!r}")

    def rate_from_parameters(self) -> Fraction:
        """Mbit/s implied by tones, bits/tone, code rate and spreading."""
        bits = DATA_TONES * 2 * self.code_rate / self.spreading_factor
        return bits / SYMBOL_DURATION_NS * 1000


def _row(rate, mod, code, fds, tds):
    return McsConfig(Fraction(rate), mod, Fraction(code), fds, tds)


# 200 Mbit/s carries TDS as in ECMA-368; without it the row would be 400 Mbit/s
_TABLE = (
    _row("160/3", "QPSK", "1/3", True, True),
    _row(80, "QPSK", "1/2", True, True),
    _row(110, "QPSK", "11/32", False, True),
    _row(160, "QPSK", "1/2", False, True),
    _row(200, "QPSK", "5/8", False, True),
    _row(320, "DCM", "1/2", False, False),
    _row(400, "DCM", "5/8", False, False),
    _row(480, "DCM", "3/4", False, False),
)


def mcs_table() -> list[McsConfig]:
    return list(_TABLE)


def get_mcs(rate) -> McsConfig:
    """Look up a row by data rate; 53.3 selects the 160/3 Mbit/s row."""
    if isinstance(rate, McsConfig):
        return rate
    try:
        value = float(rate)
    except (TypeError, ValueError):
        raise ConfigurationError(f"bad data rate {rate!r}") from None
    for m in _TABLE:
        if abs(float(m.data_rate) - value) < 0.05:
            return m
    raise ConfigurationError(f"no MCS with data rate {rate!r} Mbit/s")
