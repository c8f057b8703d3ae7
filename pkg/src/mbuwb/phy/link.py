"""MB-OFDM baseband link: encode, interleave, map, spread, per-tone channel, decode.

The channel is applied per data tone (Y_k = H_k X_k + N_k); the zero-padded
guard is assumed to absorb the channel memory.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .. import channel_model as chm
from ..errors import ArgumentError
from . import coding
from .mcs import DATA_TONES, McsConfig, get_mcs
from .modulation import (
    bits_per_symbol,
    combine_copies,
    deinterleave,
    demap,
    interleave,
    interleaver_permutation,
    map_symbols,
    spread,
)

TFC_PATTERN = (1, 2, 3)
INTERLEAVE_SPAN = 1
SYMBOLS_PER_FRAME = 12  # distinct OFDM symbols per coded frame
FRAMES_PER_BATCH = 16
_MIN_N0 = 1e-12


@dataclass(frozen=True)
class BerPoint:
    snr_db: float
    bit_errors: int
    bits_tested: int
    censored: bool = False

    def __post_init__(self):
        if self.bits_tested <= 0:
            raise ArgumentError("a BER point needs bits_tested > 0")

    @property
    def ber(self) -> float:
        return self.bit_errors / self.bits_tested


@dataclass(frozen=True)
class FrameLayout:
    mcs: McsConfig
    coded_bits_per_symbol: int
    distinct_symbols: int
    slots: int
    info_bits: int
    coded_bits: int  # before padding
    perm: np.ndarray


@lru_cache(maxsize=None)
def frame_layout(
    mcs: McsConfig, symbols_per_frame: int = SYMBOLS_PER_FRAME, span: int = INTERLEAVE_SPAN
) -> FrameLayout:
    if symbols_per_frame % span:
        raise ArgumentError("symbols_per_frame must be a multiple of the interleaver span")
    ncbps = bits_per_symbol(mcs.modulation, mcs.fds)
    capacity = ncbps * symbols_per_frame
    n_info = int(capacity * mcs.code_rate) - coding.TAIL_BITS
    while coding.coded_length(n_info, mcs.code_rate) > capacity:
        n_info -= 1
    return FrameLayout(
        mcs,
        ncbps,
        symbols_per_frame,
        symbols_per_frame * (2 if mcs.tds else 1),
        n_info,
        coding.coded_length(n_info, mcs.code_rate),
        interleaver_permutation(ncbps, span),
    )


def band_sequence(band_plan, slots: int) -> np.ndarray:
    """Band index for every transmitted slot.

    ``band_plan`` is a single band (cross-layer mode), ``"tfc"`` for the cyclic
    1-2-3 hopping pattern, or an explicit hopping sequence.
    """
    if isinstance(band_plan, str):
        if band_plan.lower() != "tfc":
            raise ArgumentError(f"unknown band plan {band_plan!r}")
        pattern = TFC_PATTERN
    elif np.isscalar(band_plan):
        pattern = (int(band_plan),)
    else:
        pattern = tuple(int(b) for b in band_plan)
    if not pattern or any(b not in (1, 2, 3) for b in pattern):
        raise ArgumentError(f"bands must be in 1..3, got {band_plan!r}")
    return np.array([pattern[i % len(pattern)] for i in range(slots)])


def band_responses(realization: chm.ChannelRealization, shadowing: bool = False) -> np.ndarray:
    """(3, 100) data-tone responses of one realization, bands 1..3."""
    return chm.band_group_response(realization, DATA_TONES, shadowing)


def simulate_frames(
    mcs: McsConfig,
    responses: np.ndarray,
    band_plan,
    esn0_db: float,
    n_frames: int,
    rng: np.random.Generator,
    coded: bool = True,
    layout: FrameLayout | None = None,
) -> tuple[int, int]:
    """Push ``n_frames`` random frames through the link; returns (errors, bits).

    ``responses`` holds per-band data-tone gains, shape (3, 100).
    ``coded=False`` bypasses the FEC and interleaver (uncoded sanity hook).
    """
    mcs = get_mcs(mcs)
    lay = layout or frame_layout(mcs)
    capacity = lay.coded_bits_per_symbol * lay.distinct_symbols
    n_info = lay.info_bits if coded else capacity
    n0 = max(10.0 ** (-esn0_db / 10.0), _MIN_N0) if np.isfinite(esn0_db) else _MIN_N0
    noiseless = not np.isfinite(esn0_db) and esn0_db > 0
    h = responses[band_sequence(band_plan, lay.slots) - 1]  # (slots, 100)

    info = rng.integers(0, 2, size=(n_frames, n_info), dtype=np.uint8)
    if coded:
        cw = np.stack([coding.encode(b, mcs.code_rate) for b in info])
        pad = rng.integers(0, 2, size=(n_frames, capacity - cw.shape[1]), dtype=np.uint8)
        tx_bits = interleave(np.concatenate([cw, pad], axis=1), lay.perm)
    else:
        tx_bits = info
    x = spread(map_symbols(tx_bits, mcs.modulation), mcs.fds, mcs.tds)
    y = h * x
    if not noiseless:
        noise = rng.standard_normal((2,) + y.shape)
        y = y + np.sqrt(n0 / 2.0) * (noise[0] + 1j * noise[1])
    u, a = combine_copies(y, np.broadcast_to(h, y.shape), mcs.fds, mcs.tds)
    llr = demap(u, a, n0, mcs.modulation)
    if coded:
        llr = deinterleave(llr, lay.perm)[:, : lay.coded_bits]
        decided = coding.viterbi_decode(llr, n_info, mcs.code_rate)
    else:
        decided = (llr < 0).astype(np.uint8)
    return int(np.count_nonzero(decided != info)), info.size


def simulate_link(
    mcs,
    realization: chm.ChannelRealization | None,
    band_plan,
    esn0_db: float,
    min_errors: int = 100,
    max_bits: int = 10**6,
    seed: int = 0,
    shadowing: bool = False,
    coded: bool = True,
) -> BerPoint:
    """Monte-Carlo BER on one channel realization until ``min_errors`` or ``max_bits``.

    ``realization=None`` is the identity channel. Points stopped by ``max_bits``
    before reaching ``min_errors`` come back with ``censored=True``.
    """
    mcs = get_mcs(mcs)
    if realization is None:
        responses = np.ones((3, DATA_TONES), dtype=complex)
    else:
        responses = band_responses(realization, shadowing)
    rng = np.random.default_rng(seed)
    errors = bits = 0
    while errors < min_errors and bits < max_bits:
        e, b = simulate_frames(mcs, responses, band_plan, esn0_db, FRAMES_PER_BATCH, rng, coded)
        errors += e
        bits += b
    return BerPoint(float(esn0_db), errors, bits, censored=errors < min_errors)
